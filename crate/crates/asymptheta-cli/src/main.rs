use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use asymptheta::catalog;
use asymptheta::checks;
use asymptheta::distributions::{theta_pair_poly, theta_sample, Region, ThetaSample, Window};
use asymptheta::expansion::expand;
use asymptheta::oracle::{remainder_table, unicity_probe, DiffRule, Gaussian, Unicity};
use asymptheta::piecewise::{PiecewiseQP, ZeroVerdict};
use asymptheta::polyhedron::Polyhedron;
use asymptheta::pushforward::{push_reconstruct, push_theta, QuotientMap, ReconstructOptions};
use asymptheta::scalars::rational::{fmt_q, q, Q};
use asymptheta::scene::{parse_scene, Job, OracleKind, Scene};
use asymptheta::serialize::{
    cyc_to_json, parse_poly_expr, polyhedron_from_json, pqp_to_json, qmap_from_json, qvec_to_json, series_to_json, test_poly_names,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Exact asymptotic expansions of lattice-point distributions.
#[derive(Parser)]
#[command(name = "asymptheta", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Pretty,
}

#[derive(Args, Clone)]
struct Source {
    /// Scene file providing the function (and maps)
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Built-in function: m1, m2, m3, simplex, figure2, final, alternating_line, half_line
    #[arg(long)]
    catalog: Option<String>,
    /// Function name inside the scene (optional when the scene defines one)
    #[arg(long)]
    function: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every job of a scene file
    Run {
        scene: PathBuf,
        /// Run jobs concurrently (output order is unchanged)
        #[arg(long)]
        parallel: bool,
        /// Write each job's output to DIR/job<i>_<command>.<ext> instead of stdout
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Evaluate m(k,λ) at lattice points
    Eval {
        #[command(flatten)]
        src: Source,
        #[arg(long, required = true, value_delimiter = ',')]
        k: Vec<i64>,
        /// Lattice point, comma separated; repeatable
        #[arg(long = "point", required = true, allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Atoms of Θ(m;k) in a window, as CSV
    Theta {
        #[command(flatten)]
        src: Source,
        #[arg(long, required = true, value_delimiter = ',')]
        k: Vec<i64>,
        /// Product of intervals, e.g. "[-1,2]x[-1,2]"; defaults to the support box
        #[arg(long)]
        window: Option<String>,
    },
    /// Exact pairing ⟨Θ(m;k),φ⟩ with a polynomial
    Pair {
        #[command(flatten)]
        src: Source,
        #[arg(long, required = true, value_delimiter = ',')]
        k: Vec<i64>,
        /// Polynomial in x (1-D) or x,y,z,w
        #[arg(long)]
        phi: String,
        #[arg(long)]
        window: Option<String>,
        /// Also pair the expansion truncated at this order
        #[arg(long)]
        series: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Asymptotic expansion A(m;k) through N orders
    Expand {
        #[command(flatten)]
        src: Source,
        #[arg(long = "N", default_value_t = 3)]
        n: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Pushforward along a lattice map, reconstructed piecewise
    Push {
        #[command(flatten)]
        src: Source,
        /// Map name in the scene, "simplex"/"final" for the built-in maps, or inline JSON
        #[arg(long)]
        map: String,
        /// Inline JSON array of chambers in the target
        #[arg(long)]
        chambers: Option<String>,
        /// Verify the commuting square atom by atom for k = 1..K
        #[arg(long)]
        verify: Option<i64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run an invariant suite (or all)
    Check {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,
    },
    /// Independent verification paths
    Oracle {
        #[arg(value_enum)]
        kind: OracleArg,
        #[command(flatten)]
        src: Source,
        #[arg(long = "N", default_value_t = 3)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "10,20,40,80")]
        k: Vec<i64>,
        /// Gaussian centre, comma separated (default 0.3 in every coordinate)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        center: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.5)]
        width: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Remainder,
    Genfunc,
    Unicity,
    Zero,
}

enum Failure {
    /// Bad input or a domain error: exit 1.
    Domain(String),
    /// A verification did not pass: exit 2.
    Verify(String),
}

impl From<asymptheta::Error> for Failure {
    fn from(e: asymptheta::Error) -> Self {
        match e {
            asymptheta::Error::Verification(s) => Failure::Verify(s),
            e @ asymptheta::Error::ReconstructionFailed(_) => Failure::Verify(e.to_string()),
            other => Failure::Domain(other.to_string()),
        }
    }
}

struct Output {
    text: String,
    ext: &'static str,
    /// false when the job ran but its verification failed
    ok: bool,
}

impl Output {
    fn json(v: Value, ok: bool) -> Self {
        Output { text: serde_json::to_string_pretty(&v).expect("json") + "\n", ext: "json", ok }
    }

    fn text(s: String, ok: bool) -> Self {
        Output { text: s, ext: "txt", ok }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_scene(path: &PathBuf) -> Result<Scene, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
    parse_scene(&text).map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(|e| format!("{}: {e}", path.display())).collect();
        Failure::Domain(format!("invalid scene\n{}", lines.join("\n")))
    })
}

/// A one-function scene built from --scene/--catalog/--function.
fn source_scene(src: &Source, required: bool) -> Result<(Scene, Option<String>), Failure> {
    match (&src.scene, &src.catalog) {
        (Some(_), Some(_)) => Err(Failure::Domain("give either --scene or --catalog, not both".into())),
        (None, Some(name)) => {
            let m = catalog::by_name(name)
                .ok_or_else(|| Failure::Domain(format!("unknown catalog entry '{name}' (known: {})", catalog::NAMES.join(", "))))?;
            let mut functions = BTreeMap::new();
            functions.insert(name.clone(), m);
            Ok((Scene { dim: None, functions, maps: BTreeMap::new(), jobs: vec![] }, Some(name.clone())))
        }
        (Some(path), None) => {
            let scene = load_scene(path)?;
            let name = match &src.function {
                Some(f) if scene.functions.contains_key(f) => f.clone(),
                Some(f) => return Err(Failure::Domain(format!("scene has no function '{f}'"))),
                None if scene.functions.len() == 1 => scene.functions.keys().next().unwrap().clone(),
                None if !required => return Ok((scene, None)),
                None => return Err(Failure::Domain("scene defines several functions; pick one with --function".into())),
            };
            Ok((scene, Some(name)))
        }
        (None, None) if !required => Ok((Scene { dim: None, functions: BTreeMap::new(), maps: BTreeMap::new(), jobs: vec![] }, None)),
        (None, None) => Err(Failure::Domain("give --scene or --catalog".into())),
    }
}

fn parse_window(s: &str, d: usize) -> Result<Window, Failure> {
    let w = Window::parse(s)?;
    if w.dim() != d {
        return Err(Failure::Domain(format!("window '{s}' has dimension {}, function has {d}", w.dim())));
    }
    Ok(w)
}

fn dispatch(cmd: Command) -> Result<ExitCode, Failure> {
    let (scene, job, format) = match cmd {
        Command::Run { scene, parallel, out_dir } => {
            let scene = load_scene(&scene)?;
            return run_scene(&scene, parallel, out_dir);
        }
        Command::Eval { src, k, points } => {
            let (scene, f) = source_scene(&src, true)?;
            let f = f.unwrap();
            let d = scene.functions[&f].dim();
            let mut pts = Vec::new();
            for p in &points {
                let xs: Vec<i64> = p
                    .split(',')
                    .map(|x| x.trim().parse::<i64>().map_err(|_| Failure::Domain(format!("malformed lattice point '{p}'"))))
                    .collect::<Result<_, _>>()?;
                if xs.len() != d {
                    return Err(Failure::Domain(format!("point '{p}' needs {d} coordinates")));
                }
                pts.push(xs);
            }
            (scene, Job::Eval { function: f, ks: k, points: pts }, Format::Json)
        }
        Command::Theta { src, k, window } => {
            let (scene, f) = source_scene(&src, true)?;
            let f = f.unwrap();
            let d = scene.functions[&f].dim();
            let window = window.map(|w| parse_window(&w, d)).transpose()?;
            (scene, Job::Theta { function: f, ks: k, window }, Format::Json)
        }
        Command::Pair { src, k, phi, window, series, format } => {
            let (scene, f) = source_scene(&src, true)?;
            let f = f.unwrap();
            let d = scene.functions[&f].dim();
            let window = window.map(|w| parse_window(&w, d)).transpose()?;
            let phi = parse_poly_expr(&phi, &test_poly_names(d))?;
            (scene, Job::Pair { function: f, ks: k, phi, window, series }, format)
        }
        Command::Expand { src, n, format } => {
            let (scene, f) = source_scene(&src, true)?;
            (scene, Job::Expand { function: f.unwrap(), n, pretty: format == Format::Pretty }, format)
        }
        Command::Push { src, map, chambers, verify, format } => {
            let (mut scene, f) = source_scene(&src, true)?;
            let f = f.unwrap();
            let d = scene.functions[&f].dim();
            let pi = match scene.maps.get(&map) {
                Some(pi) => pi.clone(),
                None => match map.as_str() {
                    "simplex" => catalog::simplex_map(),
                    "final" => catalog::final_map(),
                    text => {
                        let v: Value = serde_json::from_str(text)
                            .map_err(|_| Failure::Domain(format!("--map '{text}' is neither a known map nor JSON")))?;
                        qmap_from_json(&v, "--map", d)?
                    }
                },
            };
            if pi.source_dim() != d {
                return Err(Failure::Domain(format!("map has source dimension {}, function has {d}", pi.source_dim())));
            }
            let chambers = match chambers {
                None => None,
                Some(text) => {
                    let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Domain(format!("--chambers: {e}")))?;
                    let a = v.as_array().ok_or_else(|| Failure::Domain("--chambers: expected a JSON array".into()))?;
                    let cs: Vec<Polyhedron> = a
                        .iter()
                        .enumerate()
                        .map(|(i, c)| polyhedron_from_json(c, &format!("--chambers[{i}]"), pi.target_dim()))
                        .collect::<Result<_, _>>()?;
                    Some(cs)
                }
            };
            scene.maps.insert("map".into(), pi);
            (scene, Job::Push { function: f, map: "map".into(), chambers, verify }, format)
        }
        Command::Check { suite, format } => {
            if suite != "all" && !checks::SUITES.contains(&suite.as_str()) {
                return Err(Failure::Domain(format!("unknown suite '{suite}' (known: all, {})", checks::SUITES.join(", "))));
            }
            let (scene, _) = source_scene(&Source { scene: None, catalog: None, function: None }, false)?;
            (scene, Job::Check { suite }, format)
        }
        Command::Oracle { kind, src, n, k, center, width, format } => {
            let (scene, f) = source_scene(&src, !matches!(kind, OracleArg::Genfunc))?;
            let d = f.as_ref().map(|f| scene.functions[f].dim()).unwrap_or(1);
            let center = center.unwrap_or_else(|| vec![0.3; d]);
            if center.len() != d {
                return Err(Failure::Domain(format!("--center needs {d} coordinates")));
            }
            let kind = match kind {
                OracleArg::Remainder => OracleKind::Remainder,
                OracleArg::Genfunc => OracleKind::Genfunc,
                OracleArg::Unicity => OracleKind::Unicity,
                OracleArg::Zero => OracleKind::Zero,
            };
            (scene, Job::Oracle { kind, function: f, n, ks: k, center, width }, format)
        }
    };
    let out = run_job(&scene, &job, format)?;
    print!("{}", out.text);
    Ok(if out.ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn run_scene(scene: &Scene, parallel: bool, out_dir: Option<PathBuf>) -> Result<ExitCode, Failure> {
    let run = |job: &Job| {
        let fmt = match job {
            Job::Expand { pretty: true, .. } => Format::Pretty,
            _ => Format::Json,
        };
        run_job(scene, job, fmt)
    };
    let results: Vec<Result<Output, Failure>> = if parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = scene.jobs.iter().map(|j| s.spawn(move || run(j))).collect();
            handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(Failure::Domain("job panicked".into())))).collect()
        })
    } else {
        scene.jobs.iter().map(run).collect()
    };
    if let Some(dir) = &out_dir {
        fs::create_dir_all(dir).map_err(|e| Failure::Domain(format!("{}: {e}", dir.display())))?;
    }
    let mut code = 0u8;
    for (i, (job, r)) in scene.jobs.iter().zip(results).enumerate() {
        match r {
            Ok(out) => {
                if !out.ok {
                    code = code.max(2);
                }
                match &out_dir {
                    Some(dir) => {
                        let path = dir.join(format!("job{i}_{}.{}", job.command(), out.ext));
                        fs::write(&path, &out.text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
                        eprintln!("job {i} ({}): wrote {}", job.command(), path.display());
                    }
                    None => {
                        println!("# job {i}: {}", job.command());
                        print!("{}", out.text);
                    }
                }
            }
            Err(Failure::Domain(msg)) => {
                eprintln!("job {i} ({}): error: {msg}", job.command());
                code = code.max(1);
            }
            Err(Failure::Verify(msg)) => {
                eprintln!("job {i} ({}): verification failed: {msg}", job.command());
                code = 2;
            }
        }
    }
    Ok(ExitCode::from(code))
}

fn function<'a>(scene: &'a Scene, name: &str) -> Result<&'a PiecewiseQP, Failure> {
    scene.functions.get(name).ok_or_else(|| Failure::Domain(format!("unknown function '{name}'")))
}

fn default_window(m: &PiecewiseQP) -> Window {
    let (lo, hi) = m.support_window();
    Window::closed(lo, hi)
}

fn theta_csv(samples: &[ThetaSample]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = match samples.first() {
        Some(s) => s.header(),
        None => return Ok(String::new()),
    };
    let csv_err = |e: csv::Error| Failure::Domain(format!("csv: {e}"));
    w.write_record(std::iter::once("k".to_string()).chain(header)).map_err(csv_err)?;
    for s in samples {
        for row in s.rows() {
            w.write_record(std::iter::once(s.k.to_string()).chain(row)).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Failure::Domain(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

fn run_job(scene: &Scene, job: &Job, format: Format) -> Result<Output, Failure> {
    match job {
        Job::Eval { function: f, ks, points } => {
            let m = function(scene, f)?;
            let mut rows = Vec::new();
            for &k in ks {
                for p in points {
                    let lambda: Vec<Q> = p.iter().map(|&x| q(x)).collect();
                    let v = m.eval(k, &lambda)?;
                    rows.push(json!({"k": k, "point": p, "value": cyc_to_json(&v)}));
                }
            }
            Ok(Output::json(Value::Array(rows), true))
        }
        Job::Theta { function: f, ks, window } => {
            let m = function(scene, f)?;
            let w = window.clone().unwrap_or_else(|| default_window(m));
            let samples = ks.iter().map(|&k| theta_sample(m, k, &w)).collect::<Result<Vec<_>, _>>()?;
            Ok(Output { text: theta_csv(&samples)?, ext: "csv", ok: true })
        }
        Job::Pair { function: f, ks, phi, window, series } => {
            let m = function(scene, f)?;
            let region = match window {
                Some(w) => Region::Window(w.clone()),
                None => Region::Global,
            };
            let exp = series.map(|n| expand(m, n)).transpose()?;
            let mut rows = Vec::new();
            let mut lines = String::new();
            for &k in ks {
                let t = theta_pair_poly(m, k, phi, &region)?;
                let mut row = json!({"k": k, "theta": cyc_to_json(&t)});
                lines.push_str(&format!("k={k}\ttheta={t}"));
                if let Some(e) = &exp {
                    let a = e.series.pair(k, phi)?;
                    row["series"] = cyc_to_json(&a);
                    lines.push_str(&format!("\tseries={a}"));
                }
                lines.push('\n');
                rows.push(row);
            }
            Ok(match format {
                Format::Json => Output::json(Value::Array(rows), true),
                Format::Pretty => Output::text(lines, true),
            })
        }
        Job::Expand { function: f, n, pretty } => {
            let e = expand(function(scene, f)?, *n)?;
            if *pretty || format == Format::Pretty {
                return Ok(Output::text(e.pretty() + "\n", true));
            }
            let mut v = series_to_json(&e.series);
            v["warnings"] = json!(e.warnings);
            Ok(Output::json(v, true))
        }
        Job::Push { function: f, map, chambers, verify } => {
            let m = function(scene, f)?;
            let pi: &QuotientMap = scene.maps.get(map).ok_or_else(|| Failure::Domain(format!("unknown map '{map}'")))?;
            let r = push_reconstruct(m, pi, chambers.as_deref(), &ReconstructOptions::default())?;
            let mut report = json!({"pushforward": pqp_to_json(&r)});
            let mut ok = true;
            let mut pretty = format!("{r}\n");
            if let Some(kmax) = verify {
                let (lo, hi) = r.support_window();
                let grow = |x: &Q, s: i64| x + q(s);
                let w = Window::closed(lo.iter().map(|x| grow(x, -1)).collect(), hi.iter().map(|x| grow(x, 1)).collect());
                let mut atoms = 0;
                let mut mismatch = None;
                for k in 1..=*kmax {
                    let a = push_theta(m, pi, k, &w)?;
                    let b = theta_sample(&r, k, &w)?;
                    if a != b {
                        mismatch = Some(k);
                        break;
                    }
                    atoms += a.atoms.len();
                }
                ok = mismatch.is_none();
                report["verification"] = json!({
                    "window": {"lo": qvec_to_json(&w.lo), "hi": qvec_to_json(&w.hi)},
                    "kmax": kmax,
                    "atoms_compared": atoms,
                    "mismatch_at_k": mismatch,
                });
                pretty.push_str(&match mismatch {
                    None => format!("verified: {atoms} atoms equal for k=1..{kmax} on [{}]\n", w_str(&w)),
                    Some(k) => format!("MISMATCH at k={k} on [{}]\n", w_str(&w)),
                });
            }
            Ok(match format {
                Format::Json => Output::json(report, ok),
                Format::Pretty => Output::text(pretty, ok),
            })
        }
        Job::Check { suite } => {
            let names: Vec<&str> = if suite == "all" { checks::SUITES.to_vec() } else { vec![suite.as_str()] };
            let reports: Vec<checks::CheckReport> = names
                .iter()
                .map(|n| checks::run_suite(n).ok_or_else(|| Failure::Domain(format!("unknown suite '{n}'"))))
                .collect::<Result<_, _>>()?;
            let ok = reports.iter().all(|r| r.passed);
            Ok(match format {
                Format::Json => Output::json(Value::Array(reports.iter().map(|r| r.to_json()).collect()), ok),
                Format::Pretty => Output::text(reports.iter().map(|r| r.line() + "\n").collect(), ok),
            })
        }
        Job::Oracle { kind, function: f, n, ks, center, width } => match kind {
            OracleKind::Remainder => {
                let m = function(scene, f.as_deref().unwrap_or_default())?;
                let g = Gaussian { center: center.clone(), width: *width };
                let r = remainder_table(m, &g, *n, ks, DiffRule::default())?;
                Ok(match format {
                    Format::Json => Output::json(r.to_json(), r.bounded),
                    Format::Pretty => Output::text(r.table(), r.bounded),
                })
            }
            OracleKind::Genfunc => {
                let r = checks::genfunc();
                Ok(match format {
                    Format::Json => Output::json(r.to_json(), r.passed),
                    Format::Pretty => Output::text(r.line() + "\n", r.passed),
                })
            }
            OracleKind::Unicity => {
                let m = function(scene, f.as_deref().unwrap_or_default())?;
                let v = match unicity_probe(m, None, *n)? {
                    Unicity::Witness { g, leading_exponent } => json!({"witness": qvec_to_json(&g), "leading_exponent": leading_exponent}),
                    Unicity::Exhausted { tried } => json!({"exhausted": true, "tried": tried}),
                };
                Ok(match format {
                    Format::Json => Output::json(v, true),
                    Format::Pretty => Output::text(v.to_string() + "\n", true),
                })
            }
            OracleKind::Zero => {
                let m = function(scene, f.as_deref().unwrap_or_default())?;
                let kmax = ks.iter().copied().max().unwrap_or(8);
                let v = match m.zero_test(kmax) {
                    ZeroVerdict::Certified => json!({"zero": true, "certificate": "structural"}),
                    ZeroVerdict::WindowZero { kmax, lo, hi } => {
                        json!({"zero": true, "certificate": "window", "kmax": kmax, "lo": qvec_to_json(&lo), "hi": qvec_to_json(&hi)})
                    }
                    ZeroVerdict::NonZero { k, lambda, value } => json!({
                        "zero": false,
                        "k": k,
                        "point": lambda.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                        "value": cyc_to_json(&value),
                    }),
                };
                Ok(match format {
                    Format::Json => Output::json(v, true),
                    Format::Pretty => Output::text(v.to_string() + "\n", true),
                })
            }
        },
    }
}

fn w_str(w: &Window) -> String {
    w.lo.iter().zip(&w.hi).map(|(a, b)| format!("[{},{}]", fmt_q(a), fmt_q(b))).collect::<Vec<_>>().join("x")
}

