//! Single-file JSON scenes: named definitions plus a list of jobs.
//!
//! ```json
//! {
//!   "dim": 1,
//!   "functions": {"m": {"catalog": "m1"}},
//!   "polynomials": {"phi": "x^2"},
//!   "windows": {"w": "[-1,2]"},
//!   "jobs": [{"command": "expand", "function": "m", "N": 3}]
//! }
//! ```
//!
//! Parsing never panics; all problems are collected with their JSON path.

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use crate::catalog;
use crate::distributions::Window;
use crate::piecewise::PiecewiseQP;
use crate::polyhedron::Polyhedron;
use crate::pushforward::QuotientMap;
use crate::scalars::rational::Q;
use crate::scalars::MultiPoly;
use crate::serialize::{
    as_i64, as_u64, pqp_from_json, polyhedron_from_json, qmap_from_json, qpoly_from_json, qvec_from_json, window_from_json,
};

#[derive(Clone, Debug)]
pub struct Scene {
    pub dim: Option<usize>,
    pub functions: BTreeMap<String, PiecewiseQP>,
    pub maps: BTreeMap<String, QuotientMap>,
    pub jobs: Vec<Job>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Remainder,
    Genfunc,
    Unicity,
    Zero,
}

#[derive(Clone, Debug)]
pub enum Job {
    Eval { function: String, ks: Vec<i64>, points: Vec<Vec<i64>> },
    Theta { function: String, ks: Vec<i64>, window: Option<Window> },
    Pair { function: String, ks: Vec<i64>, phi: MultiPoly<Q>, window: Option<Window>, series: Option<usize> },
    Expand { function: String, n: usize, pretty: bool },
    Push { function: String, map: String, chambers: Option<Vec<Polyhedron>>, verify: Option<i64> },
    Check { suite: String },
    Oracle { kind: OracleKind, function: Option<String>, n: usize, ks: Vec<i64>, center: Vec<f64>, width: f64 },
}

impl Job {
    pub fn command(&self) -> &'static str {
        match self {
            Job::Eval { .. } => "eval",
            Job::Theta { .. } => "theta",
            Job::Pair { .. } => "pair",
            Job::Expand { .. } => "expand",
            Job::Push { .. } => "push",
            Job::Check { .. } => "check",
            Job::Oracle { .. } => "oracle",
        }
    }
}

/// Collects errors instead of stopping at the first one.
struct Errors(Vec<String>);

impl Errors {
    fn take<T>(&mut self, r: crate::Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.0.push(strip_parse(e));
                None
            }
        }
    }

    fn push(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.0.push(format!("{path}: {msg}"));
    }
}

fn strip_parse(e: crate::Error) -> String {
    match e {
        crate::Error::Parse(s) => s,
        other => other.to_string(),
    }
}

fn check_keys(m: &Map<String, Value>, path: &str, allowed: &[&str], errs: &mut Errors) {
    for k in m.keys() {
        if !allowed.contains(&k.as_str()) {
            errs.push(path, format!("unknown field '{k}'"));
        }
    }
}

fn named<'a>(root: &'a Map<String, Value>, key: &str, errs: &mut Errors) -> Vec<(String, &'a Value)> {
    match root.get(key) {
        None => vec![],
        Some(Value::Object(m)) => m.iter().map(|(k, v)| (k.clone(), v)).collect(),
        Some(_) => {
            errs.push(&format!("$.{key}"), "expected an object of named definitions");
            vec![]
        }
    }
}

fn ks_of(v: &Value, path: &str) -> crate::Result<Vec<i64>> {
    let ks = match v {
        Value::Array(a) => a.iter().enumerate().map(|(i, x)| as_i64(x, &format!("{path}[{i}]"))).collect::<crate::Result<Vec<_>>>()?,
        _ => vec![as_i64(v, path)?],
    };
    if let Some(bad) = ks.iter().find(|&&k| k <= 0) {
        return Err(crate::Error::Parse(format!("{path}: level k must be positive, got {bad}")));
    }
    Ok(ks)
}

/// Parse a scene; on failure every located problem is returned.
pub fn parse_scene(text: &str) -> Result<Scene, Vec<String>> {
    let root: Value = serde_json::from_str(text).map_err(|e| vec![format!("line {}, column {}: {e}", e.line(), e.column())])?;
    let Some(root) = root.as_object() else {
        return Err(vec!["$: a scene must be a JSON object".into()]);
    };
    let mut errs = Errors(Vec::new());
    check_keys(root, "$", &["dim", "functions", "maps", "polynomials", "windows", "jobs"], &mut errs);
    let dim = match root.get("dim") {
        None => None,
        Some(v) => errs.take(as_u64(v, "$.dim")).map(|d| d as usize),
    };

    let mut functions = BTreeMap::new();
    for (name, v) in named(root, "functions", &mut errs) {
        let path = format!("$.functions.{name}");
        let f = if let Some(c) = v.get("catalog") {
            match c.as_str().and_then(catalog::by_name) {
                Some(m) if v.as_object().map(|o| o.len()) == Some(1) => Some(m),
                Some(_) => {
                    errs.push(&path, "a catalog reference takes no other fields");
                    None
                }
                None => {
                    errs.push(&path, format!("unknown catalog entry {c} (known: {})", catalog::NAMES.join(", ")));
                    None
                }
            }
        } else {
            errs.take(pqp_from_json(v, &path, dim))
        };
        if let Some(f) = f {
            functions.insert(name, f);
        }
    }

    let mut maps = BTreeMap::new();
    for (name, v) in named(root, "maps", &mut errs) {
        let path = format!("$.maps.{name}");
        let mut body = v.clone();
        let src = match body.as_object_mut().and_then(|o| o.remove("dim")) {
            Some(d) => errs.take(as_u64(&d, &format!("{path}.dim"))).map(|d| d as usize),
            None => dim.or_else(|| {
                errs.push(&path, "give 'dim' (source dimension) here or at the top level");
                None
            }),
        };
        if let Some(d) = src {
            if let Some(pi) = errs.take(qmap_from_json(&body, &path, d)) {
                maps.insert(name, pi);
            }
        }
    }

    // polynomial and window definitions are kept raw: their dimension comes from the job
    let polys: BTreeMap<String, &Value> = named(root, "polynomials", &mut errs).into_iter().collect();
    let windows: BTreeMap<String, &Value> = named(root, "windows", &mut errs).into_iter().collect();

    let mut jobs = Vec::new();
    match root.get("jobs") {
        None => {}
        Some(Value::Array(list)) => {
            for (i, j) in list.iter().enumerate() {
                let path = format!("$.jobs[{i}]");
                if let Some(job) = parse_job(j, &path, &functions, &maps, &polys, &windows, &mut errs) {
                    jobs.push(job);
                }
            }
        }
        Some(_) => errs.push("$.jobs", "expected an array"),
    }
    if errs.0.is_empty() {
        Ok(Scene { dim, functions, maps, jobs })
    } else {
        Err(errs.0)
    }
}

fn parse_job(
    j: &Value,
    path: &str,
    functions: &BTreeMap<String, PiecewiseQP>,
    maps: &BTreeMap<String, QuotientMap>,
    polys: &BTreeMap<String, &Value>,
    windows: &BTreeMap<String, &Value>,
    errs: &mut Errors,
) -> Option<Job> {
    let Some(m) = j.as_object() else {
        errs.push(path, "a job must be an object");
        return None;
    };
    let Some(cmd) = m.get("command").and_then(Value::as_str) else {
        errs.push(path, "missing string field 'command'");
        return None;
    };
    let allowed: &[&str] = match cmd {
        "eval" => &["command", "function", "k", "points"],
        "theta" => &["command", "function", "k", "window"],
        "pair" => &["command", "function", "k", "phi", "window", "series"],
        "expand" => &["command", "function", "N", "format"],
        "push" => &["command", "function", "map", "chambers", "verify"],
        "check" => &["command", "suite"],
        "oracle" => &["command", "kind", "function", "N", "k", "center", "width"],
        other => {
            errs.push(&format!("{path}.command"), format!("unknown command '{other}'"));
            return None;
        }
    };
    check_keys(m, path, allowed, errs);

    let mut function = |required: bool| -> Option<(String, usize)> {
        match m.get("function").and_then(Value::as_str) {
            Some(name) => match functions.get(name) {
                Some(f) => Some((name.to_string(), f.dim())),
                None => {
                    errs.push(&format!("{path}.function"), format!("unresolved reference '{name}'"));
                    None
                }
            },
            None => {
                if required {
                    errs.push(path, "missing field 'function'");
                }
                None
            }
        }
    };
    let fun = function(cmd != "check" && cmd != "oracle");
    let ks = |errs: &mut Errors| -> Option<Vec<i64>> {
        match m.get("k") {
            Some(v) => errs.take(ks_of(v, &format!("{path}.k"))),
            None => {
                errs.push(path, "missing field 'k'");
                None
            }
        }
    };
    let window = |d: usize, errs: &mut Errors| -> Option<Option<Window>> {
        match m.get("window") {
            None => Some(None),
            Some(Value::String(s)) if windows.contains_key(s) => {
                errs.take(window_from_json(windows[s], &format!("$.windows.{s}"), d)).map(Some)
            }
            Some(v) => errs.take(window_from_json(v, &format!("{path}.window"), d)).map(Some),
        }
    };
    let usize_field = |key: &str, default: usize, errs: &mut Errors| -> Option<usize> {
        match m.get(key) {
            None => Some(default),
            Some(v) => errs.take(as_u64(v, &format!("{path}.{key}"))).map(|x| x as usize),
        }
    };

    match cmd {
        "eval" => {
            let (f, d) = fun?;
            let ks = ks(errs)?;
            let pts = m.get("points").or_else(|| {
                errs.push(path, "missing field 'points'");
                None
            })?;
            let pts = errs.take(parse_points(pts, &format!("{path}.points"), d))?;
            Some(Job::Eval { function: f, ks, points: pts })
        }
        "theta" => {
            let (f, d) = fun?;
            let ks = ks(errs)?;
            let w = window(d, errs)?;
            Some(Job::Theta { function: f, ks, window: w })
        }
        "pair" => {
            let (f, d) = fun?;
            let ks = ks(errs)?;
            let w = window(d, errs)?;
            let phi = match m.get("phi") {
                Some(Value::String(s)) if polys.contains_key(s) => errs.take(qpoly_from_json(polys[s], &format!("$.polynomials.{s}"), d))?,
                Some(v) => errs.take(qpoly_from_json(v, &format!("{path}.phi"), d))?,
                None => {
                    errs.push(path, "missing field 'phi'");
                    return None;
                }
            };
            let series = match m.get("series") {
                None => None,
                Some(v) => Some(errs.take(as_u64(v, &format!("{path}.series")))? as usize),
            };
            Some(Job::Pair { function: f, ks, phi, window: w, series })
        }
        "expand" => {
            let (f, _) = fun?;
            let n = usize_field("N", 3, errs)?;
            let pretty = match m.get("format").map(|v| v.as_str()) {
                None | Some(Some("json")) => false,
                Some(Some("pretty")) => true,
                _ => {
                    errs.push(&format!("{path}.format"), "expected \"json\" or \"pretty\"");
                    return None;
                }
            };
            Some(Job::Expand { function: f, n, pretty })
        }
        "push" => {
            let (f, d) = fun?;
            let Some(name) = m.get("map").and_then(Value::as_str) else {
                errs.push(path, "missing string field 'map'");
                return None;
            };
            let Some(pi) = maps.get(name) else {
                errs.push(&format!("{path}.map"), format!("unresolved reference '{name}'"));
                return None;
            };
            if pi.source_dim() != d {
                errs.push(&format!("{path}.map"), format!("map has source dimension {}, function has {d}", pi.source_dim()));
                return None;
            }
            let chambers = match m.get("chambers") {
                None => None,
                Some(Value::Array(a)) => {
                    let mut out = Vec::new();
                    for (i, c) in a.iter().enumerate() {
                        out.push(errs.take(polyhedron_from_json(c, &format!("{path}.chambers[{i}]"), pi.target_dim()))?);
                    }
                    Some(out)
                }
                Some(_) => {
                    errs.push(&format!("{path}.chambers"), "expected an array of polyhedra");
                    return None;
                }
            };
            let verify = match m.get("verify") {
                None => None,
                Some(v) => Some(errs.take(as_i64(v, &format!("{path}.verify")))?),
            };
            Some(Job::Push { function: f, map: name.to_string(), chambers, verify })
        }
        "check" => {
            let suite = m.get("suite").and_then(Value::as_str).unwrap_or("all");
            if suite != "all" && !crate::checks::SUITES.contains(&suite) {
                errs.push(&format!("{path}.suite"), format!("unknown suite '{suite}' (known: all, {})", crate::checks::SUITES.join(", ")));
                return None;
            }
            Some(Job::Check { suite: suite.to_string() })
        }
        _ => {
            let kind = match m.get("kind").and_then(Value::as_str) {
                Some("remainder") => OracleKind::Remainder,
                Some("genfunc") => OracleKind::Genfunc,
                Some("unicity") => OracleKind::Unicity,
                Some("zero") => OracleKind::Zero,
                _ => {
                    errs.push(&format!("{path}.kind"), "expected one of remainder, genfunc, unicity, zero");
                    return None;
                }
            };
            if kind != OracleKind::Genfunc && fun.is_none() {
                errs.push(path, "this oracle needs a 'function'");
                return None;
            }
            let n = usize_field("N", 3, errs)?;
            let ks = match m.get("k") {
                None => vec![10, 20, 40, 80],
                Some(v) => errs.take(ks_of(v, &format!("{path}.k")))?,
            };
            let d = fun.as_ref().map(|f| f.1).unwrap_or(1);
            let center = match m.get("center") {
                None => vec![0.3; d],
                Some(v) => errs.take(qvec_from_json(v, &format!("{path}.center"), Some(d)))?.iter().map(crate::scalars::rational::to_f64).collect(),
            };
            let width = match m.get("width") {
                None => 0.5,
                Some(v) => match v.as_f64() {
                    Some(w) if w > 0.0 => w,
                    _ => {
                        errs.push(&format!("{path}.width"), "expected a positive number");
                        return None;
                    }
                },
            };
            Some(Job::Oracle { kind, function: fun.map(|f| f.0), n, ks, center, width })
        }
    }
}

fn parse_points(v: &Value, path: &str, d: usize) -> crate::Result<Vec<Vec<i64>>> {
    let a = v.as_array().ok_or_else(|| crate::Error::Parse(format!("{path}: expected an array of lattice points")))?;
    a.iter()
        .enumerate()
        .map(|(i, p)| {
            let pp = format!("{path}[{i}]");
            let xs = p.as_array().ok_or_else(|| crate::Error::Parse(format!("{pp}: expected an array")))?;
            if xs.len() != d {
                return Err(crate::Error::Parse(format!("{pp}: expected {d} coordinates")));
            }
            xs.iter().enumerate().map(|(j, x)| as_i64(x, &format!("{pp}[{j}]"))).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scene() {
        let s = parse_scene(r#"{"functions": {"m": {"catalog": "m1"}}, "jobs": [{"command": "expand", "function": "m", "N": 3}]}"#).unwrap();
        assert_eq!(s.jobs.len(), 1);
        assert!(matches!(&s.jobs[0], Job::Expand { n: 3, .. }));
    }

    #[test]
    fn figure_one_scene() {
        let text = r#"{
            "dim": 2,
            "functions": {"simplex": {"pieces": [{"cone": {"P": {"vertices": [[0,0],[1,0],[0,1]]}}}]}},
            "windows": {"w": "[-1,2]x[-1,2]"},
            "jobs": [
                {"command": "theta", "function": "simplex", "k": 3, "window": "w"},
                {"command": "theta", "function": "simplex", "k": 6, "window": "w"},
                {"command": "theta", "function": "simplex", "k": 12, "window": "w"}
            ]
        }"#;
        let s = parse_scene(text).unwrap();
        assert_eq!(s.jobs.len(), 3);
    }

    #[test]
    fn malformed_rational_is_located() {
        let text = r#"{"dim": 1, "functions": {"m": {"pieces": [{"cone": {"P": {"interval": [0, 1]}, "sigma": "1/0"}}]}}}"#;
        let e = parse_scene(text).unwrap_err();
        assert!(e[0].contains("$.functions.m.pieces[0].cone.sigma") && e[0].contains("malformed rational"), "{e:?}");
        let text = r#"{"dim": 1, "functions": {"m": {"pieces": [{"cone": {"P": {"interval": [0, 1]}, "sigma": ["1/0"]}}]}}}"#;
        let e = parse_scene(text).unwrap_err();
        assert!(e[0].contains("sigma[0]") && e[0].contains("malformed rational"), "{e:?}");
    }

    #[test]
    fn collects_several_errors() {
        let text = r#"{"dim": 1, "colour": 3, "functions": {"m": {"catalog": "nope"}},
            "jobs": [{"command": "theta", "function": "q", "k": 0}, {"command": "fly"}]}"#;
        let e = parse_scene(text).unwrap_err();
        assert!(e.iter().any(|x| x.contains("unknown field 'colour'")));
        assert!(e.iter().any(|x| x.contains("unknown catalog entry")));
        assert!(e.iter().any(|x| x.contains("unresolved reference 'q'")));
        assert!(e.iter().any(|x| x.contains("unknown command 'fly'")));
        let e = parse_scene("{\"dim\": 1,\n \"jobs\": [}").unwrap_err();
        assert!(e[0].starts_with("line 2"), "{e:?}");
    }
}
