//! Verification suites shared by the CLI (`check --suite`) and the acceptance
//! harness.  Every check compares engine output with brute force or with a
//! closed form and reports what it looked at.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use crate::catalog;
use crate::distributions::{pconst_q, theta_sample, theta_pair_poly, AsymptoticSeries, RDistribution, Region, Window};
use crate::error::Result;
use crate::expansion::expand;
use crate::oracle::{genfunc_crosscheck, oracle_theta_pair, remainder_table, unicity_probe, DiffRule, Gaussian, Unicity};
use crate::piecewise::PiecewiseQP;
use crate::polyhedron::Polyhedron;
use crate::pushforward::{push_reconstruct, push_theta, QuotientMap, ReconstructOptions};
use crate::quasipoly::{KPoly, QuasiPolynomial};
use crate::scalars::rational::{den_u, lcm_u, q, qf, qvec, Q, QVec};
use crate::scalars::{Cyclotomic, MultiPoly, Periodic};
use crate::serialize::convex_hull;

pub const SUITES: [&str; 10] =
    ["exactness", "distexp", "sublead", "kernel", "unicity", "pushforward", "commuting", "local", "remainder", "genfunc"];

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CheckReport {
    pub fn to_json(&self) -> Value {
        json!({"name": self.name, "passed": self.passed, "detail": self.detail, "seconds": self.elapsed.as_secs_f64()})
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<12} {:>8.3}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

fn timed(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckReport {
    let t0 = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckReport { name: name.to_string(), passed, detail, elapsed: t0.elapsed() }
}

pub fn run_suite(name: &str) -> Option<CheckReport> {
    Some(match name {
        "exactness" => exactness(50),
        "distexp" => distexp(),
        "sublead" => sublead(),
        "kernel" => kernel(50, 1),
        "unicity" => unicity(50, 2),
        "pushforward" => pushforward(),
        "commuting" => commuting(12),
        "local" => local(30, 3),
        "remainder" => remainder(),
        "genfunc" => genfunc(),
        _ => return None,
    })
}

fn xpow(d: usize, e: &[u32]) -> MultiPoly<Q> {
    MultiPoly::monomial(d, e.to_vec(), q(1))
}

fn cyc_q(c: &Cyclotomic) -> String {
    c.to_string()
}

/// Series pairing equals the exact brute-force pairing for m1, φ = x^j, j ≤ 3.
pub fn exactness(kmax: i64) -> CheckReport {
    timed("exactness", || {
        let m = catalog::m1();
        let a = expand(&m, 5)?.series;
        let mut n = 0;
        for j in 0..=3u32 {
            let phi = xpow(1, &[j]);
            for k in 1..=kmax {
                let lhs = a.pair(k, &phi)?;
                let rhs = theta_pair_poly(&m, k, &phi, &Region::Global)?;
                if lhs != rhs {
                    return Ok((false, format!("k={k}, phi=x^{j}: series {} vs theta {}", cyc_q(&lhs), cyc_q(&rhs))));
                }
                n += 1;
            }
        }
        Ok((true, format!("{n} exact pairings (k=1..{kmax}, phi=1,x,x^2,x^3)")))
    })
}

/// Expected k-power coefficients of m1's expansion through k^{-2}:
/// kμ, (δ0+δ1)/2, and B_n/n!·(−1)^{n−1}(δ^{(n−1)}_1 − δ^{(n−1)}_0) with B2 = 1/6, B3 = 0.
fn m1_reference() -> AsymptoticSeries {
    let one = || pconst_q(1, q(1));
    let unit = Polyhedron::interval(q(0), q(1));
    let p0 = Polyhedron::point(&qvec(&[0]));
    let p1 = Polyhedron::point(&qvec(&[1]));
    let c1 = RDistribution::measure(unit, one());
    let c0 = RDistribution::measure(p0.clone(), pconst_q(1, qf(1, 2))).add(&RDistribution::measure(p1.clone(), pconst_q(1, qf(1, 2))));
    let mut coeffs = vec![c1, c0];
    let bern = [qf(1, 6), q(0)];
    for (i, b) in bern.iter().enumerate() {
        let n = i as u32 + 2;
        let fact = crate::scalars::rational::qint(&crate::scalars::rational::factorial(n));
        let sign = if (n - 1).is_multiple_of(2) { q(1) } else { q(-1) };
        let c = b / fact * sign;
        let dirs = vec![qvec(&[1]); n as usize - 1];
        let mut r = RDistribution::zero(1);
        r.push(crate::distributions::DTerm { face: p1.clone(), dirs: dirs.clone(), coeff: pconst_q(1, c.clone()) });
        r.push(crate::distributions::DTerm { face: p0.clone(), dirs, coeff: pconst_q(1, -c) });
        coeffs.push(r);
    }
    AsymptoticSeries::from_coeffs(1, 1, coeffs)
}

pub fn distexp() -> CheckReport {
    timed("distexp", || {
        let e = expand(&catalog::m1(), 3)?;
        let expected = m1_reference();
        if e.series.leading_exponent() != 1 || e.series.order() != 3 {
            return Ok((false, format!("unexpected grading s={} N={}", e.series.leading_exponent(), e.series.order())));
        }
        for n in 0..=3 {
            let diff = e.series.coeff(n).sub(expected.coeff(n));
            if !diff.is_zero_structural() {
                return Ok((false, format!("coefficient of k^{} differs: {}", 1 - n as i64, e.series.coeff(n))));
            }
        }
        let text = e.pretty();
        let want = ["k * [1 * mu_[0,1]]", "[1/2 * delta_0 + 1/2 * delta_1]", "k^-1 * [1/12 * dx * delta_0 + -1/12 * dx * delta_1]"];
        for w in want {
            if !text.contains(w) {
                return Ok((false, format!("pretty output lacks {w:?}:\n{text}")));
            }
        }
        Ok((true, text.replace('\n', " ")))
    })
}

fn leading_two(m: &PiecewiseQP) -> Result<(i64, RDistribution, RDistribution)> {
    let e = expand(m, 1)?;
    Ok((e.series.leading_exponent(), e.series.coeff(0).clone(), e.series.coeff(1).clone()))
}

pub fn sublead() -> CheckReport {
    timed("sublead", || {
        // m3: k^2 x μ[0,1] and k(μ[0,1] + δ1/2)
        let (s, c0, c1) = leading_two(&catalog::m3())?;
        let unit = Polyhedron::interval(q(0), q(1));
        let x = MultiPoly::<Q>::var(1, 0).map_coeffs(|c| Periodic::from_q(c.clone()));
        let e0 = RDistribution::measure(unit.clone(), x);
        let e1 = RDistribution::measure(unit, pconst_q(1, q(1))).add(&RDistribution::measure(Polyhedron::point(&qvec(&[1])), pconst_q(1, qf(1, 2))));
        if s != 2 || !c0.sub(&e0).is_zero_structural() || !c1.sub(&e1).is_zero_structural() {
            return Ok((false, format!("m3: s={s}, leading {c0}, sub-leading {c1}")));
        }
        // simplex: k^2 μ_P and (k/2)(μ∂0 + μ∂1 + μ∂2)
        let m = catalog::simplex();
        let (s2, d0, d1) = leading_two(&m)?;
        let p = m.pieces()[0].p.clone();
        let f0 = RDistribution::measure(p, pconst_q(2, q(1)));
        let seg = |a: [i64; 2], b: [i64; 2]| convex_hull(&[qvec(&a), qvec(&b)], 2);
        let half = pconst_q(2, qf(1, 2));
        let f1 = RDistribution::measure(seg([1, 0], [0, 1])?, half.clone())
            .add(&RDistribution::measure(seg([0, 0], [1, 0])?, half.clone()))
            .add(&RDistribution::measure(seg([0, 0], [0, 1])?, half));
        if s2 != 2 || !d0.sub(&f0).is_zero_structural() || !d1.sub(&f1).is_zero_structural() {
            return Ok((false, format!("simplex: s={s2}, leading {d0}, sub-leading {d1}")));
        }
        Ok((true, format!("m3: k^2 [{c0}], k [{c1}]; simplex: k^2 [{d0}], k [{d1}]")))
    })
}

// ---- random generators ----

fn rand_q(rng: &mut StdRng, maxden: i64, lo: i64, hi: i64) -> Q {
    let den = rng.gen_range(1..=maxden);
    qf(rng.gen_range(lo * den..=hi * den), den)
}

fn rand_qvec(rng: &mut StdRng, d: usize, maxden: i64, lo: i64, hi: i64) -> QVec {
    (0..d).map(|_| rand_q(rng, maxden, lo, hi)).collect()
}

/// Random polynomial in (k, λ) of total degree ≤ deg with small integer coefficients.
fn rand_kpoly(rng: &mut StdRng, d: usize, deg: u32) -> KPoly {
    let mut p = MultiPoly::zero(d + 1);
    let nterms = rng.gen_range(1..=3);
    for _ in 0..nterms {
        let mut e = vec![0u32; d + 1];
        let mut left = rng.gen_range(0..=deg);
        while left > 0 {
            e[rng.gen_range(0..=d)] += 1;
            left -= 1;
        }
        let c = rng.gen_range(-3..=3);
        p.add_term(e, Cyclotomic::from_i64(c));
    }
    if p.is_zero() {
        p = MultiPoly::one(d + 1);
    }
    p
}

fn rand_qp(rng: &mut StdRng, d: usize, maxden: i64) -> QuasiPolynomial {
    let mut qp = QuasiPolynomial::zero(d);
    for _ in 0..rng.gen_range(1..=2) {
        let u = if rng.gen_bool(0.3) { rand_q(rng, maxden, 0, 0) + qf(rng.gen_range(0..maxden), maxden) } else { q(0) };
        let g: QVec = (0..d).map(|_| qf(rng.gen_range(0..maxden), maxden)).collect();
        qp.add_term(u, g, rand_kpoly(rng, d, 1));
    }
    if qp.is_zero() {
        QuasiPolynomial::one(d)
    } else {
        qp
    }
}

fn rand_polytope(rng: &mut StdRng, d: usize, maxden: i64) -> Polyhedron {
    loop {
        let p = if d == 1 {
            let a = rand_q(rng, maxden, -1, 1);
            if rng.gen_bool(0.15) {
                Polyhedron::point(&[a])
            } else {
                let w = rand_q(rng, maxden, 0, 2);
                Polyhedron::interval(a.clone(), a + w)
            }
        } else {
            let n = rng.gen_range(2..=4);
            let pts: Vec<QVec> = (0..n).map(|_| rand_qvec(rng, d, maxden, -1, 1)).collect();
            match convex_hull(&pts, d) {
                Ok(p) => p,
                Err(_) => continue,
            }
        };
        if !p.is_empty() {
            return p;
        }
    }
}

/// Finite m: 1–2 pieces on polytopes with rational vertices, shifts and characters.
pub fn random_finite(rng: &mut StdRng, d: usize, maxden: i64) -> PiecewiseQP {
    let mut m = PiecewiseQP::zero(d);
    for _ in 0..rng.gen_range(1..=2) {
        let p = rand_polytope(rng, d, maxden);
        let sigma = rand_qvec(rng, d, maxden, -1, 1);
        m.push(rand_qp(rng, d, maxden), p, sigma);
    }
    m
}

/// g^λ p(k,λ)[C_{P,σ}] with lin P ∋ η and ⟨g,η⟩ ∉ Z, so (∇_η^ζ)^N m = 0 for ζ = g^η.
pub fn random_kernel_element(rng: &mut StdRng) -> (PiecewiseQP, QVec, Q) {
    let d = rng.gen_range(1..=2usize);
    let etas: [[i64; 2]; 6] = [[1, 0], [0, 1], [1, 1], [1, -1], [1, 2], [2, 1]];
    let eta: QVec = if d == 1 { qvec(&[1]) } else { qvec(&etas[rng.gen_range(0..etas.len())]) };
    let p = if d == 1 {
        Polyhedron::whole(1)
    } else {
        let a = vec![-eta[1].clone(), eta[0].clone()];
        let c = rand_q(rng, 3, -1, 1);
        match rng.gen_range(0..4) {
            0 => Polyhedron::whole(2),
            1 => Polyhedron::from_ineqs(2, &[(a, c)]),
            2 => {
                let w = rand_q(rng, 3, 0, 2);
                Polyhedron::from_ineqs(2, &[(a.clone(), c.clone()), (a.iter().map(|x| -x).collect(), -(c + w))])
            }
            _ => Polyhedron::new(2, vec![crate::polyhedron::Halfspace::equal(a, c)]),
        }
    };
    let g = loop {
        let g: QVec = (0..d).map(|_| qf(rng.gen_range(0..4), 4)).collect();
        let t = crate::scalars::rational::dot(&g, &eta);
        if !t.is_integer() {
            break g;
        }
    };
    let u = qf(rng.gen_range(0..4), 4);
    let qp = QuasiPolynomial::term(d, u, g.clone(), rand_kpoly(rng, d, 2));
    let sigma = rand_qvec(rng, d, 4, -1, 1);
    let z = crate::scalars::rational::dot(&g, &eta);
    if rng.gen_bool(0.5) {
        return (PiecewiseQP::single(qp, p, sigma), eta, z);
    }
    // same function cut transversally to η into two half-open pieces, so the
    // expansions have to cancel against each other
    let t = rand_q(rng, 3, -1, 1);
    let dot = crate::scalars::rational::dot;
    let den = lcm_u(den_u(&t), den_u(&dot(&eta, &sigma)));
    let shift = qf(1, 2 * den as i64) / dot(&eta, &eta);
    let sigma2: QVec = sigma.iter().zip(&eta).map(|(s, e)| s - &shift * e).collect();
    let upper = p.intersect(&Polyhedron::from_ineqs(d, &[(eta.clone(), t.clone())]));
    let lower = p.intersect(&Polyhedron::from_ineqs(d, &[(eta.iter().map(|x| -x).collect(), -t)]));
    let mut m = PiecewiseQP::single(qp.clone(), upper, sigma);
    m.push(qp, lower, sigma2);
    (m, eta, z)
}

pub fn kernel(count: usize, seed: u64) -> CheckReport {
    timed("kernel", || {
        let e = expand(&catalog::alternating_line(), 6)?;
        if !e.series.is_zero() {
            return Ok((false, format!("A((-1)^l [C_R]) = {}", e.pretty())));
        }
        let mut rng = StdRng::seed_from_u64(seed);
        for i in 0..count {
            let (m, eta, z) = random_kernel_element(&mut rng);
            // certify membership in the family: some power of ∇ kills m
            if m.kernel_witness(&[(eta.clone(), z.clone())], 4, 4).is_none() {
                return Ok((false, format!("sample {i}: no finite-difference witness for {m}")));
            }
            let a = expand(&m, 4)?;
            if !a.series.is_zero() {
                return Ok((false, format!("sample {i}: nonzero expansion of {m}:\n{}", a.pretty())));
            }
        }
        Ok((true, format!("A((-1)^l [C_R]) = 0 through N=6; {count} kernel samples vanish")))
    })
}

pub fn unicity(count: usize, seed: u64) -> CheckReport {
    timed("unicity", || {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut done = 0;
        let mut tried = 0;
        while done < count {
            tried += 1;
            let d = rng.gen_range(1..=2usize);
            let m = random_finite(&mut rng, d, 4);
            if m.zero_test(8).is_zero() {
                continue;
            }
            match unicity_probe(&m, None, 2)? {
                Unicity::Witness { .. } => done += 1,
                Unicity::Exhausted { tried } => {
                    return Ok((false, format!("no twist among {tried} gives a nonzero expansion for {m}")));
                }
            }
        }
        Ok((true, format!("{done} nonzero samples ({tried} drawn), each with a detecting twist")))
    })
}

fn qp_equal(a: &QuasiPolynomial, b: &QuasiPolynomial) -> bool {
    a.sub(b).is_zero()
}

pub fn pushforward() -> CheckReport {
    timed("pushforward", || {
        let r = push_reconstruct(&catalog::final_example(), &catalog::final_map(), None, &ReconstructOptions::default())?;
        let live: Vec<_> = r.pieces().iter().filter(|p| !p.q.is_zero()).collect();
        let expected = catalog::final_expected();
        if live.len() != expected.len() {
            return Ok((false, format!("expected 3 pieces, got {r}")));
        }
        for (qe, pe) in &expected {
            let hit = live.iter().any(|pc| pc.p.same_set(pe) && pc.sigma.iter().all(|s| s.is_zero()) && qp_equal(&pc.q, qe));
            if !hit {
                return Ok((false, format!("no piece {qe} on {pe} in {r}")));
            }
        }
        let r3 = push_reconstruct(&catalog::simplex(), &catalog::simplex_map(), None, &ReconstructOptions::default())?;
        let m3 = catalog::m3();
        let live3: Vec<_> = r3.pieces().iter().filter(|p| !p.q.is_zero()).collect();
        let want = &m3.pieces()[0];
        if live3.len() != 1 || !live3[0].p.same_set(&want.p) || !qp_equal(&live3[0].q, &want.q) {
            return Ok((false, format!("simplex pushforward is {r3}, expected {m3}")));
        }
        Ok((true, format!("final example: {r}; simplex: {r3}")))
    })
}

pub fn commuting(kmax: i64) -> CheckReport {
    timed("commuting", || {
        let cases: [(&str, PiecewiseQP, QuotientMap); 2] =
            [("simplex", catalog::simplex(), catalog::simplex_map()), ("final", catalog::final_example(), catalog::final_map())];
        let mut atoms = 0;
        let mut pairings = 0;
        for (name, m, pi) in cases {
            let r = push_reconstruct(&m, &pi, None, &ReconstructOptions::default())?;
            let w = Window::parse("[-3,3]")?;
            for k in 1..=kmax {
                let a = push_theta(&m, &pi, k, &w)?;
                let b = theta_sample(&r, k, &w)?;
                if a != b {
                    return Ok((false, format!("{name}: theta samples differ at k={k}")));
                }
                atoms += a.atoms.len();
            }
            // coefficientwise: A(π_*m)_e paired with φ′ equals A(m)_e paired with φ′∘π
            let n = 3;
            let above = expand(&m, n)?.series;
            let below = expand(&r, n)?.series;
            let top = above.leading_exponent().max(below.leading_exponent());
            let bottom = above.floor().max(below.floor());
            for deg in 0..=2u32 {
                let phi = xpow(1, &[deg]);
                let pulled = pi.pull_poly(&phi);
                for e in bottom..=top {
                    let ca = above.at_power(e);
                    let cb = below.at_power(e);
                    for k in 1..=kmax {
                        let lhs = cb.pair(k, &phi)?;
                        let rhs = ca.pair(k, &pulled)?;
                        if lhs != rhs {
                            return Ok((false, format!("{name}: k^{e} coefficient paired with x^{deg} at k={k}: {lhs} vs {rhs}")));
                        }
                        pairings += 1;
                    }
                }
            }
        }
        Ok((true, format!("{atoms} atoms equal for k=1..{kmax}; {pairings} coefficient pairings equal (deg phi <= 2)")))
    })
}

pub fn local(count: usize, seed: u64) -> CheckReport {
    timed("local", || {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut vertices = 0;
        let mut points = 0;
        let mut pairings = 0;
        for i in 0..count {
            let d = rng.gen_range(1..=2usize);
            let m = random_finite(&mut rng, d, 3);
            let mut vs: Vec<QVec> = Vec::new();
            for pc in m.pieces() {
                for v in pc.p.vertices() {
                    if !vs.contains(v) {
                        vs.push(v.clone());
                    }
                }
            }
            let a = expand(&m, 2)?.series;
            for v in vs {
                vertices += 1;
                let lc = m.check_local_agreement(&v, 3);
                if let Some((k, lam)) = lc.mismatch {
                    return Ok((false, format!("sample {i}: T_v m differs from m at k={k}, lambda={lam:?}, v={v:?}")));
                }
                points += lc.points_checked;
                let t = m.tangent_cone_map(&v);
                let at = expand(&t, 2)?.series;
                let ta = a.tangent_at(&v);
                let half = &lc.radius / q(2);
                let lo: QVec = v.iter().map(|x| x - &half).collect();
                let hi: QVec = v.iter().map(|x| x + &half).collect();
                let top = ta.leading_exponent().max(at.leading_exponent());
                let bottom = ta.floor().max(at.floor());
                let period = (bottom..=top).map(|e| ta.at_power(e).max_period().max(at.at_power(e).max_period())).max().unwrap_or(1);
                let phis: Vec<MultiPoly<Q>> = if d == 1 {
                    (0..3).map(|j| xpow(1, &[j])).collect()
                } else {
                    [[0, 0], [1, 0], [0, 1], [1, 1], [2, 0]].iter().map(|e| xpow(2, e)).collect()
                };
                for e in bottom..=top {
                    let (ca, cb) = (ta.at_power(e), at.at_power(e));
                    for phi in &phis {
                        for k in 1..=period as i64 {
                            let x = ca.pair_window(k, phi, &lo, &hi)?;
                            let y = cb.pair_window(k, phi, &lo, &hi)?;
                            if x != y {
                                return Ok((false, format!("sample {i}, v={v:?}: k^{e} coefficients differ near v ({x} vs {y}) for {m}")));
                            }
                            pairings += 1;
                        }
                    }
                }
            }
        }
        Ok((true, format!("{count} samples, {vertices} vertices, {points} lattice points agree past K; {pairings} local pairings of T_v A and A(T_v m) equal")))
    })
}

pub fn remainder() -> CheckReport {
    timed("remainder", || {
        let f = Gaussian { center: vec![0.3], width: 0.5 };
        let r = remainder_table(&catalog::m1(), &f, 3, &[10, 20, 40, 80], DiffRule::default())?;
        let vals: Vec<String> = r.scaled.iter().map(|x| format!("{x:.3e}")).collect();
        Ok((r.bounded, format!("scaled remainders k^(N-s)|Theta-A| at k=10,20,40,80: {}", vals.join(", "))))
    })
}

/// Sample points z with Im z < 0 away from the poles 2πk·Z.
pub fn genfunc_points() -> Vec<Complex64> {
    (0..10).map(|i| Complex64::new(-2.0 + 0.45 * i as f64, -0.2 - 0.07 * i as f64)).collect()
}

pub fn genfunc() -> CheckReport {
    timed("genfunc", || {
        let cases: [(Q, Q, Q); 3] = [(q(0), q(0), q(0)), (qf(1, 3), qf(1, 2), qf(1, 2)), (q(-1), qf(-2, 3), qf(1, 3))];
        let mut worst = 0.0f64;
        for (s, sigma, g) in &cases {
            for z in genfunc_points() {
                let c = genfunc_crosscheck(std::slice::from_ref(s), std::slice::from_ref(sigma), std::slice::from_ref(g), &[z], 100, 6)?;
                worst = worst.max(c.diff);
            }
        }
        Ok((worst < 1e-10, format!("max |closed - Laurent| = {worst:.2e} over 10 points x 3 cones (k=100, N=6)")))
    })
}

/// Independent oracle pairing over a window vs the engine pairing of Θ.
pub fn oracle_agrees(m: &PiecewiseQP, k: i64, phi: &MultiPoly<Q>, w: &Window) -> Result<bool> {
    let a = oracle_theta_pair(m, k, phi, w)?;
    let b = theta_pair_poly(m, k, phi, &Region::Window(w.clone()))?;
    Ok(a == b)
}
