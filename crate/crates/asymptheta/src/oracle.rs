//! Independent checks: a brute-force pairing that shares no enumeration code
//! with the main path, numeric remainder tables for smooth test functions,
//! the generating-function cross-check and twist probes.

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde_json::json;

use crate::distributions::{AsymptoticSeries, RDistribution, Window};
use crate::error::{Error, Result};
use crate::expansion::{cone_character_series, expand};
use crate::piecewise::PiecewiseQP;
use crate::polyhedron::{lattice_volume, triangulate_polytope, Polyhedron};
use crate::scalars::rational::{ceil, den_u, dot, floor, lcm_u, q, qf, to_f64, vscale, vsub, Q, QVec};
use crate::scalars::{Cyclotomic, MultiPoly, Periodic};

/// ⟨Θ(m;k), φ⟩ over a window by looping over every integer point of the
/// scaled box and testing each piece's inequalities directly.
pub fn oracle_theta_pair(m: &PiecewiseQP, k: i64, phi: &MultiPoly<Q>, window: &Window) -> Result<Cyclotomic> {
    if k <= 0 {
        return Err(Error::InvalidArgument(format!("level k must be positive, got {k}")));
    }
    let d = m.dim();
    let kq = q(k);
    let lo: Vec<i64> = window.lo.iter().map(|x| ceil(&(x * &kq)).to_i64().unwrap()).collect();
    let hi: Vec<i64> = window.hi.iter().map(|x| floor(&(x * &kq)).to_i64().unwrap()).collect();
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        return Ok(Cyclotomic::zero());
    }
    let mut acc = Cyclotomic::zero();
    let mut cur = lo.clone();
    loop {
        let lam: QVec = cur.iter().map(|&x| q(x)).collect();
        let x = vscale(&lam, &(q(1) / &kq));
        if window.contains(&x) {
            let mut w = Cyclotomic::zero();
            for pc in m.pieces() {
                let inside = pc.p.constraints().iter().all(|h| {
                    let lhs = dot(&h.a, &lam);
                    let rhs = &h.c * &kq + dot(&h.a, &pc.sigma);
                    if h.eq {
                        lhs == rhs
                    } else {
                        lhs >= rhs
                    }
                });
                if !inside {
                    continue;
                }
                for (u, g, p) in pc.q.terms() {
                    let phase = u * &kq + dot(g, &lam);
                    let mut pt = vec![kq.clone()];
                    pt.extend(lam.iter().cloned());
                    let val = p.eval(&pt);
                    w = w.add_ref(&val.mul_ref(&Cyclotomic::exp2pi(&crate::scalars::rational::frac(&phase))));
                }
            }
            if !w.is_zero() {
                acc = acc.add_ref(&w.scale(&phi.eval(&x)));
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                return Ok(acc);
            }
            cur[i] += 1;
            if cur[i] <= hi[i] {
                break;
            }
            cur[i] = lo[i];
            i += 1;
        }
    }
}

/// Smooth test function evaluated in double precision.
pub trait TestFunction {
    fn value(&self, x: &[f64]) -> Complex64;
}

/// exp(−|x−c|²/(2w²)).
#[derive(Clone, Debug)]
pub struct Gaussian {
    pub center: Vec<f64>,
    pub width: f64,
}

impl TestFunction for Gaussian {
    fn value(&self, x: &[f64]) -> Complex64 {
        let r2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        Complex64::new((-r2 / (2.0 * self.width * self.width)).exp(), 0.0)
    }
}

/// Numeric derivative settings: central differences with one Richardson step.
#[derive(Clone, Copy, Debug)]
pub struct DiffRule {
    pub step: f64,
}

impl Default for DiffRule {
    fn default() -> Self {
        DiffRule { step: 1e-2 }
    }
}

fn binom_f(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// ∂_{dirs} f at x by nested central differences.
fn central(f: &dyn TestFunction, x: &[f64], dirs: &[Vec<f64>], h: f64) -> Complex64 {
    if dirs.is_empty() {
        return f.value(x);
    }
    // group equal directions into one higher-order stencil
    let v = &dirs[0];
    let j = dirs.iter().take_while(|w| *w == v).count();
    let rest = &dirs[j..];
    let mut acc = Complex64::zero();
    for i in 0..=j {
        let off = (j as f64 / 2.0 - i as f64) * h;
        let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + off * b).collect();
        let sgn = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc += central(f, &y, rest, h) * (sgn * binom_f(j, i));
    }
    acc / h.powi(j as i32)
}

fn derivative(f: &dyn TestFunction, x: &[f64], dirs: &[Vec<f64>], rule: DiffRule) -> Complex64 {
    if dirs.is_empty() {
        return f.value(x);
    }
    let a = central(f, x, dirs, rule.step);
    let b = central(f, x, dirs, rule.step / 2.0);
    (b * 4.0 - a) / 3.0
}

/// Gauss-Legendre nodes and weights on [0,1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out
}

/// Quadrature points on the standard e-simplex (collapsed coordinates).
fn simplex_rule(e: usize, n: usize) -> Vec<(Vec<f64>, f64)> {
    let gl = gauss_legendre(n);
    let mut pts: Vec<(Vec<f64>, f64)> = vec![(vec![], 1.0)];
    for _ in 0..e {
        pts = pts.into_iter().flat_map(|(p, w)| gl.iter().map(move |(x, wx)| ((p.clone(), w), (*x, *wx)))).map(|((mut p, w), (x, wx))| {
            p.push(x);
            (p, w * wx)
        }).collect();
    }
    pts.into_iter()
        .map(|(u, w)| {
            let mut t = vec![0.0; e];
            let mut rem = 1.0;
            // Jacobian of the collapsed map: Π over the shrinking remainders
            let mut jac = 1.0;
            for i in 0..e {
                t[i] = rem * u[i];
                rem *= 1.0 - u[i];
                if i + 1 < e {
                    jac *= rem;
                }
            }
            (t, w * jac)
        })
        .collect()
}

fn eval_coeff_f64(c: &MultiPoly<Periodic>, k: i64, x: &[f64]) -> Complex64 {
    let mut acc = Complex64::zero();
    for (e, v) in c.terms() {
        let mut t = v.at(k).to_complex();
        for (xi, &a) in x.iter().zip(e) {
            t *= xi.powi(a as i32);
        }
        acc += t;
    }
    acc
}

/// ⟨T(k), φ⟩ in double precision; faces must be bounded.
pub fn pair_numeric(t: &RDistribution, k: i64, f: &dyn TestFunction, rule: DiffRule, nodes: usize) -> Result<Complex64> {
    let d = t.dim();
    let mut acc = Complex64::zero();
    for term in t.terms() {
        let face = &term.face;
        if !face.is_bounded() {
            return Err(Error::Unbounded("numeric pairing needs bounded faces".into()));
        }
        let dirs: Vec<Vec<f64>> = term.dirs.iter().map(|v| v.iter().map(to_f64).collect()).collect();
        let sign = if term.dirs.len() % 2 == 0 { 1.0 } else { -1.0 };
        let e = face.dim() as usize;
        let simplices = if e == 0 { vec![vec![face.vertices()[0].clone()]] } else { triangulate_polytope(face.vertices()) };
        let rule_pts = simplex_rule(e, nodes);
        for s in simplices {
            let v0: Vec<f64> = s[0].iter().map(to_f64).collect();
            let edges: Vec<QVec> = s[1..].iter().map(|v| vsub(v, &s[0])).collect();
            let vol = to_f64(&lattice_volume(&edges, d));
            let ef: Vec<Vec<f64>> = edges.iter().map(|v| v.iter().map(to_f64).collect()).collect();
            for (tp, w) in &rule_pts {
                let mut x = v0.clone();
                for (ti, ed) in tp.iter().zip(&ef) {
                    for i in 0..d {
                        x[i] += ti * ed[i];
                    }
                }
                let val = eval_coeff_f64(&term.coeff, k, &x) * derivative(f, &x, &dirs, rule);
                acc += val * (w * vol * sign);
            }
        }
    }
    Ok(acc)
}

pub fn series_pair_numeric(a: &AsymptoticSeries, k: i64, f: &dyn TestFunction, rule: DiffRule) -> Result<Complex64> {
    let mut acc = Complex64::zero();
    let kf = k as f64;
    for (n, c) in a.coeffs().iter().enumerate() {
        let e = a.leading_exponent() - n as i64;
        acc += pair_numeric(c, k, f, rule, 24)? * kf.powi(e as i32);
    }
    Ok(acc)
}

/// Σ m(k,λ) f(λ/k) over a window in double precision.
pub fn theta_pair_numeric(m: &PiecewiseQP, k: i64, f: &dyn TestFunction, window: &Window) -> Result<Complex64> {
    let s = crate::distributions::theta_sample(m, k, window)?;
    Ok(s.atoms.iter().fold(Complex64::zero(), |acc, (x, w)| {
        let xf: Vec<f64> = x.iter().map(to_f64).collect();
        acc + w.to_complex() * f.value(&xf)
    }))
}

#[derive(Clone, Debug)]
pub struct RemainderReport {
    pub order: usize,
    pub s: i64,
    pub ks: Vec<i64>,
    /// |⟨Θ,φ⟩ − ⟨A_N,φ⟩|·k^{N−s}.
    pub scaled: Vec<f64>,
    pub step: f64,
    pub bounded: bool,
}

impl RemainderReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "order": self.order,
            "leading_exponent": self.s,
            "k": self.ks,
            "scaled_remainder": self.scaled,
            "derivative_step": self.step,
            "richardson": true,
            "precision": "f64",
            "verdict": if self.bounded { "bounded" } else { "unbounded" },
        })
    }

    pub fn table(&self) -> String {
        let mut s = format!("order N={} leading exponent s={} (step {:e}, f64)\n", self.order, self.s, self.step);
        s.push_str("k\tscaled remainder\n");
        for (k, r) in self.ks.iter().zip(&self.scaled) {
            s.push_str(&format!("{k}\t{r:.6e}\n"));
        }
        s.push_str(if self.bounded { "verdict: bounded\n" } else { "verdict: unbounded\n" });
        s
    }
}

/// Scaled remainders of the N-th order expansion; bounded when no later value
/// leaves a 2× band around the first one.
pub fn remainder_table(m: &PiecewiseQP, f: &dyn TestFunction, n: usize, ks: &[i64], rule: DiffRule) -> Result<RemainderReport> {
    let e = expand(m, n)?;
    let s = e.s_max;
    let (lo, hi) = m.support_window();
    let window = Window::closed(lo, hi);
    let mut scaled = Vec::new();
    for &k in ks {
        let th = theta_pair_numeric(m, k, f, &window)?;
        let a = series_pair_numeric(&e.series, k, f, rule)?;
        scaled.push((th - a).norm() * (k as f64).powi((n as i64 - s) as i32));
    }
    let bounded = match scaled.first() {
        None => true,
        Some(&r0) => scaled.iter().all(|&r| r <= 2.0 * r0.max(1e-300) || r < 1e-12),
    };
    Ok(RemainderReport { order: n, s, ks: ks.to_vec(), scaled, step: rule.step, bounded })
}

#[derive(Clone, Debug)]
pub struct GenfuncCheck {
    pub closed: Complex64,
    pub laurent: Complex64,
    pub diff: f64,
}

/// ∫ x^j e^{a x} over [s, ∞) with Re a < 0.
fn ray_moment(j: u32, a: Complex64, s: f64) -> Complex64 {
    let e = (a * s).exp();
    let mut prev = -e / a;
    for i in 1..=j {
        prev = -(e * s.powi(i as i32)) / a - prev * (i as f64) / a;
    }
    prev
}

/// Pair a distribution whose faces are apex + cone(coordinate directions)
/// with e^{−i⟨z,x⟩}.
fn pair_exponential(t: &RDistribution, k: i64, z: &[Complex64]) -> Result<Complex64> {
    let d = t.dim();
    let i = Complex64::new(0.0, 1.0);
    let a: Vec<Complex64> = z.iter().map(|zj| -i * zj).collect();
    let mut acc = Complex64::zero();
    for term in t.terms() {
        let face = &term.face;
        if !face.lineality().is_empty() {
            return Err(Error::InvalidArgument("faces with lines have no exponential pairing".into()));
        }
        let apex: Vec<f64> = face.vertices()[0].iter().map(to_f64).collect();
        let mut free = vec![false; d];
        for r in face.rays() {
            let nz: Vec<usize> = (0..d).filter(|&j| !r[j].is_zero()).collect();
            if nz.len() != 1 || r[nz[0]] < q(0) {
                return Err(Error::InvalidArgument("expected faces along positive coordinate rays".into()));
            }
            free[nz[0]] = true;
        }
        if face.vertices().len() != 1 {
            return Err(Error::InvalidArgument("expected a cone face".into()));
        }
        // ∂_v e^{−i⟨z,x⟩} = ⟨a, v⟩ e^{−i⟨z,x⟩}
        let mut dfac = Complex64::new(1.0, 0.0);
        for v in &term.dirs {
            dfac *= (0..d).fold(Complex64::zero(), |s, j| s + a[j] * to_f64(&v[j]));
        }
        if term.dirs.len() % 2 == 1 {
            dfac = -dfac;
        }
        for (e, c) in term.coeff.terms() {
            let mut val = c.at(k).to_complex();
            for j in 0..d {
                if free[j] {
                    val *= ray_moment(e[j], a[j], apex[j]);
                } else {
                    val *= apex[j].powi(e[j] as i32) * (a[j] * apex[j]).exp();
                }
            }
            acc += val * dfac;
        }
    }
    Ok(acc)
}

/// For m = g^λ[C_{s+orthant, σ}]: the closed form
/// Π ζ_j^{n_j} e^{−iz_j n_j/k}/(1 − ζ_j e^{−iz_j/k}), n_j = ⌈ks_j+σ_j⌉,
/// against the expansion of order N paired with e^{−i⟨z,x⟩}.
pub fn genfunc_crosscheck(s: &[Q], sigma: &[Q], g: &[Q], z: &[Complex64], k: i64, n: usize) -> Result<GenfuncCheck> {
    let d = s.len();
    if z.iter().any(|zj| zj.im >= 0.0) {
        return Err(Error::InvalidArgument("need Im z < 0 for convergence".into()));
    }
    let i = Complex64::new(0.0, 1.0);
    let mut closed = Complex64::new(1.0, 0.0);
    for j in 0..d {
        let n0 = ceil(&(&s[j] * q(k) + &sigma[j])).to_i64().unwrap();
        let theta = 2.0 * std::f64::consts::PI * to_f64(&g[j]);
        let zeta = Complex64::from_polar(1.0, theta);
        let denom = Complex64::new(1.0, 0.0) - zeta * (-i * z[j] / k as f64).exp();
        if denom.norm() < 1e-14 {
            return Err(Error::InvalidArgument("z is on a pole".into()));
        }
        closed *= Complex64::from_polar(1.0, theta * n0 as f64) * (-i * z[j] * n0 as f64 / k as f64).exp() / denom;
    }
    let gens: Vec<QVec> = (0..d).map(|j| (0..d).map(|l| if l == j { q(1) } else { q(0) }).collect()).collect();
    let cone = Polyhedron::from_generators(s, &gens, &[]);
    let series = cone_character_series(&cone, sigma, &q(0), g, d as i64 - n as i64)?;
    let mut laurent = Complex64::zero();
    for (idx, c) in series.coeffs().iter().enumerate() {
        let e = series.leading_exponent() - idx as i64;
        laurent += pair_exponential(c, k, z)? * (k as f64).powi(e as i32);
    }
    Ok(GenfuncCheck { closed, laurent, diff: (closed - laurent).norm() })
}

/// Default twist family: characters with denominators dividing 2·lcm of the
/// denominators appearing in m.
pub fn default_gset(m: &PiecewiseQP) -> Vec<QVec> {
    let d = m.dim();
    let mut l = 1u64;
    for pc in m.pieces() {
        for (_, g, _) in pc.q.terms() {
            for x in g {
                l = lcm_u(l, den_u(x));
            }
        }
    }
    let den = 2 * l as i64;
    (0..d)
        .map(|_| 0..den)
        .fold(vec![vec![]], |acc: Vec<Vec<i64>>, r| {
            acc.into_iter()
                .flat_map(|p| {
                    r.clone().map(move |x| {
                        let mut p = p.clone();
                        p.push(x);
                        p
                    })
                })
                .collect()
        })
        .into_iter()
        .map(|v| v.into_iter().map(|x| qf(x, den)).collect())
        .collect()
}

#[derive(Clone, Debug)]
pub enum Unicity {
    Witness { g: QVec, leading_exponent: i64 },
    Exhausted { tried: usize },
}

/// First twist g (in order) with A(g·m) ≠ 0 through N orders.
pub fn unicity_probe(m: &PiecewiseQP, gset: Option<&[QVec]>, n: usize) -> Result<Unicity> {
    let owned;
    let gs: &[QVec] = match gset {
        Some(g) => g,
        None => {
            owned = default_gset(m);
            &owned
        }
    };
    for g in gs {
        let e = expand(&m.twist(g), n)?;
        if let Some(idx) = e.series.coeffs().iter().position(|c| !c.is_empty()) {
            return Ok(Unicity::Witness { g: g.clone(), leading_exponent: e.s_max - idx as i64 });
        }
    }
    Ok(Unicity::Exhausted { tried: gs.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{theta_pair_poly, Region};
    use crate::quasipoly::QuasiPolynomial;
    use crate::scalars::rational::qvec;

    fn m1() -> PiecewiseQP {
        PiecewiseQP::indicator(Polyhedron::interval(q(0), q(1)))
    }

    #[test]
    fn brute_force_pairing() {
        let x2 = MultiPoly::var(1, 0).pow(2);
        let w = Window::parse("[-1,2]").unwrap();
        let v = oracle_theta_pair(&m1(), 7, &x2, &w).unwrap();
        assert_eq!(v, Cyclotomic::from_q(qf(7, 3) + qf(1, 2) + qf(1, 42)));
        assert_eq!(v, theta_pair_poly(&m1(), 7, &x2, &Region::Global).unwrap());
        assert!(oracle_theta_pair(&PiecewiseQP::zero(1), 7, &x2, &w).unwrap().is_zero());
    }

    #[test]
    fn simplex_quadrature_integrates_monomials() {
        let r = simplex_rule(2, 6);
        let area: f64 = r.iter().map(|(_, w)| w).sum();
        assert!((area - 0.5).abs() < 1e-12);
        let xy: f64 = r.iter().map(|(t, w)| t[0] * t[1] * w).sum();
        assert!((xy - 1.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn remainder_is_bounded_for_a_gaussian() {
        let f = Gaussian { center: vec![0.3], width: 0.5 };
        let r = remainder_table(&m1(), &f, 3, &[10, 20, 40, 80], DiffRule::default()).unwrap();
        assert!(r.bounded, "{}", r.table());
    }

    #[test]
    fn generating_function_agrees() {
        let z = [Complex64::new(0.7, -0.3)];
        let c = genfunc_crosscheck(&[q(0)], &[q(0)], &[q(0)], &z, 100, 6).unwrap();
        assert!(c.diff < 1e-10, "{c:?}");
        let c = genfunc_crosscheck(&[qf(1, 3)], &[qf(1, 2)], &[qf(1, 2)], &z, 100, 6).unwrap();
        assert!(c.diff < 1e-10, "{c:?}");
        let z2 = [Complex64::new(0.4, -0.2), Complex64::new(-1.1, -0.5)];
        let c = genfunc_crosscheck(&[q(0), qf(1, 2)], &[q(0), q(1)], &[qf(1, 3), q(0)], &z2, 100, 6).unwrap();
        assert!(c.diff < 1e-9, "{c:?}");
    }

    #[test]
    fn twist_probe() {
        let alt = PiecewiseQP::single(QuasiPolynomial::character(&[qf(1, 2)]), Polyhedron::whole(1), qvec(&[0]));
        match unicity_probe(&alt, None, 2).unwrap() {
            Unicity::Witness { g, .. } => assert_eq!(g, vec![qf(1, 2)]),
            other => panic!("{other:?}"),
        }
        match unicity_probe(&m1(), None, 2).unwrap() {
            Unicity::Witness { g, leading_exponent } => {
                assert_eq!(g, vec![q(0)]);
                assert_eq!(leading_exponent, 1);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(unicity_probe(&PiecewiseQP::zero(1), None, 2).unwrap(), Unicity::Exhausted { .. }));
    }
}
