//! Pushforward π_*m(k,λ′) = Σ_{π(λ)=λ′} m(k,λ) along rational quotient maps,
//! and chamber-wise reconstruction of π_*m as a piecewise quasi-polynomial.
//!
//! The target V′ is identified with R^{d′} so that π(Z^d) = Z^{d′}; every map
//! is stored in that normalized form.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::Zero;

use crate::distributions::{AsymptoticSeries, ThetaSample, Window};
use crate::error::{Error, Result};
use crate::lattice::{saturated_kernel, to_q, Lattice, ZVec};
use crate::linalg;
use crate::piecewise::{Piece, PiecewiseQP};
use crate::polyhedron::{enumerate_lattice_points, Halfspace, Polyhedron};
use crate::quasipoly::{KPoly, QuasiPolynomial};
use crate::scalars::rational::{den_lcm, lcm_u, q, qf, vscale, vzero, Q, QVec};
use crate::scalars::{Cyclotomic, MultiPoly};

/// Surjection Z^d → Z^{d′} given by an integral d′×d matrix of full row rank.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientMap {
    d: usize,
    rows: Vec<QVec>,
    /// Basis of π(Z^d) in the coordinates of the matrix the map was built from.
    image_basis: Vec<QVec>,
}

impl QuotientMap {
    /// Normalize an arbitrary rational matrix: rows are re-expressed in a basis
    /// of the image lattice so that the map becomes onto Z^{d′}.
    pub fn new(matrix: &[QVec], d: usize) -> Result<Self> {
        if matrix.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: matrix.iter().map(|r| r.len()).find(|&l| l != d).unwrap_or(0) });
        }
        let dp = matrix.len();
        if linalg::rank(matrix) != dp {
            return Err(Error::InvalidArgument("quotient map must have full row rank".into()));
        }
        let all: Vec<Q> = matrix.iter().flatten().cloned().collect();
        let den = q(den_lcm(&all) as i64);
        // columns of den·A generate den·π(Z^d)
        let cols: Vec<ZVec> = (0..d).map(|j| (0..dp).map(|i| (&matrix[i][j] * &den).to_integer()).collect()).collect();
        let h = Lattice::new(dp, cols).hnf();
        let image_basis: Vec<QVec> = h.iter().map(|c| vscale(&to_q(c), &(q(1) / &den))).collect();
        let binv = linalg::inverse(&linalg::from_cols(&image_basis, dp)).expect("full rank image");
        let rows = linalg::mat_mul(&binv, matrix, d);
        Ok(QuotientMap { d, rows, image_basis })
    }

    /// The quotient R^d → R^d / span(kernel).
    pub fn quotient_by(kernel: &[QVec], d: usize) -> Result<Self> {
        let ann: Vec<QVec> = saturated_kernel(kernel, d).iter().map(|v| to_q(v)).collect();
        if ann.is_empty() {
            return Err(Error::InvalidArgument("quotient by the whole space".into()));
        }
        Self::new(&ann, d)
    }

    pub fn source_dim(&self) -> usize {
        self.d
    }

    pub fn target_dim(&self) -> usize {
        self.rows.len()
    }

    /// Normalized matrix, rows indexed by target coordinates.
    pub fn matrix(&self) -> &[QVec] {
        &self.rows
    }

    pub fn image_basis(&self) -> &[QVec] {
        &self.image_basis
    }

    pub fn apply(&self, x: &[Q]) -> QVec {
        linalg::mat_vec(&self.rows, x)
    }

    pub fn apply_z(&self, x: &[BigInt]) -> ZVec {
        self.apply(&to_q(x)).iter().map(|v| v.to_integer()).collect()
    }

    /// φ′ ∘ π.
    pub fn pull_poly(&self, phi: &MultiPoly<Q>) -> MultiPoly<Q> {
        phi.compose_affine(&self.rows, &vzero(self.target_dim()), self.d)
    }

    /// Recession cone of P intersected with ker π.
    fn kernel_cone(&self, p: &Polyhedron) -> Polyhedron {
        let mut cons: Vec<Halfspace> = p.constraints().iter().map(|h| Halfspace { a: h.a.clone(), c: q(0), eq: h.eq }).collect();
        for r in &self.rows {
            cons.push(Halfspace::equal(r.clone(), q(0)));
        }
        Polyhedron::new(self.d, cons)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Properness {
    pub proper: bool,
    /// A nonzero recession direction of some piece killed by π.
    pub violating: Option<QVec>,
}

pub fn properness_check(m: &PiecewiseQP, pi: &QuotientMap) -> Properness {
    for pc in m.pieces() {
        if pc.p.is_empty() || pc.q.is_zero() {
            continue;
        }
        let c = pi.kernel_cone(&pc.p);
        if c.dim() > 0 {
            let v = c.lineality().first().or_else(|| c.rays().first()).cloned();
            return Properness { proper: false, violating: v };
        }
    }
    Properness { proper: true, violating: None }
}

fn require_proper(m: &PiecewiseQP, pi: &QuotientMap) -> Result<()> {
    if m.dim() != pi.source_dim() {
        return Err(Error::DimensionMismatch { expected: pi.source_dim(), got: m.dim() });
    }
    let p = properness_check(m, pi);
    if p.proper {
        Ok(())
    } else {
        Err(Error::Improper(format!(
            "recession direction {:?} lies in the kernel",
            p.violating.map(|v| v.iter().map(crate::scalars::rational::fmt_q).collect::<Vec<_>>())
        )))
    }
}

/// π_*m(k,λ′) as a finite fiber sum.
pub fn push_eval(m: &PiecewiseQP, pi: &QuotientMap, k: i64, lambda: &[BigInt]) -> Result<Cyclotomic> {
    require_proper(m, pi)?;
    if k <= 0 {
        return Err(Error::InvalidArgument(format!("level k must be positive, got {k}")));
    }
    let target = to_q(lambda);
    let mut acc = Cyclotomic::zero();
    for pc in m.pieces() {
        let mut f = pc.p.scale_translate(&q(k), &pc.sigma);
        for (r, t) in pi.rows.iter().zip(&target) {
            f = f.with_constraint(Halfspace::equal(r.clone(), t.clone()));
        }
        for lam in enumerate_lattice_points(&f)? {
            acc = acc.add_ref(&pc.q.eval_z(k, &lam));
        }
    }
    Ok(acc)
}

/// All values of π_*m at level k on lattice points of the box [lo, hi] ⊂ R^{d′}.
fn push_level(m: &PiecewiseQP, pi: &QuotientMap, k: i64, lo: &[Q], hi: &[Q]) -> Result<BTreeMap<ZVec, Cyclotomic>> {
    let dp = pi.target_dim();
    let pre = Polyhedron::cuboid(lo, hi).preimage(&pi.rows, &vzero(dp), pi.d);
    let mut out: BTreeMap<ZVec, Cyclotomic> = BTreeMap::new();
    for pc in m.pieces() {
        let f = pc.p.scale_translate(&q(k), &pc.sigma).intersect(&pre);
        for lam in enumerate_lattice_points(&f)? {
            let v = pc.q.eval_z(k, &lam);
            if v.is_zero() {
                continue;
            }
            let img = pi.apply_z(&lam);
            let e = out.entry(img).or_insert_with(Cyclotomic::zero);
            *e = e.add_ref(&v);
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// Θ(π_*m;k) on a window of V′, by projecting the atoms of Θ(m;k).
pub fn push_theta(m: &PiecewiseQP, pi: &QuotientMap, k: i64, window: &Window) -> Result<ThetaSample> {
    require_proper(m, pi)?;
    if k <= 0 {
        return Err(Error::InvalidArgument(format!("level k must be positive, got {k}")));
    }
    if window.dim() != pi.target_dim() {
        return Err(Error::DimensionMismatch { expected: pi.target_dim(), got: window.dim() });
    }
    let kq = q(k);
    let lo = vscale(&window.lo, &kq);
    let hi = vscale(&window.hi, &kq);
    let vals = push_level(m, pi, k, &lo, &hi)?;
    let kinv = qf(1, k);
    let atoms = vals.into_iter().map(|(b, v)| (vscale(&to_q(&b), &kinv), v)).collect();
    Ok(ThetaSample::from_atoms(k, window.clone(), atoms))
}

/// ⟨π_*A, φ′⟩ = ⟨A, φ′∘π⟩.
pub fn push_series_pair(a: &AsymptoticSeries, pi: &QuotientMap, k: i64, phi: &MultiPoly<Q>) -> Result<Cyclotomic> {
    if a.dim() != pi.source_dim() {
        return Err(Error::DimensionMismatch { expected: pi.source_dim(), got: a.dim() });
    }
    a.pair(k, &pi.pull_poly(phi))
}

/// Intervals between consecutive projected vertices, plus rays when the
/// image is unbounded. Only for one-dimensional targets.
pub fn default_chambers(m: &PiecewiseQP, pi: &QuotientMap) -> Result<Vec<Polyhedron>> {
    if pi.target_dim() != 1 {
        return Err(Error::InvalidArgument("automatic chambers need a one-dimensional target; supply chambers".into()));
    }
    let mut pts: Vec<Q> = Vec::new();
    let (mut up, mut down) = (false, false);
    for pc in m.pieces() {
        if pc.p.is_empty() || pc.q.is_zero() {
            continue;
        }
        for v in pc.p.vertices() {
            pts.push(pi.apply(v)[0].clone());
        }
        for r in pc.p.rays() {
            let x = &pi.apply(r)[0];
            if x > &q(0) {
                up = true;
            } else if x < &q(0) {
                down = true;
            }
        }
        for r in pc.p.lineality() {
            if !pi.apply(r)[0].is_zero() {
                up = true;
                down = true;
            }
        }
    }
    let pts: Vec<Q> = pts.into_iter().sorted().dedup().collect();
    if pts.is_empty() {
        return Ok(vec![]);
    }
    let mut out: Vec<Polyhedron> = pts.windows(2).map(|w| Polyhedron::interval(w[0].clone(), w[1].clone())).collect();
    if pts.len() == 1 {
        out.push(Polyhedron::point(&[pts[0].clone()]));
    }
    if up {
        out.push(Polyhedron::ray_from(pts.last().unwrap().clone()));
    }
    if down {
        out.push(Polyhedron::ray_to(pts[0].clone()));
    }
    Ok(out)
}

/// Settings for [`push_reconstruct`].
#[derive(Clone, Debug)]
#[derive(Default)]
pub struct ReconstructOptions {
    /// Total degree bound in (k, λ′); defaults to max(deg q + dim P).
    pub degree: Option<u32>,
    /// Period bound in k and λ′; defaults to the lcm of piece periods and
    /// projected denominators.
    pub period: Option<u64>,
}


fn monomials(nvars: usize, deg: u32) -> Vec<Vec<u32>> {
    if nvars == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..=deg {
        for mut rest in monomials(nvars - 1, deg - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn mono_value(e: &[u32], x: &[Q]) -> Q {
    e.iter().zip(x).fold(q(1), |acc, (&a, xi)| acc * num_traits::pow(xi.clone(), a as usize))
}

/// Least-squares-free exact fit: Gaussian elimination, free unknowns set to 0.
fn solve_exact(rows: &[QVec], rhs: &[Cyclotomic], n: usize) -> Option<Vec<Cyclotomic>> {
    let mut a: Vec<QVec> = rows.to_vec();
    let mut b: Vec<Cyclotomic> = rhs.to_vec();
    let mut piv = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        b.swap(r, p);
        let inv = q(1) / &a[r][c];
        a[r] = vscale(&a[r], &inv);
        b[r] = b[r].scale(&inv);
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                a[i] = crate::scalars::rational::vsub(&a[i], &vscale(&a[r], &f));
                b[i] = b[i].sub_ref(&b[r].scale(&f));
            }
        }
        piv.push(c);
        r += 1;
    }
    if (r..a.len()).any(|i| !b[i].is_zero()) {
        return None;
    }
    let mut x = vec![Cyclotomic::zero(); n];
    for (row, &c) in piv.iter().enumerate() {
        x[c] = b[row].clone();
    }
    Some(x)
}

struct Cell {
    poly: Polyhedron,
    /// Pivot coordinates parametrizing aff(cell).
    coords: Vec<usize>,
}

impl Cell {
    fn new(poly: Polyhedron) -> Self {
        let h = poly.hull().expect("non-empty cell");
        let mut b = h.basis.clone();
        let coords = if b.is_empty() { vec![] } else { linalg::rref(&mut b) };
        Cell { poly, coords }
    }

    fn in_relint(&self, scaled: &Polyhedron, full_tight: &[usize], x: &[Q]) -> bool {
        scaled.contains(x) && scaled.tight_at(x) == full_tight
    }
}

/// Fit q(k,λ′) on the relative interiors of k·cell+σ′ and verify it on a
/// disjoint range of levels.
#[allow(clippy::too_many_arguments)]
fn fit_cell(
    cell: &Cell,
    sigma: &[Q],
    values: &dyn Fn(i64, &ZVec) -> Cyclotomic,
    samples: &HashMap<i64, Vec<ZVec>>,
    fit_levels: &[i64],
    check_levels: &[i64],
    deg: u32,
    period: u64,
) -> Result<QuasiPolynomial> {
    let dp = sigma.len();
    let e = cell.coords.len();
    let monos = monomials(1 + e, deg);
    let p = period as i64;
    let full = cell.poly.full_face().expect("non-empty");
    let mut classes: BTreeMap<Vec<i64>, (Vec<QVec>, Vec<Cyclotomic>)> = BTreeMap::new();
    for &k in fit_levels {
        let scaled = cell.poly.scale_translate(&q(k), sigma);
        let tight = scaled.full_face().map(|f| f.tight).unwrap_or(full.tight.clone());
        for b in samples.get(&k).into_iter().flatten() {
            let bq = to_q(b);
            if !cell.in_relint(&scaled, &tight, &bq) {
                continue;
            }
            let mut key = vec![k.rem_euclid(p)];
            let mut x = vec![q(k)];
            for &c in &cell.coords {
                key.push(b[c].clone().try_into().map(|v: i64| v.rem_euclid(p)).unwrap_or(0));
                x.push(bq[c].clone());
            }
            let ent = classes.entry(key).or_default();
            ent.0.push(monos.iter().map(|m| mono_value(m, &x)).collect());
            ent.1.push(values(k, b));
        }
    }
    // per residue class polynomial coefficients
    let mut fitted: BTreeMap<Vec<i64>, Vec<Cyclotomic>> = BTreeMap::new();
    for (key, (rows, rhs)) in &classes {
        let sol = solve_exact(rows, rhs, monos.len())
            .ok_or_else(|| Error::ReconstructionFailed(format!("inconsistent samples on chamber {}", cell.poly)))?;
        fitted.insert(key.clone(), sol);
    }
    // finite Fourier transform over the residues (k mod P, λ′_c mod P)
    let mut qp = QuasiPolynomial::zero(dp);
    let norm = q(1) / num_traits::pow(q(p), 1 + e);
    for freq in (0..1 + e).map(|_| 0..p).multi_cartesian_product() {
        let mut poly = KPoly::zero(dp + 1);
        for (key, sol) in &fitted {
            let phase: Q = freq.iter().zip(key).map(|(f, r)| qf(f * r, p)).sum();
            let w = Cyclotomic::exp2pi(&crate::scalars::rational::frac(&-phase));
            for (mono, c) in monos.iter().zip(sol) {
                if c.is_zero() {
                    continue;
                }
                let mut exps = vec![0u32; dp + 1];
                exps[0] = mono[0];
                for (i, &cc) in cell.coords.iter().enumerate() {
                    exps[cc + 1] = mono[i + 1];
                }
                poly.add_term(exps, c.mul_ref(&w).scale(&norm));
            }
        }
        if poly.is_zero() {
            continue;
        }
        let mut g = vzero(dp);
        for (i, &cc) in cell.coords.iter().enumerate() {
            g[cc] = qf(freq[i + 1], p);
        }
        qp.add_term(qf(freq[0], p), g, poly);
    }
    for &k in check_levels {
        let scaled = cell.poly.scale_translate(&q(k), sigma);
        let tight = scaled.full_face().map(|f| f.tight).unwrap_or(full.tight.clone());
        for b in samples.get(&k).into_iter().flatten() {
            let bq = to_q(b);
            if !cell.in_relint(&scaled, &tight, &bq) {
                continue;
            }
            let want = values(k, b);
            let got = qp.eval_z(k, b);
            if want != got {
                return Err(Error::ReconstructionFailed(format!(
                    "fit on chamber {} disagrees at k={k}, λ′={:?}: expected {want}, fitted {got}",
                    cell.poly,
                    b.iter().map(|x| x.to_string()).collect::<Vec<_>>()
                )));
            }
        }
    }
    Ok(qp)
}

/// Reconstruct π_*m as Σ q_G[C_{G,σ′}] over the faces G of the chambers.
/// Faces are processed by decreasing dimension, each fitted to the residual
/// left by the larger faces, so corrections on walls come out explicitly.
pub fn push_reconstruct(
    m: &PiecewiseQP,
    pi: &QuotientMap,
    chambers: Option<&[Polyhedron]>,
    opts: &ReconstructOptions,
) -> Result<PiecewiseQP> {
    require_proper(m, pi)?;
    let dp = pi.target_dim();
    let live: Vec<&Piece> = m.pieces().iter().filter(|p| !p.p.is_empty() && !p.q.is_zero()).collect();
    if live.is_empty() {
        return Ok(PiecewiseQP::zero(dp));
    }
    let shifts: Vec<QVec> = live.iter().map(|p| pi.apply(&p.sigma)).sorted().dedup().collect();
    if shifts.len() != 1 {
        return Err(Error::InvalidArgument("pieces project to different shifts; reconstruct them separately".into()));
    }
    let sigma = shifts[0].clone();
    let chambers: Vec<Polyhedron> = match chambers {
        Some(c) => c.to_vec(),
        None => default_chambers(m, pi)?,
    };
    if chambers.iter().any(|c| c.ambient_dim() != dp) {
        return Err(Error::DimensionMismatch { expected: dp, got: chambers.iter().map(|c| c.ambient_dim()).find(|&x| x != dp).unwrap() });
    }
    let mut faces: Vec<Polyhedron> = Vec::new();
    for c in &chambers {
        for f in c.faces() {
            let fp = c.face_poly(&f);
            if !faces.iter().any(|o| o.same_set(&fp)) {
                faces.push(fp);
            }
        }
    }
    faces.sort_by(|a, b| b.dim().cmp(&a.dim()).then(a.key().cmp(&b.key())));
    let cells: Vec<Cell> = faces.into_iter().map(Cell::new).collect();

    let deg = opts.degree.unwrap_or_else(|| {
        live.iter().map(|p| p.q.total_degree().unwrap_or(0) + p.p.dim().max(0) as u32).max().unwrap_or(0)
    });
    let period = opts.period.unwrap_or_else(|| {
        let mut per = m.period_bound();
        for pc in &live {
            for v in pc.p.vertices() {
                per = lcm_u(per, den_lcm(&pi.apply(v)));
            }
        }
        per = lcm_u(per, den_lcm(&sigma));
        for c in &chambers {
            for v in c.vertices() {
                per = lcm_u(per, den_lcm(v));
            }
        }
        per
    });
    let p = period as i64;
    let fit_levels: Vec<i64> = (1..=p * (deg as i64 + 3)).collect();
    let kmax_fit = *fit_levels.last().unwrap();
    let check_levels: Vec<i64> = (kmax_fit + 1..=kmax_fit + 2 * p).collect();

    // sampling box per level: chamber vertices scaled, widened for rays
    let mut vlo = vec![q(0); dp];
    let mut vhi = vec![q(0); dp];
    let mut any = false;
    for c in &chambers {
        for v in c.vertices() {
            for i in 0..dp {
                if !any || v[i] < vlo[i] {
                    vlo[i] = v[i].clone();
                }
                if !any || v[i] > vhi[i] {
                    vhi[i] = v[i].clone();
                }
            }
            any = true;
        }
    }
    let unbounded = chambers.iter().any(|c| !c.is_bounded());
    let ext = if unbounded { q(2) } else { q(0) };
    let mut samples: HashMap<i64, Vec<ZVec>> = HashMap::new();
    let mut pushed: HashMap<i64, BTreeMap<ZVec, Cyclotomic>> = HashMap::new();
    for &k in fit_levels.iter().chain(&check_levels) {
        let kq = q(k);
        let lo: QVec = (0..dp).map(|i| &kq * (&vlo[i] - &ext) + &sigma[i] - q(1)).collect();
        let hi: QVec = (0..dp).map(|i| &kq * (&vhi[i] + &ext) + &sigma[i] + q(1)).collect();
        let pts = enumerate_lattice_points(&Polyhedron::cuboid(&lo, &hi))?;
        samples.insert(k, pts);
        pushed.insert(k, push_level(m, pi, k, &lo, &hi)?);
    }

    let mut result = PiecewiseQP::zero(dp);
    for cell in &cells {
        let current = result.clone();
        let values = |k: i64, b: &ZVec| -> Cyclotomic {
            let target = pushed[&k].get(b).cloned().unwrap_or_else(Cyclotomic::zero);
            target.sub_ref(&current.eval_z(k, b).expect("k positive"))
        };
        let qp = fit_cell(cell, &sigma, &values, &samples, &fit_levels, &check_levels, deg, period)?;
        if !qp.is_zero() {
            result.push(qp, cell.poly.clone(), sigma.clone());
        }
    }
    // everything outside the chambers must vanish
    for &k in &check_levels {
        for b in &samples[&k] {
            let want = pushed[&k].get(b).cloned().unwrap_or_else(Cyclotomic::zero);
            let got = result.eval_z(k, b)?;
            if want != got {
                return Err(Error::ReconstructionFailed(format!(
                    "chambers do not cover the support: k={k}, λ′={:?}: expected {want}, fitted {got}",
                    b.iter().map(|x| x.to_string()).collect::<Vec<_>>()
                )));
            }
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::theta_sample;
    use crate::scalars::rational::qvec;

    fn simplex() -> PiecewiseQP {
        PiecewiseQP::indicator(Polyhedron::from_ineqs(
            2,
            &[(qvec(&[1, 0]), q(0)), (qvec(&[0, 1]), q(0)), (qvec(&[-1, -1]), q(-1))],
        ))
    }

    fn lam(d: usize, i: usize) -> QuasiPolynomial {
        QuasiPolynomial::lambda(d, i)
    }

    pub(crate) fn final_example() -> PiecewiseQP {
        // (1/4)(1 − (−1)^a)(1 − (−1)^{a−b})
        let one = QuasiPolynomial::one(2);
        let ca = QuasiPolynomial::character(&[qf(1, 2), q(0)]);
        let cab = QuasiPolynomial::character(&[qf(1, 2), qf(1, 2)]);
        let qq = one.sub(&ca).mul(&one.sub(&cab)).scale_q(&qf(1, 4));
        let p = Polyhedron::from_ineqs(
            2,
            &[(qvec(&[1, 0]), q(0)), (qvec(&[-1, 0]), q(-2)), (qvec(&[1, 1]), q(0)), (qvec(&[1, -1]), q(0))],
        );
        PiecewiseQP::single(qq, p, qvec(&[0, 0]))
    }

    #[test]
    fn quotient_maps() {
        let pi = QuotientMap::quotient_by(&[qvec(&[1, -1])], 2).unwrap();
        assert_eq!(pi.target_dim(), 1);
        let v = pi.apply(&qvec(&[2, 3]));
        assert!(v == qvec(&[5]) || v == qvec(&[-5]));
        let pi2 = QuotientMap::new(&[qvec(&[2, 0])], 2).unwrap();
        assert_eq!(pi2.apply(&qvec(&[1, 7])), qvec(&[1]));
        assert!(QuotientMap::new(&[qvec(&[0, 0])], 2).is_err());
    }

    #[test]
    fn properness() {
        let pi = QuotientMap::new(&[qvec(&[0, 1])], 2).unwrap();
        assert!(properness_check(&simplex(), &pi).proper);
        let half = PiecewiseQP::indicator(Polyhedron::from_ineqs(2, &[(qvec(&[1, 0]), q(0))]));
        let pi1 = QuotientMap::new(&[qvec(&[1, 0])], 2).unwrap();
        let r = properness_check(&half, &pi1);
        assert!(!r.proper);
        assert!(r.violating.is_some());
        assert!(!properness_check(&PiecewiseQP::indicator(Polyhedron::whole(2)), &pi1).proper);
        assert!(push_eval(&half, &pi1, 1, &[BigInt::from(0)]).is_err());
    }

    #[test]
    fn simplex_pushforward() {
        let pi = QuotientMap::new(&[qvec(&[1, 1])], 2).unwrap();
        for k in 1..6 {
            for b in 0..=k {
                let v = push_eval(&simplex(), &pi, k, &[BigInt::from(b)]).unwrap();
                assert_eq!(v, Cyclotomic::from_i64(b + 1));
            }
            assert!(push_eval(&simplex(), &pi, k, &[BigInt::from(k + 1)]).unwrap().is_zero());
        }
        let s = push_theta(&simplex(), &pi, 3, &Window::parse("[-1,2]").unwrap()).unwrap();
        let w: Vec<Cyclotomic> = s.atoms.iter().map(|a| a.1.clone()).collect();
        assert_eq!(w, (1..=4).map(Cyclotomic::from_i64).collect::<Vec<_>>());
        let r = push_reconstruct(&simplex(), &pi, None, &ReconstructOptions::default()).unwrap();
        let m3 = PiecewiseQP::single(lam(1, 0).add(&QuasiPolynomial::one(1)), Polyhedron::interval(q(0), q(1)), qvec(&[0]));
        assert!(r.sub(&m3).zero_test(12).is_zero(), "{r}");
    }

    #[test]
    fn final_example_reconstruction() {
        let m = final_example();
        let pi = QuotientMap::new(&[qvec(&[0, 1])], 2).unwrap();
        assert_eq!(push_eval(&m, &pi, 2, &[BigInt::from(0)]).unwrap(), Cyclotomic::from_i64(2));
        let r = push_reconstruct(&m, &pi, None, &ReconstructOptions::default()).unwrap();
        for k in 1..10 {
            let w = Window::parse("[-3,3]").unwrap();
            let a = push_theta(&m, &pi, k, &w).unwrap();
            let b = theta_sample(&r, k, &w).unwrap();
            assert_eq!(a, b);
        }
        let pieces: Vec<(isize, &Polyhedron)> = r.pieces().iter().map(|p| (p.p.dim(), &p.p)).collect();
        assert_eq!(pieces.len(), 3, "{r}");
    }
}
