//! Asymptotic expansions A(m;k) of Θ(m;k) through Brianchon-Gram cones,
//! unimodular pieces and the twisted Euler-Maclaurin formula on each axis.

use std::collections::HashMap;

use num_traits::Zero;

use crate::distributions::{reference_faces, AsymptoticSeries, DTerm, PCoeff, RDistribution};
use crate::error::{Error, Result};
use crate::lattice::{hermite_complement, saturated_basis, sublattice_index, to_q, Lattice};
use crate::linalg;
use crate::piecewise::PiecewiseQP;
use crate::polyhedron::{brianchon_gram_general, triangulate_and_unimodularize, Polyhedron, UnimodularPiece};
use crate::quasipoly::{fiber_split, QuasiPolynomial};
use crate::scalars::rational::{binom, ceil, den_u, dot, factorial, floor, frac, is_int, lcm_u, q, qint, vzero, Q, QVec};
use crate::scalars::{Cyclotomic, Periodic};

/// Extra orders carried through intermediate character series.
fn guard_order() -> i64 {
    std::env::var("ASYMPTHETA_GUARD_ORDER").ok().and_then(|s| s.parse().ok()).unwrap_or(1)
}

fn cyc_series_inverse(a: &[Cyclotomic], n: usize) -> Vec<Cyclotomic> {
    let inv0 = a[0].inv().expect("invertible constant term");
    let mut b = vec![Cyclotomic::zero(); n];
    if n == 0 {
        return b;
    }
    b[0] = inv0.clone();
    for i in 1..n {
        let mut s = Cyclotomic::zero();
        for j in 1..=i.min(a.len() - 1) {
            s = s.add_ref(&a[j].mul_ref(&b[i - j]));
        }
        b[i] = s.mul_ref(&inv0).neg_ref();
    }
    b
}

/// β_j with Σ β_j t^j/j! = t/(ζe^t − 1), ζ = e^{2πiθ}, for j < n.
pub fn zeta_bernoulli_numbers(theta: &Q, n: usize) -> Vec<Cyclotomic> {
    let z = Cyclotomic::exp2pi(theta);
    let inv_fact = |j: u32| Q::new(1.into(), factorial(j));
    let series: Vec<Cyclotomic> = if z.is_one() {
        // t/(e^t−1) = 1/Σ t^j/(j+1)!
        let a: Vec<Cyclotomic> = (0..n as u32).map(|j| Cyclotomic::from_q(inv_fact(j + 1))).collect();
        cyc_series_inverse(&a, n)
    } else {
        // t · 1/(ζe^t − 1)
        let mut a: Vec<Cyclotomic> = (0..n as u32).map(|j| z.scale(&inv_fact(j))).collect();
        if a.is_empty() {
            return vec![];
        }
        a[0] = a[0].sub_ref(&Cyclotomic::one());
        let h = cyc_series_inverse(&a, n);
        let mut s = vec![Cyclotomic::zero()];
        s.extend(h.into_iter().take(n.saturating_sub(1)));
        s.truncate(n);
        s
    };
    series.into_iter().enumerate().map(|(j, c)| c.scale(&Q::from(factorial(j as u32)))).collect()
}

/// B_{n,ζ}(x) = Σ_j C(n,j) β_j x^{n−j}.
pub fn zeta_bernoulli_poly(n: usize, beta: &[Cyclotomic], x: &Q) -> Cyclotomic {
    let mut acc = Cyclotomic::zero();
    for j in 0..=n {
        let c = qint(&binom(n as u32, j as u32)) * num_traits::pow(x.clone(), n - j);
        acc = acc.add_ref(&beta[j].scale(&c));
    }
    acc
}

/// Order of e^{2πiθ}.
fn root_order(theta: &Q) -> u64 {
    den_u(theta)
}

fn qfloor(x: &Q) -> Q {
    qint(&floor(x))
}

fn qceil(x: &Q) -> Q {
    qint(&ceil(x))
}

/// One axis of a unimodular piece: Σ_{n ≥ ks+τ'} ζ^n δ_{(n+δ')/k}
/// (n > ks+τ' when open) with position measured along the generator.
struct Axis {
    s: Q,
    tau: Q,
    delta: Q,
    open: bool,
    theta: Q,
}

impl Axis {
    fn first(&self, k: i64) -> Q {
        let x = &self.s * q(k) + &self.tau - &self.delta;
        if self.open {
            qfloor(&x) + q(1)
        } else {
            qceil(&x)
        }
    }

    /// ζ^{n0} and h = n0 − ks + δ'.
    fn data(&self, k: i64) -> (Cyclotomic, Q) {
        let n0 = self.first(k);
        let h = &n0 - &self.s * q(k) + &self.delta;
        (Cyclotomic::exp2pi(&frac(&(&self.theta * &n0))), h)
    }

    fn period(&self) -> u64 {
        den_u(&self.s) * root_order(&self.theta)
    }
}

/// Distribution-valued series of e^{2πiuk} Σ_{λ ∈ (kC+σ)∩Z^d} g^λ δ_{λ/k}
/// for a cone C, exact down to the power k^{floor}.
pub fn cone_character_series(cone: &Polyhedron, sigma: &[Q], u: &Q, g: &[Q], floor_pow: i64) -> Result<AsymptoticSeries> {
    let d = cone.ambient_dim();
    let apex = cone.apex().ok_or_else(|| Error::InvalidArgument("expected a cone".into()))?;
    let hull = cone.hull()?.clone();
    let w = hull.dim();
    let order = (w as i64 - floor_pow).max(0) as usize;
    let zero = AsymptoticSeries::zero(d, w as i64, order);
    let fs = fiber_split(&hull, sigma)?;
    let Some(index) = fs.index.clone() else { return Ok(zero) };
    let bw: Vec<QVec> = fs.w_basis.iter().map(|c| to_q(c)).collect();
    let br: Vec<QVec> = fs.r_basis.iter().map(|c| to_q(c)).collect();
    let mut cols = bw.clone();
    cols.extend(br.iter().cloned());
    let minv = linalg::inverse(&linalg::from_cols(&cols, d)).expect("unimodular");
    let w_coords = |x: &[Q]| -> QVec { linalg::mat_vec(&minv, x)[..w].to_vec() };
    let comb = |basis: &[QVec], c: &[Q]| -> QVec {
        let mut v = vzero(d);
        for (ci, b) in c.iter().zip(basis) {
            for i in 0..d {
                v[i] += ci * &b[i];
            }
        }
        v
    };
    let g_w: QVec = bw.iter().map(|b| dot(g, b)).collect();
    let u_tw = u + dot(g, &comb(&br, &fs.a_r));
    let c_shift = comb(&br, &fs.sigma_r);
    let const0 = Cyclotomic::exp2pi(&frac(&dot(g, &c_shift)));
    let base_r = comb(&br, &fs.a_r);

    let aw = w_coords(&apex.point);
    let rays_w: Vec<QVec> = cone.rays().iter().map(|r| w_coords(r)).collect();
    let lin_w: Vec<QVec> = cone.lineality().iter().map(|r| w_coords(r)).collect();

    // split Z^w = L ⊕ M along the lineality space
    let bl: Vec<QVec> = if lin_w.is_empty() { vec![] } else { saturated_basis(&lin_w, w).iter().map(|c| to_q(c)).collect() };
    if bl.iter().any(|b| !is_int(&dot(&g_w, b))) {
        return Ok(zero);
    }
    let bm: Vec<QVec> = if w == 0 {
        vec![]
    } else {
        let lat = Lattice::new(w, bl.iter().map(|b| crate::lattice::to_z(b).expect("integral")).collect());
        hermite_complement(&lat)?.basis.iter().map(|c| to_q(c)).collect()
    };
    let l = bl.len();
    let mdim = bm.len();
    let inv2 = if w == 0 {
        vec![]
    } else {
        let mut c2 = bl.clone();
        c2.extend(bm.iter().cloned());
        linalg::inverse(&linalg::from_cols(&c2, w)).expect("unimodular")
    };
    let m_coords = |y: &[Q]| -> QVec {
        if w == 0 {
            return vec![];
        }
        linalg::mat_vec(&inv2, y)[l..].to_vec()
    };
    let a_m = m_coords(&aw);
    let s_m = m_coords(&fs.sigma_w);
    let rays_m: Vec<QVec> = rays_w.iter().map(|r| m_coords(r)).collect();
    let g_m: QVec = bm.iter().map(|b| dot(&g_w, b)).collect();
    let to_x_w = |y: &[Q]| comb(&bw, y);
    let xl: Vec<QVec> = bl.iter().map(|b| to_x_w(b)).collect();
    let to_x_m = |t: &[Q]| to_x_w(&comb_w(&bm, t, w));
    let apex_x = crate::scalars::rational::vadd(&base_r, &to_x_m(&a_m));

    let pieces: Vec<UnimodularPiece> = if mdim == 0 {
        vec![UnimodularPiece { gens: vec![], open: vec![], reps: vec![vec![]] }]
    } else {
        triangulate_and_unimodularize(&rays_m)?
    };
    let nmax = order;
    let global_period = lcm_u(index.n0 as u64, den_u(&u_tw));
    let mut coeffs = vec![RDistribution::zero(d); order + 1];
    let mut bern_cache: HashMap<Q, Vec<Cyclotomic>> = HashMap::new();

    for piece in &pieces {
        let a_cols = piece.gens.clone();
        let (s, tau) = if mdim == 0 {
            (vec![], vec![])
        } else {
            let ainv = linalg::inverse(&linalg::from_cols(&a_cols, mdim)).expect("simplicial");
            (linalg::mat_vec(&ainv, &a_m), linalg::mat_vec(&ainv, &s_m))
        };
        let thetas: Vec<Q> = a_cols.iter().map(|a| frac(&dot(&g_m, a))).collect();
        for th in &thetas {
            bern_cache.entry(th.clone()).or_insert_with(|| zeta_bernoulli_numbers(th, nmax + 2));
        }
        let ainv_opt = if mdim == 0 { None } else { linalg::inverse(&linalg::from_cols(&a_cols, mdim)) };
        // coset data: g_M^δ and per-axis descriptions
        let cosets: Vec<(Cyclotomic, Vec<Axis>)> = piece
            .reps
            .iter()
            .map(|rep| {
                let rq = to_q(rep);
                let dl = ainv_opt.as_ref().map(|ai| linalg::mat_vec(ai, &rq)).unwrap_or_default();
                let wt = Cyclotomic::exp2pi(&frac(&dot(&g_m, &rq)));
                let axes = (0..mdim)
                    .map(|i| Axis {
                        s: s[i].clone(),
                        tau: tau[i].clone(),
                        delta: dl[i].clone(),
                        open: piece.open[i],
                        theta: thetas[i].clone(),
                    })
                    .collect();
                (wt, axes)
            })
            .collect();
        let period = cosets
            .iter()
            .flat_map(|(_, ax)| ax.iter().map(|a| a.period()))
            .fold(global_period, lcm_u);
        let gens_x: Vec<QVec> = a_cols.iter().map(|a| to_x_m(a)).collect();

        // terms of the product of axis series: compositions n with face cone(α_S), S = {n_i = 0}
        struct Comp {
            total: usize,
            n: Vec<usize>,
            scalar: Q,
            face: Polyhedron,
            dirs: Vec<QVec>,
        }
        let mut comps: Vec<Comp> = Vec::new();
        for total in 0..=nmax {
            for n in compositions(total, mdim) {
                if (0..mdim).any(|i| n[i] == 0 && !thetas[i].is_zero()) {
                    continue;
                }
                let sset: Vec<usize> = (0..mdim).filter(|&i| n[i] == 0).collect();
                let face_gens: Vec<QVec> = sset.iter().map(|&i| gens_x[i].clone()).collect();
                let alpha_s: Vec<QVec> = sset.iter().map(|&i| a_cols[i].clone()).collect();
                let i_s = if alpha_s.is_empty() { q(1) } else { qint(&sublattice_index(&alpha_s, mdim)) };
                let mut scalar = q(1) / i_s;
                for &ni in &n {
                    if ni > 0 {
                        let sg = if ni % 2 == 0 { q(1) } else { q(-1) };
                        scalar = scalar * sg / Q::from(factorial(ni as u32));
                    }
                }
                let face = Polyhedron::from_generators(&apex_x, &face_gens, &xl);
                let mut dirs = Vec::new();
                for i in 0..mdim {
                    for _ in 1..n[i].max(1) {
                        dirs.push(gens_x[i].clone());
                    }
                }
                comps.push(Comp { total, n, scalar, face, dirs });
            }
        }
        if comps.is_empty() {
            continue;
        }
        // axis data only depends on k modulo the axis period, Bernoulli values only on (θ, h)
        let mut bern_memo: HashMap<(Q, Q), Vec<Cyclotomic>> = HashMap::new();
        let axis_tables: Vec<Vec<Vec<(Cyclotomic, Vec<Cyclotomic>)>>> = cosets
            .iter()
            .map(|(_, axes)| {
                axes.iter()
                    .map(|ax| {
                        (0..ax.period() as i64)
                            .map(|k| {
                                let (zn0, h) = ax.data(k);
                                let vals = bern_memo
                                    .entry((ax.theta.clone(), h.clone()))
                                    .or_insert_with(|| {
                                        let beta = &bern_cache[&ax.theta];
                                        (0..=nmax).map(|n| if n == 0 { Cyclotomic::one() } else { zeta_bernoulli_poly(n, beta, &h) }).collect()
                                    })
                                    .clone();
                                (zn0, vals)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut tables: Vec<Vec<Cyclotomic>> = vec![Vec::with_capacity(period as usize); comps.len()];
        for k in 0..period as i64 {
            if !index.contains(k) {
                for t in tables.iter_mut() {
                    t.push(Cyclotomic::zero());
                }
                continue;
            }
            let kfac = const0.mul_ref(&Cyclotomic::exp2pi(&frac(&(&u_tw * q(k)))));
            let data: Vec<(Cyclotomic, Vec<&Vec<Cyclotomic>>)> = cosets
                .iter()
                .zip(&axis_tables)
                .map(|((wt, _), tabs)| {
                    let mut base = wt.clone();
                    let per_axis = tabs
                        .iter()
                        .map(|tab| {
                            let (zn0, vals) = &tab[k as usize % tab.len()];
                            base = base.mul_ref(zn0);
                            vals
                        })
                        .collect();
                    (base, per_axis)
                })
                .collect();
            for (c, t) in comps.iter().zip(tables.iter_mut()) {
                let mut acc = Cyclotomic::zero();
                for (base, per_axis) in &data {
                    let mut v = base.clone();
                    for (i, &ni) in c.n.iter().enumerate() {
                        if ni > 0 {
                            v = v.mul_ref(&per_axis[i][ni]);
                        }
                    }
                    acc = acc.add_ref(&v);
                }
                t.push(acc.mul_ref(&kfac).scale(&c.scalar));
            }
        }
        for (c, t) in comps.into_iter().zip(tables) {
            let coeff = Periodic::from_table(t);
            if coeff.is_zero() {
                continue;
            }
            let mut r = RDistribution::zero(d);
            r.push(DTerm { face: c.face, dirs: c.dirs, coeff: PCoeff::constant(d, coeff) });
            coeffs[c.total].add_assign(&r);
        }
    }
    let series = AsymptoticSeries::from_coeffs(d, w as i64, coeffs);
    Ok(series.translate(&c_shift))
}

fn comb_w(basis: &[QVec], c: &[Q], w: usize) -> QVec {
    let mut v = vzero(w);
    for (ci, b) in c.iter().zip(basis) {
        for i in 0..w {
            v[i] += ci * &b[i];
        }
    }
    v
}

/// Tuples of `parts` non-negative integers summing to `total`.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct Expansion {
    pub series: AsymptoticSeries,
    /// Leading exponent dim P + deg q maximized over pieces.
    pub s_max: i64,
    pub warnings: Vec<String>,
}

impl Expansion {
    pub fn pretty(&self) -> String {
        let mut s = self.series.pretty();
        for w in &self.warnings {
            s.push_str(&format!("\n# warning: {w}"));
        }
        s
    }
}

/// Unnormalized sum of the piece expansions, exact through k^{floor}.
pub fn expand_raw(m: &PiecewiseQP, floor_pow: i64) -> Result<AsymptoticSeries> {
    let d = m.dim();
    let char_floor = floor_pow - guard_order();
    let mut total: Option<AsymptoticSeries> = None;
    for pc in m.pieces() {
        if pc.p.is_empty() {
            continue;
        }
        let cones: Vec<(i32, Polyhedron)> = if pc.p.is_cone() { vec![(1, pc.p.clone())] } else { brianchon_gram_general(&pc.p) };
        for (u, g, p) in pc.q.terms() {
            let mut acc: Option<AsymptoticSeries> = None;
            for (sign, c) in &cones {
                let s = cone_character_series(c, &pc.sigma, u, g, char_floor)?;
                let s = if *sign < 0 { s.neg() } else { s };
                acc = Some(match acc {
                    None => s,
                    Some(a) => a.add(&s),
                });
            }
            let Some(acc) = acc else { continue };
            let h = QuasiPolynomial::term(d, q(0), vzero(d), p.clone());
            let scaled = acc.scale_h(&h)?;
            total = Some(match total {
                None => scaled,
                Some(t) => t.add(&scaled),
            });
        }
    }
    Ok(match total {
        None => AsymptoticSeries::zero(d, floor_pow, 0),
        Some(t) => t,
    })
}

/// A(m;k) through N orders below the leading exponent, in normal form over
/// the faces of the input polyhedra.
pub fn expand(m: &PiecewiseQP, n_orders: usize) -> Result<Expansion> {
    let d = m.dim();
    let s_max = m
        .pieces()
        .iter()
        .filter(|p| !p.p.is_empty() && !p.q.is_zero())
        .map(|p| p.p.dim() as i64 + p.q.total_degree().unwrap_or(0) as i64)
        .max();
    let Some(s_max) = s_max else {
        return Ok(Expansion { series: AsymptoticSeries::zero(d, 0, n_orders), s_max: 0, warnings: vec![] });
    };
    let floor_pow = s_max - n_orders as i64;
    let raw = expand_raw(m, floor_pow)?;
    let raw = raw.regrade(s_max, floor_pow);
    let polys: Vec<&Polyhedron> = m.pieces().iter().map(|p| &p.p).collect();
    let cands = reference_faces(&polys);
    let (series, warnings) = raw.normal_form(&cands);
    Ok(Expansion { series, s_max, warnings })
}

/// The leading nonzero coefficient k^e θ(k), searching down to `max_orders`.
pub fn leading_term(m: &PiecewiseQP, max_orders: usize) -> Result<Option<(i64, RDistribution)>> {
    let e = expand(m, max_orders)?;
    for (n, c) in e.series.coeffs().iter().enumerate() {
        if !c.is_empty() {
            return Ok(Some((e.s_max - n as i64, c.clone())));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{theta_pair_poly, Region};
    use crate::scalars::rational::{qf, qvec};
    use crate::scalars::MultiPoly;

    fn x1() -> MultiPoly<Q> {
        MultiPoly::var(1, 0)
    }

    #[test]
    fn bernoulli_numbers() {
        let b = zeta_bernoulli_numbers(&q(0), 5);
        let want = [q(1), qf(-1, 2), qf(1, 6), q(0), qf(-1, 30)];
        for (x, y) in b.iter().zip(want) {
            assert_eq!(*x, Cyclotomic::from_q(y));
        }
        // ζ = −1: t/(−e^t − 1) = −t/2 + t^2/4 + ...
        let b = zeta_bernoulli_numbers(&qf(1, 2), 3);
        assert_eq!(b[0], Cyclotomic::zero());
        assert_eq!(b[1], Cyclotomic::from_q(qf(-1, 2)));
        assert_eq!(b[2], Cyclotomic::from_q(qf(1, 2)));
    }

    #[test]
    fn interval_expansion() {
        let m1 = PiecewiseQP::indicator(Polyhedron::interval(q(0), q(1)));
        let e = expand(&m1, 3).unwrap();
        assert!(e.warnings.is_empty(), "{:?}", e.warnings);
        let s = e.series.pretty();
        assert!(s.contains("mu_[0,1]"), "{s}");
        for k in 1..6 {
            for deg in 0..4u32 {
                let phi = x1().pow(deg);
                let want = theta_pair_poly(&m1, k, &phi, &Region::Global).unwrap();
                assert_eq!(e.series.pair(k, &phi).unwrap(), want, "k={k} deg={deg}\n{s}");
            }
        }
    }

    #[test]
    fn twisted_interval() {
        // (−1)^λ on [0,1]
        let q1 = QuasiPolynomial::character(&[qf(1, 2)]);
        let m = PiecewiseQP::single(q1, Polyhedron::interval(q(0), q(1)), qvec(&[0]));
        let e = expand(&m, 4).unwrap();
        for k in 1..7 {
            for deg in 0..3u32 {
                let phi = x1().pow(deg);
                let want = theta_pair_poly(&m, k, &phi, &Region::Global).unwrap();
                assert_eq!(e.series.pair(k, &phi).unwrap(), want, "k={k}\n{}", e.series.pretty());
            }
        }
    }

    #[test]
    fn rational_shifted_triangle() {
        let t = Polyhedron::from_ineqs(2, &[(qvec(&[1, 0]), q(0)), (qvec(&[0, 1]), q(0)), (qvec(&[-1, -2]), q(-2))]);
        let lam = QuasiPolynomial::lambda(2, 0);
        let m = PiecewiseQP::single(lam, t, vec![qf(1, 2), q(0)]);
        let e = expand(&m, 4).unwrap();
        let phis = [MultiPoly::one(2), MultiPoly::var(2, 1), MultiPoly::var(2, 0).mul(&MultiPoly::var(2, 1))];
        for k in 1..5 {
            for phi in &phis {
                let want = theta_pair_poly(&m, k, phi, &Region::Global).unwrap();
                assert_eq!(e.series.pair(k, phi).unwrap(), want, "k={k}\n{}", e.series.pretty());
            }
        }
    }
}
