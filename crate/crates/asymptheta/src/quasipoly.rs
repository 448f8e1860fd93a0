//! Quasi-polynomials on Z ⊕ Z^d in exponential-polynomial form
//! Σ e^{2πiuk} g^λ p(k,λ), one term per (u, g) with u, g reduced mod 1.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{hermite_complement, saturated_basis, to_q, Lattice, ZVec};
use crate::linalg;
use crate::polyhedron::{parallelepiped_points, AffineSubspace};
use crate::scalars::rational::{den_lcm, dot, fmt_q, frac, is_int, q, vsub, vzero, Q, QVec};
use crate::scalars::{Cyclotomic, MultiPoly, Periodic};

/// Polynomials in (k, λ_1..λ_d); variable 0 is k.
pub type KPoly = MultiPoly<Cyclotomic>;

pub fn reduce_mod1(v: &[Q]) -> QVec {
    v.iter().map(frac).collect()
}

/// g^λ = e^{2πi⟨g,λ⟩} for λ integral (rational λ is accepted when ⟨g,λ⟩ is).
pub fn char_value(g: &[Q], lambda: &[Q]) -> Cyclotomic {
    Cyclotomic::exp2pi(&dot(g, lambda))
}

/// k ↦ e^{2πiuk} as a periodic table.
pub fn twist_table(u: &Q) -> Periodic {
    let n = den_lcm(std::slice::from_ref(u));
    Periodic::from_fn(n, |k| Cyclotomic::exp2pi(&(u * q(k))))
}

#[derive(Clone, PartialEq)]
pub struct QuasiPolynomial {
    d: usize,
    terms: BTreeMap<(Q, QVec), KPoly>,
}

impl QuasiPolynomial {
    pub fn zero(d: usize) -> Self {
        QuasiPolynomial { d, terms: BTreeMap::new() }
    }

    pub fn one(d: usize) -> Self {
        Self::from_poly(d, KPoly::one(d + 1))
    }

    pub fn constant(d: usize, c: Cyclotomic) -> Self {
        Self::from_poly(d, KPoly::constant(d + 1, c))
    }

    pub fn from_poly(d: usize, p: KPoly) -> Self {
        Self::term(d, Q::zero(), vzero(d), p)
    }

    pub fn from_qpoly(d: usize, p: &MultiPoly<Q>) -> Self {
        Self::from_poly(d, p.to_ring())
    }

    pub fn term(d: usize, u: Q, g: QVec, p: KPoly) -> Self {
        let mut r = Self::zero(d);
        r.add_term(u, g, p);
        r
    }

    /// λ_i as a quasi-polynomial.
    pub fn lambda(d: usize, i: usize) -> Self {
        Self::from_poly(d, KPoly::var(d + 1, i + 1))
    }

    pub fn k_var(d: usize) -> Self {
        Self::from_poly(d, KPoly::var(d + 1, 0))
    }

    /// g^λ.
    pub fn character(g: &[Q]) -> Self {
        let d = g.len();
        Self::term(d, Q::zero(), g.to_vec(), KPoly::one(d + 1))
    }

    /// e^{2πiuk}.
    pub fn k_twist(d: usize, u: Q) -> Self {
        Self::term(d, u, vzero(d), KPoly::one(d + 1))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn add_term(&mut self, u: Q, g: QVec, p: KPoly) {
        assert_eq!(p.nvars(), self.d + 1);
        let key = (frac(&u), reduce_mod1(&g));
        let e = self.terms.entry(key.clone()).or_insert_with(|| KPoly::zero(self.d + 1));
        e.add_assign(&p);
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Q, &QVec, &KPoly)> {
        self.terms.iter().map(|((u, g), p)| (u, g, p))
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree in λ.
    pub fn degree(&self) -> Option<u32> {
        let vars: Vec<usize> = (1..=self.d).collect();
        self.terms.values().filter_map(|p| p.degree_in(&vars)).max()
    }

    /// Total degree in (k, λ).
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.values().filter_map(|p| p.total_degree()).max()
    }

    /// lcm of the denominators of all u and g entries.
    pub fn period_bound(&self) -> u64 {
        let mut all: Vec<Q> = Vec::new();
        for (u, g) in self.terms.keys() {
            all.push(u.clone());
            all.extend(g.iter().cloned());
        }
        den_lcm(&all)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for ((u, g), p) in &o.terms {
            r.add_term(u.clone(), g.clone(), p.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        self.scale_c(&Cyclotomic::from_i64(-1))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.d);
        for ((u1, g1), p1) in &self.terms {
            for ((u2, g2), p2) in &o.terms {
                let g: QVec = g1.iter().zip(g2).map(|(a, b)| a + b).collect();
                r.add_term(u1 + u2, g, p1.mul(p2));
            }
        }
        r
    }

    pub fn scale_c(&self, c: &Cyclotomic) -> Self {
        let mut r = Self::zero(self.d);
        for ((u, g), p) in &self.terms {
            r.add_term(u.clone(), g.clone(), p.mul_c(c));
        }
        r
    }

    pub fn scale_q(&self, s: &Q) -> Self {
        self.scale_c(&Cyclotomic::from_q(s.clone()))
    }

    /// Multiply by g^λ.
    pub fn twist(&self, g: &[Q]) -> Self {
        self.mul(&Self::character(g))
    }

    pub fn eval(&self, k: i64, lambda: &[Q]) -> Cyclotomic {
        let mut pt = vec![q(k)];
        pt.extend(lambda.iter().cloned());
        let mut acc = Cyclotomic::zero();
        for ((u, g), p) in &self.terms {
            let w = Cyclotomic::exp2pi(&(u * q(k))).mul_ref(&char_value(g, lambda));
            acc = acc.add_ref(&w.mul_ref(&p.eval(&pt)));
        }
        acc
    }

    pub fn eval_z(&self, k: i64, lambda: &[BigInt]) -> Cyclotomic {
        self.eval(k, &to_q(lambda))
    }

    /// (τ_σ q)(k,λ) = q(k,λ−σ) for integral σ.
    pub fn translate(&self, sigma: &[Q]) -> Result<Self> {
        if !sigma.iter().all(is_int) {
            return Err(Error::NonIntegral(format!("translation by {:?}", sigma.iter().map(fmt_q).collect::<Vec<_>>())));
        }
        let n = self.d + 1;
        let mut shift = vec![Q::zero()];
        shift.extend(sigma.iter().map(|s| -s.clone()));
        let id = linalg::identity(n);
        let mut r = Self::zero(self.d);
        for ((u, g), p) in &self.terms {
            let c = char_value(g, &sigma.iter().map(|s| -s.clone()).collect::<Vec<_>>());
            r.add_term(u.clone(), g.clone(), p.compose_affine(&id, &shift, n).mul_c(&c));
        }
        Ok(r)
    }

    /// ∇_η^ζ q = q − ζ τ_η q, with ζ = e^{2πi z}.
    pub fn difference(&self, eta: &[Q], z: &Q) -> Result<Self> {
        let t = self.translate(eta)?;
        Ok(self.sub(&t.scale_c(&Cyclotomic::exp2pi(z))))
    }

    /// Drop terms whose character is non-trivial on the lattice spanned by `basis`.
    pub fn keep_trivial_on(&self, basis: &[ZVec]) -> Self {
        let mut r = Self::zero(self.d);
        for ((u, g), p) in &self.terms {
            if basis.iter().all(|b| is_int(&dot(g, &to_q(b)))) {
                r.add_term(u.clone(), g.clone(), p.clone());
            }
        }
        r
    }

    pub fn fmt_named(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut names = vec!["k".to_string()];
        if self.d == 1 {
            names.push("λ".into());
        } else {
            names.extend((1..=self.d).map(|i| format!("λ{}", i)));
        }
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let mut parts = Vec::new();
        for ((u, g), p) in &self.terms {
            let mut s = format!("({})", p.fmt_with(&refs));
            if !u.is_zero() {
                s = format!("e(k*{})*{}", fmt_q(u), s);
            }
            if g.iter().any(|x| !x.is_zero()) {
                s = format!("e(<[{}],λ>)*{}", g.iter().map(fmt_q).collect::<Vec<_>>().join(","), s);
            }
            parts.push(s);
        }
        parts.join(" + ")
    }
}

impl fmt::Debug for QuasiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_named())
    }
}

impl fmt::Display for QuasiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_named())
    }
}

/// Canonical form from polynomials given on the cosets of a full-rank
/// sublattice Γ' ⊂ Z^{1+d} (coordinates (k, λ)); `gens` are its generators.
pub fn qp_character_decompose(gens: &[ZVec], cosets: &[(ZVec, KPoly)]) -> Result<QuasiPolynomial> {
    let n = gens.first().map(|g| g.len()).ok_or_else(|| Error::InvalidArgument("empty sublattice".into()))?;
    let cols: Vec<QVec> = gens.iter().map(|g| to_q(g)).collect();
    let m = linalg::from_cols(&cols, n);
    if cols.len() != n || linalg::det(&m).is_zero() {
        return Err(Error::InvalidArgument("sublattice must have full rank".into()));
    }
    let index = linalg::det(&m).abs();
    if q(cosets.len() as i64) != index {
        return Err(Error::InvalidArgument(format!("expected {} cosets, got {}", index, cosets.len())));
    }
    let minv = linalg::inverse(&m).expect("full rank");
    for (i, (a, _)) in cosets.iter().enumerate() {
        for (b, _) in &cosets[..i] {
            let diff = vsub(&to_q(a), &to_q(b));
            if linalg::mat_vec(&minv, &diff).iter().all(is_int) {
                return Err(Error::InvalidArgument("overlapping cosets".into()));
            }
        }
    }
    // characters trivial on Γ': M^{-T} m for m ∈ Z^n / M^T Z^n
    let mt = linalg::transpose(&m, n);
    let mt_cols: Vec<QVec> = (0..n).map(|j| mt.iter().map(|row| row[j].clone()).collect()).collect();
    let mtinv = linalg::inverse(&mt).expect("full rank");
    let d = n - 1;
    let mut out = QuasiPolynomial::zero(d);
    let scale = Q::one() / &index;
    for rep in parallelepiped_points(&mt_cols, &vec![false; n]) {
        let chi = reduce_mod1(&linalg::mat_vec(&mtinv, &to_q(&rep)));
        let mut acc = KPoly::zero(n);
        for (mu, p) in cosets {
            let neg: QVec = to_q(mu).iter().map(|x| -x.clone()).collect();
            acc.add_assign(&p.mul_c(&char_value(&chi, &neg)));
        }
        out.add_term(chi[0].clone(), chi[1..].to_vec(), acc.scale_q(&scale));
    }
    Ok(out)
}

/// The arithmetic progression k₀ + n₀Z of levels k with (kA+σ) ∩ Z^d ≠ ∅.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSet {
    pub k0: i64,
    pub n0: i64,
}

impl IndexSet {
    pub fn contains(&self, k: i64) -> bool {
        (k - self.k0).rem_euclid(self.n0) == 0
    }

    /// [I](k) = (1/n₀) Σ_j e^{2πi j (k−k₀)/n₀}, as a quasi-polynomial in k.
    pub fn indicator(&self, d: usize) -> QuasiPolynomial {
        let mut r = QuasiPolynomial::zero(d);
        let inv = Q::new(BigInt::one(), BigInt::from(self.n0));
        for j in 0..self.n0 {
            let u = Q::new(BigInt::from(j), BigInt::from(self.n0));
            let c = Cyclotomic::exp2pi(&(-(&u) * q(self.k0)));
            r.add_term(u, vzero(d), KPoly::constant(d + 1, c.scale(&inv)));
        }
        r
    }
}

/// Data of the splitting Z^d = (lin A ∩ Z^d) ⊕ R used for restrictions to kA+σ.
#[derive(Clone, Debug)]
pub struct FiberSplit {
    pub w_basis: Vec<ZVec>,
    pub r_basis: Vec<ZVec>,
    /// Coordinates of the base point a and of σ along R.
    pub a_r: QVec,
    pub sigma_r: QVec,
    pub a_w: QVec,
    pub sigma_w: QVec,
    pub index: Option<IndexSet>,
}

pub fn fiber_split(a: &AffineSubspace, sigma: &[Q]) -> Result<FiberSplit> {
    let d = a.ambient_dim();
    let w_basis = saturated_basis(&a.basis, d);
    let r_basis = hermite_complement(&Lattice::new(d, w_basis.clone()))?.basis;
    let mut cols: Vec<QVec> = w_basis.iter().map(|c| to_q(c)).collect();
    cols.extend(r_basis.iter().map(|c| to_q(c)));
    let m = linalg::from_cols(&cols, d);
    let minv = linalg::inverse(&m).expect("unimodular");
    let w = w_basis.len();
    let ac = linalg::mat_vec(&minv, &a.point);
    let sc = linalg::mat_vec(&minv, sigma);
    let a_r = ac[w..].to_vec();
    let sigma_r = sc[w..].to_vec();
    let mut all = a_r.clone();
    all.extend(sigma_r.iter().cloned());
    let period = den_lcm(&all) as i64;
    let hits: Vec<i64> = (0..period)
        .filter(|&k| a_r.iter().zip(&sigma_r).all(|(x, s)| is_int(&(x * q(k) + s))))
        .collect();
    let index = if hits.is_empty() {
        None
    } else {
        let n0 = (1..=period).find(|&n| a_r.iter().all(|x| is_int(&(x * q(n))))).expect("period works");
        Some(IndexSet { k0: hits[0], n0 })
    };
    Ok(FiberSplit { w_basis, r_basis, a_r, sigma_r, a_w: ac[..w].to_vec(), sigma_w: sc[..w].to_vec(), index })
}

/// Polynomial part of q along kA+σ: the index set and
/// [I](k) Σ' g^{λ_k} q_g(k,λ) over characters trivial on lin A ∩ Z^d,
/// returned as a quasi-polynomial whose λ-characters are all trivial.
#[derive(Clone, Debug)]
pub struct PolyPart {
    pub index: Option<IndexSet>,
    pub part: QuasiPolynomial,
}

pub fn qp_polynomial_part(qp: &QuasiPolynomial, a: &AffineSubspace, sigma: &[Q]) -> Result<PolyPart> {
    let d = qp.dim();
    let fs = fiber_split(a, sigma)?;
    let Some(index) = fs.index.clone() else {
        return Ok(PolyPart { index: None, part: QuasiPolynomial::zero(d) });
    };
    let kept = qp.keep_trivial_on(&fs.w_basis);
    // λ_k = B_R (k a_R + σ_R)
    let br: Vec<QVec> = fs.r_basis.iter().map(|c| to_q(c)).collect();
    let lin_in = |coords: &[Q]| -> QVec {
        let mut v = vzero(d);
        for (c, b) in coords.iter().zip(&br) {
            for i in 0..d {
                v[i] += c * &b[i];
            }
        }
        v
    };
    let ar = lin_in(&fs.a_r);
    let sr = lin_in(&fs.sigma_r);
    let mut part = QuasiPolynomial::zero(d);
    for (u, g, p) in kept.terms() {
        let u2 = u + dot(g, &ar);
        let c = char_value(g, &sr);
        part.add_term(u2, vzero(d), p.mul_c(&c));
    }
    Ok(PolyPart { part: part.mul(&index.indicator(d)), index: Some(index) })
}

/// Substitute λ = k v + σ into a quasi-polynomial without λ-characters and
/// collect powers of k: Σ_j k^j p_j(k, v) with periodic coefficients.
pub fn split_by_k_degree(part: &QuasiPolynomial, sigma: &[Q]) -> Vec<MultiPoly<Periodic>> {
    let d = part.dim();
    let mut out: Vec<MultiPoly<Periodic>> = Vec::new();
    for (u, g, p) in part.terms() {
        assert!(g.iter().all(|x| x.is_zero()), "character must be trivial");
        let tw = twist_table(u);
        // images: k -> k, λ_i -> k v_i + σ_i  (variables (k, v))
        let mut images = vec![KPoly::var(d + 1, 0)];
        for i in 0..d {
            let kv = KPoly::var(d + 1, 0).mul(&KPoly::var(d + 1, i + 1));
            images.push(kv.add(&KPoly::constant(d + 1, Cyclotomic::from_q(sigma[i].clone()))));
        }
        let sub = p.compose(&images, d + 1);
        for (j, pj) in sub.split_by_var(0) {
            let j = j as usize;
            while out.len() <= j {
                out.push(MultiPoly::zero(d));
            }
            let pv = pj.drop_var(0).map_coeffs(|c| tw.mul_c(c));
            out[j] = out[j].add(&pv);
        }
    }
    out
}

/// (q↾E_{P,σ})_pol(k, kv+σ) = Σ_j k^j p_j(k,v), with p_j polynomial in v.
pub fn qp_degree_split(qp: &QuasiPolynomial, hull: &AffineSubspace, sigma: &[Q]) -> Result<Vec<MultiPoly<Periodic>>> {
    let pp = qp_polynomial_part(qp, hull, sigma)?;
    Ok(split_by_k_degree(&pp.part, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::zvec;
    use crate::scalars::rational::{qf, qvec};

    fn lam(d: usize, i: usize) -> QuasiPolynomial {
        QuasiPolynomial::lambda(d, i)
    }

    #[test]
    fn evaluate_examples() {
        let alt = QuasiPolynomial::character(&[qf(1, 2)]);
        assert_eq!(alt.eval(1, &qvec(&[3])), Cyclotomic::from_i64(-1));
        let m3 = lam(1, 0).add(&QuasiPolynomial::one(1));
        assert_eq!(m3.eval(1, &qvec(&[4])), Cyclotomic::from_i64(5));
        let t = QuasiPolynomial::character(&[qf(1, 3)]).mul(&QuasiPolynomial::k_var(1));
        assert_eq!(t.eval(2, &qvec(&[1])), Cyclotomic::exp2pi(&qf(1, 3)).scale(&q(2)));
    }

    #[test]
    fn character_decomposition() {
        let gens = vec![zvec(&[1, 0]), zvec(&[0, 2])];
        let one = KPoly::one(2);
        let got = qp_character_decompose(&gens, &[(zvec(&[0, 0]), one.clone()), (zvec(&[0, 1]), KPoly::zero(2))]).unwrap();
        let want = QuasiPolynomial::one(1)
            .scale_q(&qf(1, 2))
            .add(&QuasiPolynomial::character(&[qf(1, 2)]).scale_q(&qf(1, 2)));
        assert_eq!(got, want);
        let lamp = KPoly::var(2, 1);
        let got = qp_character_decompose(&[zvec(&[1, 0]), zvec(&[0, 1])], &[(zvec(&[0, 0]), lamp.clone())]).unwrap();
        assert_eq!(got, lam(1, 0));
        let neg = KPoly::constant(2, Cyclotomic::from_i64(-1));
        let got = qp_character_decompose(&gens, &[(zvec(&[0, 0]), one.clone()), (zvec(&[0, 1]), neg)]).unwrap();
        assert_eq!(got, QuasiPolynomial::character(&[qf(1, 2)]));
        assert!(qp_character_decompose(&gens, &[(zvec(&[0, 0]), one.clone()), (zvec(&[0, 2]), one)]).is_err());
    }

    #[test]
    fn translate_and_difference() {
        let l = lam(1, 0);
        assert_eq!(l.difference(&qvec(&[1]), &q(0)).unwrap(), QuasiPolynomial::one(1));
        let g = QuasiPolynomial::character(&[qf(1, 3)]);
        assert!(g.difference(&qvec(&[1]), &qf(1, 3)).unwrap().is_zero());
        let sq = l.mul(&l);
        let shifted = l.sub(&QuasiPolynomial::one(1));
        assert_eq!(sq.translate(&qvec(&[1])).unwrap(), shifted.mul(&shifted));
        assert!(l.translate(&[qf(1, 2)]).is_err());
    }

    #[test]
    fn polynomial_part_examples() {
        let x_axis = AffineSubspace::new(qvec(&[0, 0]), &[qvec(&[1, 0])]);
        let alt2 = QuasiPolynomial::character(&[q(0), qf(1, 2)]);
        let pp = qp_polynomial_part(&alt2, &x_axis, &qvec(&[0, 0])).unwrap();
        assert_eq!(pp.index, Some(IndexSet { k0: 0, n0: 1 }));
        assert_eq!(pp.part, QuasiPolynomial::one(2));
        // along the whole plane the character is non-trivial
        let plane = AffineSubspace::new(qvec(&[0, 0]), &[qvec(&[1, 0]), qvec(&[0, 1])]);
        assert!(qp_polynomial_part(&alt2, &plane, &qvec(&[0, 0])).unwrap().part.is_zero());
        // shifted line: levels 2 + 4Z
        let c = QuasiPolynomial::constant(2, Cyclotomic::from_i64(7));
        let qq = alt2.add(&c);
        let a = AffineSubspace::new(vec![q(0), qf(1, 4)], &[qvec(&[1, 0])]);
        let pp = qp_polynomial_part(&qq, &a, &[q(0), qf(1, 2)]).unwrap();
        assert_eq!(pp.index, Some(IndexSet { k0: 2, n0: 4 }));
        for k in 0..16 {
            let v = pp.part.eval(k, &qvec(&[0, 0]));
            let expect = match k.rem_euclid(8) {
                2 => 6,
                6 => 8,
                _ => 0,
            };
            assert_eq!(v, Cyclotomic::from_i64(expect), "k={}", k);
        }
        // brute force at k = 2: λ = (x, 1) on the fiber, value (−1)^1 + 7
        assert_eq!(qq.eval(2, &qvec(&[5, 1])), Cyclotomic::from_i64(6));
        let pp = qp_polynomial_part(&qq, &x_axis, &[q(0), qf(1, 2)]).unwrap();
        assert!(pp.index.is_none() && pp.part.is_zero());
    }

    #[test]
    fn degree_split_examples() {
        let line = AffineSubspace::new(qvec(&[0]), &[qvec(&[1])]);
        let m3 = lam(1, 0).add(&QuasiPolynomial::one(1));
        let ps = qp_degree_split(&m3, &line, &qvec(&[0])).unwrap();
        let v = MultiPoly::<Periodic>::var(1, 0);
        assert_eq!(ps[1], v);
        assert_eq!(ps[0], MultiPoly::<Periodic>::one(1));
        let sq = lam(1, 0).mul(&lam(1, 0));
        let ps = qp_degree_split(&sq, &line, &qvec(&[0])).unwrap();
        assert_eq!(ps.len(), 3);
        assert!(ps[0].is_zero() && ps[1].is_zero());
        assert_eq!(ps[2], v.mul(&v));
    }
}
