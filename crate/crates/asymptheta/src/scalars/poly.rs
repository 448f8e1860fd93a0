//! Sparse multivariate polynomials with coefficients in a [`Ring`].

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalars::rational::{fmt_q, q, Q};
use crate::scalars::Ring;

pub type Exps = Vec<u32>;

#[derive(Clone, PartialEq)]
pub struct MultiPoly<C: Ring> {
    nvars: usize,
    terms: BTreeMap<Exps, C>,
}

impl<C: Ring> MultiPoly<C> {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::r_one())
    }

    pub fn from_q(nvars: usize, x: &Q) -> Self {
        Self::constant(nvars, C::r_from_q(x))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, C::r_one())
    }

    pub fn monomial(nvars: usize, exps: Exps, c: C) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut p = Self::zero(nvars);
        if !c.r_is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// Linear form Σ a_i x_i + b.
    pub fn affine(a: &[Q], b: &Q) -> Self {
        let n = a.len();
        let mut p = Self::from_q(n, b);
        for (i, ai) in a.iter().enumerate() {
            if !ai.is_zero() {
                p = p.add(&Self::var(n, i).scale_q(ai));
            }
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &C)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &[u32]) -> C {
        self.terms.get(e).cloned().unwrap_or_else(C::r_zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&vec![0; self.nvars])
    }

    pub fn as_constant(&self) -> Option<C> {
        if self.terms.keys().all(|e| e.iter().all(|&x| x == 0)) {
            Some(self.constant_term())
        } else {
            None
        }
    }

    fn insert_add(&mut self, e: Exps, c: C) {
        if c.r_is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                let s = v.r_add(&c);
                if s.r_is_zero() {
                    self.terms.remove(&e);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn add_term(&mut self, e: Exps, c: C) {
        self.insert_add(e, c);
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars, "variable count mismatch");
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.insert_add(e.clone(), c.clone());
        }
        r
    }

    pub fn add_assign(&mut self, o: &Self) {
        assert_eq!(self.nvars, o.nvars, "variable count mismatch");
        for (e, c) in &o.terms {
            self.insert_add(e.clone(), c.clone());
        }
    }

    pub fn neg(&self) -> Self {
        MultiPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c.r_neg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars, "variable count mismatch");
        let mut r = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Exps = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.insert_add(e, c1.r_mul(c2));
            }
        }
        r
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scale_q(&self, s: &Q) -> Self {
        if s.is_zero() {
            return Self::zero(self.nvars);
        }
        self.map_nonzero(|c| c.r_scale(s))
    }

    pub fn mul_c(&self, s: &C) -> Self {
        self.map_nonzero(|c| c.r_mul(s))
    }

    fn map_nonzero(&self, f: impl Fn(&C) -> C) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let v = f(c);
            if !v.r_is_zero() {
                r.terms.insert(e.clone(), v);
            }
        }
        r
    }

    pub fn map_coeffs<D: Ring>(&self, f: impl Fn(&C) -> D) -> MultiPoly<D> {
        let mut r = MultiPoly::<D>::zero(self.nvars);
        for (e, c) in &self.terms {
            let v = f(c);
            if !v.r_is_zero() {
                r.terms.insert(e.clone(), v);
            }
        }
        r
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, vars: &[usize]) -> Option<u32> {
        self.terms.keys().map(|e| vars.iter().map(|&i| e[i]).sum()).max()
    }

    pub fn eval_with(&self, pt: &[C]) -> C {
        assert_eq!(pt.len(), self.nvars);
        let mut acc = C::r_zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in pt.iter().zip(e) {
                for _ in 0..k {
                    t = t.r_mul(x);
                }
            }
            acc = acc.r_add(&t);
        }
        acc
    }

    pub fn eval(&self, pt: &[Q]) -> C {
        assert_eq!(pt.len(), self.nvars);
        let mut acc = C::r_zero();
        for (e, c) in &self.terms {
            let mut t = q(1);
            for (x, &k) in pt.iter().zip(e) {
                for _ in 0..k {
                    t *= x;
                }
            }
            acc = acc.r_add(&c.r_scale(&t));
        }
        acc
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            r.insert_add(e2, c.r_scale(&q(e[i] as i64)));
        }
        r
    }

    pub fn partial_multi(&self, beta: &[u32]) -> Self {
        let mut r = self.clone();
        for (i, &b) in beta.iter().enumerate() {
            for _ in 0..b {
                r = r.partial(i);
            }
        }
        r
    }

    /// ⟨dir, ∇p⟩ taken over the first `dir.len()` variables starting at `offset`.
    pub fn directional_at(&self, dir: &[Q], offset: usize) -> Result<Self> {
        if dir.len() + offset > self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars - offset, got: dir.len() });
        }
        let mut r = Self::zero(self.nvars);
        for (j, a) in dir.iter().enumerate() {
            if !a.is_zero() {
                r = r.add(&self.partial(offset + j).scale_q(a));
            }
        }
        Ok(r)
    }

    /// Substitute x_i -> Σ_j m[i][j] y_j + b[i]; the result has `m[0].len()` variables.
    pub fn compose_affine(&self, m: &[Vec<Q>], b: &[Q], new_nvars: usize) -> Self {
        assert_eq!(m.len(), self.nvars);
        let images: Vec<MultiPoly<C>> = m.iter().zip(b).map(|(row, bi)| MultiPoly::affine(row, bi)).collect();
        self.compose(&images, new_nvars)
    }

    /// Substitute x_i -> images[i].
    pub fn compose(&self, images: &[MultiPoly<C>], new_nvars: usize) -> Self {
        let mut cache: Vec<Vec<MultiPoly<C>>> = images.iter().map(|p| vec![MultiPoly::one(new_nvars), p.clone()]).collect();
        let mut r = Self::zero(new_nvars);
        for (e, c) in &self.terms {
            let mut t = MultiPoly::constant(new_nvars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while cache[i].len() <= k as usize {
                    let next = cache[i].last().unwrap().mul(&images[i]);
                    cache[i].push(next);
                }
                t = t.mul(&cache[i][k as usize]);
            }
            r.add_assign(&t);
        }
        r
    }

    /// Re-index variables: variable i of self becomes variable map[i] of the result.
    pub fn embed(&self, new_nvars: usize, map: &[usize]) -> Self {
        let mut r = Self::zero(new_nvars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; new_nvars];
            for (i, &k) in e.iter().enumerate() {
                e2[map[i]] += k;
            }
            r.insert_add(e2, c.clone());
        }
        r
    }

    /// Group by the exponent of variable i; returned polynomials have that exponent zeroed.
    pub fn split_by_var(&self, i: usize) -> BTreeMap<u32, Self> {
        let mut out: BTreeMap<u32, Self> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[i] = 0;
            out.entry(e[i]).or_insert_with(|| Self::zero(self.nvars)).insert_add(e2, c.clone());
        }
        out
    }

    /// Drop variable i (assumed absent) and shift later variables down.
    pub fn drop_var(&self, i: usize) -> Self {
        let mut r = Self::zero(self.nvars - 1);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2.remove(i);
            r.insert_add(e2, c.clone());
        }
        r
    }

    pub fn fmt_with(&self, names: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut keys: Vec<&Exps> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then(b.cmp(a))
        });
        let mut out = String::new();
        for (idx, e) in keys.iter().enumerate() {
            let c = &self.terms[*e];
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    let n = names.get(i).copied().unwrap_or("?");
                    if k == 1 {
                        n.to_string()
                    } else {
                        format!("{}^{}", n, k)
                    }
                })
                .collect();
            let cs = c.to_string();
            let (neg, body) = match cs.strip_prefix('-') {
                Some(rest) if !rest.starts_with('(') => (true, rest.to_string()),
                _ => (false, cs.clone()),
            };
            let term = if mono.is_empty() {
                body
            } else if body == "1" {
                mono.join("*")
            } else {
                format!("{}*{}", body, mono.join("*"))
            };
            if idx == 0 {
                if neg {
                    out.push('-');
                }
                out.push_str(&term);
            } else {
                out.push_str(if neg { " - " } else { " + " });
                out.push_str(&term);
            }
        }
        out
    }
}

impl MultiPoly<Q> {
    pub fn to_ring<D: Ring>(&self) -> MultiPoly<D> {
        self.map_coeffs(|c| D::r_from_q(c))
    }
}

pub fn default_names(n: usize) -> Vec<String> {
    const N: [&str; 4] = ["x", "y", "z", "w"];
    if n <= 4 {
        N[..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("x{}", i)).collect()
    }
}

impl<C: Ring> fmt::Debug for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = default_names(self.nvars);
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        write!(f, "{}", self.fmt_with(&refs))
    }
}

impl<C: Ring> fmt::Display for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// p(x) -> ⟨direction, ∇p⟩ over all variables.
pub fn poly_directional_derivative<C: Ring>(p: &MultiPoly<C>, direction: &[Q]) -> Result<MultiPoly<C>> {
    if direction.len() != p.nvars() {
        return Err(Error::DimensionMismatch { expected: p.nvars(), got: direction.len() });
    }
    p.directional_at(direction, 0)
}

pub fn fmt_rational_poly(p: &MultiPoly<Q>) -> String {
    let _ = fmt_q;
    p.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rational::{qf, qvec};
    use crate::scalars::Cyclotomic;

    type P = MultiPoly<Q>;

    fn x() -> P {
        P::var(2, 0)
    }
    fn y() -> P {
        P::var(2, 1)
    }

    #[test]
    fn directional_derivative_examples() {
        let p = x().mul(&x()).mul(&y());
        let d = poly_directional_derivative(&p, &qvec(&[1, 0])).unwrap();
        assert_eq!(d, x().mul(&y()).scale_q(&q(2)));
        let d2 = poly_directional_derivative(&x().mul(&y()), &qvec(&[1, 1])).unwrap();
        assert_eq!(d2, x().add(&y()));
        let c = P::from_q(2, &q(7));
        assert!(poly_directional_derivative(&c, &qvec(&[3, 4])).unwrap().is_zero());
        assert!(poly_directional_derivative(&c, &qvec(&[1])).is_err());
    }

    #[test]
    fn compose_and_eval() {
        // (x+y)^2 at x = 2t+1, y = -t
        let p = x().add(&y()).pow(2);
        let m = vec![qvec(&[2]), qvec(&[-1])];
        let r = p.compose_affine(&m, &qvec(&[1, 0]), 1);
        let t = P::var(1, 0);
        assert_eq!(r, t.add(&P::one(1)).pow(2));
        assert_eq!(p.eval(&[qf(1, 2), qf(1, 3)]), qf(25, 36));
    }

    #[test]
    fn display() {
        let p = x().mul(&x()).scale_q(&qf(1, 2)).sub(&y()).add(&P::one(2));
        assert_eq!(p.to_string(), "1/2*x^2 - y + 1");
        let z = MultiPoly::<Cyclotomic>::constant(1, Cyclotomic::exp2pi(&qf(1, 4)));
        assert_eq!(z.to_string(), "z4");
    }
}
