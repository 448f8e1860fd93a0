//! Integer lattices: kernels, saturation, complements, Hermite normal form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalars::rational::{primitive, qint, Q, QVec};

pub type ZVec = Vec<BigInt>;

pub fn zvec(v: &[i64]) -> ZVec {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn to_q(v: &[BigInt]) -> QVec {
    v.iter().map(qint).collect()
}

pub fn to_z(v: &[Q]) -> Option<ZVec> {
    v.iter().map(|x| if x.denom().is_one() { Some(x.numer().clone()) } else { None }).collect()
}

/// Column operations on an r×c matrix stored by rows, mirrored on a c×c tracker.
struct ColOps {
    a: Vec<ZVec>,
    u: Vec<ZVec>,
}

impl ColOps {
    fn new(a: Vec<ZVec>, cols: usize) -> Self {
        let mut u = vec![vec![BigInt::zero(); cols]; cols];
        for (i, row) in u.iter_mut().enumerate() {
            row[i] = BigInt::one();
        }
        ColOps { a, u }
    }
    fn swap(&mut self, i: usize, j: usize) {
        for row in self.a.iter_mut().chain(self.u.iter_mut()) {
            row.swap(i, j);
        }
    }
    /// col_j -= f * col_i
    fn axpy(&mut self, j: usize, i: usize, f: &BigInt) {
        for row in self.a.iter_mut().chain(self.u.iter_mut()) {
            let t = &row[i] * f;
            row[j] -= t;
        }
    }
    fn negate(&mut self, j: usize) {
        for row in self.a.iter_mut().chain(self.u.iter_mut()) {
            row[j] = -row[j].clone();
        }
    }
    /// Column echelon form: returns the number of pivot columns; pivot rows recorded.
    fn echelon(&mut self, reduce: bool) -> (usize, Vec<usize>) {
        let rows = self.a.len();
        let cols = self.u.len();
        let mut piv = 0;
        let mut prow = Vec::new();
        for r in 0..rows {
            if piv == cols {
                break;
            }
            loop {
                let nz: Vec<usize> = (piv..cols).filter(|&c| !self.a[r][c].is_zero()).collect();
                if nz.is_empty() {
                    break;
                }
                let m = *nz.iter().min_by_key(|&&c| self.a[r][c].abs()).unwrap();
                if nz.len() == 1 {
                    self.swap(piv, m);
                    if self.a[r][piv].is_negative() {
                        self.negate(piv);
                    }
                    if reduce {
                        for c in 0..piv {
                            let f = self.a[r][c].div_floor(&self.a[r][piv]);
                            if !f.is_zero() {
                                self.axpy(c, piv, &f);
                            }
                        }
                    }
                    prow.push(r);
                    piv += 1;
                    break;
                }
                for &c in &nz {
                    if c != m {
                        let f = self.a[r][c].div_floor(&self.a[r][m]);
                        self.axpy(c, m, &f);
                    }
                }
            }
        }
        (piv, prow)
    }
}

/// Saturated basis of {x ∈ Z^cols : m x = 0}.
pub fn int_kernel(m: &[ZVec], cols: usize) -> Vec<ZVec> {
    let mut ops = ColOps::new(m.to_vec(), cols);
    let (piv, _) = ops.echelon(false);
    (piv..cols).map(|c| ops.u.iter().map(|row| row[c].clone()).collect()).collect()
}

/// Saturated basis of Z^d ∩ span(vectors).
pub fn saturated_basis(vectors: &[QVec], d: usize) -> Vec<ZVec> {
    let nonzero: Vec<QVec> = vectors.iter().filter(|v| v.iter().any(|x| !x.is_zero())).cloned().collect();
    if nonzero.is_empty() {
        return vec![];
    }
    let eqs = linalg::nullspace(&nonzero, d);
    let ez: Vec<ZVec> = eqs.iter().map(|e| primitive(e)).collect();
    let mut basis = int_kernel(&ez, d);
    // make the basis canonical up to the span: column HNF
    if !basis.is_empty() {
        let lat = Lattice::new(d, basis.clone());
        basis = lat.hnf();
    }
    basis
}

/// Saturated basis of Z^d ∩ {x : rows·x = 0} for rational rows.
pub fn saturated_kernel(rows: &[QVec], d: usize) -> Vec<ZVec> {
    let ez: Vec<ZVec> = rows.iter().map(|e| primitive(e)).collect();
    if ez.is_empty() {
        return Lattice::full(d).basis;
    }
    let k = int_kernel(&ez, d);
    if k.is_empty() {
        return k;
    }
    Lattice::new(d, k).hnf()
}

#[derive(Clone, Debug)]
pub struct Lattice {
    pub dim: usize,
    /// Generators as columns (each entry a length-`dim` vector).
    pub basis: Vec<ZVec>,
}

impl Lattice {
    pub fn new(dim: usize, basis: Vec<ZVec>) -> Self {
        Lattice { dim, basis }
    }

    pub fn full(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        Lattice { dim, basis }
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.basis.iter().map(|v| to_q(v)).collect::<Vec<_>>())
    }

    /// Column Hermite normal form: canonical generators of the same lattice.
    pub fn hnf(&self) -> Vec<ZVec> {
        let rows: Vec<ZVec> = (0..self.dim).map(|i| self.basis.iter().map(|c| c[i].clone()).collect()).collect();
        let mut ops = ColOps::new(rows, self.basis.len());
        let (piv, _) = ops.echelon(true);
        (0..piv).map(|c| ops.a.iter().map(|row| row[c].clone()).collect()).collect()
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        let cols: Vec<QVec> = self.basis.iter().map(|c| to_q(c)).collect();
        match linalg::coords_in(&cols, &to_q(v)) {
            Some(x) => {
                let m = linalg::from_cols(&cols, self.dim);
                linalg::mat_vec(&m, &x) == to_q(v) && x.iter().all(|t| t.denom().is_one())
            }
            None => false,
        }
    }

    pub fn saturation(&self) -> Lattice {
        let vs: Vec<QVec> = self.basis.iter().map(|c| to_q(c)).collect();
        Lattice::new(self.dim, saturated_basis(&vs, self.dim))
    }

    /// Index of this lattice in its saturation.
    pub fn index_in_saturation(&self) -> BigInt {
        let sat = self.saturation();
        let scols: Vec<QVec> = sat.basis.iter().map(|c| to_q(c)).collect();
        let h = self.hnf();
        let coords: Vec<QVec> = h.iter().map(|c| linalg::coords_in(&scols, &to_q(c)).expect("in span")).collect();
        let m = linalg::from_cols(&coords, scols.len());
        linalg::det(&m).abs().to_integer()
    }

    pub fn is_saturated(&self) -> bool {
        self.index_in_saturation().is_one()
    }
}

impl PartialEq for Lattice {
    fn eq(&self, o: &Self) -> bool {
        self.dim == o.dim && self.hnf() == o.hnf()
    }
}

/// Complement L₂ with Z^d = L₁ ⊕ L₂ for a saturated L₁.
pub fn hermite_complement(sub: &Lattice) -> Result<Lattice> {
    let d = sub.dim;
    let h = sub.hnf();
    if h.is_empty() {
        return Ok(Lattice::full(d));
    }
    if !Lattice::new(d, h.clone()).is_saturated() {
        return Err(Error::NotSaturated);
    }
    // Row operations on B (d×r) via column operations on B^T (r×d).
    let bt: Vec<ZVec> = h.clone();
    let mut ops = ColOps::new(bt, d);
    ops.echelon(false);
    // B^T U = [H' 0]  =>  U^T B = [H'^T; 0]; complement = last columns of (U^T)^{-1}.
    let ut: Vec<QVec> = (0..d).map(|i| (0..d).map(|j| qint(&ops.u[j][i])).collect()).collect();
    let inv = linalg::inverse(&ut).expect("unimodular");
    let r = h.len();
    let comp: Vec<ZVec> = (r..d).map(|c| (0..d).map(|i| inv[i][c].to_integer()).collect()).collect();
    let mut full = h.clone();
    full.extend(comp.iter().cloned());
    let m: Vec<QVec> = (0..d).map(|i| full.iter().map(|c| qint(&c[i])).collect()).collect();
    debug_assert!(linalg::det(&m).abs().is_one());
    Ok(Lattice::new(d, comp))
}

/// Index of the lattice spanned by `gens` inside Z^d ∩ span(gens).
pub fn sublattice_index(gens: &[QVec], d: usize) -> BigInt {
    let sat = saturated_basis(gens, d);
    let scols: Vec<QVec> = sat.iter().map(|c| to_q(c)).collect();
    let coords: Vec<QVec> = gens.iter().map(|g| linalg::coords_in(&scols, g).expect("in span")).collect();
    let m = linalg::from_cols(&coords, scols.len());
    linalg::det(&m).abs().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rational::qvec;

    fn det_of(cols: &[ZVec]) -> BigInt {
        let d = cols.len();
        let m: Vec<QVec> = (0..d).map(|i| cols.iter().map(|c| qint(&c[i])).collect()).collect();
        linalg::det(&m).to_integer()
    }

    #[test]
    fn complement_examples() {
        let l1 = Lattice::new(2, vec![zvec(&[1, 1])]);
        let l2 = hermite_complement(&l1).unwrap();
        assert_eq!(l2.basis.len(), 1);
        assert_eq!(det_of(&[zvec(&[1, 1]), l2.basis[0].clone()]).abs(), BigInt::one());
        let w = Lattice::new(2, vec![zvec(&[1, -1])]);
        let c = hermite_complement(&w).unwrap();
        assert_eq!(det_of(&[zvec(&[1, -1]), c.basis[0].clone()]).abs(), BigInt::one());
        assert!(hermite_complement(&Lattice::full(3)).unwrap().basis.is_empty());
        assert_eq!(hermite_complement(&Lattice::new(2, vec![zvec(&[2, 0])])).unwrap_err(), Error::NotSaturated);
    }

    #[test]
    fn kernels_and_saturation() {
        let k = int_kernel(&[zvec(&[2, 4, 6])], 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!((BigInt::from(2) * &v[0] + BigInt::from(4) * &v[1] + BigInt::from(6) * &v[2]).is_zero());
        }
        let s = saturated_basis(&[qvec(&[2, 2])], 2);
        assert_eq!(s, vec![zvec(&[1, 1])]);
        assert_eq!(sublattice_index(&[qvec(&[1, 0]), qvec(&[1, 2])], 2), BigInt::from(2));
        assert_eq!(sublattice_index(&[qvec(&[2, 2])], 2), BigInt::from(2));
    }

    #[test]
    fn hnf_is_canonical() {
        let a = Lattice::new(2, vec![zvec(&[1, 0]), zvec(&[1, 2])]);
        let b = Lattice::new(2, vec![zvec(&[1, 2]), zvec(&[0, 2]), zvec(&[3, 6])]);
        assert_eq!(a, b);
        assert!(a.contains(&zvec(&[0, 2])));
        assert!(!a.contains(&zvec(&[0, 1])));
    }
}
