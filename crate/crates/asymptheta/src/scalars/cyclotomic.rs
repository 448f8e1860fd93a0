//! Exact elements of cyclotomic fields Q(ζ_N) in the power basis modulo Φ_N.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalars::rational::{fmt_q, lcm_u, q, to_f64, Q};

/// Coefficients of Φ_N, lowest degree first (monic).
pub fn cyclotomic_poly(n: u64) -> Arc<Vec<Q>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<Q>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by Φ_d for every proper divisor d
    let mut num = vec![Q::zero(); n as usize + 1];
    num[0] = q(-1);
    num[n as usize] = Q::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            let phi_d = cyclotomic_poly(d);
            num = poly_div_exact(&num, &phi_d);
        }
    }
    let p = Arc::new(num);
    cache.lock().unwrap().insert(n, p.clone());
    p
}

fn poly_div_exact(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    if rem.len() <= db {
        return vec![Q::zero()];
    }
    let mut quo = vec![Q::zero(); rem.len() - db];
    for i in (0..quo.len()).rev() {
        let c = &rem[i + db] / &b[db];
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                rem[i + j] -= &c * bj;
            }
        }
        quo[i] = c;
    }
    debug_assert!(rem.iter().all(|x| x.is_zero()));
    quo
}

/// Numerators over the lcm of the denominators.
fn integral(c: &[Q]) -> (Vec<BigInt>, BigInt) {
    let den = c.iter().fold(BigInt::one(), |l, x| if x.denom().is_one() { l } else { l.lcm(x.denom()) });
    (c.iter().map(|x| x.numer() * (&den / x.denom())).collect(), den)
}

pub fn euler_phi(n: u64) -> usize {
    (1..=n).filter(|k| k.gcd(&n) == 1).count()
}

#[derive(Clone)]
pub struct Cyclotomic {
    level: u64,
    coeffs: Vec<Q>,
}

impl Cyclotomic {
    /// Canonical remainder of the polynomial `raw` (in ζ_N) modulo Φ_N.
    pub fn normalize(raw: &[Q], level: u64) -> Result<Cyclotomic> {
        if level == 0 {
            return Err(Error::InvalidLevel(0));
        }
        Ok(Self::reduce(raw.to_vec(), level))
    }

    fn reduce(mut raw: Vec<Q>, level: u64) -> Cyclotomic {
        let phi = cyclotomic_poly(level);
        let deg = phi.len() - 1;
        if raw.len() > deg {
            for i in (deg..raw.len()).rev() {
                if raw[i].is_zero() {
                    continue;
                }
                let c = std::mem::take(&mut raw[i]);
                for j in 0..deg {
                    let p = &phi[j];
                    if p.is_zero() {
                        continue;
                    }
                    if p.is_one() {
                        raw[i - deg + j] -= &c;
                    } else if (-p).is_one() {
                        raw[i - deg + j] += &c;
                    } else {
                        raw[i - deg + j] -= &c * p;
                    }
                }
            }
        }
        raw.resize(deg, Q::zero());
        let mut out = Cyclotomic { level, coeffs: raw };
        out.downgrade();
        out
    }

    fn downgrade(&mut self) {
        if self.level > 1 && self.coeffs.iter().skip(1).all(|x| x.is_zero()) {
            let c = self.coeffs[0].clone();
            self.level = 1;
            self.coeffs = vec![c];
        }
    }

    pub fn from_q(x: Q) -> Cyclotomic {
        Cyclotomic { level: 1, coeffs: vec![x] }
    }

    pub fn from_i64(x: i64) -> Cyclotomic {
        Self::from_q(q(x))
    }

    pub fn zero() -> Cyclotomic {
        Self::from_q(Q::zero())
    }

    pub fn one() -> Cyclotomic {
        Self::from_q(Q::one())
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|x| x.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.level == 1 && self.coeffs[0].is_one()
    }

    pub fn as_rational(&self) -> Option<&Q> {
        if self.level == 1 {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    /// ζ_N^e for an integer exponent e.
    pub fn root_power(level: u64, e: i64) -> Result<Cyclotomic> {
        if level == 0 {
            return Err(Error::InvalidLevel(0));
        }
        let r = e.rem_euclid(level as i64) as usize;
        let mut raw = vec![Q::zero(); r + 1];
        raw[r] = Q::one();
        Ok(Self::reduce(raw, level))
    }

    /// e^{2πi x} for rational x.
    pub fn exp2pi(x: &Q) -> Cyclotomic {
        let d = x.denom().to_u64().expect("denominator too large");
        let n = x.numer().mod_floor(x.denom()).to_i64().unwrap();
        Self::root_power(d, n).unwrap()
    }

    /// Re-express at level m (a multiple of the current level).
    pub fn lift(&self, m: u64) -> Cyclotomic {
        if m == self.level {
            return self.clone();
        }
        assert!(m.is_multiple_of(self.level), "lift level must be a multiple");
        let step = (m / self.level) as usize;
        let mut raw = vec![Q::zero(); (self.coeffs.len().max(1) - 1) * step + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            raw[j * step] = c.clone();
        }
        let phi = cyclotomic_poly(m);
        let deg = phi.len() - 1;
        let mut out = Self::reduce(raw, m);
        if out.level != m {
            // keep the requested level for callers that need aligned vectors
            let mut c = vec![Q::zero(); deg];
            c[0] = out.coeffs[0].clone();
            out = Cyclotomic { level: m, coeffs: c };
        }
        out
    }

    fn aligned(&self, other: &Cyclotomic) -> (Cyclotomic, Cyclotomic, u64) {
        let m = lcm_u(self.level, other.level);
        (self.lift(m), other.lift(m), m)
    }

    pub fn add_ref(&self, other: &Cyclotomic) -> Cyclotomic {
        if self.level == 1 && other.level == 1 {
            return Self::from_q(&self.coeffs[0] + &other.coeffs[0]);
        }
        if self.level == other.level {
            let c: Vec<Q> = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
            let mut out = Cyclotomic { level: self.level, coeffs: c };
            out.downgrade();
            return out;
        }
        let (a, b, _) = self.aligned(other);
        a.add_ref(&b)
    }

    pub fn neg_ref(&self) -> Cyclotomic {
        Cyclotomic { level: self.level, coeffs: self.coeffs.iter().map(|x| -x).collect() }
    }

    pub fn sub_ref(&self, other: &Cyclotomic) -> Cyclotomic {
        self.add_ref(&other.neg_ref())
    }

    pub fn mul_ref(&self, other: &Cyclotomic) -> Cyclotomic {
        if self.level == 1 {
            return other.scale(&self.coeffs[0]);
        }
        if other.level == 1 {
            return self.scale(&other.coeffs[0]);
        }
        if self.level != other.level {
            let (a, b, _) = self.aligned(other);
            return a.mul_ref(&b);
        }
        // integer arithmetic over a common denominator; Φ_N is monic and integral
        let (an, ad) = integral(&self.coeffs);
        let (bn, bd) = integral(&other.coeffs);
        let mut raw = vec![BigInt::zero(); an.len() + bn.len()];
        for (i, a) in an.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in bn.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j] += a * b;
                }
            }
        }
        let phi = cyclotomic_poly(self.level);
        let deg = phi.len() - 1;
        let phi_z: Vec<BigInt> = phi.iter().map(|c| c.to_integer()).collect();
        for i in (deg..raw.len()).rev() {
            if raw[i].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut raw[i]);
            for j in 0..deg {
                if !phi_z[j].is_zero() {
                    raw[i - deg + j] -= &c * &phi_z[j];
                }
            }
        }
        raw.truncate(deg);
        raw.resize(deg, BigInt::zero());
        let den = ad * bd;
        let mut out = Cyclotomic { level: self.level, coeffs: raw.into_iter().map(|n| Q::new(n, den.clone())).collect() };
        out.downgrade();
        out
    }

    pub fn scale(&self, s: &Q) -> Cyclotomic {
        if s.is_zero() {
            return Self::zero();
        }
        Cyclotomic { level: self.level, coeffs: self.coeffs.iter().map(|x| x * s).collect() }
    }

    pub fn pow(&self, e: u32) -> Cyclotomic {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul_ref(self);
        }
        acc
    }

    /// Multiplicative inverse, by solving the multiplication-matrix system over Q.
    pub fn inv(&self) -> Option<Cyclotomic> {
        if self.is_zero() {
            return None;
        }
        if self.level == 1 {
            return Some(Self::from_q(Q::one() / &self.coeffs[0]));
        }
        let n = self.coeffs.len();
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut raw = vec![Q::zero(); j + 1];
            raw[j] = Q::one();
            let xj = Self::reduce(raw, self.level).lift(self.level);
            let prod = self.mul_ref(&xj).lift(self.level);
            cols.push(prod.coeffs);
        }
        let m = linalg::from_cols(&cols, n);
        let mut e0 = vec![Q::zero(); n];
        e0[0] = Q::one();
        let y = linalg::solve(&m, &e0, n)?;
        Some(Self::reduce(y, self.level))
    }

    /// Complex conjugate (ζ -> ζ^{-1}).
    pub fn conj(&self) -> Cyclotomic {
        let n = self.level as usize;
        if n == 1 {
            return self.clone();
        }
        let mut raw = vec![Q::zero(); n];
        for (j, c) in self.coeffs.iter().enumerate() {
            raw[(n - j) % n] += c;
        }
        Self::reduce(raw, self.level)
    }

    pub fn to_complex(&self) -> Complex64 {
        let n = self.level as f64;
        self.coeffs.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, c)| {
            let ang = 2.0 * std::f64::consts::PI * j as f64 / n;
            acc + Complex64::from_polar(to_f64(c), ang)
        })
    }
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        if self.level == other.level {
            return self.coeffs == other.coeffs;
        }
        let (a, b, _) = self.aligned(other);
        a.coeffs == b.coeffs
    }
}

impl Eq for Cyclotomic {}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 1 {
            return write!(f, "{}", fmt_q(&self.coeffs[0]));
        }
        let mut parts = Vec::new();
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let z = match j {
                0 => String::new(),
                1 => format!("z{}", self.level),
                _ => format!("z{}^{}", self.level, j),
            };
            let s = if z.is_empty() {
                fmt_q(c)
            } else if c.is_one() {
                z
            } else if (-c).is_one() {
                format!("-{}", z)
            } else {
                format!("{}*{}", fmt_q(c), z)
            };
            parts.push(s);
        }
        let mut out = String::new();
        for (i, p) in parts.iter().enumerate() {
            if i == 0 {
                out.push_str(p);
            } else if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        if parts.len() > 1 {
            write!(f, "({})", out)
        } else {
            write!(f, "{}", out)
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&Cyclotomic> for &Cyclotomic {
            type Output = Cyclotomic;
            fn $m(self, o: &Cyclotomic) -> Cyclotomic {
                self.$f(o)
            }
        }
        impl $tr<Cyclotomic> for Cyclotomic {
            type Output = Cyclotomic;
            fn $m(self, o: Cyclotomic) -> Cyclotomic {
                self.$f(&o)
            }
        }
        impl $tr<&Cyclotomic> for Cyclotomic {
            type Output = Cyclotomic;
            fn $m(self, o: &Cyclotomic) -> Cyclotomic {
                self.$f(o)
            }
        }
    };
}
binop!(Add, add, add_ref);
binop!(Sub, sub, sub_ref);
binop!(Mul, mul, mul_ref);

impl Neg for Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        self.neg_ref()
    }
}

impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        self.neg_ref()
    }
}

/// ζ_N^e where e must be an integer.
pub fn root_of_unity_power(order: u64, e: &Q) -> Result<Cyclotomic> {
    if order == 0 {
        return Err(Error::InvalidLevel(0));
    }
    if !e.denom().is_one() {
        return Err(Error::LevelMismatch(fmt_q(e), order));
    }
    let r = e.numer().mod_floor(&num_bigint::BigInt::from(order));
    Cyclotomic::root_power(order, r.to_i64().unwrap())
}

/// Absolute value bound used in numeric reports.
pub fn abs_bound(c: &Cyclotomic) -> Q {
    c.coeffs().iter().fold(Q::zero(), |a, x| a + x.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rational::{qf, qvec};

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(*cyclotomic_poly(4), qvec(&[1, 0, 1]));
        assert_eq!(*cyclotomic_poly(6), qvec(&[1, -1, 1]));
        assert_eq!(*cyclotomic_poly(12), qvec(&[1, 0, -1, 0, 1]));
        assert_eq!(cyclotomic_poly(9).len() - 1, euler_phi(9));
    }

    #[test]
    fn normalize_examples() {
        let a = Cyclotomic::normalize(&qvec(&[0, 0, 1, 1]), 4).unwrap();
        assert_eq!(a.coeffs(), &qvec(&[-1, -1])[..]);
        let b = Cyclotomic::normalize(&qvec(&[5]), 1).unwrap();
        assert_eq!(b, Cyclotomic::from_i64(5));
        let c = Cyclotomic::normalize(&qvec(&[0, 0, 1]), 6).unwrap();
        assert_eq!(c.coeffs(), &qvec(&[-1, 1])[..]);
        assert_eq!(Cyclotomic::normalize(&qvec(&[1]), 0), Err(Error::InvalidLevel(0)));
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(root_of_unity_power(2, &q(3)).unwrap(), Cyclotomic::from_i64(-1));
        assert_eq!(root_of_unity_power(3, &q(3)).unwrap(), Cyclotomic::one());
        assert_eq!(root_of_unity_power(4, &q(2)).unwrap(), Cyclotomic::from_i64(-1));
        assert!(matches!(root_of_unity_power(4, &qf(1, 2)), Err(Error::LevelMismatch(..))));
        for n in 1..=12u64 {
            let z = Cyclotomic::root_power(n, 1).unwrap();
            assert!(z.pow(n as u32).is_one(), "level {}", n);
        }
    }

    #[test]
    fn mixed_levels_and_inverse() {
        let i = Cyclotomic::exp2pi(&qf(1, 4));
        let w = Cyclotomic::exp2pi(&qf(1, 3));
        let p = &i * &w;
        assert_eq!(p, Cyclotomic::exp2pi(&qf(7, 12)));
        let x = &Cyclotomic::from_i64(2) + &w;
        let y = x.inv().unwrap();
        assert!((&x * &y).is_one());
        assert_eq!(i.conj(), Cyclotomic::exp2pi(&qf(3, 4)));
        let c = w.to_complex();
        assert!((c.re + 0.5).abs() < 1e-12);
    }

    #[test]
    fn lift_is_a_homomorphism() {
        let a = Cyclotomic::normalize(&qvec(&[1, 2]), 3).unwrap();
        let b = Cyclotomic::normalize(&qvec(&[-1, 5]), 3).unwrap();
        assert_eq!((&a * &b).lift(12), &a.lift(12) * &b.lift(12));
    }
}
