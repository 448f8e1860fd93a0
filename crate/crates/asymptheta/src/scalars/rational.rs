//! Rational helpers on top of `BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;
pub type QVec = Vec<Q>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qint(n: &BigInt) -> Q {
    Q::from_integer(n.clone())
}

pub fn qvec(v: &[i64]) -> QVec {
    v.iter().map(|&x| q(x)).collect()
}

/// Parse "p/q", "p" or a decimal-free integer. Zero denominators are rejected.
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || Error::Parse(format!("malformed rational {:?}", s));
    if t.is_empty() {
        return Err(bad());
    }
    match t.split_once('/') {
        Some((a, b)) => {
            let n: BigInt = a.trim().parse().map_err(|_| bad())?;
            let d: BigInt = b.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("malformed rational {:?}: zero denominator", s)));
            }
            Ok(Q::new(n, d))
        }
        None => {
            let n: BigInt = t.parse().map_err(|_| bad())?;
            Ok(Q::from_integer(n))
        }
    }
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Fractional part in [0,1).
pub fn frac(x: &Q) -> Q {
    x - x.floor()
}

pub fn ceil(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

pub fn floor(x: &Q) -> BigInt {
    x.floor().to_integer()
}

pub fn is_int(x: &Q) -> bool {
    x.denom().is_one()
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn lcm_u(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return a.max(b);
    }
    a / a.gcd(&b) * b
}

/// Denominator as u64 (panics only on absurdly large denominators).
pub fn den_u(x: &Q) -> u64 {
    x.denom().to_u64().expect("denominator exceeds u64")
}

pub fn den_lcm(xs: &[Q]) -> u64 {
    xs.iter().fold(1, |acc, x| lcm_u(acc, den_u(x)))
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn vadd(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vsub(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vscale(a: &[Q], s: &Q) -> QVec {
    a.iter().map(|x| x * s).collect()
}

pub fn vzero(n: usize) -> QVec {
    vec![Q::zero(); n]
}

pub fn is_zero_vec(a: &[Q]) -> bool {
    a.iter().all(|x| x.is_zero())
}

/// Scale a rational vector by a positive factor so it becomes a primitive integer vector.
pub fn primitive(a: &[Q]) -> Vec<BigInt> {
    let l = a
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = a.iter().map(|x| (x * qint(&l)).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

pub fn primitive_q(a: &[Q]) -> QVec {
    primitive(a).iter().map(qint).collect()
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn binom(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("6/4").unwrap(), qf(3, 2));
        assert_eq!(fmt_q(&qf(3, 2)), "3/2");
        assert_eq!(fmt_q(&q(-4)), "-4");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
        assert!(parse_q("").is_err());
    }

    #[test]
    fn fractional_parts() {
        assert_eq!(frac(&qf(-1, 3)), qf(2, 3));
        assert_eq!(ceil(&qf(-1, 3)), BigInt::from(0));
        assert_eq!(floor(&qf(-1, 3)), BigInt::from(-1));
    }

    #[test]
    fn primitive_vectors() {
        let p = primitive(&[qf(1, 2), qf(-3, 4)]);
        assert_eq!(p, vec![BigInt::from(2), BigInt::from(-3)]);
    }
}
