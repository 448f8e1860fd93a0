//! Periodic functions Z -> Q(ζ), stored as a table over one period.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalars::cyclotomic::Cyclotomic;
use crate::scalars::rational::{lcm_u, Q};

#[derive(Clone)]
pub struct Periodic {
    vals: Vec<Cyclotomic>,
}

impl Periodic {
    pub fn constant(c: Cyclotomic) -> Periodic {
        Periodic { vals: vec![c] }
    }

    pub fn from_q(x: Q) -> Periodic {
        Self::constant(Cyclotomic::from_q(x))
    }

    pub fn zero() -> Periodic {
        Self::constant(Cyclotomic::zero())
    }

    pub fn one() -> Periodic {
        Self::constant(Cyclotomic::one())
    }

    /// Table indexed by k mod `period`.
    pub fn from_fn(period: u64, f: impl Fn(i64) -> Cyclotomic) -> Periodic {
        let vals = (0..period as i64).map(f).collect();
        let mut p = Periodic { vals };
        p.shrink();
        p
    }

    pub fn from_table(vals: Vec<Cyclotomic>) -> Periodic {
        assert!(!vals.is_empty());
        let mut p = Periodic { vals };
        p.shrink();
        p
    }

    pub fn period(&self) -> u64 {
        self.vals.len() as u64
    }

    pub fn table(&self) -> &[Cyclotomic] {
        &self.vals
    }

    pub fn at(&self, k: i64) -> &Cyclotomic {
        &self.vals[k.rem_euclid(self.vals.len() as i64) as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.vals.iter().all(|v| v.is_zero())
    }

    pub fn as_constant(&self) -> Option<&Cyclotomic> {
        if self.vals.len() == 1 {
            Some(&self.vals[0])
        } else {
            None
        }
    }

    fn shrink(&mut self) {
        let n = self.vals.len();
        for p in 1..n {
            if !n.is_multiple_of(p) {
                continue;
            }
            if (p..n).all(|i| self.vals[i] == self.vals[i % p]) {
                self.vals.truncate(p);
                return;
            }
        }
    }

    fn zip(&self, o: &Periodic, f: impl Fn(&Cyclotomic, &Cyclotomic) -> Cyclotomic) -> Periodic {
        let n = lcm_u(self.period(), o.period()) as i64;
        Periodic::from_fn(n as u64, |k| f(self.at(k), o.at(k)))
    }

    pub fn add_ref(&self, o: &Periodic) -> Periodic {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub_ref(&self, o: &Periodic) -> Periodic {
        self.zip(o, |a, b| a - b)
    }

    pub fn mul_ref(&self, o: &Periodic) -> Periodic {
        if let Some(c) = o.as_constant() {
            return self.mul_c(c);
        }
        if let Some(c) = self.as_constant() {
            return o.mul_c(c);
        }
        self.zip(o, |a, b| a * b)
    }

    pub fn mul_c(&self, c: &Cyclotomic) -> Periodic {
        let mut p = Periodic { vals: self.vals.iter().map(|v| v * c).collect() };
        p.shrink();
        p
    }

    pub fn scale(&self, s: &Q) -> Periodic {
        let mut p = Periodic { vals: self.vals.iter().map(|v| v.scale(s)).collect() };
        p.shrink();
        p
    }

    pub fn neg_ref(&self) -> Periodic {
        Periodic { vals: self.vals.iter().map(|v| -v).collect() }
    }
}

impl PartialEq for Periodic {
    fn eq(&self, o: &Self) -> bool {
        let n = lcm_u(self.period(), o.period()) as i64;
        (0..n).all(|k| self.at(k) == o.at(k))
    }
}

impl fmt::Debug for Periodic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Periodic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.vals.len() == 1 {
            return write!(f, "{}", self.vals[0]);
        }
        let items: Vec<String> = self.vals.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]_k mod {}", items.join(", "), self.vals.len())
    }
}

impl Add<&Periodic> for &Periodic {
    type Output = Periodic;
    fn add(self, o: &Periodic) -> Periodic {
        self.add_ref(o)
    }
}

impl Sub<&Periodic> for &Periodic {
    type Output = Periodic;
    fn sub(self, o: &Periodic) -> Periodic {
        self.sub_ref(o)
    }
}

impl Mul<&Periodic> for &Periodic {
    type Output = Periodic;
    fn mul(self, o: &Periodic) -> Periodic {
        self.mul_ref(o)
    }
}

impl Neg for &Periodic {
    type Output = Periodic;
    fn neg(self) -> Periodic {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rational::qf;

    #[test]
    fn tables_shrink_and_combine() {
        let a = Periodic::from_fn(4, |k| Cyclotomic::from_i64(if k % 2 == 0 { 1 } else { -1 }));
        assert_eq!(a.period(), 2);
        let b = Periodic::from_fn(3, Cyclotomic::from_i64);
        let c = &a * &b;
        assert_eq!(c.period(), 6);
        assert_eq!(*c.at(5), Cyclotomic::from_i64(-2));
        let sq = &a * &a;
        assert_eq!(sq, Periodic::one());
        let h = Periodic::from_q(qf(1, 2));
        assert_eq!(h.scale(&qf(2, 1)), Periodic::one());
    }
}
