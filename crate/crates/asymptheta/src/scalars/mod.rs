pub mod cyclotomic;
pub mod periodic;
pub mod poly;
pub mod rational;

use std::fmt::{Debug, Display};

pub use cyclotomic::Cyclotomic;
pub use periodic::Periodic;
pub use poly::MultiPoly;
pub use rational::{Q, QVec};

/// Coefficient rings used by [`MultiPoly`].
pub trait Ring: Clone + Debug + Display + PartialEq {
    fn r_zero() -> Self;
    fn r_one() -> Self;
    fn r_is_zero(&self) -> bool;
    fn r_add(&self, o: &Self) -> Self;
    fn r_mul(&self, o: &Self) -> Self;
    fn r_neg(&self) -> Self;
    fn r_scale(&self, s: &Q) -> Self;
    fn r_from_q(x: &Q) -> Self;
    fn r_sub(&self, o: &Self) -> Self {
        self.r_add(&o.r_neg())
    }
}

impl Ring for Q {
    fn r_zero() -> Self {
        num_traits::Zero::zero()
    }
    fn r_one() -> Self {
        num_traits::One::one()
    }
    fn r_is_zero(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn r_add(&self, o: &Self) -> Self {
        self + o
    }
    fn r_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn r_neg(&self) -> Self {
        -self
    }
    fn r_scale(&self, s: &Q) -> Self {
        self * s
    }
    fn r_from_q(x: &Q) -> Self {
        x.clone()
    }
}

impl Ring for Cyclotomic {
    fn r_zero() -> Self {
        Cyclotomic::zero()
    }
    fn r_one() -> Self {
        Cyclotomic::one()
    }
    fn r_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn r_add(&self, o: &Self) -> Self {
        self.add_ref(o)
    }
    fn r_mul(&self, o: &Self) -> Self {
        self.mul_ref(o)
    }
    fn r_neg(&self) -> Self {
        self.neg_ref()
    }
    fn r_scale(&self, s: &Q) -> Self {
        self.scale(s)
    }
    fn r_from_q(x: &Q) -> Self {
        Cyclotomic::from_q(x.clone())
    }
}

impl Ring for Periodic {
    fn r_zero() -> Self {
        Periodic::zero()
    }
    fn r_one() -> Self {
        Periodic::one()
    }
    fn r_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn r_add(&self, o: &Self) -> Self {
        self.add_ref(o)
    }
    fn r_mul(&self, o: &Self) -> Self {
        self.mul_ref(o)
    }
    fn r_neg(&self) -> Self {
        self.neg_ref()
    }
    fn r_scale(&self, s: &Q) -> Self {
        self.scale(s)
    }
    fn r_from_q(x: &Q) -> Self {
        Periodic::from_q(x.clone())
    }
}
