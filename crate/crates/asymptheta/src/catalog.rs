//! Named example functions used by the CLI, the scenes and the tests.

use crate::piecewise::PiecewiseQP;
use crate::polyhedron::Polyhedron;
use crate::pushforward::QuotientMap;
use crate::quasipoly::QuasiPolynomial;
use crate::scalars::rational::{q, qf, qvec};

pub const NAMES: [&str; 8] = ["m1", "m2", "m3", "simplex", "figure2", "final", "alternating_line", "half_line"];

/// [0 ≤ λ ≤ k].
pub fn m1() -> PiecewiseQP {
    PiecewiseQP::indicator(Polyhedron::interval(q(0), q(1)))
}

/// m1 translated by 2: [2 ≤ λ ≤ k+2].
pub fn m2() -> PiecewiseQP {
    m1().translate(&[q(2)]).expect("integral shift")
}

/// (λ+1)·m1.
pub fn m3() -> PiecewiseQP {
    m1().scale(&QuasiPolynomial::lambda(1, 0).add(&QuasiPolynomial::one(1)))
}

/// Lattice points of the dilated standard triangle.
pub fn simplex() -> PiecewiseQP {
    PiecewiseQP::indicator(Polyhedron::from_ineqs(
        2,
        &[(qvec(&[1, 0]), q(0)), (qvec(&[0, 1]), q(0)), (qvec(&[-1, -1]), q(-1))],
    ))
}

/// m1 plus the same interval shifted by 4, so k ↦ m(k,kλ) is not quasi-polynomial.
pub fn figure2() -> PiecewiseQP {
    m1().add(&PiecewiseQP::single(QuasiPolynomial::one(1), Polyhedron::interval(q(0), q(1)), qvec(&[4])))
}

/// (1/4)(1 − (−1)^a)(1 − (−1)^{a−b}) on {0 ≤ x ≤ 2, −x ≤ y ≤ x}.
pub fn final_example() -> PiecewiseQP {
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

/// (−1)^λ on the whole line; its expansion vanishes.
pub fn alternating_line() -> PiecewiseQP {
    PiecewiseQP::single(QuasiPolynomial::character(&[qf(1, 2)]), Polyhedron::whole(1), qvec(&[0]))
}

/// [λ ≥ 0].
pub fn half_line() -> PiecewiseQP {
    PiecewiseQP::indicator(Polyhedron::ray_from(q(0)))
}

pub fn by_name(name: &str) -> Option<PiecewiseQP> {
    Some(match name {
        "m1" => m1(),
        "m2" => m2(),
        "m3" => m3(),
        "simplex" => simplex(),
        "figure2" => figure2(),
        "final" => final_example(),
        "alternating_line" => alternating_line(),
        "half_line" => half_line(),
        _ => return None,
    })
}

/// (x,y) ↦ x+y, under which the simplex pushes forward to m3.
pub fn simplex_map() -> QuotientMap {
    QuotientMap::new(&[qvec(&[1, 1])], 2).expect("full rank")
}

/// (x,y) ↦ y.
pub fn final_map() -> QuotientMap {
    QuotientMap::new(&[qvec(&[0, 1])], 2).expect("full rank")
}

/// Expected pieces of the final example's pushforward: (q, P) for
/// q0 = −k on {0}, q1 = (1+(−1)^b)(k/2−b/4) on [0,2], q2 = (1+(−1)^b)(k/2+b/4) on [−2,0].
pub fn final_expected() -> Vec<(QuasiPolynomial, Polyhedron)> {
    let k = QuasiPolynomial::k_var(1);
    let b = QuasiPolynomial::lambda(1, 0);
    let even = QuasiPolynomial::one(1).add(&QuasiPolynomial::character(&[qf(1, 2)]));
    let half_k = k.scale_q(&qf(1, 2));
    let quarter_b = b.scale_q(&qf(1, 4));
    vec![
        (k.neg(), Polyhedron::point(&qvec(&[0]))),
        (even.mul(&half_k.sub(&quarter_b)), Polyhedron::interval(q(0), q(2))),
        (even.mul(&half_k.add(&quarter_b)), Polyhedron::interval(q(-2), q(0))),
    ]
}
