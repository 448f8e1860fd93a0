//! Randomized invariants of the engine.

use asymptheta::checks::random_finite;
use asymptheta::distributions::{theta_pair_poly, Region, Window};
use asymptheta::expansion::expand;
use asymptheta::oracle::oracle_theta_pair;
use asymptheta::piecewise::PiecewiseQP;
use asymptheta::scalars::rational::{den_u, lcm_u, q, qf, Q};
use asymptheta::scalars::MultiPoly;
use asymptheta::serialize::{pqp_from_json, pqp_to_json, series_from_json, series_to_json};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn rand_phi(rng: &mut StdRng, d: usize, deg: u32) -> MultiPoly<Q> {
    let mut p = MultiPoly::zero(d);
    for _ in 0..3 {
        let mut e = vec![0u32; d];
        for _ in 0..rng.gen_range(0..=deg) {
            e[rng.gen_range(0..d)] += 1;
        }
        p.add_term(e, qf(rng.gen_range(-3..=3), rng.gen_range(1..=2)));
    }
    p
}

/// Support box widened by one so that no atom sits on the window boundary.
fn window_of(m: &PiecewiseQP) -> Window {
    let (lo, hi) = m.support_window();
    Window::closed(lo.iter().map(|x| x - q(1)).collect(), hi.iter().map(|x| x + q(1)).collect())
}

/// Splits every 1-D piece [a,b] at a rational t into [a,t] and the half-open (t,b].
fn split_1d(m: &PiecewiseQP, t: &Q) -> PiecewiseQP {
    use asymptheta::polyhedron::Polyhedron;
    let mut out = PiecewiseQP::zero(1);
    for pc in m.pieces() {
        if pc.p.vertices().iter().all(|v| &v[0] > t) {
            out.push(pc.q.clone(), pc.p.clone(), pc.sigma.clone());
            continue;
        }
        let left = pc.p.intersect(&Polyhedron::from_ineqs(1, &[(vec![q(-1)], -t.clone())]));
        let right = pc.p.intersect(&Polyhedron::from_ineqs(1, &[(vec![q(1)], t.clone())]));
        // λ > kt + σ  ⇔  λ ≥ kt + σ + ε for ε below the denominator gap
        let (lo, hi) = PiecewiseQP::single(pc.q.clone(), pc.p.clone(), pc.sigma.clone()).support_window();
        let den = [t, &pc.sigma[0], &lo[0], &hi[0]].into_iter().map(den_u).fold(1, lcm_u);
        let eps = qf(1, 2 * den as i64);
        out.push(pc.q.clone(), left, pc.sigma.clone());
        out.push(pc.q.clone(), right, vec![&pc.sigma[0] + eps]);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn oracle_matches_engine(seed in any::<u64>(), k in 1i64..8) {
        let mut rng = StdRng::seed_from_u64(seed);
        let d = rng.gen_range(1..=2usize);
        let m = random_finite(&mut rng, d, 4);
        let phi = rand_phi(&mut rng, d, 3);
        let w = window_of(&m);
        let a = oracle_theta_pair(&m, k, &phi, &w).unwrap();
        let b = theta_pair_poly(&m, k, &phi, &Region::Window(w)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn pqp_roundtrip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let d = rng.gen_range(1..=2usize);
        let m = random_finite(&mut rng, d, 4);
        let j = pqp_to_json(&m);
        let back = pqp_from_json(&j, "$", None).unwrap();
        prop_assert_eq!(pqp_to_json(&back), j);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    /// For compact support and polynomial φ the expansion is exact once N
    /// exceeds the degrees involved.
    #[test]
    fn expansion_exact_on_polynomials_1d(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = random_finite(&mut rng, 1, 4);
        let phi = rand_phi(&mut rng, 1, 2);
        let a = expand(&m, 6).unwrap().series;
        for k in 1..=12 {
            let exact = theta_pair_poly(&m, k, &phi, &Region::Global).unwrap();
            prop_assert_eq!(a.pair(k, &phi).unwrap(), exact, "k={}", k);
        }
    }

    /// Cutting the support into half-open pieces changes neither Θ nor A.
    #[test]
    fn decomposition_independent(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = random_finite(&mut rng, 1, 4);
        let t = qf(rng.gen_range(-3..=3), 3);
        let cut = split_1d(&m, &t);
        let phi = rand_phi(&mut rng, 1, 2);
        let w = window_of(&m);
        let a = expand(&m, 4).unwrap().series;
        let b = expand(&cut, 4).unwrap().series;
        for k in 1..=8 {
            let r = Region::Window(w.clone());
            prop_assert_eq!(theta_pair_poly(&m, k, &phi, &r).unwrap(), theta_pair_poly(&cut, k, &phi, &r).unwrap());
            prop_assert_eq!(a.pair(k, &phi).unwrap(), b.pair(k, &phi).unwrap(), "k={}", k);
        }
        prop_assert!(expand(&m.sub(&cut), 4).unwrap().series.is_zero());
    }

    #[test]
    fn series_roundtrip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = random_finite(&mut rng, 1, 4);
        let a = expand(&m, 3).unwrap().series;
        let j = series_to_json(&a);
        let back = series_from_json(&j, "$").unwrap();
        prop_assert_eq!(series_to_json(&back), j);
    }
}

#[test]
fn exact_in_two_dimensions() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..4 {
        let m = random_finite(&mut rng, 2, 3);
        let phi = rand_phi(&mut rng, 2, 1);
        let a = expand(&m, 5).unwrap().series;
        for k in 1..=6 {
            let exact = theta_pair_poly(&m, k, &phi, &Region::Global).unwrap();
            assert_eq!(a.pair(k, &phi).unwrap(), exact, "{m} at k={k}");
        }
    }
}

