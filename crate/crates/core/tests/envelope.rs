mod common;

use std::f64::consts::PI;

use heatframe::envelope::{
    envelope, envelope_lp_norm, verify_envelope_scaling, verify_lemma_integrals, EnvelopeParams,
    EstimateConstants,
};
use heatframe::geometry::doubling_profile_exhaustive;
use heatframe::sampling::Sampler;
use proptest::prelude::*;

use common::{legendre_space, nearest_node};

#[test]
fn value_from_ball_volumes() {
    let space = legendre_space(65);
    let s1 = nearest_node(&space, 0.0);
    let s2 = nearest_node(&space, 0.5f64.sqrt());
    let delta = PI / 4.0;
    let params = EnvelopeParams::new(delta, 3.0, 2).unwrap();
    let v1 = common::brute_ball_volume(&space, s1, delta);
    let v2 = common::brute_ball_volume(&space, s2, delta);
    let d = (space.points()[s1].acos() - space.points()[s2].acos()).abs();
    let expect = (v1 * v2).powf(-0.5) * (1.0 + d / delta).powf(-3.0);
    let got = envelope(&space, params, s1, s2).unwrap();
    assert!((got - expect).abs() < 1e-13 * expect);
}

#[test]
fn lp_bound_holds_on_samples() {
    let space = legendre_space(64);
    let k = doubling_profile_exhaustive(&space).unwrap().k();
    let mut rng = Sampler::new(2);
    for delta in [0.1, 0.3] {
        let params = EnvelopeParams::with_default_sigma(delta, k).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0, 8.0] {
            for _ in 0..20 {
                let r = envelope_lp_norm(&space, params, rng.index(64), p).unwrap();
                assert!(r.passed, "{r:?}");
            }
        }
    }
}

#[test]
fn lp_norm_for_whole_space_balls() {
    // δ past the diameter: every ball is the whole space, E ranges over (1 + d/δ)^-ς / M
    let space = legendre_space(64);
    let delta = 50.0;
    let params = EnvelopeParams::new(delta, 5.0, 2).unwrap();
    let mass = space.total_mass();
    let s = 10;
    let direct: f64 = (0..64)
        .map(|y| {
            space.weights()[y] * ((1.0 + space.distance(s, y) / delta).powf(-5.0) / mass).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    let r = envelope_lp_norm(&space, params, s, 2.0).unwrap();
    assert!((r.lhs - direct).abs() < 1e-14);
    let floor = (1.0 + space.diameter() / delta).powf(-5.0);
    assert!(r.lhs <= mass.powf(-0.5) && r.lhs >= floor * mass.powf(-0.5));
}

#[test]
fn scaling_fifty_pairs() {
    let space = legendre_space(64);
    let k = doubling_profile_exhaustive(&space).unwrap().k();
    let params = EnvelopeParams::with_default_sigma(0.2, k).unwrap();
    let pairs = Sampler::new(9).pairs(64, 50);
    for beta in [0.5, 2.0] {
        let reports = verify_envelope_scaling(&space, params, beta, &pairs).unwrap();
        assert_eq!(reports.len(), 100);
        for r in &reports {
            assert!(r.passed, "{r:?}");
        }
        let expect = if beta < 1.0 {
            4f64.powi(k as i32)
        } else {
            2f64.powf(params.sigma_exp)
        };
        assert!(reports
            .iter()
            .filter(|r| r.check_id != "envelope.one_volume")
            .all(|r| r.stated_constant == expect));
    }
}

#[test]
fn integral_bounds_thirty_pairs() {
    let space = legendre_space(64);
    let k = doubling_profile_exhaustive(&space).unwrap().k();
    let params = EnvelopeParams::with_default_sigma(0.2, k).unwrap();
    let pairs = Sampler::new(4).pairs(64, 30);
    let reports = verify_lemma_integrals(&space, params, &pairs).unwrap();
    assert_eq!(reports.len(), 30 * 6);
    for r in &reports {
        assert!(r.passed, "{r:?}");
    }
    // left side of part a by a separate sum
    let s1 = pairs[0].0;
    let direct: f64 = (0..64)
        .map(|y| space.weights()[y] * (1.0 + space.distance(s1, y) / 0.2).powf(-params.sigma_exp))
        .sum();
    assert!((reports[0].lhs - direct).abs() < 1e-14 * direct);
}

#[test]
fn lp_constant_arithmetic() {
    let c = EstimateConstants::new(&EnvelopeParams::new(0.2, 3.0, 1).unwrap());
    // 2^{kp/2} = 2, 2^{-(ς - k/2) p} = 2^{-5}
    assert_eq!(c.a_p(2.0).unwrap(), (64.0f64 / 15.0).sqrt());
}

proptest! {
    #[test]
    fn symmetric_and_positive(a in 0usize..48, b in 0usize..48, delta in 0.05f64..2.0, sigma in 0.5f64..8.0) {
        let space = legendre_space(48);
        let params = EnvelopeParams::new(delta, sigma, 1).unwrap();
        let e1 = envelope(&space, params, a, b).unwrap();
        let e2 = envelope(&space, params, b, a).unwrap();
        prop_assert_eq!(e1, e2);
        prop_assert!(e1 > 0.0);
    }

    #[test]
    fn decay_nonincreasing_in_distance(d1 in 0.0f64..5.0, d2 in 0.0f64..5.0, sigma in 0.5f64..8.0) {
        let params = EnvelopeParams::new(0.3, sigma, 1).unwrap();
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(params.decay(hi, sigma) <= params.decay(lo, sigma));
    }
}
