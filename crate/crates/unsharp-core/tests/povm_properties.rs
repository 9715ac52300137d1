//! Property tests for the symmetric measurement family: algebraic
//! identities that must hold for every parameter choice, not just the
//! frozen examples in the unit tests.

use proptest::prelude::*;
use std::f64::consts::PI;
use unsharp_core::{
    C64, Mat2, MeasurementAxis, Outcome, QubitState, apply_measurement, bloch_angles,
    build_symmetric_povm, fidelity, outcome_probability, projectors,
};

fn axis() -> impl Strategy<Value = MeasurementAxis> {
    (0.0..PI, 0.0..(2.0 * PI)).prop_map(|(t, p)| MeasurementAxis::new(t, p).unwrap())
}

fn state() -> impl Strategy<Value = QubitState> {
    (0.0..PI, 0.0..(2.0 * PI), 0.0..(2.0 * PI)).prop_map(|(t, p, gamma)| {
        let base = QubitState::from_bloch_angles(t, p);
        let [g, e] = base.amplitudes();
        let phase = C64::from_polar(1.0, gamma);
        QubitState::new(g * phase, e * phase).unwrap()
    })
}

/// States with both amplitudes bounded away from zero, so every outcome
/// has nonzero probability at any sharpness.
fn interior_state() -> impl Strategy<Value = QubitState> {
    (0.3..(PI - 0.3), 0.0..(2.0 * PI))
        .prop_map(|(t, p)| QubitState::from_bloch_angles(t, p))
}

fn dot(v: [f64; 3], w: [f64; 3]) -> f64 {
    v[0] * w[0] + v[1] * w[1] + v[2] * w[2]
}

proptest! {
    #[test]
    fn completeness(p0 in 0.0..=0.5f64, ax in axis()) {
        let povm = build_symmetric_povm(p0, ax).unwrap();
        let sum = povm.m0().adjoint().mul(povm.m0())
            .add(&povm.m1().adjoint().mul(povm.m1()));
        prop_assert!(sum.max_abs_diff(&Mat2::identity()) < 1e-12);
    }

    #[test]
    fn projective_limit_reduces_to_projectors(ax in axis()) {
        let povm = build_symmetric_povm(0.0, ax).unwrap();
        let (p_plus, p_minus) = projectors(ax);
        prop_assert!(povm.m0().max_abs_diff(&p_minus) < 1e-12);
        prop_assert!(povm.m1().max_abs_diff(&p_plus) < 1e-12);
        // orthogonal projectors annihilate each other
        let zero = Mat2::zero();
        prop_assert!(povm.m0().mul(povm.m1()).max_abs_diff(&zero) < 1e-12);
    }

    #[test]
    fn half_is_the_identity_channel(ax in axis(), st in state()) {
        let povm = build_symmetric_povm(0.5, ax).unwrap();
        for outcome in [Outcome::Zero, Outcome::One] {
            let p = outcome_probability(&st, &povm, outcome);
            prop_assert!((p - 0.5).abs() < 1e-12);
            let (post, _) = apply_measurement(&st, &povm, outcome).unwrap();
            prop_assert!(fidelity(&post, &st) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn probabilities_are_a_distribution(p0 in 0.0..=0.5f64, ax in axis(), st in state()) {
        let povm = build_symmetric_povm(p0, ax).unwrap();
        let p0_out = outcome_probability(&st, &povm, Outcome::Zero);
        let p1_out = outcome_probability(&st, &povm, Outcome::One);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p0_out));
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p1_out));
        prop_assert!((p0_out + p1_out - 1.0).abs() < 1e-12);
    }

    #[test]
    fn axis_component_is_a_martingale(p0 in 0.0..=0.5f64, ax in axis(), st in state()) {
        // the outcome-averaged Bloch component along the measurement
        // axis is unchanged by the measurement
        let povm = build_symmetric_povm(p0, ax).unwrap();
        let n = ax.unit_vector();
        let before = dot(st.bloch_vector(), n);
        let mut after = 0.0;
        for outcome in [Outcome::Zero, Outcome::One] {
            let p = outcome_probability(&st, &povm, outcome);
            if p > 1e-12 {
                let (post, _) = apply_measurement(&st, &povm, outcome).unwrap();
                after += p * dot(post.bloch_vector(), n);
            }
        }
        prop_assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn sharper_measurements_disturb_more(st in interior_state(), ax in axis()) {
        // conditioned on outcome 0, the axis component moves strictly
        // monotonically with sharpness
        let n = ax.unit_vector();
        let mut previous = None;
        for p0 in [0.45, 0.30, 0.15, 0.0] {
            let povm = build_symmetric_povm(p0, ax).unwrap();
            let (post, _) = apply_measurement(&st, &povm, Outcome::Zero).unwrap();
            let component = dot(post.bloch_vector(), n);
            if let Some(prev) = previous {
                prop_assert!(component <= prev + 1e-12, "{component} vs {prev}");
            }
            previous = Some(component);
        }
    }

    #[test]
    fn operators_are_affine_in_the_axis_paulis(p0 in 0.0..=0.5f64, ax in axis()) {
        let povm = build_symmetric_povm(p0, ax).unwrap();
        let a = 0.5 * (p0.sqrt() + (1.0 - p0).sqrt());
        let b = 0.5 * (p0.sqrt() - (1.0 - p0).sqrt());
        let n = ax.unit_vector();
        let r_sigma = Mat2::sigma_x().scale(C64::new(n[0], 0.0))
            .add(&Mat2::sigma_y().scale(C64::new(n[1], 0.0)))
            .add(&Mat2::sigma_z().scale(C64::new(n[2], 0.0)));
        let expect_m0 = Mat2::identity().scale(C64::new(a, 0.0))
            .add(&r_sigma.scale(C64::new(b, 0.0)));
        let expect_m1 = Mat2::identity().scale(C64::new(a, 0.0))
            .sub(&r_sigma.scale(C64::new(b, 0.0)));
        prop_assert!(povm.m0().max_abs_diff(&expect_m0) < 1e-12);
        prop_assert!(povm.m1().max_abs_diff(&expect_m1) < 1e-12);
    }

    #[test]
    fn bloch_angles_round_trip(t in 0.05..(PI - 0.05), p in 0.0..(2.0 * PI), gamma in 0.0..(2.0 * PI)) {
        let st = QubitState::from_bloch_angles(t, p);
        let [g, e] = st.amplitudes();
        let phase = C64::from_polar(1.0, gamma);
        let rotated = QubitState::new(g * phase, e * phase).unwrap();
        let (t2, p2) = bloch_angles(&rotated);
        prop_assert!((t - t2).abs() < 1e-9);
        let dphi = (p - p2).rem_euclid(2.0 * PI);
        prop_assert!(dphi < 1e-9 || dphi > 2.0 * PI - 1e-9);
    }

    #[test]
    fn fidelity_is_symmetric_and_phase_blind(a in state(), b in state(), gamma in 0.0..(2.0 * PI)) {
        let f_ab = fidelity(&a, &b);
        let f_ba = fidelity(&b, &a);
        prop_assert!((f_ab - f_ba).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f_ab));
        let [g, e] = b.amplitudes();
        let phase = C64::from_polar(1.0, gamma);
        let b2 = QubitState::new(g * phase, e * phase).unwrap();
        prop_assert!((fidelity(&a, &b2) - f_ab).abs() < 1e-12);
        prop_assert!(fidelity(&a, &a) > 1.0 - 1e-12);
    }

    #[test]
    fn post_states_stay_pure(p0 in 0.0..=0.5f64, ax in axis(), st in interior_state()) {
        let povm = build_symmetric_povm(p0, ax).unwrap();
        for outcome in [Outcome::Zero, Outcome::One] {
            let (post, prob) = apply_measurement(&st, &povm, outcome).unwrap();
            prop_assert!((prob - outcome_probability(&st, &povm, outcome)).abs() < 1e-12);
            let n = post.bloch_vector();
            prop_assert!((dot(n, n) - 1.0).abs() < 1e-9);
        }
    }
}
