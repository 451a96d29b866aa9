mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dmcp::dynamics::segment_propagator_expm;
use dmcp::nlevel::{nlevel_propagator, wigner_lift, LiftedSequence};
use dmcp::robustness::{area_scan, fidelity_under, haar_state, InitialStateSet, Metric};
use dmcp::synthesis::{make_universal, pp_residuals, solve_pp, SynthesisProblem};
use dmcp::tables::{lookup, PUBLISHED};
use dmcp::{
    apply, compose, gate_distance, segment_propagator, CompositeSequence, ErrorModel, PulseSegment, SequenceKind,
};

fn segment() -> impl Strategy<Value = PulseSegment> {
    (-10.0..10.0f64, 0.05..3.0f64, 1e-3..4.0 * PI).prop_map(|(r, c, a)| PulseSegment::new(r, c, a).unwrap())
}

fn exact_universal() -> Vec<CompositeSequence> {
    let derive = |theta: f64, seed: &[f64], order: u8| {
        let problem = SynthesisProblem::new(theta, seed.len(), order).unwrap();
        make_universal(&solve_pp(&problem, seed).unwrap(), theta, order).unwrap()
    };
    vec![derive(PI, &[5.52, 0.69], 1), derive(FRAC_PI_2, &[11.99, 1.94], 1), derive(PI, &[-4.25, -1.96, 1.65], 2)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn segments_are_special_unitary(seg in segment()) {
        let u = segment_propagator(&seg, &ErrorModel::zero(), 0).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-12);
        prop_assert!((u.determinant() - C64::new(1.0, 0.0)).norm() < 1e-12);
        let column = u.get(0, 0).norm_sqr() + u.get(0, 1).norm_sqr();
        prop_assert!((column - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slicing_a_segment_changes_nothing(seg in segment(), k in 1usize..=64) {
        let piece = PulseSegment::new(seg.ratio(), seg.coupling(), seg.nominal_area() / k as f64).unwrap();
        let sliced = CompositeSequence::new(vec![piece; k], PI, 1, SequenceKind::PointToPoint).unwrap();
        let whole = segment_propagator(&seg, &ErrorModel::zero(), 0).unwrap();
        let parts = compose(&sliced, &ErrorModel::zero()).unwrap();
        prop_assert!(parts.max_abs_diff(&whole).unwrap() < 1e-10);
    }

    #[test]
    fn exponential_route_agrees_with_closed_form(seg in segment(), area in -0.5..0.5f64) {
        let err = ErrorModel::area(area);
        let closed = segment_propagator(&seg, &err, 0).unwrap();
        let expm = segment_propagator_expm(&seg, &err, 0).unwrap();
        prop_assert!(closed.max_abs_diff(&expm).unwrap() < 1e-10);
    }

    #[test]
    fn relaxation_only_loses_norm(
        ratios in prop::collection::vec(-10.0..10.0f64, 1..6),
        seed in 0u64..1000,
    ) {
        let seq = CompositeSequence::from_ratios(&ratios, PI, 1, SequenceKind::PointToPoint).unwrap();
        let psi = haar_state(seed, 2).unwrap();
        let mut last = 1.0 + 1e-12;
        for k in 0..=20 {
            let gamma = 0.01 * k as f64;
            let norm = apply(&compose(&seq, &ErrorModel::relaxation(gamma)).unwrap(), &psi).unwrap().norm();
            prop_assert!(norm <= last + 1e-12, "γ = {gamma}: {norm} after {last}");
            last = norm;
        }
    }

    #[test]
    fn lift_is_a_homomorphism(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = common::random_su2(&mut rng);
        let b = common::random_su2(&mut rng);
        let lhs = wigner_lift(&a.matmul(&b).unwrap(), n).unwrap();
        let rhs = wigner_lift(&a, n).unwrap().matmul(&wigner_lift(&b, n).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().frobenius_norm() < 1e-10);
        prop_assert!(lhs.unitarity_defect() < 1e-10);
    }

    #[test]
    fn lifted_dynamics_match_lifted_propagator(
        ratios in prop::collection::vec(-10.0..10.0f64, 1..6),
        n in 2usize..=5,
        eps in -0.3..0.3f64,
    ) {
        let seq = CompositeSequence::from_ratios(&ratios, PI, 1, SequenceKind::PointToPoint).unwrap();
        let err = ErrorModel::area(eps);
        let lifted = wigner_lift(&compose(&seq, &err).unwrap(), n).unwrap();
        let direct = nlevel_propagator(&seq, n, &err).unwrap();
        // equal up to a global phase
        let overlap = lifted.adjoint().matmul(&direct).unwrap().trace().norm() / n as f64;
        prop_assert!(1.0 - overlap < 1e-6, "overlap {overlap}");
    }

    #[test]
    fn state_error_bounded_by_gate_distance(row in 0usize..6, eps in -0.4..0.4f64, seed in 0u64..10_000) {
        let seq = PUBLISHED[row].sequence();
        let u = compose(&seq, &ErrorModel::area(eps)).unwrap();
        let target = seq.target_rotation().unwrap().matrix();
        let bound = 2.0 * gate_distance(&u, &target) + 1e-6;
        let psi = haar_state(seed, 2).unwrap();
        let infidelity = 1.0 - fidelity_under(&seq, &psi, &ErrorModel::area(eps), Metric::State).unwrap();
        prop_assert!(infidelity <= bound, "{infidelity} > {bound}");
    }

    #[test]
    fn fidelity_is_flat_at_zero_error(seed in 0u64..10_000) {
        let psi = haar_state(seed, 2).unwrap();
        let h = 1e-4;
        for seq in exact_universal() {
            let f = |e: f64| fidelity_under(&seq, &psi, &ErrorModel::area(e), Metric::State).unwrap();
            let slope = (f(h) - f(-h)) / (2.0 * h);
            prop_assert!(slope.abs() < 1e-6, "slope {slope}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solutions_come_in_sign_pairs(a in -12.0..12.0f64, b in -12.0..12.0f64, theta in prop::sample::select(vec![PI, FRAC_PI_2])) {
        let problem = SynthesisProblem::new(theta, 2, 1).unwrap();
        if let Ok(root) = solve_pp(&problem, &[a, b]) {
            let negated: Vec<f64> = root.iter().map(|r| -r).collect();
            prop_assert!(pp_residuals(&problem, &root).unwrap().max_condition() < 1e-10);
            prop_assert!(pp_residuals(&problem, &negated).unwrap().max_condition() < 1e-10);
            for half in [&root, &negated] {
                let seq = make_universal(half, theta, 1).unwrap();
                let u = compose(&seq, &ErrorModel::zero()).unwrap();
                prop_assert!(gate_distance(&u, &seq.target_rotation().unwrap().matrix()) < 1e-3);
            }
        }
    }
}

#[test]
fn finite_differences_agree_with_polynomial_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let k = rand::Rng::random_range(&mut rng, 2..=4);
        let ratios: Vec<f64> = (0..k).map(|_| rand::Rng::random_range(&mut rng, -10.0..10.0)).collect();
        let fd = dmcp::synthesis::finite_difference_derivatives(&ratios, 6).unwrap();
        let fit = common::polyfit_derivatives(&ratios, 6);
        for order in 0..=6 {
            let err = common::derivative_error(fd[order], fit[order], &ratios, order);
            assert!(err < 1e-6, "{ratios:?} order {order}: {} vs {}", fd[order], fit[order]);
        }
    }
}

#[test]
fn polynomial_fit_recovers_exact_derivatives() {
    for row in &PUBLISHED {
        let half = row.half_ratios();
        let exact = dmcp::synthesis::taylor_derivatives(half, 6);
        let fit = common::polyfit_derivatives(half, 6);
        for order in 0..=6 {
            assert!(common::derivative_error(fit[order], exact[order], half, order) < 1e-8, "{} d{order}", row.name);
        }
    }
}

fn curvature(f: impl Fn(f64) -> f64) -> f64 {
    let h = 1e-3;
    (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h)
}

fn gate_curvature(seq: &CompositeSequence) -> f64 {
    let target = seq.target_rotation().unwrap().matrix();
    curvature(|e| gate_distance(&compose(seq, &ErrorModel::area(e)).unwrap(), &target))
}

#[test]
#[ignore = "the gate phase of first-order universal sequences drifts linearly in the area error"]
fn first_order_flattens_gate_infidelity() {
    let resonant = gate_curvature(&CompositeSequence::resonant(PI).unwrap());
    for seq in exact_universal().iter().filter(|s| s.order() == 1) {
        let c = gate_curvature(seq);
        assert!(c.abs() <= 1e-3 && c.abs() < resonant.abs(), "curvature {c} vs resonant {resonant}");
    }
}

#[test]
fn first_order_flattens_transfer_not_gate() {
    let resonant = CompositeSequence::resonant(PI).unwrap();
    let transfer_loss =
        |seq: &CompositeSequence| curvature(|e| 1.0 - compose(seq, &ErrorModel::area(e)).unwrap().get(1, 0).norm_sqr());
    let bare = transfer_loss(&resonant);
    let seq = &exact_universal()[0];
    assert!(transfer_loss(seq).abs() < 1e-3, "{}", transfer_loss(seq));
    assert!((bare - PI * PI / 2.0).abs() < 1e-3, "{bare}");
    // measured: ≈ 32 against π²/4 for the bare pulse
    let gate = gate_curvature(seq);
    assert!(gate > 10.0 * gate_curvature(&resonant), "{gate}");
}

#[test]
fn scans_start_at_unit_fidelity() {
    let axis = [-0.1, 0.0, 0.1];
    for row in &PUBLISHED {
        let seq = row.sequence();
        let scan = area_scan(&seq, &InitialStateSet::qubit_reference(), &axis, Metric::State).unwrap();
        for s in 0..3 {
            assert!(1.0 - scan.values()[scan.index(&[s, 1])] < 1e-3, "{}", row.name);
        }
        let grid = dmcp::robustness::scan_2d(
            &seq,
            &dmcp::StateVector::basis(2, 0).unwrap(),
            &axis,
            &axis,
            dmcp::DetuningErrorMode::Relative,
            Metric::State,
        )
        .unwrap();
        assert!(1.0 - grid.values()[grid.index(&[1, 1])] < 1e-3, "{}", row.name);
    }
}

#[test]
fn lifted_protocol_reduces_to_qubit() {
    let seq = lookup("pi-n6-o2").unwrap().sequence();
    let lifted = LiftedSequence::new(seq.clone(), 2).unwrap();
    let psi = haar_state(3, 2).unwrap();
    for eps in [-0.2, 0.0, 0.15] {
        let err = ErrorModel::area(eps);
        let a = fidelity_under(&seq, &psi, &err, Metric::State).unwrap();
        let b = fidelity_under(&lifted, &psi, &err, Metric::State).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}

/// Radii for the ground, equal and weighted reference states.
fn reference_radii(seq: &CompositeSequence, metric: Metric) -> Vec<f64> {
    InitialStateSet::qubit_reference()
        .states
        .iter()
        .map(|(_, s)| dmcp::robustness::robustness_radius(seq, s, 1e-4, metric).unwrap_or(0.0))
        .collect()
}

#[test]
#[ignore = "published universal rows stabilise the transfer population only; superposition states lose the flat region"]
fn radius_is_independent_of_initial_state() {
    for name in ["pi-n4-o1", "pi-n6-o2"] {
        let radii = reference_radii(&lookup(name).unwrap().sequence(), Metric::State);
        let spread = radii.iter().cloned().fold(f64::MIN, f64::max) - radii.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread <= 1e-3, "{name}: {radii:?}");
    }
}

#[test]
fn superposition_states_lose_the_flat_region() {
    for name in ["pi-n4-o1", "pi-n6-o2"] {
        let radii = reference_radii(&lookup(name).unwrap().sequence(), Metric::State);
        assert!(radii[0] > 0.2, "{name}: {radii:?}");
        assert!(radii[1] < 0.01 && radii[2] < 0.01, "{name}: {radii:?}");
    }
}
