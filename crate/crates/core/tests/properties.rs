use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tunnelgate::analysis::{
    classify, classify_lengths, critical_beta, gain_threshold_beta, threshold_ratio, time_gain, traversal_from,
    traversal_velocity, RatioPoint, Region,
};
use tunnelgate::approx::{expansion_first_order, phase_time_branch, potential_for_q};
use tunnelgate::exact::{free_time, phase_time_exact};
use tunnelgate::grid::Execution;
use tunnelgate::oracle::{phase_derivatives, phase_time_numeric, DifferentiationPlan, Structure};
use tunnelgate::verify::{convergence_systems, flux_conservation, halving_ratio, oracle_agreement, oracle_grid};
use tunnelgate::{derive_kinematics, BarrierSystem, SolutionBranch};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// A branch-valid system with `E ∈ [1.1, 50]`, `V0 − E ∈ (−0.95, 0.95)`.
fn random_system(rng: &mut impl Rng, max_qa: f64) -> BarrierSystem {
    let e = rng.random_range(1.1..50.0);
    let d: f64 = rng.random_range(-0.95..0.95);
    let q = ((1.0 - d) * (1.0 + d)).sqrt();
    let a = rng.random_range(0.0..max_qa) / q;
    let l = rng.random_range(0.1..30.0);
    BarrierSystem::natural(e, e + d, a, l)
}

#[test]
fn oracle_grid_matches_closed_form() {
    let grid = oracle_grid();
    assert!(grid.len() >= 200);
    let report = oracle_agreement(&grid, Default::default());
    assert!(report.passed, "{report}");
    let flux = flux_conservation(&grid, Default::default());
    assert!(flux.passed, "{flux}");
}

#[test]
fn sequential_and_parallel_verification_agree() {
    let grid = oracle_grid();
    let seq = oracle_agreement(
        &grid,
        tunnelgate::verify::VerifyOptions {
            exec: Execution::Sequential,
            ..Default::default()
        },
    );
    let par = oracle_agreement(&grid, Default::default());
    assert_eq!(seq, par);
}

#[test]
fn zero_gap_merges_into_single_barrier() {
    let mut count = 0;
    for e in [1.3, 2.0, 5.0, 12.0, 40.0] {
        for d in [-0.8f64, -0.4, 0.0, 0.4, 0.8] {
            let q = ((1.0 - d) * (1.0 + d)).sqrt();
            for qa in [0.005, 0.1, 0.6] {
                let a = qa / q;
                let exact = phase_time_exact(&BarrierSystem::natural(e, e + d, a, 0.0))
                    .unwrap()
                    .value;
                let single = Structure::single_barrier(2.0 * a, e + d);
                let oracle = phase_derivatives(e, &single, 2.0 * a, 1e-6).unwrap().richardson;
                assert!(rel(exact, oracle) <= 1e-6, "E={e} d={d} a={a}: {exact} vs {oracle}");
                count += 1;
            }
        }
    }
    assert!(count >= 50);
}

#[test]
fn continuous_across_degenerate_potential() {
    for e in [1.5, 5.0, 20.0] {
        for a in [0.01, 0.3] {
            let at = phase_time_exact(&BarrierSystem::natural(e, e, a, 5.0)).unwrap().value;
            for side in [-1e-6, 1e-6] {
                let near = phase_time_exact(&BarrierSystem::natural(e, e + side, a, 5.0))
                    .unwrap()
                    .value;
                assert!(rel(near, at) <= 1e-4, "E={e} a={a}: {near} vs {at}");
            }
        }
    }
}

#[test]
fn scheme_gap_shrinks_fourfold_with_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tested = 0;
    while tested < 10 {
        let sys = random_system(&mut rng, 0.5);
        if sys.width == 0.0 {
            continue;
        }
        let r = sys.reduced();
        let structure = Structure::double_barrier(&r);
        let d = r.gap + 2.0 * r.width;
        let (Ok(coarse), Ok(fine)) = (
            phase_derivatives(r.energy, &structure, d, 1e-3),
            phase_derivatives(r.energy, &structure, d, 5e-4),
        ) else {
            continue;
        };
        let ratio = coarse.gap() / fine.gap();
        assert!((3.0..=5.0).contains(&ratio), "{sys:?}: ratio {ratio}");
        tested += 1;
    }
}

#[test]
fn scale_invariant_classification() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let beta = rng.random_range(0.5..0.999);
        let a = rng.random_range(0.01..5.0);
        let l = rng.random_range(0.01..5.0);
        for branch in [SolutionBranch::A, SolutionBranch::B] {
            let base = classify_lengths(beta, a, l, branch).unwrap();
            for s in [1e-3, 1e3] {
                let scaled = classify_lengths(beta, s * a, s * l, branch).unwrap();
                assert_eq!(base.region, scaled.region);
                assert!((base.margin - scaled.margin).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn classification_follows_threshold_curve() {
    for branch in [SolutionBranch::A, SolutionBranch::B] {
        let lo = critical_beta(branch).unwrap();
        for i in 1..=50 {
            let beta = lo + (1.0 - lo) * i as f64 / 51.0;
            let curve = threshold_ratio(branch, beta).unwrap();
            assert!(curve > 0.0 && curve.is_finite());
            for j in 1..=50 {
                let width_ratio = curve * (j as f64 - 0.5) / 25.0;
                let v = classify(&RatioPoint {
                    beta,
                    width_ratio,
                    branch,
                })
                .unwrap();
                let expected = if width_ratio > curve {
                    Region::Superluminal
                } else {
                    Region::Subluminal
                };
                assert_eq!(
                    v.region, expected,
                    "{branch:?} beta={beta} ratio={width_ratio} curve={curve}"
                );
            }
        }
    }
}

#[test]
fn linearized_traversal_velocity_matches_branch_times() {
    let mut checked = 0;
    for e in [10.0, 20.0, 50.0] {
        for branch in [SolutionBranch::A, SolutionBranch::B] {
            for a in [1e-3, 1e-2, 0.05] {
                let v0 = potential_for_q(branch, e, 0.3, 1.0).unwrap();
                let sys = BarrierSystem::natural(e, v0, a, 10.0);
                let tau_f = free_time(&sys).unwrap().value;
                let gain = time_gain(&sys, branch).unwrap();
                if gain.abs() / tau_f > 0.01 {
                    continue;
                }
                let tau = phase_time_branch(&sys).unwrap().unwrap().value;
                let direct = (sys.gap + 2.0 * sys.width) / tau;
                let linear = traversal_velocity(&sys, branch).unwrap();
                assert!(rel(linear, direct) <= 1e-3, "{sys:?}");
                checked += 1;
            }
        }
    }
    assert!(checked >= 10);
}

#[test]
fn gain_changes_sign_at_threshold() {
    let b = gain_threshold_beta();
    let below = tunnelgate::analysis::gain_from(b - 1e-6, 1.0, SolutionBranch::A).unwrap();
    let above = tunnelgate::analysis::gain_from(b + 1e-6, 1.0, SolutionBranch::A).unwrap();
    assert!(below < 0.0 && above > 0.0);
}

/// The branch closed forms keep only the `1/α` part of the first-order
/// slope and miss an equal-sized `α` part, so their error is linear in `a`:
/// halving the width only halves it.
#[test]
fn branch_formula_error_is_linear_in_width() {
    for sys in convergence_systems() {
        let ratio = halving_ratio(&sys, |s| Ok(phase_time_branch(s)?.unwrap().value)).unwrap();
        assert!((1.8..=2.2).contains(&ratio), "{sys:?}: ratio {ratio}");
    }
}

/// Small-α reduction of the branch-A expansion: the discarded `α` terms are
/// exactly `−α[(V0−E)k² + k² + q²]·qa`, and they are not small next to the
/// kept `1/α` term; their ratio tends to `k²/E²`, not to `α²`.
#[test]
fn small_alpha_reduction_drops_comparable_term() {
    for e in [20.0, 50.0, 200.0] {
        for target_q in [0.05, 0.2] {
            let v0 = potential_for_q(SolutionBranch::A, e, target_q, 1.0).unwrap();
            let sys = BarrierSystem::natural(e, v0, 0.01 / target_q, 10.0);
            let kin = derive_kinematics(&sys).unwrap();
            let (k, q, al) = (kin.k, kin.q, kin.matching_ratio);
            let qa = q * sys.width;
            let full = expansion_first_order(&kin, &sys).value;
            let kept = ((v0 - e) * k * k - (k * k + q * q)) / al * qa;
            let dropped = -al * ((v0 - e) * k * k + k * k + q * q) * qa;
            assert!(rel(kept + dropped, full) < 1e-8);
            let share = dropped / kept;
            assert!(share > 0.5 && share < 1.5, "E={e} q={target_q}: share {share}");
            assert!(share > 10.0 * al * al);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zero_width_is_free_flight(e in 1.05f64..100.0, d in -0.99f64..0.99, l in 0.01f64..100.0) {
        let sys = BarrierSystem::natural(e, e + d, 0.0, l);
        let kin = derive_kinematics(&sys).unwrap();
        let expected = l / kin.group_velocity;
        prop_assert!(rel(phase_time_exact(&sys).unwrap().value, expected) <= 1e-12);
        prop_assert!(rel(phase_time_numeric(&sys, &DifferentiationPlan::default()).unwrap().value, expected) <= 1e-12);
        if let Some(t) = phase_time_branch(&sys).unwrap() {
            prop_assert!(rel(t.value, expected) <= 1e-12);
        }
    }

    #[test]
    fn branch_formulas_exceed_gap_transit(e in 1.05f64..100.0, d in -0.99f64..0.99, a in 1e-6f64..1.0, l in 0.0f64..50.0) {
        prop_assume!(d.abs() > 1e-9);
        let sys = BarrierSystem::natural(e, e + d, a, l);
        let kin = derive_kinematics(&sys).unwrap();
        let tau = phase_time_branch(&sys).unwrap().unwrap().value;
        prop_assert!(tau > l / kin.group_velocity);
    }

    #[test]
    fn branch_b_beats_group_velocity(beta in 0.01f64..0.999, a in 1e-6f64..10.0, l in 0.0f64..10.0) {
        let vt = traversal_from(beta, a, l, SolutionBranch::B).unwrap();
        prop_assert!(vt > beta);
    }

    #[test]
    fn flux_is_conserved(e in 1.05f64..60.0, d in -0.99f64..0.99, qa in 0.0f64..3.0, l in 0.0f64..40.0) {
        let q = ((1.0 - d) * (1.0 + d)).sqrt();
        let sys = BarrierSystem::natural(e, e + d, qa / q, l);
        let rec = tunnelgate::oracle::scatter(&sys).unwrap();
        prop_assert!(rec.flux_residual.abs() <= 1e-10);
    }
}
