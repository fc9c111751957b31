//! Self-verification suites: closed form against the scattering oracle,
//! flux conservation, zero-width degeneracy and first-order convergence.

use std::fmt;

use crate::approx::{phase_time_branch_a, phase_time_branch_b, phase_time_first_order};
use crate::error::{Error, Result};
use crate::exact::{phase_time_exact, phase_time_exact_with, H1Reading};
use crate::grid::{map_ordered, Execution};
use crate::kinematics::{derive_kinematics, BarrierSystem};
use crate::oracle::{phase_time_numeric, scatter, DifferentiationPlan};

pub const ORACLE_TOLERANCE: f64 = 1e-6;
pub const FLUX_TOLERANCE: f64 = 1e-10;
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;
/// Accepted error-reduction factor under `a → a/2` for a first-order method.
pub const CONVERGENCE_WINDOW: (f64, f64) = (3.0, 5.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VerifyOptions {
    pub exec: Execution,
    #[doc(hidden)]
    pub reading: H1Reading,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub points: usize,
    pub metric_name: &'static str,
    pub metric: f64,
    pub bound: String,
    pub passed: bool,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "suite={} points={} {}={:.3e} bound={} status={}",
            self.name,
            self.points,
            self.metric_name,
            self.metric,
            self.bound,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Energies, barrier offsets `V0 − E` (both branches and `V0 = E`), `qa` and
/// `kL` values spanning the tested domain: 4 × 5 × 4 × 4 = 320 systems.
pub fn oracle_grid() -> Vec<BarrierSystem> {
    let energies: [f64; 4] = [1.5, 3.0, 8.0, 20.0];
    let offsets: [f64; 5] = [-0.8, -0.3, 0.0, 0.3, 0.8];
    let qas = [1e-3, 1e-2, 0.1, 1.0];
    let kls = [0.1, 1.0, 7.0, 50.0];
    let mut out = Vec::with_capacity(320);
    for &e in &energies {
        let k = ((e - 1.0) * (e + 1.0)).sqrt();
        for &d in &offsets {
            let q = ((1.0 - d) * (1.0 + d)).sqrt();
            for &qa in &qas {
                for &kl in &kls {
                    out.push(BarrierSystem::natural(e, e + d, qa / q, kl / k));
                }
            }
        }
    }
    out
}

/// Maximum relative gap between the closed form and the oracle over `grid`.
pub fn oracle_agreement(grid: &[BarrierSystem], opts: VerifyOptions) -> SuiteReport {
    let plan = DifferentiationPlan::default();
    let errs = map_ordered(grid, opts.exec, |sys| -> Result<f64> {
        let exact = phase_time_exact_with(sys, opts.reading)?.value;
        let oracle = phase_time_numeric(sys, &plan)?.value;
        Ok(rel(exact, oracle))
    });
    summarize("oracle-agreement", errs, "max_rel_err", ORACLE_TOLERANCE)
}

pub fn flux_conservation(grid: &[BarrierSystem], opts: VerifyOptions) -> SuiteReport {
    let res = map_ordered(grid, opts.exec, |sys| scatter(sys).map(|r| r.flux_residual.abs()));
    summarize("flux-conservation", res, "max_abs_residual", FLUX_TOLERANCE)
}

/// With `a = 0` every phase-time method must give `L/V_g`. Branch formulas
/// are only exercised inside their `E ≥ 10 mc²` window.
pub fn zero_width_degeneracy(opts: VerifyOptions) -> SuiteReport {
    let mut systems = Vec::new();
    for e in [1.2, 5.0, 20.0, 80.0] {
        for d in [-0.6, 0.0, 0.6] {
            for l in [0.5, 10.0, 120.0] {
                systems.push(BarrierSystem::natural(e, e + d, 0.0, l));
            }
        }
    }
    let plan = DifferentiationPlan::default();
    let errs = map_ordered(&systems, opts.exec, |sys| -> Result<f64> {
        let kin = derive_kinematics(sys)?;
        let expected = sys.gap / kin.group_velocity;
        let mut worst = rel(phase_time_exact_with(sys, opts.reading)?.value, expected);
        worst = worst.max(rel(phase_time_numeric(sys, &plan)?.value, expected));
        worst = worst.max(rel(phase_time_first_order(sys)?.value, expected));
        let branch = match kin.branch {
            _ if sys.energy < 10.0 => None,
            crate::SolutionBranch::A => Some(phase_time_branch_a(sys)?),
            crate::SolutionBranch::B => Some(phase_time_branch_b(sys)?),
            crate::SolutionBranch::Degenerate => None,
        };
        if let Some(t) = branch {
            worst = worst.max(rel(t.value, expected));
        }
        Ok(worst)
    });
    summarize("zero-width-degeneracy", errs, "max_rel_err", DEGENERACY_TOLERANCE)
}

/// Systems with `E ≥ 10 mc²` and `qa ≤ 0.05` on both branches, used for
/// the halving tests.
pub fn convergence_systems() -> Vec<BarrierSystem> {
    let mut out = Vec::new();
    for e in [10.0, 15.0, 20.0, 30.0, 40.0] {
        for d in [-0.7, 0.7] {
            for (a, l) in [(2e-3, 1.0), (1e-3, 6.0)] {
                out.push(BarrierSystem::natural(e, e + d, a, l));
            }
        }
    }
    out
}

/// Error-reduction factor of `approx` against the closed form when the
/// barrier width is halved.
pub fn halving_ratio(sys: &BarrierSystem, approx: impl Fn(&BarrierSystem) -> Result<f64>) -> Result<f64> {
    let err = |s: &BarrierSystem| -> Result<f64> { Ok((approx(s)? - phase_time_exact(s)?.value).abs()) };
    Ok(err(sys)? / err(&sys.with_width(0.5 * sys.width))?)
}

/// Halving `a` must shrink the first-order error about fourfold.
pub fn first_order_convergence(opts: VerifyOptions) -> SuiteReport {
    let systems = convergence_systems();
    let ratios = map_ordered(&systems, opts.exec, |sys| -> Result<f64> {
        let err = |s: &BarrierSystem| -> Result<f64> {
            Ok((phase_time_first_order(s)?.value - phase_time_exact_with(s, opts.reading)?.value).abs())
        };
        Ok(err(sys)? / err(&sys.with_width(0.5 * sys.width))?)
    });
    let (lo, hi) = CONVERGENCE_WINDOW;
    let mut worst: f64 = 4.0;
    let mut passed = true;
    let mut points = 0;
    for r in ratios {
        points += 1;
        match r {
            Ok(r) if r.is_finite() => {
                if (r - 4.0).abs() > (worst - 4.0).abs() {
                    worst = r;
                }
                passed &= (lo..=hi).contains(&r);
            }
            _ => passed = false,
        }
    }
    SuiteReport {
        name: "first-order-convergence",
        points,
        metric_name: "worst_ratio",
        metric: worst,
        bound: format!("[{lo},{hi}]"),
        passed,
    }
}

fn summarize(name: &'static str, values: Vec<Result<f64>>, metric_name: &'static str, tol: f64) -> SuiteReport {
    let mut worst: f64 = 0.0;
    let mut passed = true;
    let points = values.len();
    for v in values {
        match v {
            Ok(x) if x.is_finite() => {
                worst = worst.max(x);
                passed &= x <= tol;
            }
            Ok(_) => passed = false,
            Err(Error::SingularDenominator { .. }) => {}
            Err(e) => {
                log::error!("{name}: {e}");
                passed = false;
            }
        }
    }
    SuiteReport {
        name,
        points,
        metric_name,
        metric: worst,
        bound: format!("{tol:e}"),
        passed,
    }
}

pub fn run_all(opts: VerifyOptions) -> Vec<SuiteReport> {
    let grid = oracle_grid();
    vec![
        oracle_agreement(&grid, opts),
        flux_conservation(&grid, opts),
        zero_width_degeneracy(opts),
        first_order_convergence(opts),
    ]
}
