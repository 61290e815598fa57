//! Revised simplex solver with primal and dual values.
//!
//! [`solve`] never errors on infeasible or unbounded programs; those are
//! reported through [`SolveStatus`]. Only structurally malformed input is an
//! error.

mod kkt;
mod lu;
mod simplex;
mod standard;

pub use kkt::{verify_kkt, CertificateReport, KktError};
pub use lu::{LuFactor, Singular};
pub use standard::{to_standard_form, StandardForm};

use std::time::Instant;

use thiserror::Error;

use crate::formulation::LinearProgram;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub feasibility_tol: f64,
    /// Reduced-cost tolerance.
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    pub max_iterations: usize,
    /// Switch to Bland's rule after `stall_window` degenerate pivots.
    pub anti_cycling: bool,
    pub stall_window: usize,
    pub scaling: bool,
    /// Pivots between fresh LU factorizations.
    pub refactor_interval: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-7,
            pivot_tol: 1e-9,
            max_iterations: 1_000_000,
            anti_cycling: true,
            stall_window: 1000,
            scaling: true,
            refactor_interval: 100,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        let tols = [
            ("feasibility_tol", self.feasibility_tol),
            ("optimality_tol", self.optimality_tol),
            ("pivot_tol", self.pivot_tol),
        ];
        for (name, v) in tols {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolverError::Options(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.refactor_interval == 0 {
            return Err(SolverError::Options("refactor_interval must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::IterationLimit => "iteration_limit",
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("invalid solver options: {0}")]
    Options(String),
}

/// Result of a solve, in the original (unscaled) space of the program.
///
/// Row duals follow the convention `dual[i] = ∂objective / ∂rhs[i]`: for a
/// minimization, `>=` rows carry non-negative duals and `<=` rows
/// non-positive ones.
#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    /// Includes the program's constant offset.
    pub objective: f64,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub reduced_cost: Vec<f64>,
    pub iterations: usize,
    pub solve_seconds: f64,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

pub fn solve(lp: &LinearProgram, opts: &SolverOptions) -> Result<Solution, SolverError> {
    opts.validate()?;
    lp.check().map_err(SolverError::Malformed)?;
    let start = Instant::now();
    let sf = to_standard_form(lp, opts.scaling);
    let out = simplex::solve(&sf, opts);
    let primal = sf.primal_to_original(&out.x);
    let dual = sf.dual_to_original(&out.y);
    let reduced_cost = sf.reduced_cost_to_original(&out.d);
    Ok(Solution {
        status: out.status,
        objective: lp.objective_value(&primal),
        primal,
        dual,
        reduced_cost,
        iterations: out.iterations,
        solve_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::{dense_lp, Relation};

    fn inf() -> f64 {
        f64::INFINITY
    }

    #[test]
    fn single_variable_lower_bound_row() {
        // min x s.t. x >= 3
        let lp = dense_lp(&[1.0], &[(0.0, inf())], &[(vec![1.0], Relation::Ge, 3.0)]);
        let s = solve(&lp, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective - 3.0).abs() < 1e-12);
        assert!((s.dual[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn merit_order_dispatch_and_price() {
        // Two generators (cost 5 and 50, 8 MW each) meeting 10 MW.
        let lp = dense_lp(&[5.0, 50.0], &[(0.0, 8.0), (0.0, 8.0)], &[(vec![1.0, 1.0], Relation::Eq, 10.0)]);
        let s = solve(&lp, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.primal[0] - 8.0).abs() < 1e-9);
        assert!((s.primal[1] - 2.0).abs() < 1e-9);
        assert!((s.dual[0] - 50.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let lp = dense_lp(&[1.0, 1.0], &[(0.0, 1.0), (0.0, 1.0)], &[(vec![1.0, 1.0], Relation::Ge, 3.0)]);
        let s = solve(&lp, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let lp = dense_lp(&[-1.0, 0.0], &[(0.0, inf()), (0.0, inf())], &[(vec![1.0, -1.0], Relation::Le, 1.0)]);
        let s = solve(&lp, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Unbounded);
    }

    #[test]
    fn free_variable_without_splitting() {
        // min |shift| style: x free, x >= -2 via row, minimize x.
        let lp = dense_lp(&[1.0], &[(f64::NEG_INFINITY, inf())], &[(vec![1.0], Relation::Ge, -2.0)]);
        let s = solve(&lp, &SolverOptions::default()).unwrap();
        assert!((s.primal[0] + 2.0).abs() < 1e-12);
        let sf = to_standard_form(&lp, true);
        assert_eq!(sf.n, 1);
    }

    #[test]
    fn equality_only_program() {
        let lp = dense_lp(
            &[1.0, 2.0, 3.0],
            &[(0.0, inf()); 3],
            &[(vec![1.0, 1.0, 1.0], Relation::Eq, 6.0), (vec![1.0, -1.0, 0.0], Relation::Eq, 0.0)],
        );
        let s = solve(&lp, &SolverOptions::default()).unwrap();
        assert!((s.objective - 9.0).abs() < 1e-9);
        let report = verify_kkt(&lp, &s, 1e-9).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn iteration_limit_reported() {
        let lp = dense_lp(
            &[-1.0, -1.0],
            &[(0.0, inf()), (0.0, inf())],
            &[(vec![1.0, 2.0], Relation::Le, 4.0), (vec![3.0, 1.0], Relation::Le, 6.0)],
        );
        let opts = SolverOptions { max_iterations: 0, ..Default::default() };
        let s = solve(&lp, &opts).unwrap();
        assert_eq!(s.status, SolveStatus::IterationLimit);
    }

    #[test]
    fn rejects_bad_options_and_malformed_lp() {
        let lp = dense_lp(&[1.0], &[(2.0, 1.0)], &[]);
        assert!(matches!(solve(&lp, &SolverOptions::default()), Err(SolverError::Malformed(_))));
        let ok = dense_lp(&[1.0], &[(0.0, 1.0)], &[]);
        let opts = SolverOptions { feasibility_tol: 0.0, ..Default::default() };
        assert!(matches!(solve(&ok, &opts), Err(SolverError::Options(_))));
    }
}
