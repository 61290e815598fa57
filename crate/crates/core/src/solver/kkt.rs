use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Solution, SolveStatus};
use crate::formulation::{LinearProgram, Relation};

#[derive(Debug, Error, PartialEq)]
pub enum KktError {
    #[error("solution is not optimal (status {0:?})")]
    NotOptimal(SolveStatus),
    #[error("solution dimensions do not match the program")]
    DimensionMismatch,
}

/// Optimality certificate computed independently of the solver internals,
/// from the program data, the primal point and the row duals only.
///
/// Residuals are relative: row residuals against `max(1, |rhs|)`, reduced
/// cost sign errors against the magnitude of the terms forming them, and
/// complementarity and the duality gap against `max(1, |objective|)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub max_primal_residual: f64,
    pub worst_primal: Option<String>,
    pub max_dual_residual: f64,
    pub worst_dual: Option<String>,
    pub max_complementarity: f64,
    pub worst_complementarity: Option<String>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub duality_gap: f64,
    pub tol: f64,
    pub passed: bool,
}

fn track(max: &mut f64, worst: &mut Option<String>, value: f64, name: impl FnOnce() -> String) {
    if value > *max {
        *max = value;
        *worst = Some(name());
    }
}

pub fn verify_kkt(lp: &LinearProgram, solution: &Solution, tol: f64) -> Result<CertificateReport, KktError> {
    if solution.status != SolveStatus::Optimal {
        return Err(KktError::NotOptimal(solution.status));
    }
    let n = lp.n_vars();
    let m = lp.n_rows();
    if solution.primal.len() != n || solution.dual.len() != m {
        return Err(KktError::DimensionMismatch);
    }
    let x = &solution.primal;
    let y = &solution.dual;
    let act = lp.activities(x);
    let primal_obj = lp.objective_value(x);
    let obj_scale = primal_obj.abs().max(1.0);

    let mut p_max = 0.0;
    let mut p_worst = None;
    for r in 0..m {
        let diff = act[r] - lp.rhs[r];
        let viol = match lp.relations[r] {
            Relation::Le => diff.max(0.0),
            Relation::Ge => (-diff).max(0.0),
            Relation::Eq => diff.abs(),
        } / lp.rhs[r].abs().max(1.0);
        track(&mut p_max, &mut p_worst, viol, || lp.constraints.key(r).to_string());
    }
    for j in 0..n {
        let viol = ((lp.lower[j] - x[j]) / lp.lower[j].abs().max(1.0))
            .max((x[j] - lp.upper[j]) / lp.upper[j].abs().max(1.0))
            .max(0.0);
        track(&mut p_max, &mut p_worst, viol, || lp.variables.key(j).to_string());
    }

    // Reduced costs from scratch: d = c − Aᵀy.
    let mut d = lp.costs.clone();
    let mut d_mag: Vec<f64> = lp.costs.iter().map(|c| c.abs()).collect();
    for &(r, c, v) in &lp.triplets {
        d[c] -= v * y[r];
        d_mag[c] += (v * y[r]).abs();
    }

    let y_scale = y.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut d_max = 0.0;
    let mut d_worst = None;
    let mut c_max = 0.0;
    let mut c_worst = None;
    for r in 0..m {
        let sign_err = match lp.relations[r] {
            Relation::Le => y[r].max(0.0),
            Relation::Ge => (-y[r]).max(0.0),
            Relation::Eq => 0.0,
        } / y_scale;
        track(&mut d_max, &mut d_worst, sign_err, || format!("dual of {}", lp.constraints.key(r)));
        let comp = (y[r] * (act[r] - lp.rhs[r])).abs() / obj_scale;
        track(&mut c_max, &mut c_worst, comp, || lp.constraints.key(r).to_string());
    }

    let mut dual_obj = lp.objective_offset + y.iter().zip(&lp.rhs).map(|(a, b)| a * b).sum::<f64>();
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        let at_lo = lo.is_finite() && x[j] - lo <= tol * lo.abs().max(1.0);
        let at_hi = hi.is_finite() && hi - x[j] <= tol * hi.abs().max(1.0);
        let scale = d_mag[j].max(1.0);
        let sign_err = match (at_lo, at_hi) {
            (true, true) => 0.0,
            (true, false) => (-d[j]).max(0.0),
            (false, true) => d[j].max(0.0),
            (false, false) => d[j].abs(),
        } / scale;
        track(&mut d_max, &mut d_worst, sign_err, || format!("reduced cost of {}", lp.variables.key(j)));
        let bound = if d[j] > 0.0 && lo.is_finite() {
            lo
        } else if d[j] < 0.0 && hi.is_finite() {
            hi
        } else {
            x[j]
        };
        dual_obj += d[j] * bound;
        let comp = (d[j] * (x[j] - bound)).abs() / obj_scale;
        track(&mut c_max, &mut c_worst, comp, || lp.variables.key(j).to_string());
    }

    let gap = (primal_obj - dual_obj).abs() / obj_scale;
    let passed = p_max <= tol && d_max <= tol && c_max <= tol && gap <= tol;
    Ok(CertificateReport {
        max_primal_residual: p_max,
        worst_primal: p_worst,
        max_dual_residual: d_max,
        worst_dual: d_worst,
        max_complementarity: c_max,
        worst_complementarity: c_worst,
        primal_objective: primal_obj,
        dual_objective: dual_obj,
        duality_gap: gap,
        tol,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::dense_lp;
    use crate::solver::{solve, SolverOptions};

    fn small() -> LinearProgram {
        dense_lp(
            &[-3.0, -5.0],
            &[(0.0, 4.0), (0.0, f64::INFINITY)],
            &[(vec![0.0, 2.0], Relation::Le, 12.0), (vec![3.0, 2.0], Relation::Le, 18.0)],
        )
    }

    #[test]
    fn certifies_optimal_solution() {
        let lp = small();
        let s = solve(&lp, &SolverOptions::default()).unwrap();
        assert!((s.objective + 36.0).abs() < 1e-9);
        let r = verify_kkt(&lp, &s, 1e-9).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.duality_gap < 1e-12);
    }

    #[test]
    fn perturbation_names_offending_row() {
        let lp = small();
        let mut s = solve(&lp, &SolverOptions::default()).unwrap();
        s.primal[1] += 1.0;
        let r = verify_kkt(&lp, &s, 1e-6).unwrap();
        assert!(!r.passed);
        assert!(r.max_primal_residual > 0.0);
        assert!(r.worst_primal.as_deref().unwrap().starts_with("c["));
    }

    #[test]
    fn refuses_non_optimal() {
        let lp = dense_lp(&[1.0], &[(0.0, 1.0)], &[(vec![1.0], Relation::Ge, 2.0)]);
        let s = solve(&lp, &SolverOptions::default()).unwrap();
        assert_eq!(verify_kkt(&lp, &s, 1e-6).unwrap_err(), KktError::NotOptimal(SolveStatus::Infeasible));
    }
}
