use crate::formulation::{LinearProgram, Relation};

/// Internal computational form of a [`LinearProgram`]:
///
/// ```text
/// min cᵀx  s.t.  A x − s = 0,  l ≤ x ≤ u,  row_lo ≤ s ≤ row_hi
/// ```
///
/// Each row owns one logical variable `s` whose bounds encode the row
/// relation, so no variable splitting is ever needed and free columns stay
/// free. Rows and columns are scaled by powers of two, which keeps the
/// mapping back to the original space exact.
#[derive(Debug, Clone)]
pub struct StandardForm {
    pub n: usize,
    pub m: usize,
    /// Scaled structural columns, `(row, value)`.
    pub cols: Vec<Vec<(usize, f64)>>,
    /// Bounds over `n + m` variables: structurals then logicals.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cost: Vec<f64>,
    /// `x_original[j] = col_scale[j] * x_scaled[j]`.
    pub col_scale: Vec<f64>,
    /// `row_scaled = row_scale[i] * row_original`.
    pub row_scale: Vec<f64>,
}

impl StandardForm {
    pub fn n_total(&self) -> usize {
        self.n + self.m
    }

    /// Structural values in the original space.
    pub fn primal_to_original(&self, x_scaled: &[f64]) -> Vec<f64> {
        (0..self.n).map(|j| x_scaled[j] * self.col_scale[j]).collect()
    }

    pub fn primal_from_original(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|j| x[j] / self.col_scale[j]).collect()
    }

    pub fn dual_to_original(&self, y_scaled: &[f64]) -> Vec<f64> {
        (0..self.m).map(|i| y_scaled[i] * self.row_scale[i]).collect()
    }

    pub fn reduced_cost_to_original(&self, d_scaled: &[f64]) -> Vec<f64> {
        (0..self.n).map(|j| d_scaled[j] / self.col_scale[j]).collect()
    }
}

fn pow2(v: f64) -> f64 {
    if !(v.is_finite() && v > 0.0) {
        return 1.0;
    }
    2f64.powi(v.log2().round() as i32)
}

/// Builds the computational form, optionally with geometric-mean
/// equilibration (a few alternating row/column passes).
pub fn to_standard_form(lp: &LinearProgram, scaling: bool) -> StandardForm {
    let n = lp.n_vars();
    let m = lp.n_rows();
    let mut row_scale = vec![1.0; m];
    let mut col_scale = vec![1.0; n];

    if scaling && !lp.triplets.is_empty() {
        for _pass in 0..6 {
            let mut rmin = vec![f64::INFINITY; m];
            let mut rmax = vec![0.0f64; m];
            for &(r, c, v) in &lp.triplets {
                let a = (v * row_scale[r] * col_scale[c]).abs();
                rmin[r] = rmin[r].min(a);
                rmax[r] = rmax[r].max(a);
            }
            for r in 0..m {
                if rmax[r] > 0.0 {
                    row_scale[r] *= pow2(1.0 / (rmin[r] * rmax[r]).sqrt());
                }
            }
            let mut cmin = vec![f64::INFINITY; n];
            let mut cmax = vec![0.0f64; n];
            for &(r, c, v) in &lp.triplets {
                let a = (v * row_scale[r] * col_scale[c]).abs();
                cmin[c] = cmin[c].min(a);
                cmax[c] = cmax[c].max(a);
            }
            for c in 0..n {
                if cmax[c] > 0.0 {
                    col_scale[c] *= pow2(1.0 / (cmin[c] * cmax[c]).sqrt());
                }
            }
        }
    }

    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(r, c, v) in &lp.triplets {
        cols[c].push((r, v * row_scale[r] * col_scale[c]));
    }

    let mut lower = Vec::with_capacity(n + m);
    let mut upper = Vec::with_capacity(n + m);
    let mut cost = Vec::with_capacity(n + m);
    for j in 0..n {
        lower.push(lp.lower[j] / col_scale[j]);
        upper.push(lp.upper[j] / col_scale[j]);
        cost.push(lp.costs[j] * col_scale[j]);
    }
    for i in 0..m {
        let b = lp.rhs[i] * row_scale[i];
        let (lo, hi) = match lp.relations[i] {
            Relation::Le => (f64::NEG_INFINITY, b),
            Relation::Ge => (b, f64::INFINITY),
            Relation::Eq => (b, b),
        };
        lower.push(lo);
        upper.push(hi);
        cost.push(0.0);
    }

    StandardForm { n, m, cols, lower, upper, cost, col_scale, row_scale }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::dense_lp;

    #[test]
    fn equality_rows_get_fixed_logicals() {
        let lp = dense_lp(&[1.0, 1.0], &[(0.0, 10.0), (0.0, 10.0)], &[(vec![1.0, 1.0], Relation::Eq, 4.0)]);
        let sf = to_standard_form(&lp, false);
        assert_eq!(sf.lower[2], sf.upper[2]);
        assert_eq!(sf.n_total(), 3);
    }

    #[test]
    fn scaling_round_trip_is_exact() {
        let lp = dense_lp(
            &[3.0, 1e-3],
            &[(0.0, 1e5), (-7.0, 7.0)],
            &[(vec![1e4, 3e-2], Relation::Le, 12.0), (vec![0.3, 250.0], Relation::Ge, -1.0)],
        );
        let sf = to_standard_form(&lp, true);
        let x = vec![12345.678, -3.21];
        let back = sf.primal_to_original(&sf.primal_from_original(&x));
        assert_eq!(back, x);
        for s in sf.col_scale.iter().chain(&sf.row_scale) {
            assert_eq!(s.log2().fract(), 0.0);
        }
    }
}
