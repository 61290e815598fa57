//! Two-phase primal simplex over bounded variables.
//!
//! Phase 1 minimizes the sum of artificial columns added for rows whose
//! slack-basis start is infeasible; phase 2 minimizes the true objective
//! with the artificials pinned to zero. Reduced costs are updated from the
//! pivot row each iteration and recomputed at every refactorization.
//! Pricing uses Devex reference weights, with a switch to Bland's rule after
//! a run of degenerate pivots; the ratio test is a two-pass Harris test that
//! prefers large pivots.

use super::lu::LuFactor;
use super::standard::StandardForm;
use super::{SolveStatus, SolverOptions};

const NONBASIC: usize = usize::MAX;
/// Steps shorter than this, or than the feasibility tolerance, count as
/// degenerate.
const DEGENERATE_STEP: f64 = 1e-12;

pub(crate) struct Outcome {
    pub status: SolveStatus,
    /// Scaled values of all structural and logical variables.
    pub x: Vec<f64>,
    /// Scaled row duals.
    pub y: Vec<f64>,
    /// Scaled reduced costs of the structural columns.
    pub d: Vec<f64>,
    pub iterations: usize,
}

enum Step {
    Unbounded,
    Flip(f64),
    Pivot { pos: usize, theta: f64, to_upper: bool },
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    IterationLimit,
}

struct Simplex<'a> {
    sf: &'a StandardForm,
    opts: &'a SolverOptions,
    m: usize,
    n: usize,
    /// Artificial `k` is column `n + m + k`: `sign · e_row`.
    art: Vec<(usize, f64)>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    position: Vec<usize>,
    lu: LuFactor,
    /// Structural matrix by rows, `(column, value)`.
    rows: Vec<Vec<(usize, f64)>>,
    /// Reduced costs; zero for basic variables.
    d: Vec<f64>,
    /// Devex reference weights.
    weights: Vec<f64>,
    iterations: usize,
}

/// Devex weights are reset once any grows past this.
const WEIGHT_RESET: f64 = 1e6;

pub(crate) fn solve(sf: &StandardForm, opts: &SolverOptions) -> Outcome {
    let mut s = Simplex::new(sf, opts);
    let status = s.run();
    s.finish(status)
}

impl<'a> Simplex<'a> {
    fn new(sf: &'a StandardForm, opts: &'a SolverOptions) -> Self {
        let n = sf.n;
        let m = sf.m;
        let mut lower = sf.lower.clone();
        let mut upper = sf.upper.clone();
        let mut x = vec![0.0; n + m];
        for j in 0..n {
            x[j] = if lower[j].is_finite() {
                lower[j]
            } else if upper[j].is_finite() {
                upper[j]
            } else {
                0.0
            };
        }
        let mut activity = vec![0.0; m];
        for (j, col) in sf.cols.iter().enumerate() {
            if x[j] != 0.0 {
                for &(r, v) in col {
                    activity[r] += v * x[j];
                }
            }
        }
        let mut basis = vec![0; m];
        let mut position = vec![NONBASIC; n + m];
        let mut art = Vec::new();
        for r in 0..m {
            let s = n + r;
            let (lo, hi) = (lower[s], upper[s]);
            let act = activity[r];
            if act >= lo && act <= hi {
                x[s] = act;
                basis[r] = s;
                position[s] = r;
            } else {
                let b = if act < lo { lo } else { hi };
                x[s] = b;
                let sign = if b > act { 1.0 } else { -1.0 };
                let k = art.len();
                art.push((r, sign));
                // a·x − s + sign·art = 0
                x.push((b - act) * sign);
                basis[r] = n + m + k;
                position.push(r);
                lower.push(0.0);
                upper.push(f64::INFINITY);
            }
        }
        let cost = vec![0.0; x.len()];
        position.resize(x.len(), NONBASIC);
        let mut rows = vec![Vec::new(); m];
        for (j, col) in sf.cols.iter().enumerate() {
            for &(r, v) in col {
                rows[r].push((j, v));
            }
        }
        let n_total = x.len();
        let mut s = Simplex {
            sf,
            opts,
            m,
            n,
            art,
            lower,
            upper,
            cost,
            x,
            basis,
            position,
            lu: LuFactor::default(),
            rows,
            d: vec![0.0; n_total],
            weights: vec![1.0; n_total],
            iterations: 0,
        };
        s.refactor();
        s
    }

    fn n_total(&self) -> usize {
        self.x.len()
    }

    fn scatter(&self, j: usize, out: &mut [f64]) {
        if j < self.n {
            for &(r, v) in &self.sf.cols[j] {
                out[r] += v;
            }
        } else if j < self.n + self.m {
            out[j - self.n] -= 1.0;
        } else {
            let (r, sign) = self.art[j - self.n - self.m];
            out[r] += sign;
        }
    }

    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            self.sf.cols[j].clone()
        } else if j < self.n + self.m {
            vec![(j - self.n, -1.0)]
        } else {
            let (r, sign) = self.art[j - self.n - self.m];
            vec![(r, sign)]
        }
    }

    fn dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            self.sf.cols[j].iter().map(|&(r, v)| v * y[r]).sum()
        } else if j < self.n + self.m {
            -y[j - self.n]
        } else {
            let (r, sign) = self.art[j - self.n - self.m];
            sign * y[r]
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        let (lo, hi, v) = (self.lower[j], self.upper[j], self.x[j]);
        if lo.is_finite() && (v <= lo || !hi.is_finite() || (v - lo).abs() <= (hi - v).abs()) {
            lo
        } else if hi.is_finite() {
            hi
        } else {
            0.0
        }
    }

    fn refactor(&mut self) {
        loop {
            let cols: Vec<Vec<(usize, f64)>> = self.basis.iter().map(|&j| self.column(j)).collect();
            match LuFactor::factorize(self.m, &cols) {
                Ok(lu) => {
                    self.lu = lu;
                    break;
                }
                Err(singular) => {
                    for (&row, &pos) in singular.rows.iter().zip(&singular.positions) {
                        let old = self.basis[pos];
                        self.position[old] = NONBASIC;
                        self.x[old] = self.nonbasic_value(old);
                        let slack = self.n + row;
                        assert_eq!(self.position[slack], NONBASIC, "slack of unpivoted row is basic");
                        self.basis[pos] = slack;
                        self.position[slack] = pos;
                    }
                }
            }
        }
        self.recompute_basics();
        self.recompute_reduced_costs();
    }

    fn recompute_reduced_costs(&mut self) {
        let y = self.duals();
        for j in 0..self.n_total() {
            self.d[j] = if self.position[j] == NONBASIC { self.cost[j] - self.dot(j, &y) } else { 0.0 };
        }
    }

    /// Row `pos` of `B⁻¹ [A −I art]`, dense over all variables.
    fn pivot_row(&self, pos: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.m];
        e[pos] = 1.0;
        let rho = self.lu.btran(&mut e);
        let mut row = vec![0.0; self.n_total()];
        for (i, &r) in rho.iter().enumerate() {
            if r == 0.0 {
                continue;
            }
            for &(j, a) in &self.rows[i] {
                row[j] += a * r;
            }
            row[self.n + i] = -r;
        }
        for (k, &(r, sign)) in self.art.iter().enumerate() {
            row[self.n + self.m + k] = sign * rho[r];
        }
        row
    }

    /// Reduced cost and Devex weight update for `q` replacing the basic
    /// variable at `pos`, before the basis arrays change.
    fn update_pricing(&mut self, q: usize, pos: usize, alpha_q: f64) {
        let row = self.pivot_row(pos);
        let leaving = self.basis[pos];
        let theta_d = self.d[q] / alpha_q;
        let wq = self.weights[q];
        let mut reset = false;
        for (j, &a) in row.iter().enumerate() {
            if a == 0.0 || self.position[j] != NONBASIC || j == q {
                continue;
            }
            self.d[j] -= theta_d * a;
            let ratio = a / alpha_q;
            let w = ratio * ratio * wq;
            if w > self.weights[j] {
                self.weights[j] = w;
                reset |= w > WEIGHT_RESET;
            }
        }
        self.d[q] = 0.0;
        self.d[leaving] = -theta_d;
        self.weights[leaving] = (wq / (alpha_q * alpha_q)).max(1.0);
        if reset {
            self.weights.fill(1.0);
        }
    }

    fn recompute_basics(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n_total() {
            if self.position[j] == NONBASIC && self.x[j] != 0.0 {
                let v = self.x[j];
                if j < self.n {
                    for &(r, a) in &self.sf.cols[j] {
                        rhs[r] -= a * v;
                    }
                } else if j < self.n + self.m {
                    rhs[j - self.n] += v;
                } else {
                    let (r, sign) = self.art[j - self.n - self.m];
                    rhs[r] -= sign * v;
                }
            }
        }
        let xb = self.lu.ftran(&mut rhs);
        for (p, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[p];
        }
    }

    fn duals(&self) -> Vec<f64> {
        let mut cb: Vec<f64> = self.basis.iter().map(|&j| self.cost[j]).collect();
        self.lu.btran(&mut cb)
    }

    fn price(&self, bland: bool) -> Option<(usize, f64)> {
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n_total() {
            if self.position[j] != NONBASIC || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.d[j];
            let dir = if d < -tol && self.x[j] < self.upper[j] {
                1.0
            } else if d > tol && self.x[j] > self.lower[j] {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            let score = d * d / self.weights[j];
            if best.map_or(true, |b| score > b.2) {
                best = Some((j, dir, score));
            }
        }
        best.map(|b| (b.0, b.1))
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], bland: bool) -> Step {
        let tol = self.opts.feasibility_tol;
        let ptol = self.opts.pivot_tol;
        let range = self.upper[q] - self.lower[q];

        if bland {
            let mut best: Option<(usize, f64, bool)> = None;
            for (p, &a) in alpha.iter().enumerate() {
                if a.abs() <= ptol {
                    continue;
                }
                let b = self.basis[p];
                let delta = -dir * a;
                let (ratio, to_upper) = if delta < 0.0 {
                    if !self.lower[b].is_finite() {
                        continue;
                    }
                    (((self.x[b] - self.lower[b]) / -delta).max(0.0), false)
                } else {
                    if !self.upper[b].is_finite() {
                        continue;
                    }
                    (((self.upper[b] - self.x[b]) / delta).max(0.0), true)
                };
                let better = match best {
                    None => true,
                    Some((bp, br, _)) => ratio < br - 1e-12 || (ratio <= br + 1e-12 && b < self.basis[bp]),
                };
                if better {
                    best = Some((p, ratio, to_upper));
                }
            }
            return match best {
                Some((_, r, _)) if range.is_finite() && range <= r => Step::Flip(range),
                Some((pos, theta, to_upper)) => Step::Pivot { pos, theta, to_upper },
                None if range.is_finite() => Step::Flip(range),
                None => Step::Unbounded,
            };
        }

        // Pass 1: largest step keeping every basic within tolerance.
        let mut theta_max = f64::INFINITY;
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= ptol {
                continue;
            }
            let b = self.basis[p];
            let delta = -dir * a;
            let r = if delta < 0.0 {
                if !self.lower[b].is_finite() {
                    continue;
                }
                (self.x[b] - self.lower[b] + tol) / -delta
            } else {
                if !self.upper[b].is_finite() {
                    continue;
                }
                (self.upper[b] - self.x[b] + tol) / delta
            };
            theta_max = theta_max.min(r);
        }
        if range.is_finite() && range <= theta_max {
            return Step::Flip(range);
        }
        if theta_max == f64::INFINITY {
            return Step::Unbounded;
        }
        // Pass 2: among blocking candidates, the largest pivot.
        let mut best: Option<(usize, f64, bool, f64)> = None;
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= ptol {
                continue;
            }
            let b = self.basis[p];
            let delta = -dir * a;
            let (ratio, to_upper) = if delta < 0.0 {
                if !self.lower[b].is_finite() {
                    continue;
                }
                ((self.x[b] - self.lower[b]) / -delta, false)
            } else {
                if !self.upper[b].is_finite() {
                    continue;
                }
                ((self.upper[b] - self.x[b]) / delta, true)
            };
            if ratio > theta_max {
                continue;
            }
            let better = match best {
                None => true,
                Some((bp, _, _, mag)) => a.abs() > mag || (a.abs() == mag && b < self.basis[bp]),
            };
            if better {
                best = Some((p, ratio.max(0.0), to_upper, a.abs()));
            }
        }
        match best {
            Some((pos, theta, to_upper, _)) => Step::Pivot { pos, theta, to_upper },
            None => Step::Unbounded,
        }
    }

    fn run_phase(&mut self) -> PhaseEnd {
        let mut degenerate = 0usize;
        let mut bland = false;
        self.recompute_reduced_costs();
        self.weights.fill(1.0);
        loop {
            if self.iterations >= self.opts.max_iterations {
                return PhaseEnd::IterationLimit;
            }
            if self.lu.n_updates() >= self.opts.refactor_interval {
                self.refactor();
            }
            let Some((q, dir)) = self.price(bland) else {
                if self.lu.n_updates() > 0 {
                    // Confirm optimality on a fresh factorization.
                    self.refactor();
                    if self.price(bland).is_some() {
                        continue;
                    }
                }
                return PhaseEnd::Optimal;
            };
            let mut col = vec![0.0; self.m];
            self.scatter(q, &mut col);
            let alpha = self.lu.ftran(&mut col);

            let step = self.ratio_test(q, dir, &alpha, bland);
            let theta = match step {
                Step::Unbounded => return PhaseEnd::Unbounded,
                Step::Flip(t) => t,
                Step::Pivot { theta, .. } => theta,
            };
            if theta != 0.0 {
                for (p, &a) in alpha.iter().enumerate() {
                    if a != 0.0 {
                        self.x[self.basis[p]] -= dir * theta * a;
                    }
                }
            }
            match step {
                Step::Flip(_) => {
                    self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                }
                Step::Pivot { pos, to_upper, .. } => {
                    self.update_pricing(q, pos, alpha[pos]);
                    self.x[q] += dir * theta;
                    let leaving = self.basis[pos];
                    self.x[leaving] = if to_upper { self.upper[leaving] } else { self.lower[leaving] };
                    self.position[leaving] = NONBASIC;
                    self.basis[pos] = q;
                    self.position[q] = pos;
                    let col = self.column(q);
                    if alpha[pos].abs() < 1e-7 || self.lu.update(pos, &col, alpha[pos]).is_err() {
                        self.refactor();
                    }
                }
                Step::Unbounded => unreachable!(),
            }
            self.iterations += 1;

            if theta <= DEGENERATE_STEP.max(self.opts.feasibility_tol) {
                degenerate += 1;
                if self.opts.anti_cycling && degenerate >= self.opts.stall_window {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
        }
    }

    fn run(&mut self) -> SolveStatus {
        if !self.art.is_empty() {
            for k in 0..self.art.len() {
                self.cost[self.n + self.m + k] = 1.0;
            }
            match self.run_phase() {
                PhaseEnd::IterationLimit => return SolveStatus::IterationLimit,
                PhaseEnd::Unbounded => unreachable!("phase 1 objective is bounded below"),
                PhaseEnd::Optimal => {}
            }
            let infeasibility: f64 = (0..self.art.len()).map(|k| self.x[self.n + self.m + k].max(0.0)).sum();
            if infeasibility > self.opts.feasibility_tol * (1.0 + self.art.len() as f64).sqrt() {
                return SolveStatus::Infeasible;
            }
            for k in 0..self.art.len() {
                let j = self.n + self.m + k;
                self.cost[j] = 0.0;
                self.upper[j] = 0.0;
                if self.position[j] == NONBASIC {
                    self.x[j] = 0.0;
                }
            }
            self.refactor();
        }
        self.cost[..self.n].copy_from_slice(&self.sf.cost[..self.n]);
        match self.run_phase() {
            PhaseEnd::Optimal => SolveStatus::Optimal,
            PhaseEnd::Unbounded => SolveStatus::Unbounded,
            PhaseEnd::IterationLimit => SolveStatus::IterationLimit,
        }
    }

    fn finish(mut self, status: SolveStatus) -> Outcome {
        self.refactor();
        let y = self.duals();
        let d = (0..self.n).map(|j| self.cost[j] - self.dot(j, &y)).collect();
        self.x.truncate(self.n + self.m);
        Outcome { status, x: self.x, y, d, iterations: self.iterations }
    }
}
