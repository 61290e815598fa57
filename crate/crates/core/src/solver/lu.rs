//! Sparse LU factorization of simplex bases with Markowitz pivot selection
//! and threshold partial pivoting, plus Forrest-Tomlin updates between
//! refactorizations.
//!
//! Vectors passed to `ftran` are indexed by row and come back indexed by
//! basis position; `btran` goes the other way.

/// Relative threshold for accepting a pivot within its column.
const THRESHOLD: f64 = 0.1;
/// Entries below this magnitude are treated as structurally zero pivots.
const ABS_PIVOT_TOL: f64 = 1e-11;
/// Markowitz search stops after this many acceptable candidates.
const SEARCH_LIMIT: usize = 4;
/// Spike entries below this are dropped.
const DROP_TOL: f64 = 1e-14;

/// `B = L R⁻¹ U`: `L` from the factorization, `R` from the row
/// eliminations of later updates, `U` a permuted upper triangle.
#[derive(Debug, Clone, Default)]
pub struct LuFactor {
    m: usize,
    /// Pivot row of each elimination step.
    l_rows: Vec<usize>,
    /// Row operations of each step: `b[i] -= mult * b[pivot_row]`.
    l_ops: Vec<Vec<(usize, f64)>>,
    /// Row transformations from updates: `b[row] -= Σ mult * b[other]`.
    r_ops: Vec<(usize, Vec<(usize, f64)>)>,
    /// U steps: pivot row, basis position, diagonal and the remaining
    /// entries of the row keyed by position.
    u_row: Vec<usize>,
    u_pos: Vec<usize>,
    u_diag: Vec<f64>,
    u_rows: Vec<Vec<(usize, f64)>>,
    /// Live steps in triangular order.
    order: Vec<usize>,
    step_of_pos: Vec<usize>,
    step_of_row: Vec<usize>,
    updates: usize,
}

/// Outcome of a factorization attempt that hit structural or numerical
/// singularity: rows and positions left without a pivot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Singular {
    pub rows: Vec<usize>,
    pub positions: Vec<usize>,
}

impl LuFactor {
    /// Factorizes the `m × m` matrix whose column `p` is `columns[p]`
    /// (sparse `(row, value)` lists).
    ///
    /// On singularity the partial factorization is discarded and the
    /// unpivoted rows/positions are returned so the caller can patch the
    /// basis (typically with slack columns) and retry.
    pub fn factorize(m: usize, columns: &[Vec<(usize, f64)>]) -> Result<Self, Singular> {
        assert_eq!(columns.len(), m);
        let mut cols: Vec<Vec<(usize, f64)>> =
            columns.iter().map(|c| c.iter().copied().filter(|&(_, v)| v != 0.0).collect()).collect();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (p, col) in cols.iter().enumerate() {
            for &(r, _) in col {
                rows[r].push(p);
            }
        }
        let mut row_active = vec![true; m];
        let mut col_active = vec![true; m];
        // Lazy buckets: entries are re-validated against the live count.
        let mut col_bucket: Vec<Vec<usize>> = vec![Vec::new(); m + 2];
        let mut row_bucket: Vec<Vec<usize>> = vec![Vec::new(); m + 2];
        for p in 0..m {
            col_bucket[cols[p].len().min(m + 1)].push(p);
        }
        for r in 0..m {
            row_bucket[rows[r].len().min(m + 1)].push(r);
        }

        let mut f =
            LuFactor { m, step_of_pos: vec![usize::MAX; m], step_of_row: vec![usize::MAX; m], ..Default::default() };

        for step in 0..m {
            let Some((pr, pc)) =
                choose_pivot(m, &cols, &rows, &row_active, &col_active, &mut col_bucket, &mut row_bucket)
            else {
                break;
            };
            let pivot = cols[pc].iter().find(|e| e.0 == pr).map(|e| e.1).expect("pivot entry");

            // Detach pivot row: its other entries become the U row.
            let mut urow = Vec::with_capacity(rows[pr].len());
            for &j in &rows[pr] {
                if j == pc {
                    continue;
                }
                let col = &mut cols[j];
                if let Some(k) = col.iter().position(|e| e.0 == pr) {
                    urow.push((j, col[k].1));
                    col.swap_remove(k);
                    col_bucket[col.len().min(m + 1)].push(j);
                }
            }
            rows[pr].clear();
            row_active[pr] = false;
            col_active[pc] = false;

            let pivot_col = std::mem::take(&mut cols[pc]);
            let mut lops = Vec::with_capacity(pivot_col.len());
            for &(i, v) in &pivot_col {
                if i == pr {
                    continue;
                }
                let mult = v / pivot;
                lops.push((i, mult));
                if let Some(k) = rows[i].iter().position(|&j| j == pc) {
                    rows[i].swap_remove(k);
                }
                for &(j, u) in &urow {
                    let col = &mut cols[j];
                    match col.iter_mut().find(|e| e.0 == i) {
                        Some(e) => e.1 -= mult * u,
                        None => {
                            col.push((i, -mult * u));
                            rows[i].push(j);
                            col_bucket[col.len().min(m + 1)].push(j);
                        }
                    }
                }
                row_bucket[rows[i].len().min(m + 1)].push(i);
            }
            f.l_rows.push(pr);
            f.l_ops.push(lops);
            f.u_row.push(pr);
            f.u_pos.push(pc);
            f.u_diag.push(pivot);
            f.u_rows.push(urow);
            f.order.push(step);
            f.step_of_pos[pc] = step;
            f.step_of_row[pr] = step;
        }

        if f.order.len() < m {
            let rows: Vec<usize> = (0..m).filter(|&r| row_active[r]).collect();
            let positions: Vec<usize> = (0..m).filter(|&p| col_active[p]).collect();
            return Err(Singular { rows, positions });
        }
        Ok(f)
    }

    pub fn n_updates(&self) -> usize {
        self.updates
    }

    /// Applies `L⁻¹` and then `R`, in place.
    fn lower_solve(&self, b: &mut [f64]) {
        for (k, &r) in self.l_rows.iter().enumerate() {
            let xr = b[r];
            if xr != 0.0 {
                for &(i, mult) in &self.l_ops[k] {
                    b[i] -= mult * xr;
                }
            }
        }
        for (r, ops) in &self.r_ops {
            let mut v = b[*r];
            for &(i, mult) in ops {
                v -= mult * b[i];
            }
            b[*r] = v;
        }
    }

    /// Solves `B x = b`; `b` is consumed as scratch.
    pub fn ftran(&self, b: &mut [f64]) -> Vec<f64> {
        self.lower_solve(b);
        let mut x = vec![0.0; self.m];
        for &k in self.order.iter().rev() {
            let mut v = b[self.u_row[k]];
            for &(j, u) in &self.u_rows[k] {
                v -= u * x[j];
            }
            x[self.u_pos[k]] = v / self.u_diag[k];
        }
        x
    }

    /// Solves `Bᵀ y = c`; `c` is consumed as scratch.
    pub fn btran(&self, c: &mut [f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.m];
        for &k in &self.order {
            let wr = c[self.u_pos[k]] / self.u_diag[k];
            w[self.u_row[k]] = wr;
            if wr != 0.0 {
                for &(j, u) in &self.u_rows[k] {
                    c[j] -= u * wr;
                }
            }
        }
        for (r, ops) in self.r_ops.iter().rev() {
            let wr = w[*r];
            if wr != 0.0 {
                for &(i, mult) in ops {
                    w[i] -= mult * wr;
                }
            }
        }
        for k in (0..self.l_rows.len()).rev() {
            let r = self.l_rows[k];
            let mut v = w[r];
            for &(i, mult) in &self.l_ops[k] {
                v -= mult * w[i];
            }
            w[r] = v;
        }
        w
    }

    /// Replaces the basis column at `pos` by `column` (sparse, by row).
    /// `alpha_pos` is entry `pos` of the column's FTRAN result and serves as
    /// a stability check; on failure the factor must be rebuilt.
    pub fn update(&mut self, pos: usize, column: &[(usize, f64)], alpha_pos: f64) -> Result<(), Singular> {
        let mut spike = vec![0.0; self.m];
        for &(r, v) in column {
            spike[r] += v;
        }
        self.lower_solve(&mut spike);

        let kp = self.step_of_pos[pos];
        let rp = self.u_row[kp];
        let old_diag = self.u_diag[kp];
        let idx = self.order.iter().position(|&k| k == kp).expect("live step");
        for &k in &self.order[..idx] {
            self.u_rows[k].retain(|e| e.0 != pos);
        }
        for (r, &v) in spike.iter().enumerate() {
            if r != rp && v.abs() > DROP_TOL {
                self.u_rows[self.step_of_row[r]].push((pos, v));
            }
        }

        // Eliminate the old row of `pos` against all later steps.
        let mut w = vec![0.0; self.m];
        for &(j, u) in &self.u_rows[kp] {
            w[j] = u;
        }
        w[pos] = spike[rp];
        let mut ops = Vec::new();
        for &k in &self.order[idx + 1..] {
            let c = self.u_pos[k];
            let v = w[c];
            if v == 0.0 {
                continue;
            }
            w[c] = 0.0;
            let mult = v / self.u_diag[k];
            for &(j, u) in &self.u_rows[k] {
                w[j] -= mult * u;
            }
            ops.push((self.u_row[k], mult));
        }
        let diag = w[pos];
        let expected = alpha_pos * old_diag;
        if !(diag.abs() > ABS_PIVOT_TOL) || (diag - expected).abs() > 1e-8 * (1.0 + expected.abs()) {
            return Err(Singular { rows: vec![rp], positions: vec![pos] });
        }

        let step = self.u_row.len();
        self.u_row.push(rp);
        self.u_pos.push(pos);
        self.u_diag.push(diag);
        self.u_rows.push(Vec::new());
        self.u_rows[kp] = Vec::new();
        self.order.remove(idx);
        self.order.push(step);
        self.step_of_pos[pos] = step;
        self.step_of_row[rp] = step;
        if !ops.is_empty() {
            self.r_ops.push((rp, ops));
        }
        self.updates += 1;
        Ok(())
    }

    pub fn nnz(&self) -> usize {
        self.l_ops.iter().map(Vec::len).sum::<usize>()
            + self.order.iter().map(|&k| self.u_rows[k].len() + 1).sum::<usize>()
            + self.r_ops.iter().map(|r| r.1.len()).sum::<usize>()
    }
}

fn col_max(col: &[(usize, f64)]) -> f64 {
    col.iter().fold(0.0f64, |m, e| m.max(e.1.abs()))
}

#[allow(clippy::too_many_arguments)]
fn choose_pivot(
    m: usize,
    cols: &[Vec<(usize, f64)>],
    rows: &[Vec<usize>],
    row_active: &[bool],
    col_active: &[bool],
    col_bucket: &mut [Vec<usize>],
    row_bucket: &mut [Vec<usize>],
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, usize, f64)> = None; // (row, col, cost, |v|)
    let mut found = 0usize;
    for count in 1..=m + 1 {
        // Columns with `count` entries.
        let bucket = &mut col_bucket[count];
        let mut k = 0;
        while k < bucket.len() {
            let p = bucket[k];
            if !col_active[p] || cols[p].len() != count {
                bucket.swap_remove(k);
                continue;
            }
            k += 1;
            let cmax = col_max(&cols[p]);
            if cmax < ABS_PIVOT_TOL {
                continue;
            }
            for &(r, v) in &cols[p] {
                if v.abs() >= THRESHOLD * cmax {
                    let cost = (rows[r].len() - 1) * (count - 1);
                    if better(&best, cost, v.abs(), r, p) {
                        best = Some((r, p, cost, v.abs()));
                    }
                    found += 1;
                }
            }
            if let Some(b) = best {
                if found >= SEARCH_LIMIT || b.2 <= (count - 1) * (count - 1) {
                    return Some((b.0, b.1));
                }
            }
        }
        // Rows with `count` entries.
        let bucket = &mut row_bucket[count];
        let mut k = 0;
        while k < bucket.len() {
            let r = bucket[k];
            if !row_active[r] || rows[r].len() != count {
                bucket.swap_remove(k);
                continue;
            }
            k += 1;
            for &p in &rows[r] {
                let col = &cols[p];
                let v = col.iter().find(|e| e.0 == r).map_or(0.0, |e| e.1);
                let cmax = col_max(col);
                if cmax < ABS_PIVOT_TOL || v.abs() < THRESHOLD * cmax {
                    continue;
                }
                let cost = (count - 1) * (col.len() - 1);
                if better(&best, cost, v.abs(), r, p) {
                    best = Some((r, p, cost, v.abs()));
                }
                found += 1;
            }
            if let Some(b) = best {
                if found >= SEARCH_LIMIT || b.2 <= count * (count - 1) {
                    return Some((b.0, b.1));
                }
            }
        }
        if let Some(b) = best {
            if found > 0 && b.2 <= count * count {
                return Some((b.0, b.1));
            }
        }
    }
    best.map(|b| (b.0, b.1))
}

fn better(best: &Option<(usize, usize, usize, f64)>, cost: usize, mag: f64, r: usize, p: usize) -> bool {
    match best {
        None => true,
        Some((br, bp, bc, bm)) => {
            (cost, std::cmp::Reverse(ordered(mag)), p, r) < (*bc, std::cmp::Reverse(ordered(*bm)), *bp, *br)
        }
    }
}

fn ordered(v: f64) -> u64 {
    // Non-negative floats order like their bit patterns.
    v.to_bits()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_to_cols(a: &[Vec<f64>]) -> Vec<Vec<(usize, f64)>> {
        let m = a.len();
        (0..m).map(|j| (0..m).filter(|&i| a[i][j] != 0.0).map(|i| (i, a[i][j])).collect()).collect()
    }

    fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    fn mat_t_vec(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let m = a.len();
        (0..m).map(|j| (0..m).map(|i| a[i][j] * y[i]).sum()).collect()
    }

    fn random_matrix(m: usize, seed: u64, density: f64) -> Vec<Vec<f64>> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![vec![0.0; m]; m];
        for i in 0..m {
            a[i][i] = rng.gen_range(1.0..3.0);
            for j in 0..m {
                if i != j && rng.gen_bool(density) {
                    a[i][j] = rng.gen_range(-2.0..2.0);
                }
            }
        }
        a
    }

    #[test]
    fn solves_random_sparse_systems() {
        for seed in 0..20 {
            let m = 5 + seed as usize * 3;
            let a = random_matrix(m, seed, 0.15);
            let lu = LuFactor::factorize(m, &dense_to_cols(&a)).unwrap();
            let x_true: Vec<f64> = (0..m).map(|i| (i as f64 * 0.37).sin()).collect();
            let mut b = matvec(&a, &x_true);
            let x = lu.ftran(&mut b);
            for (u, v) in x.iter().zip(&x_true) {
                assert!((u - v).abs() < 1e-9);
            }
            let mut c = mat_t_vec(&a, &x_true);
            let y = lu.btran(&mut c);
            for (u, v) in y.iter().zip(&x_true) {
                assert!((u - v).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn updates_match_refactorization() {
        let m = 12;
        let mut a = random_matrix(m, 99, 0.2);
        let mut lu = LuFactor::factorize(m, &dense_to_cols(&a)).unwrap();
        for step in 0..5 {
            let pos = (step * 5) % m;
            // cos(i + step) spans a rank-2 family, so add a diagonal kick.
            let new_col: Vec<f64> =
                (0..m).map(|i| ((i + step) as f64).cos() + if i == pos { 3.0 } else { 0.0 }).collect();
            let mut rhs = new_col.clone();
            let alpha = lu.ftran(&mut rhs);
            let sparse: Vec<(usize, f64)> = new_col.iter().copied().enumerate().collect();
            lu.update(pos, &sparse, alpha[pos]).unwrap();
            for i in 0..m {
                a[i][pos] = new_col[i];
            }
            let x_true: Vec<f64> = (0..m).map(|i| 1.0 + i as f64).collect();
            let x = lu.ftran(&mut matvec(&a, &x_true));
            let y = lu.btran(&mut mat_t_vec(&a, &x_true));
            for i in 0..m {
                assert!((x[i] - x_true[i]).abs() < 1e-8);
                assert!((y[i] - x_true[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn reports_singular_columns() {
        let a = vec![vec![1.0, 2.0, 0.0], vec![2.0, 4.0, 0.0], vec![0.0, 0.0, 1.0]];
        let err = LuFactor::factorize(3, &dense_to_cols(&a)).unwrap_err();
        assert_eq!(err.rows.len(), 1);
        assert_eq!(err.positions.len(), 1);
    }

    #[test]
    fn permuted_identity() {
        let cols = vec![vec![(2, 1.0)], vec![(0, -1.0)], vec![(1, 2.0)]];
        let lu = LuFactor::factorize(3, &cols).unwrap();
        let x = lu.ftran(&mut [1.0, 2.0, 3.0]);
        assert_eq!(x, vec![3.0, -1.0, 1.0]);
    }
}
