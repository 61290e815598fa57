//! Brute-force vertex enumeration for small boxed LPs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use storval::formulation::{dense_lp, Relation};
use storval::solver::{solve, verify_kkt, SolveStatus, SolverOptions};

pub struct Instance {
    pub costs: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
    pub rows: Vec<(Vec<f64>, Relation, f64)>,
}

pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(0..=8);
    let costs = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
    let bounds: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let lo = rng.gen_range(-3..=0) as f64;
            (lo, lo + rng.gen_range(1..=6) as f64)
        })
        .collect();
    // Most right-hand sides are built around a point inside the box so that
    // feasible programs dominate; the rest are arbitrary.
    let anchor: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.gen_range(lo as i64..=hi as i64) as f64).collect();
    let rows = (0..m)
        .map(|_| {
            let coeffs: Vec<f64> =
                (0..n).map(|_| if rng.gen_bool(0.6) { rng.gen_range(-3..=3) as f64 } else { 0.0 }).collect();
            let rel = match rng.gen_range(0..5) {
                0 => Relation::Eq,
                1 | 2 => Relation::Le,
                _ => Relation::Ge,
            };
            let at_anchor: f64 = coeffs.iter().zip(&anchor).map(|(a, x)| a * x).sum();
            let slack = rng.gen_range(0..=3) as f64;
            let rhs = if rng.gen_bool(0.2) {
                rng.gen_range(-5..=10) as f64
            } else {
                match rel {
                    Relation::Le => at_anchor + slack,
                    Relation::Ge => at_anchor - slack,
                    Relation::Eq => at_anchor,
                }
            };
            (coeffs, rel, rhs)
        })
        .collect();
    Instance { costs, bounds, rows }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-9 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..k {
            let f = a[r][c] / a[c][c];
            for cc in c..k {
                a[r][cc] -= f * a[c][cc];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; k];
    for c in (0..k).rev() {
        let s: f64 = (c + 1..k).map(|j| a[c][j] * x[j]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

fn feasible(inst: &Instance, x: &[f64]) -> bool {
    let tol = 1e-9;
    let bounds_ok = x.iter().zip(&inst.bounds).all(|(&v, &(lo, hi))| v >= lo - tol && v <= hi + tol);
    bounds_ok
        && inst.rows.iter().all(|(a, rel, rhs)| {
            let act: f64 = a.iter().zip(x).map(|(a, x)| a * x).sum();
            match rel {
                Relation::Le => act <= rhs + tol,
                Relation::Ge => act >= rhs - tol,
                Relation::Eq => (act - rhs).abs() <= tol,
            }
        })
}

/// Minimum over all vertices of the (bounded) feasible region, or `None`
/// when it is empty. Each vertex is some variables at a bound plus as many
/// tight rows as free variables.
pub fn vertex_oracle(inst: &Instance) -> Option<f64> {
    let n = inst.costs.len();
    let m = inst.rows.len();
    let mut best: Option<f64> = None;
    let states = 3usize.pow(n as u32);
    for code in 0..states {
        let mut state = vec![0u8; n];
        let mut c = code;
        for s in state.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&j| state[j] == 2).collect();
        let k = free.len();
        if k > m {
            continue;
        }
        let mut base = vec![0.0; n];
        for j in 0..n {
            base[j] = match state[j] {
                0 => inst.bounds[j].0,
                1 => inst.bounds[j].1,
                _ => 0.0,
            };
        }
        for subset in 0u32..(1 << m) {
            if subset.count_ones() as usize != k {
                continue;
            }
            let tight: Vec<usize> = (0..m).filter(|&i| subset >> i & 1 == 1).collect();
            let mut x = base.clone();
            if k > 0 {
                let a: Vec<Vec<f64>> =
                    tight.iter().map(|&i| free.iter().map(|&j| inst.rows[i].0[j]).collect()).collect();
                let b: Vec<f64> = tight
                    .iter()
                    .map(|&i| {
                        let fixed: f64 = (0..n).filter(|j| state[*j] != 2).map(|j| inst.rows[i].0[j] * base[j]).sum();
                        inst.rows[i].2 - fixed
                    })
                    .collect();
                let Some(sol) = gauss(a, b) else { continue };
                for (&j, v) in free.iter().zip(sol) {
                    x[j] = v;
                }
            }
            if feasible(inst, &x) {
                let obj: f64 = inst.costs.iter().zip(&x).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    }
    best
}

/// Solves `count` random programs and compares each with the oracle.
/// Returns the number of optimal and infeasible instances.
pub fn check_random_programs(rng: &mut ChaCha8Rng, count: usize) -> Result<(usize, usize), String> {
    let opts = SolverOptions::default();
    let (mut optimal, mut infeasible) = (0, 0);
    for case in 0..count {
        let inst = random_instance(rng);
        let lp = dense_lp(&inst.costs, &inst.bounds, &inst.rows);
        let sol = solve(&lp, &opts).map_err(|e| format!("case {case}: {e}"))?;
        match vertex_oracle(&inst) {
            None if sol.status == SolveStatus::Infeasible => infeasible += 1,
            None => return Err(format!("case {case}: oracle infeasible, solver {}", sol.status.as_str())),
            Some(best) => {
                if sol.status != SolveStatus::Optimal {
                    return Err(format!("case {case}: oracle {best}, solver {}", sol.status.as_str()));
                }
                let rel = (sol.objective - best).abs() / best.abs().max(1.0);
                if rel > 1e-6 {
                    return Err(format!("case {case}: solver {} vs oracle {best}", sol.objective));
                }
                let cert = verify_kkt(&lp, &sol, 1e-6).map_err(|e| format!("case {case}: {e}"))?;
                if !cert.passed {
                    return Err(format!("case {case}: certificate failed {cert:?}"));
                }
                optimal += 1;
            }
        }
    }
    Ok((optimal, infeasible))
}
