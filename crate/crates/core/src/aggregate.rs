//! The aggregate problem: composite operator `H`, its fixed point `r*`, and
//! the derived vectors `J0`, `J1` and the interpolated approximation.
//!
//! ```text
//! (H r)(x) = sum_i d_xi min_u sum_j p_ij(u) (g(i,u,j) + alpha sum_y phi_jy r_y)
//! ```

use crate::aggregation::AggregationArchitecture;
use crate::error::{check_len, Error, Result};
use crate::linalg::{solve_dense, sup_distance};
use crate::mdp::{stopping_gap, DiscountedMdp, DEFAULT_MAX_ITERATIONS, EXACT_FINISH_MAX_STATES};

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSolution {
    pub r_star: Vec<f64>,
    /// Optimal cost from an original state just reached from an aggregate state.
    pub j0: Vec<f64>,
    /// Optimal cost from an original state just reached by a system transition.
    pub j1: Vec<f64>,
    /// Interpolated approximation `Phi r*`; identical to `j1`.
    pub j_tilde: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Max-abs residuals of the three aggregate Bellman equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleReport {
    /// `|r_x - sum_i d_xi J0(i)|`
    pub disaggregation: f64,
    /// `|J0(i) - min_u sum_j p_ij(u)(g + alpha J1(j))|`
    pub minimization: f64,
    /// `|J1(j) - sum_y phi_jy r_y|`
    pub aggregation: f64,
    pub passed: bool,
}

fn check_pair(mdp: &DiscountedMdp, arch: &AggregationArchitecture) -> Result<()> {
    if arch.num_states() != mdp.num_states() {
        return Err(Error::DimensionMismatch {
            what: "aggregation architecture",
            expected: mdp.num_states(),
            actual: arch.num_states(),
        });
    }
    Ok(())
}

/// `J(j) = sum_y phi_jy r_y`
pub fn interpolate(arch: &AggregationArchitecture, r: &[f64]) -> Result<Vec<f64>> {
    check_len("aggregate vector", arch.num_aggregate(), r)?;
    Ok(phi_times(arch, r))
}

fn phi_times(arch: &AggregationArchitecture, r: &[f64]) -> Vec<f64> {
    (0..arch.num_states())
        .map(|j| {
            arch.aggregation_row(j)
                .iter()
                .map(|&(y, phi)| phi * r[y])
                .sum()
        })
        .collect()
}

/// One application of `H`.
pub fn apply_h(mdp: &DiscountedMdp, arch: &AggregationArchitecture, r: &[f64]) -> Result<Vec<f64>> {
    check_pair(mdp, arch)?;
    check_len("aggregate vector", arch.num_aggregate(), r)?;
    Ok(h_unchecked(mdp, arch, r))
}

fn h_unchecked(mdp: &DiscountedMdp, arch: &AggregationArchitecture, r: &[f64]) -> Vec<f64> {
    let j1 = phi_times(arch, r);
    // min_u over each original state, evaluated only where some d_xi > 0
    let mut minimized: Vec<Option<f64>> = vec![None; mdp.num_states()];
    (0..arch.num_aggregate())
        .map(|x| {
            arch.disaggregation_row(x)
                .iter()
                .filter(|&&(_, d)| d > 0.0)
                .map(|&(i, d)| {
                    let m = *minimized[i].get_or_insert_with(|| mdp.best_action(i, &j1).1);
                    d * m
                })
                .sum()
        })
        .collect()
}

pub fn solve_r_star(
    mdp: &DiscountedMdp,
    arch: &AggregationArchitecture,
    tol: f64,
) -> Result<AggregateSolution> {
    let zero = vec![0.0; arch.num_aggregate()];
    solve_r_star_from(mdp, arch, &zero, tol, DEFAULT_MAX_ITERATIONS)
}

/// Fixed-point iteration on `H` from `initial` until the successive gap
/// guarantees `|r - r*| <= tol / 2`.
pub fn solve_r_star_from(
    mdp: &DiscountedMdp,
    arch: &AggregationArchitecture,
    initial: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<AggregateSolution> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    check_pair(mdp, arch)?;
    arch.ensure_valid(mdp.num_states())?;
    check_len("initial aggregate vector", arch.num_aggregate(), initial)?;
    let gap = stopping_gap(tol, mdp.discount());

    let mut r = initial.to_vec();
    let mut diff = f64::INFINITY;
    for iteration in 1..=max_iterations {
        let next = h_unchecked(mdp, arch, &r);
        diff = sup_distance(&next, &r);
        r = next;
        if diff <= gap {
            if let Some(exact) = exact_finish(mdp, arch, &r, tol) {
                r = exact;
            }
            return Ok(finish(mdp, arch, r, iteration));
        }
    }
    Err(Error::NotConverged {
        iterations: max_iterations,
        residual: diff,
    })
}

/// Fixes the minimizing actions at `Phi r` and solves the resulting linear
/// system `(I - alpha D P_mu Phi) r = D g_mu`. The solution is kept only when
/// its `H` residual is at most `(1 - alpha) tol / 2` and no worse than that
/// of `r`.
fn exact_finish(
    mdp: &DiscountedMdp,
    arch: &AggregationArchitecture,
    r: &[f64],
    tol: f64,
) -> Option<Vec<f64>> {
    let m = arch.num_aggregate();
    if m > EXACT_FINISH_MAX_STATES {
        return None;
    }
    let alpha = mdp.discount();
    let j1 = phi_times(arch, r);
    let mut matrix = vec![vec![0.0; m]; m];
    let mut rhs = vec![0.0; m];
    for (x, row) in matrix.iter_mut().enumerate() {
        row[x] += 1.0;
        for &(i, d) in arch.disaggregation_row(x) {
            if d <= 0.0 {
                continue;
            }
            let (u, _) = mdp.best_action(i, &j1);
            for t in &mdp.actions(i)[u].transitions {
                rhs[x] += d * t.prob * t.cost;
                for &(y, phi) in arch.aggregation_row(t.next) {
                    row[y] -= alpha * d * t.prob * phi;
                }
            }
        }
    }
    let exact = solve_dense(matrix, rhs).ok()?;
    let residual = sup_distance(&h_unchecked(mdp, arch, &exact), &exact);
    let current = sup_distance(&h_unchecked(mdp, arch, r), r);
    (residual <= (1.0 - alpha) * tol / 2.0 && residual <= current).then_some(exact)
}

fn finish(
    mdp: &DiscountedMdp,
    arch: &AggregationArchitecture,
    r_star: Vec<f64>,
    iterations: usize,
) -> AggregateSolution {
    let residual = sup_distance(&h_unchecked(mdp, arch, &r_star), &r_star);
    let j1 = phi_times(arch, &r_star);
    let j0 = (0..mdp.num_states())
        .map(|i| mdp.best_action(i, &j1).1)
        .collect();
    AggregateSolution {
        r_star,
        j0,
        j_tilde: j1.clone(),
        j1,
        iterations,
        residual,
    }
}

/// Residuals of the three aggregate Bellman equations at `sol`.
pub fn verify_bellman_triple(
    mdp: &DiscountedMdp,
    arch: &AggregationArchitecture,
    sol: &AggregateSolution,
    tol: f64,
) -> Result<TripleReport> {
    check_pair(mdp, arch)?;
    check_len("r_star", arch.num_aggregate(), &sol.r_star)?;
    check_len("j0", mdp.num_states(), &sol.j0)?;
    check_len("j1", mdp.num_states(), &sol.j1)?;

    let disaggregation = (0..arch.num_aggregate())
        .map(|x| {
            let mixed: f64 = arch
                .disaggregation_row(x)
                .iter()
                .map(|&(i, d)| d * sol.j0[i])
                .sum();
            (sol.r_star[x] - mixed).abs()
        })
        .fold(0.0, f64::max);
    let minimization = (0..mdp.num_states())
        .map(|i| (sol.j0[i] - mdp.best_action(i, &sol.j1).1).abs())
        .fold(0.0, f64::max);
    let aggregation = sup_distance(&sol.j1, &phi_times(arch, &sol.r_star));

    Ok(TripleReport {
        disaggregation,
        minimization,
        aggregation,
        passed: disaggregation <= tol && minimization <= tol && aggregation <= tol,
    })
}

/// Independent solver: iterates the three stage equations jointly on dense
/// copies of `D` and `Phi`, stopping when all three vectors have settled.
pub fn solve_by_triple_iteration(
    mdp: &DiscountedMdp,
    arch: &AggregationArchitecture,
    tol: f64,
) -> Result<AggregateSolution> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    check_pair(mdp, arch)?;
    arch.ensure_valid(mdp.num_states())?;
    let n = mdp.num_states();
    let d = arch.dense_disaggregation();
    let phi = arch.dense_aggregation();
    let alpha = mdp.discount();
    let gap = stopping_gap(tol, alpha);

    let mut r = vec![0.0; arch.num_aggregate()];
    let mut j1 = vec![0.0; n];
    let mut j0 = vec![0.0; n];
    let mut change = f64::INFINITY;
    for iteration in 1..=DEFAULT_MAX_ITERATIONS {
        let next_j0: Vec<f64> = mdp
            .states()
            .iter()
            .map(|actions| {
                actions
                    .iter()
                    .map(|a| {
                        a.transitions
                            .iter()
                            .map(|t| t.prob * (t.cost + alpha * j1[t.next]))
                            .sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let next_r: Vec<f64> = d
            .iter()
            .map(|row| row.iter().zip(&next_j0).map(|(w, v)| w * v).sum())
            .collect();
        let next_j1: Vec<f64> = phi
            .iter()
            .map(|row| row.iter().zip(&next_r).map(|(w, v)| w * v).sum())
            .collect();

        change = sup_distance(&next_r, &r)
            .max(sup_distance(&next_j0, &j0))
            .max(sup_distance(&next_j1, &j1));
        r = next_r;
        j0 = next_j0;
        j1 = next_j1;
        if change <= gap {
            let residual = sup_distance(&h_unchecked(mdp, arch, &r), &r);
            return Ok(AggregateSolution {
                r_star: r,
                j0,
                j_tilde: j1.clone(),
                j1,
                iterations: iteration,
                residual,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: DEFAULT_MAX_ITERATIONS,
        residual: change,
    })
}
