//! The aggregation error bound `max_i |J*(i) - J~(i)| <= eps / (1 - alpha)`
//! and an audit that checks it on a concrete instance.
//!
//! `eps` is the largest spread of `J*` within any footprint. The bound is only
//! guaranteed when `d_xi > 0` implies `phi_ix > 0`; the audit reports that
//! condition alongside the verdict so that violating instances can be studied
//! rather than rejected.

use crate::aggregate::{apply_h, solve_r_star};
use crate::aggregation::AggregationArchitecture;
use crate::error::{check_len, Error, Result};
use crate::mdp::{value_iteration, DiscountedMdp};

/// Absolute slack on the verdict, absorbing both solver tolerances.
pub const AUDIT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundAudit {
    pub condition_holds: bool,
    pub epsilon: f64,
    pub bound: f64,
    pub actual_error: f64,
    pub bound_satisfied: bool,
    /// 0-based index of the state with the largest error.
    pub worst_state: usize,
    pub per_state_errors: Vec<f64>,
    /// Optimal cost of the original problem.
    pub j_star: Vec<f64>,
    pub j_tilde: Vec<f64>,
    pub r_star: Vec<f64>,
}

/// Largest `|J*(i) - J*(j)|` over pairs sharing a footprint, computed as the
/// per-footprint range. Empty footprints contribute nothing.
pub fn epsilon_of(arch: &AggregationArchitecture, j_star: &[f64]) -> Result<f64> {
    check_len("optimal cost vector", arch.num_states(), j_star)?;
    Ok(arch
        .footprints()
        .iter()
        .filter(|fp| !fp.members.is_empty())
        .map(|fp| {
            let (lo, hi) = fp
                .members
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &j| {
                    (lo.min(j_star[j]), hi.max(j_star[j]))
                });
            hi - lo
        })
        .fold(0.0, f64::max))
}

/// `eps / (1 - alpha)`
pub fn bound_of(epsilon: f64, alpha: f64) -> f64 {
    epsilon / (1.0 - alpha)
}

/// Upper envelope `min_{i in footprint(x)} J*(i) + eps / (1 - alpha)`.
pub fn upper_envelope(
    arch: &AggregationArchitecture,
    j_star: &[f64],
    epsilon: f64,
    alpha: f64,
) -> Result<Vec<f64>> {
    envelope(arch, j_star, |values| {
        values.fold(f64::INFINITY, f64::min) + bound_of(epsilon, alpha)
    })
}

/// Lower envelope `max_{i in footprint(x)} J*(i) - eps / (1 - alpha)`.
pub fn lower_envelope(
    arch: &AggregationArchitecture,
    j_star: &[f64],
    epsilon: f64,
    alpha: f64,
) -> Result<Vec<f64>> {
    envelope(arch, j_star, |values| {
        values.fold(f64::NEG_INFINITY, f64::max) - bound_of(epsilon, alpha)
    })
}

fn envelope(
    arch: &AggregationArchitecture,
    j_star: &[f64],
    reduce: impl Fn(&mut dyn Iterator<Item = f64>) -> f64,
) -> Result<Vec<f64>> {
    check_len("optimal cost vector", arch.num_states(), j_star)?;
    arch.footprints()
        .iter()
        .map(|fp| {
            if fp.members.is_empty() {
                return Err(Error::InvalidArchitecture(format!(
                    "aggregate state {} has an empty footprint",
                    arch.labels()[fp.aggregate_state]
                )));
            }
            Ok(reduce(&mut fp.members.iter().map(|&j| j_star[j])))
        })
        .collect()
}

/// Checks `H r_up <= r_up + slack` and `H r_low >= r_low - slack`
/// componentwise. Returns the largest violation of each inequality
/// (negative when the inequality holds with room to spare).
pub fn envelope_gaps(
    mdp: &DiscountedMdp,
    arch: &AggregationArchitecture,
    j_star: &[f64],
) -> Result<(f64, f64)> {
    let epsilon = epsilon_of(arch, j_star)?;
    let alpha = mdp.discount();
    let upper = upper_envelope(arch, j_star, epsilon, alpha)?;
    let lower = lower_envelope(arch, j_star, epsilon, alpha)?;
    let h_upper = apply_h(mdp, arch, &upper)?;
    let h_lower = apply_h(mdp, arch, &lower)?;
    let up = h_upper
        .iter()
        .zip(&upper)
        .map(|(h, r)| h - r)
        .fold(f64::NEG_INFINITY, f64::max);
    let low = h_lower
        .iter()
        .zip(&lower)
        .map(|(h, r)| r - h)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((up, low))
}

/// Solves both problems at `tol` and compares `J*` with the interpolated
/// aggregate solution.
pub fn audit(mdp: &DiscountedMdp, arch: &AggregationArchitecture, tol: f64) -> Result<BoundAudit> {
    arch.ensure_valid(mdp.num_states())?;
    let exact = value_iteration(mdp, &vec![0.0; mdp.num_states()], tol)?;
    let aggregate = solve_r_star(mdp, arch, tol)?;
    Ok(compare(
        mdp,
        arch,
        exact.value,
        aggregate.j_tilde,
        aggregate.r_star,
    ))
}

fn compare(
    mdp: &DiscountedMdp,
    arch: &AggregationArchitecture,
    j_star: Vec<f64>,
    j_tilde: Vec<f64>,
    r_star: Vec<f64>,
) -> BoundAudit {
    let epsilon = epsilon_of(arch, &j_star).expect("lengths checked by the solvers");
    let bound = bound_of(epsilon, mdp.discount());
    let per_state_errors: Vec<f64> = j_star
        .iter()
        .zip(&j_tilde)
        .map(|(a, b)| (a - b).abs())
        .collect();
    let (worst_state, actual_error) =
        per_state_errors
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, 0.0),
                |best, (i, e)| if e > best.1 { (i, e) } else { best },
            );
    BoundAudit {
        condition_holds: arch.check_condition().holds,
        epsilon,
        bound,
        actual_error,
        bound_satisfied: actual_error <= bound + AUDIT_TOLERANCE,
        worst_state,
        per_state_errors,
        j_star,
        j_tilde,
        r_star,
    }
}
