//! Discounted finite-state MDPs and their exact solution.
//!
//! States are indexed `0..n` internally. Every state owns a nonempty list of
//! actions, and every action a sparse list of `(successor, probability, cost)`
//! triples.

use crate::error::{check_len, Error, Result};
use crate::linalg::{solve_dense, sup_distance};

/// Row sums of transition probabilities must be within this of 1.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Default cap on fixed-point iterations.
pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub next: usize,
    pub prob: f64,
    pub cost: f64,
}

impl Transition {
    pub fn new(next: usize, prob: f64, cost: f64) -> Self {
        Self { next, prob, cost }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub label: String,
    pub transitions: Vec<Transition>,
}

impl Action {
    pub fn new(label: impl Into<String>, transitions: Vec<Transition>) -> Self {
        Self {
            label: label.into(),
            transitions,
        }
    }
}

/// A validated discounted MDP.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountedMdp {
    discount: f64,
    states: Vec<Vec<Action>>,
}

impl DiscountedMdp {
    /// Builds an MDP, rejecting anything that is not a proper model:
    /// empty action sets, out-of-range successors, negative or non-finite
    /// probabilities, rows not summing to 1, non-finite costs, or a
    /// discount outside `(0, 1)`. Rows are never renormalized.
    pub fn new(discount: f64, states: Vec<Vec<Action>>) -> Result<Self> {
        if !(discount > 0.0 && discount < 1.0) {
            return Err(Error::InvalidModel(format!(
                "discount must lie in (0, 1), got {discount}"
            )));
        }
        let n = states.len();
        if n == 0 {
            return Err(Error::InvalidModel("model has no states".into()));
        }
        for (i, actions) in states.iter().enumerate() {
            if actions.is_empty() {
                return Err(Error::InvalidModel(format!(
                    "state {} has no actions",
                    i + 1
                )));
            }
            for action in actions {
                let at = || format!("state {}, action {:?}", i + 1, action.label);
                if action.transitions.is_empty() {
                    return Err(Error::InvalidModel(format!("{}: no transitions", at())));
                }
                let mut sum = 0.0;
                for t in &action.transitions {
                    if t.next >= n {
                        return Err(Error::InvalidModel(format!(
                            "{}: successor {} out of range 1..={n}",
                            at(),
                            t.next + 1
                        )));
                    }
                    if !t.prob.is_finite() || t.prob < 0.0 {
                        return Err(Error::InvalidModel(format!(
                            "{}: invalid probability {}",
                            at(),
                            t.prob
                        )));
                    }
                    if !t.cost.is_finite() {
                        return Err(Error::InvalidModel(format!("{}: non-finite cost", at())));
                    }
                    sum += t.prob;
                }
                if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
                    return Err(Error::InvalidModel(format!(
                        "{}: probabilities sum to {sum}, not 1",
                        at()
                    )));
                }
            }
        }
        Ok(Self { discount, states })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn actions(&self, state: usize) -> &[Action] {
        &self.states[state]
    }

    pub fn states(&self) -> &[Vec<Action>] {
        &self.states
    }

    /// `sum_j p_ij(u) (g(i,u,j) + alpha J(j))`
    pub fn q_value(&self, state: usize, action: usize, values: &[f64]) -> f64 {
        self.states[state][action]
            .transitions
            .iter()
            .map(|t| t.prob * (t.cost + self.discount * values[t.next]))
            .sum()
    }

    /// Minimum Q-value at `state` and the first action attaining it.
    pub(crate) fn best_action(&self, state: usize, values: &[f64]) -> (usize, f64) {
        let mut best = (0, self.q_value(state, 0, values));
        for action in 1..self.states[state].len() {
            let q = self.q_value(state, action, values);
            if q < best.1 {
                best = (action, q);
            }
        }
        best
    }
}

/// A deterministic stationary policy, one action index per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Policy(pub Vec<usize>);

impl Policy {
    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    /// Action labels, for reporting.
    pub fn labels<'a>(&self, mdp: &'a DiscountedMdp) -> Vec<&'a str> {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &u)| mdp.actions(i)[u].label.as_str())
            .collect()
    }

    fn check(&self, mdp: &DiscountedMdp) -> Result<()> {
        if self.0.len() != mdp.num_states() {
            return Err(Error::DimensionMismatch {
                what: "policy",
                expected: mdp.num_states(),
                actual: self.0.len(),
            });
        }
        for (i, &u) in self.0.iter().enumerate() {
            if u >= mdp.actions(i).len() {
                return Err(Error::InvalidParameter(format!(
                    "policy picks action {u} at state {}, which has {} actions",
                    i + 1,
                    mdp.actions(i).len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub value: Vec<f64>,
    pub policy: Policy,
    pub iterations: usize,
    pub sup_norm_residual: f64,
}

/// One application of the Bellman operator `T`.
pub fn bellman_operator(mdp: &DiscountedMdp, values: &[f64]) -> Result<Vec<f64>> {
    check_len("value vector", mdp.num_states(), values)?;
    Ok(apply_bellman(mdp, values))
}

fn apply_bellman(mdp: &DiscountedMdp, values: &[f64]) -> Vec<f64> {
    (0..mdp.num_states())
        .map(|i| mdp.best_action(i, values).1)
        .collect()
}

/// Greedy policy with respect to `values`; ties go to the first-listed action.
pub fn greedy_policy(mdp: &DiscountedMdp, values: &[f64]) -> Result<Policy> {
    check_len("value vector", mdp.num_states(), values)?;
    Ok(Policy(
        (0..mdp.num_states())
            .map(|i| mdp.best_action(i, values).0)
            .collect(),
    ))
}

/// Successive-difference threshold that guarantees a sup-norm distance of at
/// most `tol / 2` between the last iterate and the fixed point of an
/// `alpha`-contraction.
pub(crate) fn stopping_gap(tol: f64, alpha: f64) -> f64 {
    tol * (1.0 - alpha) / (2.0 * alpha)
}

pub fn value_iteration(mdp: &DiscountedMdp, initial: &[f64], tol: f64) -> Result<SolveReport> {
    value_iteration_with_limit(mdp, initial, tol, DEFAULT_MAX_ITERATIONS)
}

/// Value iteration from `initial` until the reported value is within `tol`
/// of `J*` in sup-norm.
pub fn value_iteration_with_limit(
    mdp: &DiscountedMdp,
    initial: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<SolveReport> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    check_len("initial value vector", mdp.num_states(), initial)?;
    let gap = stopping_gap(tol, mdp.discount());

    let mut current = initial.to_vec();
    let mut residual = f64::INFINITY;
    for iteration in 1..=max_iterations {
        let next = apply_bellman(mdp, &current);
        residual = sup_distance(&next, &current);
        current = next;
        if residual <= gap {
            let mut sup_norm_residual = sup_distance(&apply_bellman(mdp, &current), &current);
            if let Some((exact, exact_residual)) = exact_finish(mdp, &current, tol) {
                if exact_residual <= sup_norm_residual {
                    current = exact;
                    sup_norm_residual = exact_residual;
                }
            }
            return Ok(SolveReport {
                policy: greedy_policy(mdp, &current)?,
                value: current,
                iterations: iteration,
                sup_norm_residual,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: max_iterations,
        residual,
    })
}

/// Largest problem size for which the iterative solvers try an exact
/// linear solve after convergence.
pub(crate) const EXACT_FINISH_MAX_STATES: usize = 400;

/// Evaluates the greedy policy of `values` exactly. The result is returned
/// only when its Bellman residual is at most `(1 - alpha) tol / 2`, which
/// keeps it within `tol / 2` of `J*`.
fn exact_finish(mdp: &DiscountedMdp, values: &[f64], tol: f64) -> Option<(Vec<f64>, f64)> {
    if mdp.num_states() > EXACT_FINISH_MAX_STATES {
        return None;
    }
    let policy = greedy_policy(mdp, values).ok()?;
    let exact = policy_evaluation(mdp, &policy).ok()?;
    let residual = sup_distance(&apply_bellman(mdp, &exact), &exact);
    (residual <= (1.0 - mdp.discount()) * tol / 2.0).then_some((exact, residual))
}

/// `J_mu` from the linear system `(I - alpha P_mu) J = g_mu`.
pub fn policy_evaluation(mdp: &DiscountedMdp, policy: &Policy) -> Result<Vec<f64>> {
    policy.check(mdp)?;
    let n = mdp.num_states();
    let alpha = mdp.discount();
    let mut matrix = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    for (i, row) in matrix.iter_mut().enumerate() {
        row[i] = 1.0;
        for t in &mdp.actions(i)[policy.0[i]].transitions {
            row[t.next] -= alpha * t.prob;
            rhs[i] += t.prob * t.cost;
        }
    }
    solve_dense(matrix, rhs)
}
