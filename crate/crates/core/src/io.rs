//! JSON wire formats.
//!
//! Original states are 1-based in every file; aggregate states are 0-based.
//! Model files keep full float precision so that a written instance reloads
//! bit for bit. Reports round every float to 12 significant digits.

use serde::{Deserialize, Serialize};

use crate::aggregate::AggregateSolution;
use crate::aggregation::AggregationArchitecture;
use crate::bound::BoundAudit;
use crate::error::{Error, Result};
use crate::mdp::{Action, DiscountedMdp, SolveReport, Transition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpFile {
    pub n: usize,
    pub discount: f64,
    pub states: Vec<StateEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateEntry {
    pub actions: Vec<ActionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionEntry {
    pub label: String,
    /// `[successor (1-based), probability, cost]`
    pub transitions: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationFile {
    pub num_aggregate: usize,
    #[serde(default)]
    pub labels: Vec<String>,
    /// `[x (0-based), i (1-based), d_xi]`
    pub disaggregation: Vec<(usize, usize, f64)>,
    /// `[j (1-based), y (0-based), phi_jy]`
    pub aggregation: Vec<(usize, usize, f64)>,
}

impl MdpFile {
    pub fn from_mdp(mdp: &DiscountedMdp) -> Self {
        MdpFile {
            n: mdp.num_states(),
            discount: mdp.discount(),
            states: mdp
                .states()
                .iter()
                .map(|actions| StateEntry {
                    actions: actions
                        .iter()
                        .map(|a| ActionEntry {
                            label: a.label.clone(),
                            transitions: a
                                .transitions
                                .iter()
                                .map(|t| (t.next + 1, t.prob, t.cost))
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn into_mdp(self) -> Result<DiscountedMdp> {
        if self.states.len() != self.n {
            return Err(Error::InvalidModel(format!(
                "n is {} but {} states are listed",
                self.n,
                self.states.len()
            )));
        }
        let mut states = Vec::with_capacity(self.n);
        for (i, state) in self.states.into_iter().enumerate() {
            let mut actions = Vec::with_capacity(state.actions.len());
            for action in state.actions {
                let mut transitions = Vec::with_capacity(action.transitions.len());
                for (j, p, g) in action.transitions {
                    if j == 0 {
                        return Err(Error::InvalidModel(format!(
                            "state {}, action {:?}: successor indices are 1-based",
                            i + 1,
                            action.label
                        )));
                    }
                    transitions.push(Transition::new(j - 1, p, g));
                }
                actions.push(Action::new(action.label, transitions));
            }
            states.push(actions);
        }
        DiscountedMdp::new(self.discount, states)
    }
}

impl AggregationFile {
    pub fn from_architecture(arch: &AggregationArchitecture) -> Self {
        let disaggregation = (0..arch.num_aggregate())
            .flat_map(|x| {
                arch.disaggregation_row(x)
                    .iter()
                    .map(move |&(i, d)| (x, i + 1, d))
            })
            .collect();
        let aggregation = (0..arch.num_states())
            .flat_map(|j| {
                arch.aggregation_row(j)
                    .iter()
                    .map(move |&(y, phi)| (j + 1, y, phi))
            })
            .collect();
        AggregationFile {
            num_aggregate: arch.num_aggregate(),
            labels: arch.labels().to_vec(),
            disaggregation,
            aggregation,
        }
    }

    /// Builds the architecture for a model with `n` states.
    pub fn into_architecture(self, n: usize) -> Result<AggregationArchitecture> {
        let labels = if self.labels.is_empty() {
            (1..=self.num_aggregate).map(|k| format!("x{k}")).collect()
        } else if self.labels.len() == self.num_aggregate {
            self.labels
        } else {
            return Err(Error::InvalidArchitecture(format!(
                "{} labels for {} aggregate states",
                self.labels.len(),
                self.num_aggregate
            )));
        };
        let mut disaggregation = vec![Vec::new(); self.num_aggregate];
        for (x, i, d) in self.disaggregation {
            if x >= self.num_aggregate || i == 0 || i > n {
                return Err(Error::InvalidArchitecture(format!(
                    "disaggregation entry [{x}, {i}, {d}] out of range"
                )));
            }
            disaggregation[x].push((i - 1, d));
        }
        let mut aggregation = vec![Vec::new(); n];
        for (j, y, phi) in self.aggregation {
            if y >= self.num_aggregate || j == 0 || j > n {
                return Err(Error::InvalidArchitecture(format!(
                    "aggregation entry [{j}, {y}, {phi}] out of range"
                )));
            }
            aggregation[j - 1].push((y, phi));
        }
        AggregationArchitecture::new(n, labels, disaggregation, aggregation)
    }
}

pub fn parse_mdp(text: &str) -> Result<DiscountedMdp> {
    serde_json::from_str::<MdpFile>(text)?.into_mdp()
}

pub fn parse_aggregation(text: &str, n: usize) -> Result<AggregationArchitecture> {
    serde_json::from_str::<AggregationFile>(text)?.into_architecture(n)
}

pub fn mdp_to_json(mdp: &DiscountedMdp) -> String {
    to_json(&MdpFile::from_mdp(mdp))
}

pub fn aggregation_to_json(arch: &AggregationArchitecture) -> String {
    to_json(&AggregationFile::from_architecture(arch))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn round_all(values: &[f64]) -> Vec<f64> {
    values.iter().copied().map(round12).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReportJson {
    pub value: Vec<f64>,
    /// Action label chosen at each state.
    pub policy: Vec<String>,
    pub iterations: usize,
    pub sup_norm_residual: f64,
}

impl SolveReportJson {
    pub fn new(mdp: &DiscountedMdp, report: &SolveReport) -> Self {
        SolveReportJson {
            value: round_all(&report.value),
            policy: report
                .policy
                .labels(mdp)
                .into_iter()
                .map(str::to_owned)
                .collect(),
            iterations: report.iterations,
            sup_norm_residual: round12(report.sup_norm_residual),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSolutionJson {
    pub r_star: Vec<f64>,
    pub j0: Vec<f64>,
    pub j1: Vec<f64>,
    pub j_tilde: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl From<&AggregateSolution> for AggregateSolutionJson {
    fn from(sol: &AggregateSolution) -> Self {
        AggregateSolutionJson {
            r_star: round_all(&sol.r_star),
            j0: round_all(&sol.j0),
            j1: round_all(&sol.j1),
            j_tilde: round_all(&sol.j_tilde),
            iterations: sol.iterations,
            residual: round12(sol.residual),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundAuditJson {
    pub condition_holds: bool,
    pub epsilon: f64,
    pub bound: f64,
    pub actual_error: f64,
    pub bound_satisfied: bool,
    /// 1-based.
    pub worst_state: usize,
    pub per_state_errors: Vec<f64>,
}

impl From<&BoundAudit> for BoundAuditJson {
    fn from(audit: &BoundAudit) -> Self {
        BoundAuditJson {
            condition_holds: audit.condition_holds,
            epsilon: round12(audit.epsilon),
            bound: round12(audit.bound),
            actual_error: round12(audit.actual_error),
            bound_satisfied: audit.bound_satisfied,
            worst_state: audit.worst_state + 1,
            per_state_errors: round_all(&audit.per_state_errors),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{counterexample, random_instance};
    use proptest::prelude::*;

    #[test]
    fn parses_documented_mdp_format() {
        let text = r#"{"n": 2, "discount": 0.9, "states": [
            {"actions": [{"label": "stay", "transitions": [[1, 1.0, 0.0]]}]},
            {"actions": [{"label": "stay", "transitions": [[2, 1.0, 1.0]]}]}
        ]}"#;
        let mdp = parse_mdp(text).unwrap();
        assert_eq!(mdp, counterexample(0.9, 0.0).unwrap().0);
    }

    #[test]
    fn parses_documented_aggregation_format() {
        let text = r#"{"num_aggregate": 2, "labels": ["x1", "x2"],
            "disaggregation": [[0, 1, 1.0], [1, 2, 1.0]],
            "aggregation": [[1, 1, 1.0], [2, 0, 1.0]]}"#;
        let arch = parse_aggregation(text, 2).unwrap();
        assert_eq!(arch, counterexample(0.9, 0.0).unwrap().1);
    }

    #[test]
    fn missing_field_reports_location() {
        let err = parse_mdp(r#"{"n": 1, "states": []}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("discount") && msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn rejects_zero_based_and_inconsistent_input() {
        let zero = r#"{"n": 1, "discount": 0.5, "states": [
            {"actions": [{"label": "a", "transitions": [[0, 1.0, 0.0]]}]}]}"#;
        assert!(matches!(parse_mdp(zero), Err(Error::InvalidModel(_))));
        let count = r#"{"n": 2, "discount": 0.5, "states": [
            {"actions": [{"label": "a", "transitions": [[1, 1.0, 0.0]]}]}]}"#;
        assert!(parse_mdp(count).is_err());
        let agg = r#"{"num_aggregate": 1, "disaggregation": [[1, 1, 1.0]], "aggregation": [[1, 0, 1.0]]}"#;
        assert!(parse_aggregation(agg, 1).is_err());
    }

    #[test]
    fn labels_default_when_absent() {
        let agg = r#"{"num_aggregate": 1, "disaggregation": [[0, 1, 1.0]], "aggregation": [[1, 0, 1.0]]}"#;
        assert_eq!(parse_aggregation(agg, 1).unwrap().labels(), &["x1"]);
    }

    #[test]
    fn rounding() {
        assert_eq!(round12(0.0), 0.0);
        assert_eq!(round12(-0.0).to_bits(), 0.0f64.to_bits());
        assert_eq!(round12(5.0), 5.0);
        assert_eq!(round12(1.0 / 0.19), 5.26315789474);
        assert_eq!(round12(0.9 / 0.19), 4.73684210526);
        assert_eq!(round12(1e-13 / 3.0), 3.33333333333e-14);
    }

    proptest! {
        #[test]
        fn instance_files_round_trip(seed in any::<u64>()) {
            let (mdp, arch) = random_instance(seed, 10, seed % 2 == 0).unwrap();
            let back = parse_mdp(&mdp_to_json(&mdp)).unwrap();
            prop_assert_eq!(&back, &mdp);
            let arch_back = parse_aggregation(&aggregation_to_json(&arch), mdp.num_states()).unwrap();
            prop_assert_eq!(arch_back, arch);
        }
    }
}
