//! Aggregation architectures: the aggregate-state set together with the
//! disaggregation matrix `D` (aggregate -> original) and the aggregation
//! matrix `Phi` (original -> aggregate), both row-stochastic and sparse.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Row sums of `D` and `Phi` must be within this of 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// `false` for zero, negatives and NaN.
fn positive(v: f64) -> bool {
    v > 0.0
}

/// Sparse matrix row: `(column, weight)` pairs sorted by column, no duplicates.
pub type SparseRow = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct AggregationArchitecture {
    num_states: usize,
    labels: Vec<String>,
    /// One row per aggregate state, columns are original states.
    disaggregation: Vec<SparseRow>,
    /// One row per original state, columns are aggregate states.
    aggregation: Vec<SparseRow>,
}

impl AggregationArchitecture {
    /// Assembles an architecture from sparse rows.
    ///
    /// Only structure is checked here (shapes, index ranges, duplicate
    /// columns). Probabilistic validity is reported by [`Self::validate`].
    pub fn new(
        num_states: usize,
        labels: Vec<String>,
        disaggregation: Vec<SparseRow>,
        aggregation: Vec<SparseRow>,
    ) -> Result<Self> {
        let num_aggregate = labels.len();
        if num_aggregate == 0 {
            return Err(Error::InvalidArchitecture("no aggregate states".into()));
        }
        if disaggregation.len() != num_aggregate {
            return Err(Error::InvalidArchitecture(format!(
                "{num_aggregate} labels but {} disaggregation rows",
                disaggregation.len()
            )));
        }
        if aggregation.len() != num_states {
            return Err(Error::InvalidArchitecture(format!(
                "{num_states} original states but {} aggregation rows",
                aggregation.len()
            )));
        }
        let mut disaggregation = disaggregation;
        let mut aggregation = aggregation;
        for (x, row) in disaggregation.iter_mut().enumerate() {
            sort_row(row, num_states).map_err(|col| {
                Error::InvalidArchitecture(format!(
                    "disaggregation row {}: bad or repeated state index {}",
                    labels[x],
                    col + 1
                ))
            })?;
        }
        for (j, row) in aggregation.iter_mut().enumerate() {
            sort_row(row, num_aggregate).map_err(|col| {
                Error::InvalidArchitecture(format!(
                    "aggregation row of state {}: bad or repeated aggregate index {col}",
                    j + 1
                ))
            })?;
        }
        Ok(Self {
            num_states,
            labels,
            disaggregation,
            aggregation,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_aggregate(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Row `x` of `D`.
    pub fn disaggregation_row(&self, x: usize) -> &[(usize, f64)] {
        &self.disaggregation[x]
    }

    /// Row `j` of `Phi`.
    pub fn aggregation_row(&self, j: usize) -> &[(usize, f64)] {
        &self.aggregation[j]
    }

    /// `d_xi`
    pub fn disaggregation_prob(&self, x: usize, i: usize) -> f64 {
        lookup(&self.disaggregation[x], i)
    }

    /// `phi_jy`
    pub fn aggregation_prob(&self, j: usize, y: usize) -> f64 {
        lookup(&self.aggregation[j], y)
    }

    pub fn dense_disaggregation(&self) -> Vec<Vec<f64>> {
        densify(&self.disaggregation, self.num_states)
    }

    pub fn dense_aggregation(&self) -> Vec<Vec<f64>> {
        densify(&self.aggregation, self.num_aggregate())
    }

    /// Lists every violated invariant against a model with `n` states.
    pub fn validate(&self, n: usize) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.num_states != n {
            report.issues.push(ValidationIssue::DimensionMismatch {
                expected: n,
                actual: self.num_states,
            });
        }
        for (x, row) in self.disaggregation.iter().enumerate() {
            check_row(&mut report, Matrix::Disaggregation, x, row);
        }
        for (j, row) in self.aggregation.iter().enumerate() {
            check_row(&mut report, Matrix::Aggregation, j, row);
        }
        for fp in self.footprints() {
            if fp.members.is_empty() {
                report.empty_footprints.push(fp.aggregate_state);
            }
        }
        report
    }

    /// [`Self::validate`] turned into an error when anything is violated.
    pub fn ensure_valid(&self, n: usize) -> Result<()> {
        let report = self.validate(n);
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidArchitecture(report.describe(self)))
        }
    }

    /// Checks that `d_xi > 0` implies `phi_ix > 0` for every pair, returning
    /// the first offending pair otherwise.
    pub fn check_condition(&self) -> ConditionCheck {
        for (x, row) in self.disaggregation.iter().enumerate() {
            for &(i, d) in row {
                if d > 0.0 && !positive(self.aggregation_prob(i, x)) {
                    return ConditionCheck {
                        holds: false,
                        witness: Some((x, i)),
                    };
                }
            }
        }
        ConditionCheck {
            holds: true,
            witness: None,
        }
    }

    /// Exact supports `{j | phi_jx > 0}` for every aggregate state.
    pub fn footprints(&self) -> Vec<Footprint> {
        let mut members = vec![Vec::new(); self.num_aggregate()];
        for (j, row) in self.aggregation.iter().enumerate() {
            for &(y, phi) in row {
                if phi > 0.0 {
                    members[y].push(j);
                }
            }
        }
        members
            .into_iter()
            .enumerate()
            .map(|(aggregate_state, members)| Footprint {
                aggregate_state,
                members,
            })
            .collect()
    }
}

fn sort_row(row: &mut SparseRow, width: usize) -> std::result::Result<(), usize> {
    row.sort_by_key(|&(col, _)| col);
    for (k, &(col, _)) in row.iter().enumerate() {
        if col >= width || (k > 0 && row[k - 1].0 == col) {
            return Err(col);
        }
    }
    Ok(())
}

fn lookup(row: &[(usize, f64)], col: usize) -> f64 {
    row.binary_search_by_key(&col, |&(c, _)| c)
        .map(|k| row[k].1)
        .unwrap_or(0.0)
}

fn densify(rows: &[SparseRow], width: usize) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|row| {
            let mut dense = vec![0.0; width];
            for &(col, w) in row {
                dense[col] = w;
            }
            dense
        })
        .collect()
}

fn check_row(report: &mut ValidationReport, matrix: Matrix, row: usize, entries: &[(usize, f64)]) {
    let mut sum = 0.0;
    for &(col, w) in entries {
        if !w.is_finite() {
            report
                .issues
                .push(ValidationIssue::NonFinite { matrix, row, col });
        } else if w < 0.0 {
            report.issues.push(ValidationIssue::Negative {
                matrix,
                row,
                col,
                value: w,
            });
        }
        sum += w;
    }
    let drift = (sum - 1.0).abs();
    if drift.is_nan() || drift > ROW_SUM_TOLERANCE {
        report
            .issues
            .push(ValidationIssue::RowSum { matrix, row, sum });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matrix {
    Disaggregation,
    Aggregation,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    DimensionMismatch {
        expected: usize,
        actual: usize,
    },
    RowSum {
        matrix: Matrix,
        row: usize,
        sum: f64,
    },
    Negative {
        matrix: Matrix,
        row: usize,
        col: usize,
        value: f64,
    },
    NonFinite {
        matrix: Matrix,
        row: usize,
        col: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
    /// Aggregate states no original state maps into. Not an error, but such
    /// states contribute nothing to the error bound.
    pub empty_footprints: Vec<usize>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    /// Human-readable listing using the architecture's labels for `D` rows and
    /// 1-based indices for original states.
    pub fn describe(&self, arch: &AggregationArchitecture) -> String {
        let name = |matrix: Matrix, row: usize| match matrix {
            Matrix::Disaggregation => format!("disaggregation row {}", arch.labels[row]),
            Matrix::Aggregation => format!("aggregation row of state {}", row + 1),
        };
        let mut lines: Vec<String> = self
            .issues
            .iter()
            .map(|issue| match *issue {
                ValidationIssue::DimensionMismatch { expected, actual } => {
                    format!("architecture covers {actual} states, model has {expected}")
                }
                ValidationIssue::RowSum { matrix, row, sum } => {
                    format!("{} sums to {sum}", name(matrix, row))
                }
                ValidationIssue::Negative {
                    matrix,
                    row,
                    col,
                    value,
                } => format!(
                    "{} has negative entry {value} at column {col}",
                    name(matrix, row)
                ),
                ValidationIssue::NonFinite { matrix, row, col } => {
                    format!("{} has non-finite entry at column {col}", name(matrix, row))
                }
            })
            .collect();
        for &x in &self.empty_footprints {
            lines.push(format!(
                "warning: aggregate state {} has an empty footprint",
                arch.labels[x]
            ));
        }
        if lines.is_empty() {
            "valid".to_string()
        } else {
            lines.join("; ")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditionCheck {
    pub holds: bool,
    /// `(x, i)` with `d_xi > 0` but `phi_ix = 0`.
    pub witness: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Footprint {
    pub aggregate_state: usize,
    pub members: Vec<usize>,
}

fn default_labels(count: usize) -> Vec<String> {
    (1..=count).map(|k| format!("x{k}")).collect()
}

/// Normalizes nonnegative weights into a sparse probability row.
fn normalize(weights: &[f64], what: &str) -> Result<SparseRow> {
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{what}: invalid weight {w}"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if !positive(sum) {
        return Err(Error::InvalidParameter(format!(
            "{what}: weights sum to zero"
        )));
    }
    Ok(weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(k, &w)| (k, w / sum))
        .collect())
}

/// Hard aggregation over a partition of `0..n`.
///
/// `Phi` is the 0/1 membership matrix. `D` is uniform over each set unless
/// `disagg_weights` gives per-set weights aligned with the set's members.
pub fn hard_aggregation(
    n: usize,
    partition: &[Vec<usize>],
    disagg_weights: Option<&[Vec<f64>]>,
) -> Result<AggregationArchitecture> {
    let mut owner = vec![None; n];
    for (x, set) in partition.iter().enumerate() {
        if set.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "partition set {} is empty",
                x + 1
            )));
        }
        for &j in set {
            if j >= n {
                return Err(Error::InvalidParameter(format!(
                    "state {} out of range 1..={n}",
                    j + 1
                )));
            }
            if owner[j].replace(x).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "state {} appears in more than one set",
                    j + 1
                )));
            }
        }
    }
    if let Some(j) = owner.iter().position(Option::is_none) {
        return Err(Error::InvalidParameter(format!(
            "state {} is not covered by the partition",
            j + 1
        )));
    }
    if let Some(weights) = disagg_weights {
        if weights.len() != partition.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weight rows for {} sets",
                weights.len(),
                partition.len()
            )));
        }
    }

    let mut disaggregation = Vec::with_capacity(partition.len());
    for (x, set) in partition.iter().enumerate() {
        let local = match disagg_weights {
            Some(weights) => {
                if weights[x].len() != set.len() {
                    return Err(Error::InvalidParameter(format!(
                        "set {} has {} members but {} weights",
                        x + 1,
                        set.len(),
                        weights[x].len()
                    )));
                }
                weights[x].clone()
            }
            None => vec![1.0; set.len()],
        };
        let row = normalize(&local, &format!("disaggregation weights of set {}", x + 1))?;
        disaggregation.push(row.into_iter().map(|(k, d)| (set[k], d)).collect());
    }
    let aggregation = owner
        .into_iter()
        .map(|x| vec![(x.expect("covered"), 1.0)])
        .collect();
    AggregationArchitecture::new(
        n,
        default_labels(partition.len()),
        disaggregation,
        aggregation,
    )
}

/// Soft aggregation: `memberships` is `n x |A|`, `disagg_weights` is
/// `|A| x n`; each row is normalized and nothing else is changed.
pub fn soft_aggregation(
    memberships: &[Vec<f64>],
    disagg_weights: &[Vec<f64>],
) -> Result<AggregationArchitecture> {
    let n = memberships.len();
    let num_aggregate = disagg_weights.len();
    let mut aggregation = Vec::with_capacity(n);
    for (j, row) in memberships.iter().enumerate() {
        if row.len() != num_aggregate {
            return Err(Error::DimensionMismatch {
                what: "membership row",
                expected: num_aggregate,
                actual: row.len(),
            });
        }
        aggregation.push(normalize(
            row,
            &format!("membership row of state {}", j + 1),
        )?);
    }
    let mut disaggregation = Vec::with_capacity(num_aggregate);
    for (x, row) in disagg_weights.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                what: "disaggregation row",
                expected: n,
                actual: row.len(),
            });
        }
        disaggregation.push(normalize(row, &format!("disaggregation row x{}", x + 1))?);
    }
    AggregationArchitecture::new(
        n,
        default_labels(num_aggregate),
        disaggregation,
        aggregation,
    )
}

/// Representative-state (coarse grid) aggregation: aggregate state `x`
/// disaggregates entirely onto `reps[x]`; `interp_weights` (`n x |A|`) are
/// normalized into `Phi`.
///
/// Every representative must put positive weight on its own aggregate state,
/// otherwise the pair `(x, reps[x])` breaks the support condition and the
/// architecture is rejected.
pub fn representative_states(
    reps: &[usize],
    interp_weights: &[Vec<f64>],
) -> Result<AggregationArchitecture> {
    let n = interp_weights.len();
    let mut seen = vec![false; n];
    for &r in reps {
        if r >= n {
            return Err(Error::InvalidParameter(format!(
                "representative {} out of range 1..={n}",
                r + 1
            )));
        }
        if std::mem::replace(&mut seen[r], true) {
            return Err(Error::InvalidParameter(format!(
                "state {} is listed as a representative twice",
                r + 1
            )));
        }
    }
    let num_aggregate = reps.len();
    let mut aggregation = Vec::with_capacity(n);
    for (j, row) in interp_weights.iter().enumerate() {
        if row.len() != num_aggregate {
            return Err(Error::DimensionMismatch {
                what: "interpolation row",
                expected: num_aggregate,
                actual: row.len(),
            });
        }
        aggregation.push(normalize(
            row,
            &format!("interpolation row of state {}", j + 1),
        )?);
    }
    for (x, &r) in reps.iter().enumerate() {
        if !positive(interp_weights[r][x]) {
            return Err(Error::InvalidParameter(format!(
                "representative state {} has zero interpolation weight on its own aggregate \
                 state x{}; d_xi > 0 would not imply phi_ix > 0",
                r + 1,
                x + 1
            )));
        }
    }
    let disaggregation = reps.iter().map(|&r| vec![(r, 1.0)]).collect();
    AggregationArchitecture::new(
        n,
        default_labels(num_aggregate),
        disaggregation,
        aggregation,
    )
}

/// Piecewise-linear interpolation weights on the line `0..n` between the
/// given representative positions (any order). States outside the covered
/// range attach to the nearest representative.
pub fn linear_interpolation_weights(n: usize, reps: &[usize]) -> Vec<Vec<f64>> {
    let mut order: Vec<usize> = (0..reps.len()).collect();
    order.sort_by_key(|&x| reps[x]);
    let mut weights = vec![vec![0.0; reps.len()]; n];
    if reps.is_empty() {
        return weights;
    }
    for (s, row) in weights.iter_mut().enumerate() {
        let upper = order.iter().position(|&x| reps[x] >= s);
        match upper {
            None => row[*order.last().unwrap()] = 1.0,
            Some(0) => row[order[0]] = 1.0,
            Some(k) => {
                let (lo, hi) = (order[k - 1], order[k]);
                if reps[hi] == s {
                    row[hi] = 1.0;
                } else {
                    let span = (reps[hi] - reps[lo]) as f64;
                    row[lo] = (reps[hi] - s) as f64 / span;
                    row[hi] = (s - reps[lo]) as f64 / span;
                }
            }
        }
    }
    weights
}

/// One aggregate state per distinct feature value, in order of first
/// appearance. `Phi` maps each state to its feature's aggregate state and `D`
/// is uniform over each feature class.
pub fn representative_features<F>(feature_of: &[F]) -> Result<AggregationArchitecture>
where
    F: Eq + Hash + fmt::Display,
{
    let mut index: HashMap<&F, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (j, feature) in feature_of.iter().enumerate() {
        let x = *index.entry(feature).or_insert_with(|| {
            labels.push(feature.to_string());
            classes.push(Vec::new());
            labels.len() - 1
        });
        classes[x].push(j);
    }
    let mut arch = hard_aggregation(feature_of.len(), &classes, None)?;
    arch.labels = labels;
    Ok(arch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use proptest::prelude::*;

    fn identity(n: usize) -> AggregationArchitecture {
        let sets: Vec<Vec<usize>> = (0..n).map(|j| vec![j]).collect();
        hard_aggregation(n, &sets, None).unwrap()
    }

    fn example_one() -> AggregationArchitecture {
        generators::counterexample(0.9, 0.0).unwrap().1
    }

    #[test]
    fn identity_is_valid() {
        let arch = identity(3);
        assert!(arch.validate(3).is_valid());
        assert_eq!(arch.dense_aggregation(), arch.dense_disaggregation());
    }

    #[test]
    fn short_row_is_named() {
        let arch = AggregationArchitecture::new(
            2,
            vec!["a".into(), "b".into()],
            vec![vec![(0, 0.8)], vec![(1, 1.0)]],
            vec![vec![(0, 1.0)], vec![(1, 1.0)]],
        )
        .unwrap();
        let report = arch.validate(2);
        assert!(!report.is_valid());
        assert_eq!(
            report.issues,
            vec![ValidationIssue::RowSum {
                matrix: Matrix::Disaggregation,
                row: 0,
                sum: 0.8
            }]
        );
        assert!(report.describe(&arch).contains("disaggregation row a"));
        assert!(arch.ensure_valid(2).is_err());
    }

    #[test]
    fn dimension_and_sign_issues() {
        let arch = AggregationArchitecture::new(
            2,
            vec!["a".into()],
            vec![vec![(0, 1.5), (1, -0.5)]],
            vec![vec![(0, 1.0)], vec![(0, 1.0)]],
        )
        .unwrap();
        let report = arch.validate(3);
        assert!(report.issues.contains(&ValidationIssue::DimensionMismatch {
            expected: 3,
            actual: 2
        }));
        assert!(report
            .issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::Negative { row: 0, col: 1, .. })));
    }

    #[test]
    fn structural_errors() {
        let labels = || vec!["a".to_string()];
        // out-of-range state
        assert!(AggregationArchitecture::new(
            1,
            labels(),
            vec![vec![(1, 1.0)]],
            vec![vec![(0, 1.0)]]
        )
        .is_err());
        // repeated column
        assert!(AggregationArchitecture::new(
            1,
            labels(),
            vec![vec![(0, 0.5), (0, 0.5)]],
            vec![vec![(0, 1.0)]]
        )
        .is_err());
        // wrong row count
        assert!(AggregationArchitecture::new(
            2,
            labels(),
            vec![vec![(0, 1.0)]],
            vec![vec![(0, 1.0)]]
        )
        .is_err());
    }

    #[test]
    fn empty_footprint_is_a_warning() {
        let arch = AggregationArchitecture::new(
            1,
            vec!["a".into(), "b".into()],
            vec![vec![(0, 1.0)], vec![(0, 1.0)]],
            vec![vec![(0, 1.0)]],
        )
        .unwrap();
        let report = arch.validate(1);
        assert!(report.is_valid());
        assert_eq!(report.empty_footprints, vec![1]);
    }

    #[test]
    fn example_one_is_valid_but_violates_condition() {
        let arch = example_one();
        assert!(arch.validate(2).is_valid());
        let check = arch.check_condition();
        assert!(!check.holds);
        assert_eq!(check.witness, Some((0, 0)));
    }

    #[test]
    fn modified_example_satisfies_condition() {
        let (_, arch) = generators::counterexample(0.9, 0.5).unwrap();
        assert_eq!(
            arch.check_condition(),
            ConditionCheck {
                holds: true,
                witness: None
            }
        );
    }

    #[test]
    fn footprints_of_examples() {
        let members = |arch: &AggregationArchitecture| -> Vec<Vec<usize>> {
            arch.footprints().into_iter().map(|f| f.members).collect()
        };
        assert_eq!(members(&identity(3)), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(members(&example_one()), vec![vec![1], vec![0]]);
        let (_, half) = generators::counterexample(0.9, 0.5).unwrap();
        assert_eq!(members(&half), vec![vec![0, 1], vec![0, 1]]);
    }

    #[test]
    fn hard_aggregation_uniform_default() {
        let arch = hard_aggregation(3, &[vec![0, 1], vec![2]], None).unwrap();
        assert_eq!(
            arch.dense_aggregation(),
            vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]
        );
        assert_eq!(
            arch.dense_disaggregation(),
            vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 1.0]]
        );
        let single = hard_aggregation(1, &[vec![0]], None).unwrap();
        assert_eq!(single.dense_aggregation(), vec![vec![1.0]]);
        assert_eq!(single.dense_disaggregation(), vec![vec![1.0]]);
    }

    #[test]
    fn hard_aggregation_custom_weights() {
        let arch = hard_aggregation(
            3,
            &[vec![0, 1], vec![2]],
            Some(&[vec![3.0, 1.0], vec![2.0]]),
        )
        .unwrap();
        assert_eq!(arch.disaggregation_row(0), &[(0, 0.75), (1, 0.25)]);
        assert!(arch.check_condition().holds);
        assert!(
            hard_aggregation(3, &[vec![0, 1], vec![2]], Some(&[vec![1.0], vec![2.0]])).is_err()
        );
    }

    #[test]
    fn hard_aggregation_rejects_bad_partitions() {
        assert!(hard_aggregation(3, &[vec![0, 1], vec![1, 2]], None).is_err());
        assert!(hard_aggregation(3, &[vec![0, 1]], None).is_err());
        assert!(hard_aggregation(3, &[vec![0, 1, 2], vec![]], None).is_err());
        assert!(hard_aggregation(3, &[vec![0, 1, 3]], None).is_err());
    }

    #[test]
    fn soft_aggregation_normalizes() {
        let arch = soft_aggregation(&[vec![2.0, 2.0]], &[vec![1.0], vec![3.0]]).unwrap();
        assert_eq!(arch.aggregation_row(0), &[(0, 0.5), (1, 0.5)]);
        assert!(soft_aggregation(&[vec![0.0, 0.0]], &[vec![1.0], vec![1.0]]).is_err());
        assert!(soft_aggregation(&[vec![1.0, 0.0]], &[vec![0.0], vec![1.0]]).is_err());
    }

    #[test]
    fn soft_aggregation_reproduces_modified_example() {
        let delta = 0.3;
        let arch = soft_aggregation(
            &[vec![delta, 1.0 - delta], vec![1.0 - delta, delta]],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        assert_eq!(arch.aggregation_prob(0, 0), delta);
        assert_eq!(arch.aggregation_prob(0, 1), 1.0 - delta);
        assert_eq!(arch.aggregation_prob(1, 1), delta);
        assert_eq!(arch.aggregation_prob(1, 0), 1.0 - delta);
        let (_, expected) = generators::counterexample(0.9, delta).unwrap();
        assert_eq!(arch.dense_aggregation(), expected.dense_aggregation());
        assert_eq!(arch.dense_disaggregation(), expected.dense_disaggregation());
    }

    #[test]
    fn representative_states_identity() {
        let weights: Vec<Vec<f64>> = (0..3)
            .map(|j| (0..3).map(|x| if j == x { 1.0 } else { 0.0 }).collect())
            .collect();
        let arch = representative_states(&[0, 1, 2], &weights).unwrap();
        assert_eq!(arch, identity(3));
    }

    #[test]
    fn representative_states_on_a_line() {
        let weights = linear_interpolation_weights(5, &[0, 4]);
        assert_eq!(weights[2], vec![0.5, 0.5]);
        assert_eq!(weights[1], vec![0.75, 0.25]);
        let arch = representative_states(&[0, 4], &weights).unwrap();
        assert_eq!(arch.aggregation_prob(2, 0), 0.5);
        assert_eq!(arch.aggregation_prob(2, 1), 0.5);
        assert!(arch.check_condition().holds);
    }

    #[test]
    fn representative_states_rejections() {
        let w = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(representative_states(&[0, 0], &w).is_err());
        // representative 0 has no mass on its own aggregate state
        let bad = vec![vec![0.0, 1.0], vec![0.0, 1.0]];
        let err = representative_states(&[0, 1], &bad).unwrap_err();
        assert!(err.to_string().contains("zero interpolation weight"));
    }

    #[test]
    fn interpolation_weights_outside_reps() {
        let weights = linear_interpolation_weights(6, &[4, 1]);
        assert_eq!(weights[0], vec![0.0, 1.0]);
        assert_eq!(weights[5], vec![1.0, 0.0]);
        assert_eq!(weights[3], vec![2.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn features_examples() {
        let injective = representative_features(&[10, 20, 30]).unwrap();
        assert_eq!(
            injective.dense_aggregation(),
            identity(3).dense_aggregation()
        );
        assert_eq!(injective.labels(), &["10", "20", "30"]);

        let constant = representative_features(&["c"; 4]).unwrap();
        assert_eq!(constant.num_aggregate(), 1);
        assert_eq!(constant.dense_disaggregation(), vec![vec![0.25; 4]]);

        let parity: Vec<u8> = (1..=4).map(|s| s % 2).collect();
        let arch = representative_features(&parity).unwrap();
        let members: Vec<Vec<usize>> = arch.footprints().into_iter().map(|f| f.members).collect();
        assert_eq!(members, vec![vec![0, 2], vec![1, 3]]);
    }

    fn arb_partition() -> impl Strategy<Value = (usize, Vec<Vec<usize>>)> {
        (1usize..12)
            .prop_flat_map(|n| (Just(n), prop::collection::vec(0usize..n, n)))
            .prop_map(|(n, labels)| {
                let mut sets: Vec<Vec<usize>> = vec![Vec::new(); n];
                for (j, &l) in labels.iter().enumerate() {
                    sets[l].push(j);
                }
                sets.retain(|s| !s.is_empty());
                (n, sets)
            })
    }

    proptest! {
        #[test]
        fn hard_aggregation_properties((n, sets) in arb_partition()) {
            let arch = hard_aggregation(n, &sets, None).unwrap();
            prop_assert!(arch.validate(n).is_valid());
            prop_assert!(arch.check_condition().holds);
            let footprints: Vec<Vec<usize>> =
                arch.footprints().into_iter().map(|f| f.members).collect();
            prop_assert_eq!(&footprints, &sets);

            let memberships: Vec<Vec<f64>> = (0..n)
                .map(|j| sets.iter().map(|s| if s.contains(&j) { 1.0 } else { 0.0 }).collect())
                .collect();
            let disagg: Vec<Vec<f64>> = sets
                .iter()
                .map(|s| (0..n).map(|i| if s.contains(&i) { 1.0 } else { 0.0 }).collect())
                .collect();
            let soft = soft_aggregation(&memberships, &disagg).unwrap();
            prop_assert_eq!(soft.dense_aggregation(), arch.dense_aggregation());
            prop_assert_eq!(soft.dense_disaggregation(), arch.dense_disaggregation());
        }

        #[test]
        fn feature_aggregation_satisfies_condition(features in prop::collection::vec(0u8..5, 1..15)) {
            let arch = representative_features(&features).unwrap();
            prop_assert!(arch.validate(features.len()).is_valid());
            prop_assert!(arch.check_condition().holds);
        }
    }
}
