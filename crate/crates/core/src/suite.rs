//! Randomized check of the aggregation error bound over seeded instances.

use serde::Serialize;

use crate::bound::audit;
use crate::error::Result;
use crate::generators::random_instance;
use crate::io::round12;

/// Slack allowed between the observed error and `eps / (1 - alpha)`.
pub const SUITE_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub count: usize,
    pub seed: u64,
    pub max_n: usize,
    pub tol: f64,
    /// Generate every other instance without enforcing the support
    /// condition; those that end up violating it are tallied separately.
    pub allow_violations: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub index: usize,
    pub seed: u64,
    pub actual_error: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub count: usize,
    /// Instances satisfying the support condition.
    pub checked: usize,
    pub passed: usize,
    /// Largest `actual_error / bound` over instances with a positive bound.
    pub max_ratio: Option<f64>,
    pub violations: Vec<Violation>,
    pub condition_violating: usize,
    pub condition_violating_exceeding_bound: usize,
}

/// Seed of instance `index`.
pub fn instance_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}

pub fn run_suite(config: &SuiteConfig) -> Result<SuiteSummary> {
    let mut summary = SuiteSummary {
        count: config.count,
        checked: 0,
        passed: 0,
        max_ratio: None,
        violations: Vec::new(),
        condition_violating: 0,
        condition_violating_exceeding_bound: 0,
    };
    for index in 0..config.count {
        let seed = instance_seed(config.seed, index);
        let enforce = !(config.allow_violations && index % 2 == 1);
        let (mdp, arch) = random_instance(seed, config.max_n, enforce)?;
        let result = audit(&mdp, &arch, config.tol)?;
        let within = result.actual_error <= result.bound + SUITE_TOLERANCE;
        if !result.condition_holds {
            summary.condition_violating += 1;
            if !within {
                summary.condition_violating_exceeding_bound += 1;
            }
            continue;
        }
        summary.checked += 1;
        if result.bound > 0.0 {
            let ratio = result.actual_error / result.bound;
            summary.max_ratio = Some(summary.max_ratio.map_or(ratio, |m: f64| m.max(ratio)));
        }
        if within {
            summary.passed += 1;
        } else {
            summary.violations.push(Violation {
                index,
                seed,
                actual_error: round12(result.actual_error),
                bound: round12(result.bound),
            });
        }
    }
    summary.max_ratio = summary.max_ratio.map(round12);
    Ok(summary)
}
