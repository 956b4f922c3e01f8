//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::process::ExitCode;

use aggdp::aggregate::{apply_h, solve_by_triple_iteration, solve_r_star};
use aggdp::aggregation::{hard_aggregation, soft_aggregation};
use aggdp::bound::{audit, envelope_gaps, epsilon_of};
use aggdp::generators::{counterexample, random_instance, random_mdp, RandomMdpSpec};
use aggdp::linalg::sup_distance;
use aggdp::mdp::value_iteration;
use aggdp::suite::{run_suite, SuiteConfig};
use aggdp::{Action, DiscountedMdp, Transition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALPHA: f64 = 0.9;
const TOL: f64 = 1e-10;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn counterexample_reproduction() -> Outcome {
    let (mdp, arch) = counterexample(ALPHA, 0.0).map_err(|e| e.to_string())?;
    let j_star = value_iteration(&mdp, &[0.0, 0.0], TOL)
        .map_err(|e| e.to_string())?
        .value;
    ensure(
        sup_distance(&j_star, &[0.0, 10.0]) <= 1e-9,
        format!("J* = {j_star:?}"),
    )?;
    let sol = solve_r_star(&mdp, &arch, TOL).map_err(|e| e.to_string())?;
    let expected_r = [0.9 / 0.19, 1.0 / 0.19];
    ensure(
        sup_distance(&sol.r_star, &expected_r) <= 1e-8,
        format!("r* = {:?}", sol.r_star),
    )?;
    let a = audit(&mdp, &arch, TOL).map_err(|e| e.to_string())?;
    let expected_error = 1.0 / (1.0 - ALPHA * ALPHA);
    ensure(a.epsilon == 0.0, format!("epsilon = {}", a.epsilon))?;
    ensure(a.bound == 0.0, format!("bound = {}", a.bound))?;
    ensure(
        (a.actual_error - expected_error).abs() <= 1e-8,
        format!("actual_error = {}", a.actual_error),
    )?;
    ensure(!a.condition_holds, "condition reported as holding")?;
    ensure(!a.bound_satisfied, "bound reported as satisfied")?;
    Ok(format!(
        "r* = ({:.9}, {:.9}), actual_error = {:.9}, eps = 0, condition violated",
        sol.r_star[0], sol.r_star[1], a.actual_error
    ))
}

fn delta_sweep() -> Outcome {
    let run = |delta: f64| {
        let (mdp, arch) = counterexample(ALPHA, delta).map_err(|e| e.to_string())?;
        audit(&mdp, &arch, TOL).map_err(|e| e.to_string())
    };
    let half = run(0.5)?;
    ensure(
        (half.epsilon - 10.0).abs() <= 1e-8
            && (half.bound - 100.0).abs() <= 1e-7
            && (half.actual_error - 5.0).abs() <= 1e-8
            && half.bound_satisfied,
        format!("delta 0.5: {half:?}"),
    )?;
    let one = run(1.0)?;
    ensure(
        one.actual_error <= 1e-8,
        format!("delta 1: error {}", one.actual_error),
    )?;
    let mut worst_ratio: f64 = 0.0;
    for k in 1..=10 {
        let delta = k as f64 / 10.0;
        let a = run(delta)?;
        ensure(
            a.condition_holds && a.bound_satisfied,
            format!("delta {delta}: error {} bound {}", a.actual_error, a.bound),
        )?;
        if a.bound > 0.0 {
            worst_ratio = worst_ratio.max(a.actual_error / a.bound);
        }
    }
    Ok(format!(
        "delta 0.5 -> (eps 10, bound 100, error 5); delta 0.1..1.0 all within bound (max ratio {worst_ratio:.3})"
    ))
}

fn randomized_proposition() -> Outcome {
    let summary = run_suite(&SuiteConfig {
        count: 200,
        seed: 20_190_601,
        max_n: 20,
        tol: TOL,
        allow_violations: false,
    })
    .map_err(|e| e.to_string())?;
    ensure(
        summary.checked == 200 && summary.passed == 200 && summary.violations.is_empty(),
        format!("{summary:?}"),
    )?;
    Ok(format!(
        "{}/{} within eps/(1-alpha) + 1e-7, max ratio {:?}",
        summary.passed, summary.count, summary.max_ratio
    ))
}

fn operator_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_slack = f64::NEG_INFINITY;
    for k in 0..100u64 {
        let (mdp, arch) = random_instance(1000 + k, 20, k % 2 == 0).map_err(|e| e.to_string())?;
        let m = arch.num_aggregate();
        let low: Vec<f64> = (0..m).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let high: Vec<f64> = low.iter().map(|v| v + rng.gen_range(0.0..20.0)).collect();
        let other: Vec<f64> = (0..m).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let h_low = apply_h(&mdp, &arch, &low).map_err(|e| e.to_string())?;
        let h_high = apply_h(&mdp, &arch, &high).map_err(|e| e.to_string())?;
        let h_other = apply_h(&mdp, &arch, &other).map_err(|e| e.to_string())?;
        ensure(
            h_high.iter().zip(&h_low).all(|(h, l)| h >= l),
            format!("monotonicity fails on tuple {k}"),
        )?;
        let lhs = sup_distance(&h_low, &h_other);
        let rhs = mdp.discount() * sup_distance(&low, &other);
        ensure(
            lhs <= rhs + 1e-12,
            format!("contraction fails on tuple {k}: {lhs} > {rhs}"),
        )?;
        worst_slack = worst_slack.max(lhs - rhs);
    }
    Ok(format!(
        "100 tuples monotone; max (|Hr-Hr'| - alpha|r-r'|) = {worst_slack:.3e}"
    ))
}

fn envelope_oracle() -> Outcome {
    let mut worst: f64 = f64::NEG_INFINITY;
    for k in 0..50u64 {
        let (mdp, arch) = random_instance(5000 + k, 20, true).map_err(|e| e.to_string())?;
        ensure(
            arch.check_condition().holds,
            "generator broke the condition",
        )?;
        let j_star = value_iteration(&mdp, &vec![0.0; mdp.num_states()], TOL)
            .map_err(|e| e.to_string())?
            .value;
        let (upper, lower) = envelope_gaps(&mdp, &arch, &j_star).map_err(|e| e.to_string())?;
        ensure(
            upper <= 1e-9 && lower <= 1e-9,
            format!("instance {k}: H r_up - r_up = {upper}, r_low - H r_low = {lower}"),
        )?;
        worst = worst.max(upper).max(lower);
    }
    Ok(format!("50 instances, worst envelope excess {worst:.3e}"))
}

fn cross_solver() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..50u64 {
        let (mdp, arch) = random_instance(9000 + k, 20, k % 4 != 0).map_err(|e| e.to_string())?;
        let a = solve_r_star(&mdp, &arch, TOL).map_err(|e| e.to_string())?;
        let b = solve_by_triple_iteration(&mdp, &arch, TOL).map_err(|e| e.to_string())?;
        worst = worst.max(sup_distance(&a.r_star, &b.r_star));
    }
    ensure(worst <= 1e-7, format!("max discrepancy {worst}"))?;
    Ok(format!(
        "50 instances, max |r*_H - r*_triple| = {worst:.3e}"
    ))
}

/// Doubles every state of `base`: copies `i` and `i + n` share costs and
/// successor distributions over the pair `{j, j + n}`, each copy splitting
/// mass between the twins with its own random weight. Both copies then have
/// the same optimal cost.
fn duplicated(base: &DiscountedMdp, seed: u64) -> DiscountedMdp {
    let n = base.num_states();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(2 * n);
    for _copy in 0..2 {
        for i in 0..n {
            let actions = base
                .actions(i)
                .iter()
                .map(|a| {
                    let mut transitions = Vec::new();
                    for t in &a.transitions {
                        let w: f64 = rng.gen_range(0.1..0.9);
                        transitions.push(Transition::new(t.next, t.prob * w, t.cost));
                        transitions.push(Transition::new(t.next + n, t.prob * (1.0 - w), t.cost));
                    }
                    Action::new(a.label.clone(), transitions)
                })
                .collect();
            states.push(actions);
        }
    }
    DiscountedMdp::new(base.discount(), states).expect("valid duplicate")
}

fn exact_aggregation() -> Outcome {
    let mut worst_eps: f64 = 0.0;
    let mut worst_err: f64 = 0.0;
    for k in 0..20u64 {
        let n = 3 + (k as usize % 8);
        let base = random_mdp(&RandomMdpSpec {
            n,
            actions_per_state: 1 + (k as usize % 3),
            branching: n.min(3),
            cost_range: (0.0, 10.0),
            alpha: 0.85,
            seed: 300 + k,
        })
        .map_err(|e| e.to_string())?;
        let mdp = duplicated(&base, k);
        let partition: Vec<Vec<usize>> = (0..n).map(|i| vec![i, i + n]).collect();
        let arch = hard_aggregation(2 * n, &partition, None).map_err(|e| e.to_string())?;
        let a = audit(&mdp, &arch, TOL).map_err(|e| e.to_string())?;
        ensure(
            a.epsilon <= 1e-9 && a.actual_error <= 1e-7,
            format!("instance {k}: eps {} error {}", a.epsilon, a.actual_error),
        )?;
        worst_eps = worst_eps.max(a.epsilon);
        worst_err = worst_err.max(a.actual_error);
    }
    Ok(format!(
        "20 duplicated-state instances, max eps {worst_eps:.3e}, max error {worst_err:.3e}"
    ))
}

fn support_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..50u64 {
        let (mdp, arch) = random_instance(7000 + k, 20, true).map_err(|e| e.to_string())?;
        let j_star = value_iteration(&mdp, &vec![0.0; mdp.num_states()], TOL)
            .map_err(|e| e.to_string())?
            .value;
        let reweighted: Vec<Vec<f64>> = arch
            .dense_aggregation()
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|w| w * rng.gen_range(0.01..100.0))
                    .collect()
            })
            .collect();
        let other = soft_aggregation(&reweighted, &arch.dense_disaggregation())
            .map_err(|e| e.to_string())?;
        let before = epsilon_of(&arch, &j_star).map_err(|e| e.to_string())?;
        let after = epsilon_of(&other, &j_star).map_err(|e| e.to_string())?;
        ensure(
            before.to_bits() == after.to_bits(),
            format!("instance {k}: {before} vs {after}"),
        )?;
    }
    Ok("50 re-weighted architectures, eps bitwise identical".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("counterexample reproduction", counterexample_reproduction),
        ("delta sweep", delta_sweep),
        ("randomized bound suite", randomized_proposition),
        ("operator monotonicity and contraction", operator_properties),
        ("envelope oracle", envelope_oracle),
        ("cross-solver agreement", cross_solver),
        ("exact aggregation", exact_aggregation),
        ("epsilon support invariance", support_invariance),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  {}. {name}: {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {}. {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
