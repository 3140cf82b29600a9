//! Acceptance suite: every release-gating behavior, one test per criterion,
//! each printing a PASS line with the measured numbers.
//!
//! Run with `cargo test -p percq-cli --test acceptance -- --nocapture`.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use percq_core::rng::derive_seed;
use percq_core::{
    classical_chain_prob, distill_step, distill_until, distillation_plan,
    enumerate_level_distribution, fixed_point, mc_border_connectivity, mc_pair_connectivity,
    recursion_iterate, resource_report, sample_level_state, swap, transition_point, HierNet,
    PercConfig, PurePair, Regime, WernerFidelity,
};
use percq_testkit::{bell_projection_swap, distill_rounds_rational};

fn random_pair(rng: &mut impl Rng) -> PurePair {
    PurePair::from_lambda2(rng.random::<f64>() * 0.5).unwrap()
}

fn half_concurrence_pair() -> PurePair {
    PurePair::from_lambda2(0.5 - 3.0_f64.sqrt() / 4.0).unwrap()
}

#[test]
fn criterion_01_transition_point() {
    let start = Instant::now();
    let p_t = transition_point(1e-6);
    let elapsed = start.elapsed();
    assert!((p_t - 0.5).abs() <= 1e-6, "p_t = {p_t}");
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 01 transition point: PASS (p_t = {p_t:.9}, err {:.2e}, {elapsed:?})",
        (p_t - 0.5).abs()
    );
}

#[test]
fn criterion_02_subcritical_limit() {
    let result = fixed_point(0.3, 1e-12);
    let closed_err = (result.p_infinity - 3.0 / 7.0).abs();
    assert!(closed_err <= 1e-12, "closed-form error {closed_err}");
    assert_eq!(result.regime, Regime::Subcritical);
    let iterated = recursion_iterate(0.3, 200).last();
    let iter_err = (result.p_infinity - iterated).abs();
    assert!(iter_err <= 1e-10, "iteration error {iter_err}");
    println!(
        "criterion 02 subcritical limit: PASS (P_inf = {}, closed err {closed_err:.2e}, 200-iter err {iter_err:.2e})",
        result.p_infinity
    );
}

#[test]
fn criterion_03_monte_carlo_vs_recursion() {
    let start = Instant::now();
    let trials = 1_000_000u64;
    let mut row = 0u64;
    for k_pairs in [3u32, 5, 9] {
        let n_nodes = (1usize << (k_pairs - 1)) + 1;
        let net = HierNet::build(n_nodes, k_pairs).unwrap();
        for p in [0.3, 0.5, 0.7] {
            let seed = derive_seed(0xACCE97, row);
            row += 1;
            let cfg = PercConfig::new(p, trials, seed).unwrap();
            let est = mc_border_connectivity(&net, &cfg);
            let prediction = recursion_iterate(p, (k_pairs - 1) as usize).last();
            let distance = (est.estimate - prediction).abs();
            assert!(
                distance <= 4.0 * est.std_error,
                "p = {p}, K = {k_pairs}: estimate {} vs prediction {prediction} ({} sigma)",
                est.estimate,
                distance / est.std_error
            );
            println!(
                "  (p = {p}, K = {k_pairs}, N = {n_nodes}): {} vs {prediction:.6} within {:.2} sigma",
                est.estimate,
                distance / est.std_error
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!("criterion 03 monte carlo vs recursion: PASS (9 configs x 1e6 trials in {elapsed:?})");
}

#[test]
fn criterion_04_classical_baseline_contrast() {
    let mut previous = f64::INFINITY;
    for n_nodes in 2..=120 {
        let chain = classical_chain_prob(0.9, 1, n_nodes).exact;
        assert!(chain < previous, "classical chain must decay monotonically");
        previous = chain;
    }
    let at_90 = classical_chain_prob(0.9, 1, 90).exact;
    assert!(at_90 < 1e-4, "classical chain at N = 90 is {at_90}");
    let hierarchical = fixed_point(0.9, 1e-12);
    assert_eq!(hierarchical.p_infinity, 1.0);
    assert_eq!(hierarchical.regime, Regime::Supercritical);
    println!(
        "criterion 04 classical baseline contrast: PASS (chain at N=90: {at_90:.3e}, hierarchy limit 1)"
    );
}

#[test]
fn criterion_05_swap_identities() {
    let mut rng = Pcg64::seed_from_u64(0x51A5);
    let mut worst_scp = 0.0f64;
    let mut worst_concurrence = 0.0f64;
    for _ in 0..1000 {
        let a = random_pair(&mut rng);
        let scp_gap = (swap(a, a).average_scp() - a.scp()).abs();
        let concurrence_gap = (a.swap_concurrence() - a.alpha() * a.concurrence()).abs();
        worst_scp = worst_scp.max(scp_gap);
        worst_concurrence = worst_concurrence.max(concurrence_gap);
    }
    assert!(worst_scp <= 1e-12, "p_swap = p violated by {worst_scp:.2e}");
    assert!(
        worst_concurrence <= 1e-12,
        "C_swap = alpha*C violated by {worst_concurrence:.2e}"
    );
    println!(
        "criterion 05 swap identities: PASS (worst p_swap gap {worst_scp:.2e}, worst C_swap gap {worst_concurrence:.2e})"
    );
}

#[test]
fn criterion_06_brute_force_oracle_equivalence() {
    let mut rng = Pcg64::seed_from_u64(0x0B5E55);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = random_pair(&mut rng);
        let b = random_pair(&mut rng);
        let distribution = swap(a, b);
        let oracle =
            bell_projection_swap((a.lambda1(), a.lambda2()), (b.lambda1(), b.lambda2()));
        for (branch, reference) in distribution.branches().iter().zip(oracle) {
            worst = worst.max((branch.probability - reference.probability).abs());
            if reference.probability > 1e-12 {
                worst = worst.max((branch.state.lambda1() - reference.lambda1).abs());
                worst = worst.max((branch.state.lambda2() - reference.lambda2).abs());
            }
        }
    }
    assert!(worst <= 1e-10, "worst oracle deviation {worst:.2e}");
    println!("criterion 06 brute-force oracle equivalence: PASS (worst deviation {worst:.2e})");
}

#[test]
fn criterion_07_scp_decay_under_repeated_swapping() {
    let base = PurePair::from_lambda2(0.25).unwrap();
    let dist = enumerate_level_distribution(base, 2).unwrap();
    let mean = dist.mean_scp();
    assert!((mean - 0.3125).abs() <= 1e-12, "enumerated mean {mean}");
    assert!(mean < 0.5, "decay below the base SCP is required");

    // Enumerated variance gives the sampling sigma for the 1e6-draw check.
    let variance: f64 = dist
        .branches()
        .iter()
        .map(|b| b.probability * (b.state.scp() - mean).powi(2))
        .sum();
    let draws = 1_000_000u64;
    let sigma = (variance / draws as f64).sqrt();

    let mut rng = Pcg64::seed_from_u64(0xDECA7);
    let mut sum = 0.0;
    for _ in 0..draws {
        sum += sample_level_state(base, 2, &mut rng).scp();
    }
    let sampled = sum / draws as f64;
    assert!(
        (sampled - mean).abs() <= 4.0 * sigma,
        "sampled {sampled} vs enumerated {mean} ({} sigma)",
        (sampled - mean).abs() / sigma
    );
    println!(
        "criterion 07 scp decay under swapping: PASS (enumerated {mean}, sampled {sampled:.6} within {:.2} sigma)",
        (sampled - mean).abs() / sigma
    );
}

#[test]
fn criterion_08_distillation() {
    let stepped = distill_step(WernerFidelity::new(0.75).unwrap()).value();
    let rational = 41.0 / 52.0;
    assert!(
        (stepped - rational).abs() <= 1e-15,
        "distill_step(3/4) = {stepped} vs 41/52"
    );

    // Post-swap fidelity of the concurrence-1/2 state, derived rather than
    // hard-coded: the formula gives exactly 4/7.
    let base = half_concurrence_pair();
    let f0 = swap(base, base).branches()[0].state.werner_fidelity();
    assert!((f0.value() - 4.0 / 7.0).abs() <= 1e-12, "derived F0 = {}", f0.value());

    let target = base.werner_fidelity().value();
    let rounds = distill_until(f0, target, 64).unwrap();
    assert!(rounds <= 10, "needed {rounds} rounds");
    assert_eq!(
        distill_rounds_rational(4, 7, 3, 4, 64),
        Some(rounds),
        "exact rational iteration disagrees with the float path"
    );

    // The published round count is eight; report how both candidate starting
    // fidelities compare (the printed F0 = 1/2 + 1/(4*sqrt(14)) differs from
    // the formula-derived 4/7 beyond rounding).
    let printed_f0 = WernerFidelity::new(0.5 + 1.0 / (4.0 * 14.0_f64.sqrt())).unwrap();
    let printed_rounds = distill_until(printed_f0, target, 64).unwrap();
    assert_eq!(rounds, 8, "derived F0 = 4/7 is the recorded ground truth");
    println!(
        "criterion 08 distillation: PASS (distill_step(3/4) = 41/52 exactly; F0 = 4/7 -> {rounds} rounds vs published 8; printed F0 {:.6} -> {printed_rounds} rounds)",
        printed_f0.value()
    );
}

#[test]
fn criterion_09_resource_accounting() {
    let report = resource_report(9, 4);
    assert_eq!(report.total_base_pairs, 32);
    assert_eq!(report.scaling_estimate, 36.0);

    let plan = distillation_plan(3, half_concurrence_pair()).unwrap();
    assert_eq!(plan.iterations, 8);
    assert_eq!(plan.pairs_per_distilled_link, 32);
    assert_eq!(plan.total_initial_pairs, 32);
    println!(
        "criterion 09 resource accounting: PASS (N=9: exact {} vs estimate {}; N=3 plan: {} pairs at {} iterations)",
        report.total_base_pairs, report.scaling_estimate, plan.pairs_per_distilled_link, plan.iterations
    );
}

#[test]
fn criterion_10_determinism_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let reference = run_sweep(dir.path(), "ref.csv", 0xD13E, 1);
    let wide = run_sweep(dir.path(), "wide.csv", 0xD13E, 4);
    let narrow = run_sweep(dir.path(), "narrow.csv", 0xD13E, 2);
    assert_eq!(reference, wide, "thread count changed the CSV bytes");
    assert_eq!(reference, narrow, "thread count changed the CSV bytes");
    let other_seed = run_sweep(dir.path(), "other.csv", 0xD13F, 2);
    assert_ne!(reference, other_seed, "seed is not reaching the engine");
    println!(
        "criterion 10 determinism: PASS ({} byte CSV identical across 1, 2 and 4 threads)",
        reference.len()
    );
}

fn run_sweep(dir: &Path, name: &str, seed: u64, threads: u32) -> Vec<u8> {
    let out = dir.join(name);
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_percq"))
        .args([
            "sweep", "--p-min", "0.3", "--p-max", "0.7", "--steps", "5", "--n-nodes", "17",
            "--trials", "50000",
        ])
        .args(["--seed", &seed.to_string()])
        .args(["--threads", &threads.to_string()])
        .arg("--out")
        .arg(&out)
        .status()
        .expect("failed to spawn percq");
    assert!(status.success());
    fs::read(&out).unwrap()
}

/// Qualitative large-scale contrast (not a numbered criterion): below the
/// transition, pair connectivity shrinks as the chain grows; above it, the
/// estimate is roughly size-independent at desk scale.
#[test]
fn supplementary_pair_connectivity_scaling() {
    let sizes = [257usize, 513, 1025];
    let estimate = |n_nodes: usize, p: f64| {
        let k = percq_core::required_pairs_for_full_hierarchy(n_nodes).unwrap();
        let net = HierNet::build(n_nodes, k).unwrap();
        let cfg = PercConfig::new(p, 4000, 0xFA1C).unwrap();
        mc_pair_connectivity(&net, &cfg, 16).pairs.estimate
    };

    let below: Vec<f64> = sizes.iter().map(|&n| estimate(n, 0.4)).collect();
    assert!(
        below[0] > below[1] && below[1] > below[2],
        "subcritical pair connectivity should fall with N: {below:?}"
    );

    let above: Vec<f64> = sizes.iter().map(|&n| estimate(n, 0.6)).collect();
    assert!(above[0] > below[0], "p = 0.6 must beat p = 0.4 at equal size");
    let spread = (above[0] - above[2]).abs();
    assert!(
        spread < 0.1 * above[0],
        "supercritical pair connectivity should be roughly N-independent: {above:?}"
    );
    println!(
        "supplementary pair connectivity: PASS (p=0.4 falls {below:?}; p=0.6 steady {above:?})"
    );
}
