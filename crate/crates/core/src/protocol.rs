//! State-level simulation of the hierarchical construction.
//!
//! The recursion treats every link as opening with the base pair's singlet
//! conversion probability; that holds for one swap but not for nested ones,
//! where the Ψ-branch states drift away from the base pair and the average
//! conversion probability decays. This module tracks the actual Schmidt
//! states through the swap tree — exactly (branch enumeration) or by
//! sampling — runs the chain protocol in both the idealized and the
//! state-tracked regime, and prices the distillation needed to undo the
//! decay.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::percolation::{PercConfig, UnionFind, TRIAL_BLOCK};
use crate::qstate::{
    distill_step, swap, DistillationStalled, PurePair, ALGEBRA_TOL,
};
use crate::rng::trial_rng;
use crate::topology::{required_pairs_for_full_hierarchy, HierNet, TopologyError};

/// Exact enumeration budget: above this level the merged branch count (and
/// the quadratic combine cost) stops being desk-scale.
pub const ENUMERATION_MAX_LEVEL: u32 = 12;

/// Distillation rounds allowed before a plan is declared stalled.
pub const MAX_DISTILL_ROUNDS: usize = 64;

/// Schmidt pairs closer than this merge into one enumeration branch.
const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("exact enumeration at level {level} exceeds the budget (max {max}); draw from sample_level_state instead")]
    EnumerationBudget { level: u32, max: u32 },
    #[error("base concurrence {0} is below 1/2, outside the distillable working regime")]
    BelowDistillableRegime(f64),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Distillation(#[from] DistillationStalled),
    #[error("distillation pair count overflows a 64-bit budget")]
    PlanOverflow,
}

/// A link during a protocol run: still carrying a pure pair, converted into
/// a perfect link, or vanished in a failed conversion.
///
/// `Perfect` is the same physical state as `Pure` of the maximally entangled
/// pair; it exists so a resolved link needs no coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkState {
    Pure(PurePair),
    Perfect,
    Lost,
}

impl LinkState {
    pub fn as_pure(&self) -> Option<PurePair> {
        match self {
            LinkState::Pure(pair) => Some(*pair),
            LinkState::Perfect => Some(PurePair::perfect()),
            LinkState::Lost => None,
        }
    }

    /// Attempts conversion of a pending pure state; resolved states pass
    /// through unchanged.
    pub fn resolve(self, rng: &mut impl Rng) -> LinkState {
        match self {
            LinkState::Pure(pair) => match pair.attempt_conversion(rng) {
                Some(_) => LinkState::Perfect,
                None => LinkState::Lost,
            },
            resolved => resolved,
        }
    }

    /// Whether the link is a usable perfect link.
    pub fn is_open(&self) -> bool {
        match self {
            LinkState::Perfect => true,
            LinkState::Pure(pair) => *pair == PurePair::perfect(),
            LinkState::Lost => false,
        }
    }
}

/// One weighted pure state of a branch distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedState {
    pub probability: f64,
    pub state: PurePair,
}

/// A finite mixture of pure states, kept sorted by λ₁ with near-identical
/// states merged. Probabilities sum to 1 up to accumulation error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchDistribution {
    branches: Vec<WeightedState>,
}

impl BranchDistribution {
    fn singleton(state: PurePair) -> Self {
        Self { branches: vec![WeightedState { probability: 1.0, state }] }
    }

    fn push_merged(&mut self, state: PurePair, probability: f64) {
        let key = state.lambda1();
        let idx = self.branches.partition_point(|b| b.state.lambda1() < key);
        for neighbor in [idx.wrapping_sub(1), idx] {
            if let Some(branch) = self.branches.get_mut(neighbor) {
                if (branch.state.lambda1() - key).abs() <= MERGE_TOL {
                    branch.probability += probability;
                    return;
                }
            }
        }
        self.branches.insert(idx, WeightedState { probability, state });
    }

    pub fn branches(&self) -> &[WeightedState] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    pub fn mean_scp(&self) -> f64 {
        self.branches.iter().map(|b| b.probability * b.state.scp()).sum()
    }

    pub fn mean_concurrence(&self) -> f64 {
        self.branches
            .iter()
            .map(|b| b.probability * b.state.concurrence())
            .sum()
    }
}

/// Exact distribution of the final pure state of a level-`level` link built
/// by recursive swapping from iid copies of `base`.
///
/// Level ℓ has 4^(2^ℓ − 1) raw Bell-outcome combinations, but merging
/// identical Schmidt pairs keeps the support near 2^ℓ states, so exact
/// enumeration stays cheap within the budget.
pub fn enumerate_level_distribution(
    base: PurePair,
    level: u32,
) -> Result<BranchDistribution, ProtocolError> {
    if level > ENUMERATION_MAX_LEVEL {
        return Err(ProtocolError::EnumerationBudget { level, max: ENUMERATION_MAX_LEVEL });
    }
    let mut dist = BranchDistribution::singleton(base);
    for _ in 0..level {
        let mut next = BranchDistribution { branches: Vec::new() };
        for left in dist.branches() {
            for right in dist.branches() {
                let weight = left.probability * right.probability;
                for branch in swap(left.state, right.state).branches() {
                    let p = weight * branch.probability;
                    if p > 0.0 {
                        next.push_merged(branch.state, p);
                    }
                }
            }
        }
        dist = next;
    }
    Ok(dist)
}

/// One draw of the final state of a level-`level` link: a Bell outcome is
/// sampled at every internal swap node, left subtree before right before the
/// joining node.
pub fn sample_level_state(base: PurePair, level: u32, rng: &mut impl Rng) -> PurePair {
    if level == 0 {
        return base;
    }
    let left = sample_level_state(base, level - 1, rng);
    let right = sample_level_state(base, level - 1, rng);
    swap(left, right).sample(rng).state
}

/// How link openness is decided in [`run_chain_protocol`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolMode {
    /// Every link opens with the base pair's SCP, the recursion's implicit
    /// assumption; reproduces plain border-connectivity Monte Carlo.
    IdealScp,
    /// Each link's state is sampled through its swap tree, then converted.
    StateTracked,
}

/// Per-level average state quality observed during a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelStats {
    pub level: u32,
    pub mean_scp: f64,
    pub mean_concurrence: f64,
}

/// Aggregate results of a chain-protocol run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolStats {
    pub trials: u64,
    pub mean_scp: f64,
    pub mean_concurrence: f64,
    pub border_connected_fraction: f64,
    pub per_level: Vec<LevelStats>,
}

/// Runs the chain protocol on the hierarchy built from `(n_nodes, k_pairs)`.
///
/// `cfg` supplies the trial count and master seed; the link-open probability
/// is governed by `mode` and `base`, not by `cfg.p`. In ideal mode each
/// trial consumes one uniform per link in canonical order, the same draw
/// sequence as `mc_border_connectivity`, so equal seeds give identical
/// success counts when `cfg.p` equals the base SCP.
pub fn run_chain_protocol(
    n_nodes: usize,
    k_pairs: u32,
    base: PurePair,
    mode: ProtocolMode,
    cfg: &PercConfig,
) -> Result<ProtocolStats, ProtocolError> {
    let net = HierNet::build(n_nodes, k_pairs)?;
    Ok(run_chain_protocol_on(&net, base, mode, cfg))
}

/// [`run_chain_protocol`] over a pre-built network.
pub fn run_chain_protocol_on(
    net: &HierNet,
    base: PurePair,
    mode: ProtocolMode,
    cfg: &PercConfig,
) -> ProtocolStats {
    match mode {
        ProtocolMode::IdealScp => run_ideal(net, base, cfg),
        ProtocolMode::StateTracked => run_state_tracked(net, base, cfg),
    }
}

fn run_ideal(net: &HierNet, base: PurePair, cfg: &PercConfig) -> ProtocolStats {
    let p_open = base.scp();
    let successes = (0..cfg.trials)
        .into_par_iter()
        .filter(|&trial| {
            crate::percolation::trial_border_connected(net, p_open, cfg.master_seed, trial)
        })
        .count() as u64;
    let levels = 0..=net.max_level();
    ProtocolStats {
        trials: cfg.trials,
        mean_scp: base.scp(),
        mean_concurrence: base.concurrence(),
        border_connected_fraction: successes as f64 / cfg.trials as f64,
        per_level: levels
            .map(|level| LevelStats {
                level,
                mean_scp: base.scp(),
                mean_concurrence: base.concurrence(),
            })
            .collect(),
    }
}

fn run_state_tracked(net: &HierNet, base: PurePair, cfg: &PercConfig) -> ProtocolStats {
    let n = net.n_nodes();
    let n_levels = net.max_level() as usize + 1;
    let blocks = cfg.trials.div_ceil(TRIAL_BLOCK);

    struct BlockAccum {
        successes: u64,
        scp_sums: Vec<f64>,
        concurrence_sums: Vec<f64>,
    }

    let block_stats: Vec<BlockAccum> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let lo = block * TRIAL_BLOCK;
            let hi = (lo + TRIAL_BLOCK).min(cfg.trials);
            let mut acc = BlockAccum {
                successes: 0,
                scp_sums: vec![0.0; n_levels],
                concurrence_sums: vec![0.0; n_levels],
            };
            for trial in lo..hi {
                let mut rng = trial_rng(cfg.master_seed, trial);
                let mut uf = UnionFind::new(n);
                for link in net.links() {
                    let state = sample_level_state(base, link.level, &mut rng);
                    let level = link.level as usize;
                    acc.scp_sums[level] += state.scp();
                    acc.concurrence_sums[level] += state.concurrence();
                    if LinkState::Pure(state).resolve(&mut rng).is_open() {
                        uf.union(link.u, link.v);
                    }
                }
                if uf.connected(0, n - 1) {
                    acc.successes += 1;
                }
            }
            acc
        })
        .collect();

    let mut successes = 0u64;
    let mut scp_sums = vec![0.0f64; n_levels];
    let mut concurrence_sums = vec![0.0f64; n_levels];
    for block in block_stats {
        successes += block.successes;
        for (total, part) in scp_sums.iter_mut().zip(&block.scp_sums) {
            *total += part;
        }
        for (total, part) in concurrence_sums.iter_mut().zip(&block.concurrence_sums) {
            *total += part;
        }
    }

    let trials = cfg.trials as f64;
    let mut per_level = Vec::with_capacity(n_levels);
    let mut scp_grand = 0.0;
    let mut concurrence_grand = 0.0;
    let mut total_links = 0usize;
    for level in 0..n_levels {
        let count = net.links_at_level(level as u32).count();
        total_links += count;
        scp_grand += scp_sums[level];
        concurrence_grand += concurrence_sums[level];
        let samples = trials * count as f64;
        per_level.push(LevelStats {
            level: level as u32,
            mean_scp: if count > 0 { scp_sums[level] / samples } else { 0.0 },
            mean_concurrence: if count > 0 { concurrence_sums[level] / samples } else { 0.0 },
        });
    }
    let grand_samples = trials * total_links as f64;

    ProtocolStats {
        trials: cfg.trials,
        mean_scp: scp_grand / grand_samples,
        mean_concurrence: concurrence_grand / grand_samples,
        border_connected_fraction: successes as f64 / trials,
        per_level,
    }
}

/// Resource plan for restoring post-swap fidelity by iterated distillation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistillationPlan {
    /// Distillation rounds needed to climb from the post-swap fidelity back
    /// above the pre-swap fidelity.
    pub iterations: u64,
    /// Flat per-round success probability of the accounting model.
    pub success_probability_model: f64,
    /// iterations / success probability, rounded up: raw pairs consumed per
    /// distilled link.
    pub pairs_per_distilled_link: u64,
    /// 2^(K−2) · pairs^(K−1) over the full hierarchy (0 when K = 1: a bare
    /// chain swaps nothing).
    pub total_initial_pairs: u64,
    /// N⁶, the polynomial-scaling comparator.
    pub n6_comparator: f64,
    /// The fidelity iterates F₀..F_i driving the round count.
    pub fidelity_trace: Vec<f64>,
}

/// Prices distillation for a full hierarchy on `n_nodes` = 2^m + 1 nodes
/// built from copies of `base`, which must carry concurrence ≥ 1/2.
///
/// Only the Ψ-type swap branches are counted: the Φ branches of an
/// equal-pair swap are already maximally entangled and need no distillation.
pub fn distillation_plan(
    n_nodes: usize,
    base: PurePair,
) -> Result<DistillationPlan, ProtocolError> {
    let concurrence = base.concurrence();
    if concurrence < 0.5 - ALGEBRA_TOL {
        return Err(ProtocolError::BelowDistillableRegime(concurrence));
    }
    let k_pairs = required_pairs_for_full_hierarchy(n_nodes)?;

    let target = base.werner_fidelity().value();
    let post_swap = swap(base, base).branches()[0].state;
    let mut fidelity = post_swap.werner_fidelity();
    let mut fidelity_trace = vec![fidelity.value()];
    let mut iterations = 0u64;
    while fidelity.value() < target {
        if iterations as usize >= MAX_DISTILL_ROUNDS {
            return Err(ProtocolError::Distillation(DistillationStalled {
                target,
                iterations: MAX_DISTILL_ROUNDS,
                last: fidelity.value(),
            }));
        }
        fidelity = distill_step(fidelity);
        fidelity_trace.push(fidelity.value());
        iterations += 1;
    }

    let success_probability_model = 0.25;
    let pairs_per_distilled_link =
        (iterations as f64 / success_probability_model).ceil() as u64;
    let total_initial_pairs = if k_pairs == 1 {
        0
    } else {
        let mut total: u128 = 1 << (k_pairs - 2);
        for _ in 0..k_pairs - 1 {
            total = total
                .checked_mul(u128::from(pairs_per_distilled_link))
                .ok_or(ProtocolError::PlanOverflow)?;
        }
        u64::try_from(total).map_err(|_| ProtocolError::PlanOverflow)?
    };

    Ok(DistillationPlan {
        iterations,
        success_probability_model,
        pairs_per_distilled_link,
        total_initial_pairs,
        n6_comparator: (n_nodes as f64).powi(6),
        fidelity_trace,
    })
}
