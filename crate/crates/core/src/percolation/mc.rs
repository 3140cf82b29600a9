//! Deterministic parallel Monte Carlo over the hierarchical net.
//!
//! Each trial opens every link independently and asks a connectivity
//! question via union-find. Trial t draws from `trial_rng(master_seed, t)`
//! and walks the links in canonical (level, u) order — one uniform per link
//! — so a trial's outcome never depends on scheduling. Floating-point
//! accumulations are summed per fixed-size trial block and the block sums
//! are folded in index order, keeping every statistic bit-identical across
//! thread counts.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::rng::trial_rng;
use crate::topology::HierNet;

use super::union_find::UnionFind;

/// Trials per accumulation block.
pub const TRIAL_BLOCK: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PercolationError {
    #[error("link probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("at least one trial is required")]
    NoTrials,
}

/// A single-probability Monte Carlo run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PercConfig {
    pub p: f64,
    pub trials: u64,
    pub master_seed: u64,
}

impl PercConfig {
    pub fn new(p: f64, trials: u64, master_seed: u64) -> Result<Self, PercolationError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(PercolationError::ProbabilityOutOfRange(p));
        }
        if trials == 0 {
            return Err(PercolationError::NoTrials);
        }
        Ok(Self { p, trials, master_seed })
    }
}

/// A Bernoulli Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub std_error: f64,
}

impl MCEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        assert!(trials > 0 && successes <= trials);
        let estimate = successes as f64 / trials as f64;
        let std_error = (estimate * (1.0 - estimate) / trials as f64).sqrt();
        Self { trials, successes, estimate, std_error }
    }
}

/// Pair-connectivity estimate plus the mean largest-component fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairConnectivity {
    /// Fraction of sampled node pairs joined by open links; `trials` counts
    /// individual pair samples.
    pub pairs: MCEstimate,
    /// Largest connected component as a fraction of N, averaged over trials.
    pub mean_largest_component: f64,
}

/// Opens each link of `net` with probability `p_open`, consuming exactly one
/// uniform per link in canonical order, and merges endpoints of open links.
pub(crate) fn open_links(net: &HierNet, p_open: f64, rng: &mut impl Rng, uf: &mut UnionFind) {
    for link in net.links() {
        if rng.random::<f64>() < p_open {
            uf.union(link.u, link.v);
        }
    }
}

/// The border-connectivity outcome of one trial: true iff nodes 0 and N−1
/// end up in one component when links open with probability `p_open`.
pub(crate) fn trial_border_connected(
    net: &HierNet,
    p_open: f64,
    master_seed: u64,
    trial: u64,
) -> bool {
    let mut rng = trial_rng(master_seed, trial);
    let mut uf = UnionFind::new(net.n_nodes());
    open_links(net, p_open, &mut rng, &mut uf);
    uf.connected(0, net.n_nodes() - 1)
}

/// Estimates the probability that the border nodes 0 and N−1 are joined by a
/// path of open links.
///
/// On a full hierarchy (N = 2^(K−1) + 1) the estimate converges on the
/// recursion value P_{K−1}, which is exact for border connectivity.
pub fn mc_border_connectivity(net: &HierNet, cfg: &PercConfig) -> MCEstimate {
    assert!(net.n_nodes() >= 2);
    let successes = (0..cfg.trials)
        .into_par_iter()
        .filter(|&trial| trial_border_connected(net, cfg.p, cfg.master_seed, trial))
        .count() as u64;
    MCEstimate::from_counts(successes, cfg.trials)
}

/// Estimates connectivity between uniformly sampled node pairs and the mean
/// largest-component fraction.
///
/// Per trial the links are opened first (canonical draw order), then
/// `sample_pairs` ordered distinct pairs are drawn with two uniforms each.
pub fn mc_pair_connectivity(
    net: &HierNet,
    cfg: &PercConfig,
    sample_pairs: u32,
) -> PairConnectivity {
    assert!(net.n_nodes() >= 2);
    assert!(sample_pairs >= 1);
    let n = net.n_nodes();
    let blocks = cfg.trials.div_ceil(TRIAL_BLOCK);

    let block_stats: Vec<(u64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let lo = block * TRIAL_BLOCK;
            let hi = (lo + TRIAL_BLOCK).min(cfg.trials);
            let mut connected_pairs = 0u64;
            let mut largest_sum = 0.0f64;
            for trial in lo..hi {
                let mut rng = trial_rng(cfg.master_seed, trial);
                let mut uf = UnionFind::new(n);
                open_links(net, cfg.p, &mut rng, &mut uf);
                for _ in 0..sample_pairs {
                    let u = rng.random_range(0..n);
                    let shifted = rng.random_range(0..n - 1);
                    let v = if shifted >= u { shifted + 1 } else { shifted };
                    if uf.connected(u, v) {
                        connected_pairs += 1;
                    }
                }
                largest_sum += uf.largest_component() as f64 / n as f64;
            }
            (connected_pairs, largest_sum)
        })
        .collect();

    let mut connected_pairs = 0u64;
    let mut largest_sum = 0.0f64;
    for (pairs, largest) in block_stats {
        connected_pairs += pairs;
        largest_sum += largest;
    }
    PairConnectivity {
        pairs: MCEstimate::from_counts(connected_pairs, cfg.trials * u64::from(sample_pairs)),
        mean_largest_component: largest_sum / cfg.trials as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percolation::recursion_iterate;

    #[test]
    fn border_connectivity_trivial_probabilities() {
        let net = HierNet::build(3, 2).unwrap();
        let sure = mc_border_connectivity(&net, &PercConfig::new(1.0, 100, 1).unwrap());
        assert_eq!(sure.estimate, 1.0);
        let never = mc_border_connectivity(&net, &PercConfig::new(0.0, 100, 1).unwrap());
        assert_eq!(never.estimate, 0.0);
    }

    #[test]
    fn border_connectivity_matches_recursion() {
        let net = HierNet::build(3, 2).unwrap();
        let cfg = PercConfig::new(0.6, 1_000_000, 0xFEED).unwrap();
        let est = mc_border_connectivity(&net, &cfg);
        // P_1(0.6) = 0.744; 1e6 trials put 3 sigma at 0.0013.
        assert!((est.estimate - 0.744).abs() < 0.0013, "estimate {}", est.estimate);

        let net = HierNet::build(9, 4).unwrap();
        let cfg = PercConfig::new(0.3, 200_000, 0xBEEF).unwrap();
        let est = mc_border_connectivity(&net, &cfg);
        let prediction = recursion_iterate(0.3, 3).last();
        assert!(
            (est.estimate - prediction).abs() < 4.0 * est.std_error,
            "estimate {} vs prediction {prediction}",
            est.estimate
        );
    }

    #[test]
    fn border_connectivity_is_thread_count_invariant() {
        let net = HierNet::build(17, 5).unwrap();
        let cfg = PercConfig::new(0.45, 20_000, 77).unwrap();
        let default_pool = mc_border_connectivity(&net, &cfg);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| mc_border_connectivity(&net, &cfg));
        let two = rayon::ThreadPoolBuilder::new()
            .num_threads(2)
            .build()
            .unwrap()
            .install(|| mc_border_connectivity(&net, &cfg));
        assert_eq!(default_pool, single);
        assert_eq!(default_pool, two);
    }

    #[test]
    fn pair_connectivity_extremes() {
        let net = HierNet::build(9, 4).unwrap();
        let all = mc_pair_connectivity(&net, &PercConfig::new(1.0, 500, 3).unwrap(), 4);
        assert_eq!(all.pairs.estimate, 1.0);
        assert_eq!(all.mean_largest_component, 1.0);
        let none = mc_pair_connectivity(&net, &PercConfig::new(0.0, 500, 3).unwrap(), 4);
        assert_eq!(none.pairs.estimate, 0.0);
        assert!((none.mean_largest_component - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn pair_connectivity_is_thread_count_invariant() {
        let net = HierNet::build(33, 6).unwrap();
        let cfg = PercConfig::new(0.55, 6_000, 13).unwrap();
        let a = mc_pair_connectivity(&net, &cfg, 8);
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| mc_pair_connectivity(&net, &cfg, 8));
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        assert_eq!(
            PercConfig::new(1.5, 10, 0),
            Err(PercolationError::ProbabilityOutOfRange(1.5))
        );
        assert_eq!(PercConfig::new(0.5, 0, 0), Err(PercolationError::NoTrials));
    }

    #[test]
    fn estimate_invariants() {
        let est = MCEstimate::from_counts(250, 1000);
        assert_eq!(est.estimate, 0.25);
        assert!((est.std_error - (0.25_f64 * 0.75 / 1000.0).sqrt()).abs() < 1e-15);
    }
}
