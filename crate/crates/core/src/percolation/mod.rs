//! Analytic recursions and Monte Carlo percolation on the hierarchical net.
//!
//! The border-connectivity probability across a span of 2^k edges obeys
//! P_{k+1} = p + (1 − p)·P_k² with P₀ = p: the span is joined either by its
//! own top-level link or by both half-spans, whose link sets are disjoint.
//! Below p = 1/2 the iteration settles at p/(1 − p) < 1; from p = 1/2 on it
//! climbs to 1, which makes 1/2 the transition point of the hierarchy. The
//! concurrence-driven variant adds a per-level damping α and loses the
//! sub-unit transition entirely.

mod mc;
mod union_find;

pub use mc::{
    mc_border_connectivity, mc_pair_connectivity, MCEstimate, PairConnectivity, PercConfig,
    PercolationError, TRIAL_BLOCK,
};
pub(crate) use mc::trial_border_connected;
pub use union_find::UnionFind;

use serde::Serialize;

/// The iterates P₀..P_k of the border recursion at link probability `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursionTrace {
    pub p: f64,
    values: Vec<f64>,
}

impl RecursionTrace {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// Iterates P_{k+1} = p + (1 − p)·P_k² from P₀ = p, inclusive of k_max.
pub fn recursion_iterate(p: f64, k_max: usize) -> RecursionTrace {
    assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1], got {p}");
    let mut values = Vec::with_capacity(k_max + 1);
    let mut x = p;
    values.push(x);
    for _ in 0..k_max {
        x = p + (1.0 - p) * x * x;
        values.push(x);
    }
    RecursionTrace { p, values }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

/// The infinite-depth limit of the border recursion and its phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointResult {
    pub p: f64,
    pub p_infinity: f64,
    pub regime: Regime,
}

/// Closed-form limit of the recursion: p/(1 − p) below 1/2, else 1. The
/// regime is classified by comparing `p` with 1/2 on the input itself;
/// `tol` is the convergence budget callers should use when cross-checking
/// against [`iterated_limit`].
pub fn fixed_point(p: f64, tol: f64) -> FixedPointResult {
    assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1], got {p}");
    assert!(tol > 0.0, "tol must be positive");
    let (p_infinity, regime) = if p < 0.5 {
        (p / (1.0 - p), Regime::Subcritical)
    } else if p == 0.5 {
        (1.0, Regime::Critical)
    } else {
        (1.0, Regime::Supercritical)
    };
    FixedPointResult { p, p_infinity, regime }
}

/// Runs the recursion until successive iterates differ by less than `tol`
/// (or `max_iter` is hit) and returns the final iterate.
pub fn iterated_limit(p: f64, tol: f64, max_iter: usize) -> f64 {
    assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1], got {p}");
    let mut x = p;
    for _ in 0..max_iter {
        let next = p + (1.0 - p) * x * x;
        let done = (next - x).abs() < tol;
        x = next;
        if done {
            break;
        }
    }
    x
}

/// Whether the iterated limit of the recursion stays strictly below
/// `threshold`.
///
/// The iteration increases monotonically from P₀ = p, so its limit sits
/// below `threshold` exactly when the map steps downward there: p + (1 −
/// p)·T² < T keeps every iterate trapped under T, while ≥ means the limit
/// passes it. One map evaluation decides the predicate exactly.
pub fn recursion_limit_below(p: f64, threshold: f64) -> bool {
    assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1], got {p}");
    assert!((0.0..1.0).contains(&threshold));
    p + (1.0 - p) * threshold * threshold < threshold
}

/// Locates the percolation transition of the border recursion by bisecting
/// [`recursion_limit_below`] with threshold 1 − tol over p ∈ [0, 1].
///
/// The predicate flips where p/(1 − p) crosses the threshold, i.e. within
/// tol/4 of 1/2, and the bracket is narrowed to tol/2, so the result is
/// within `tol` of 1/2.
pub fn transition_point(tol: f64) -> f64 {
    assert!((1e-9..0.5).contains(&tol), "tol out of supported range: {tol}");
    let threshold = 1.0 - tol;
    let mut lo = 0.0_f64; // limit 0: below threshold
    let mut hi = 1.0_f64; // limit 1: above threshold
    while hi - lo > 0.5 * tol {
        let mid = 0.5 * (lo + hi);
        if recursion_limit_below(mid, threshold) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The iterates of the concurrence-damped recursion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcurrenceTrace {
    pub c: f64,
    pub alpha: f64,
    values: Vec<f64>,
}

impl ConcurrenceTrace {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// Iterates P_{k+1} = α^{k+1}·C + (1 − α^{k+1}·C)·P_k² from P₀ = C.
///
/// The additive term decays away with k, leaving pure squaring, so every
/// C < 1 collapses: only perfect concurrence percolates on this ledger.
pub fn concurrence_iterate(c: f64, alpha: f64, k_max: usize) -> ConcurrenceTrace {
    assert!((0.0..=1.0).contains(&c), "concurrence must lie in [0, 1], got {c}");
    assert!(
        alpha > 0.0 && alpha <= 0.5,
        "alpha must lie in (0, 1/2], got {alpha}"
    );
    let mut values = Vec::with_capacity(k_max + 1);
    let mut x = c;
    let mut damping = 1.0;
    values.push(x);
    for _ in 0..k_max {
        damping *= alpha;
        let feed = damping * c;
        x = feed + (1.0 - feed) * x * x;
        values.push(x);
    }
    ConcurrenceTrace { c, alpha, values }
}

/// End-to-end connection probability of a classical N-node chain with K
/// parallel pairs per edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainBaseline {
    /// (1 − (1 − p)^K)^(N−1): parallel links per edge, edges in series.
    pub exact: f64,
    /// (p + p(1 − p)^K)^(N−1): the additive per-edge expression, kept for
    /// side-by-side comparison; for K = 1 it disagrees with `exact`.
    pub variant: f64,
}

pub fn classical_chain_prob(p: f64, k_pairs: u32, n_nodes: usize) -> ChainBaseline {
    assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1], got {p}");
    assert!(k_pairs >= 1 && n_nodes >= 2);
    let edges = (n_nodes - 1) as i32;
    let miss = (1.0 - p).powi(k_pairs as i32);
    ChainBaseline {
        exact: (1.0 - miss).powi(edges),
        variant: (p + p * miss).powi(edges),
    }
}
