//! Entanglement percolation on hierarchical networks built over a 1D chain.
//!
//! A chain of nodes shares partially entangled qubit pairs between
//! neighbors. Entanglement swapping at interior nodes stacks levels of
//! non-local links over the chain, turning a 1D topology — whose classical
//! percolation threshold is 1 — into a hierarchy that connects its borders
//! with probability 1 for any link-conversion probability ≥ 1/2. The crates
//! here cover the Schmidt-pair algebra behind that construction, the
//! hierarchy and its swap schedule, analytic recursions with their Monte
//! Carlo counterparts, and state-tracked protocol runs with distillation
//! accounting.

pub mod percolation;
pub mod protocol;
pub mod qstate;
pub mod report;
pub mod rng;
pub mod topology;

pub use percolation::{
    classical_chain_prob, concurrence_iterate, fixed_point, iterated_limit,
    mc_border_connectivity, mc_pair_connectivity, recursion_iterate, recursion_limit_below,
    transition_point, ChainBaseline, ConcurrenceTrace, FixedPointResult, MCEstimate,
    PairConnectivity, PercConfig, PercolationError, RecursionTrace, Regime, UnionFind,
};
pub use protocol::{
    distillation_plan, enumerate_level_distribution, run_chain_protocol,
    run_chain_protocol_on, sample_level_state, BranchDistribution, DistillationPlan,
    LevelStats, LinkState, ProtocolError, ProtocolMode, ProtocolStats, WeightedState,
};
pub use qstate::{
    distill_step, distill_until, swap, BellOutcome, ConversionOperators, DistillationStalled,
    PurePair, QStateError, SwapBranch, SwapDistribution, WernerFidelity, ALGEBRA_TOL,
};
pub use topology::{
    required_pairs_for_full_hierarchy, resource_report, HierNet, Link, ResourceReport,
    SwapSchedule, SwapStep, TopologyError,
};

/// `git describe` of the sources this library was built from.
pub fn git_describe() -> &'static str {
    env!("PERCQ_GIT_DESCRIBE")
}
