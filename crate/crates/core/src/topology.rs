//! The hierarchical link network over an N-node 1D chain.
//!
//! Level 0 is the physical chain: links (i, i+1). Each higher level ℓ adds
//! non-local links of span 2^ℓ anchored at multiples of 2^ℓ, built by
//! entanglement swapping at the midpoint of two level-(ℓ−1) links. Levels are
//! right-truncated at the chain border: a link exists only when both
//! endpoints fall inside the chain, with no wrap-around.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("a chain needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("need at least one entangled pair per edge")]
    NoPairs,
    #[error("{0} nodes is not of the form 2^m + 1; build a truncated hierarchy with HierNet::build(n, k) instead")]
    NotFullHierarchySize(usize),
    #[error("invalid network text: {0}")]
    Parse(String),
    #[error("schedule step requires missing link (level {level}, {u}, {v})")]
    MissingScheduleInput { level: u32, u: usize, v: usize },
}

/// One entanglement link. Level-0 links join neighbors (v = u + 1); a level-ℓ
/// link (ℓ ≥ 1) spans v − u = 2^ℓ with u a multiple of 2^ℓ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Link {
    pub level: u32,
    pub u: usize,
    pub v: usize,
}

/// The hierarchical network: K levels of links (0..=K−1) over an N-node
/// chain, K entangled pairs per edge. Links are kept sorted by (level, u) —
/// the canonical order every Monte Carlo draw sequence follows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierNet {
    n_nodes: usize,
    k_pairs: u32,
    links: Vec<Link>,
}

impl HierNet {
    /// Builds the level-0 chain plus levels 1..K−1 of non-local links,
    /// truncating at the right border where N−1 is not a multiple of 2^ℓ.
    pub fn build(n_nodes: usize, k_pairs: u32) -> Result<Self, TopologyError> {
        if n_nodes < 2 {
            return Err(TopologyError::TooFewNodes(n_nodes));
        }
        if k_pairs < 1 {
            return Err(TopologyError::NoPairs);
        }
        let mut links = Vec::new();
        for u in 0..n_nodes - 1 {
            links.push(Link { level: 0, u, v: u + 1 });
        }
        for level in 1..k_pairs {
            let span = 1usize << level;
            let mut j = 0usize;
            // Right truncation: keep (j+1)*span <= N-1, never wrap.
            while (j + 1) * span < n_nodes {
                links.push(Link { level, u: j * span, v: (j + 1) * span });
                j += 1;
            }
        }
        Ok(Self { n_nodes, k_pairs, links })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn k_pairs(&self) -> u32 {
        self.k_pairs
    }

    /// Highest hierarchy level, K − 1 (levels near the border may be empty
    /// on truncated chains).
    pub fn max_level(&self) -> u32 {
        self.k_pairs - 1
    }

    /// All links in canonical (level, u) order.
    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn links_at_level(&self, level: u32) -> impl Iterator<Item = &Link> {
        self.links.iter().filter(move |l| l.level == level)
    }

    /// floor((N−1) / 2^ℓ), the link count at level ℓ.
    pub fn level_link_count(&self, level: u32) -> usize {
        (self.n_nodes - 1) >> level
    }

    /// The ordered swap schedule that builds every level ℓ ≥ 1 link from the
    /// two level-(ℓ−1) links meeting at its midpoint, lower levels first.
    pub fn swap_schedule(&self) -> SwapSchedule {
        let steps = self
            .links
            .iter()
            .filter(|link| link.level >= 1)
            .map(|link| {
                let midpoint = link.u + (1usize << (link.level - 1));
                SwapStep {
                    level: link.level,
                    midpoint,
                    left: Link { level: link.level - 1, u: link.u, v: midpoint },
                    right: Link { level: link.level - 1, u: midpoint, v: link.v },
                    result: *link,
                }
            })
            .collect();
        SwapSchedule { steps }
    }

    /// Line-oriented text form: header `hiernet N K`, then one `level u v`
    /// triple per line in canonical order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "hiernet {} {}", self.n_nodes, self.k_pairs).unwrap();
        for link in &self.links {
            writeln!(out, "{} {} {}", link.level, link.u, link.v).unwrap();
        }
        out
    }

    /// Parses [`Self::to_text`] output, verifying the links are exactly the
    /// hierarchical construction for the declared N and K.
    pub fn from_text(text: &str) -> Result<Self, TopologyError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| TopologyError::Parse("empty input".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("hiernet") {
            return Err(TopologyError::Parse("missing 'hiernet N K' header".into()));
        }
        let n_nodes: usize = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| TopologyError::Parse("bad node count in header".into()))?;
        let k_pairs: u32 = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| TopologyError::Parse("bad pair count in header".into()))?;

        let mut listed = Vec::new();
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(TopologyError::Parse(format!("expected 'level u v', got {line:?}")));
            }
            let level = parts[0]
                .parse()
                .map_err(|_| TopologyError::Parse(format!("bad level in {line:?}")))?;
            let u = parts[1]
                .parse()
                .map_err(|_| TopologyError::Parse(format!("bad node in {line:?}")))?;
            let v = parts[2]
                .parse()
                .map_err(|_| TopologyError::Parse(format!("bad node in {line:?}")))?;
            listed.push(Link { level, u, v });
        }

        let net = Self::build(n_nodes, k_pairs)?;
        let mut expected = net.links.clone();
        expected.sort_unstable();
        listed.sort_unstable();
        if listed != expected {
            return Err(TopologyError::Parse(format!(
                "links do not match the hierarchical construction for N = {n_nodes}, K = {k_pairs}"
            )));
        }
        Ok(net)
    }
}

/// One scheduled swap: consume `left` and `right` (meeting at `midpoint`) to
/// create `result` one level up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SwapStep {
    pub level: u32,
    pub midpoint: usize,
    pub left: Link,
    pub right: Link,
    pub result: Link,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapSchedule {
    steps: Vec<SwapStep>,
}

impl SwapSchedule {
    pub fn steps(&self) -> &[SwapStep] {
        &self.steps
    }

    /// Replays the schedule from a bare N-node chain, returning every link
    /// present afterwards (level-0 plus each step's result), sorted. Errors
    /// if a step needs a link that no prior step produced.
    pub fn replay(&self, n_nodes: usize) -> Result<Vec<Link>, TopologyError> {
        let mut have: HashSet<Link> = (0..n_nodes.saturating_sub(1))
            .map(|u| Link { level: 0, u, v: u + 1 })
            .collect();
        for step in &self.steps {
            for input in [step.left, step.right] {
                if !have.contains(&input) {
                    return Err(TopologyError::MissingScheduleInput {
                        level: input.level,
                        u: input.u,
                        v: input.v,
                    });
                }
            }
            have.insert(step.result);
        }
        let mut links: Vec<Link> = have.into_iter().collect();
        links.sort_unstable();
        Ok(links)
    }
}

/// Pairs per edge needed so the top level is a single border-to-border link:
/// 1 + log₂(N−1), defined only for N = 2^m + 1.
pub fn required_pairs_for_full_hierarchy(n_nodes: usize) -> Result<u32, TopologyError> {
    if n_nodes < 2 {
        return Err(TopologyError::TooFewNodes(n_nodes));
    }
    if !(n_nodes - 1).is_power_of_two() {
        return Err(TopologyError::NotFullHierarchySize(n_nodes));
    }
    Ok(1 + (n_nodes - 1).trailing_zeros())
}

/// Entangled-pair accounting for an N-node chain with K pairs per edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourceReport {
    pub n_nodes: usize,
    pub pairs_per_edge: u32,
    /// Exact base-pair count (N − 1)·K.
    pub total_base_pairs: u64,
    /// The headline N·(1 + log₂(N−1)) scaling figure, for comparison.
    pub scaling_estimate: f64,
    /// N², the naive all-pairs comparator.
    pub n_squared: f64,
}

pub fn resource_report(n_nodes: usize, k_pairs: u32) -> ResourceReport {
    assert!(n_nodes >= 2, "a chain needs at least 2 nodes");
    assert!(k_pairs >= 1, "need at least one pair per edge");
    let n = n_nodes as f64;
    ResourceReport {
        n_nodes,
        pairs_per_edge: k_pairs,
        total_base_pairs: (n_nodes as u64 - 1) * u64::from(k_pairs),
        scaling_estimate: n * (1.0 + (n - 1.0).log2()),
        n_squared: n * n,
    }
}
