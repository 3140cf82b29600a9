//! Exact algebra of two-qubit pure states in Schmidt form.
//!
//! A partially entangled pair is fully described by its ordered Schmidt
//! coefficients (λ₁, λ₂) with λ₁ ≥ λ₂ and λ₁ + λ₂ = 1. This module covers the
//! entanglement measures on such pairs (singlet conversion probability,
//! concurrence), local conversion into a perfect pair, the four-outcome Bell
//! measurement that swaps two short links into one long link, and the
//! recurrence driving fidelity gain under iterated two-pair distillation.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

/// Tolerance for closed-form floating-point identities.
pub const ALGEBRA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QStateError {
    #[error("lambda2 = {0} is outside [0, 1/2]")]
    Lambda2OutOfRange(f64),
    #[error("({0}, {1}) is not an ordered Schmidt pair: need l1 >= l2 >= 0 and l1 + l2 = 1")]
    InvalidSchmidtPair(f64, f64),
    #[error("fidelity {0} is outside [1/4, 1]")]
    FidelityOutOfRange(f64),
}

/// A two-qubit pure entangled state √λ₁|00⟩ + √λ₂|11⟩ in Schmidt form.
///
/// Invariants enforced at construction: λ₁ ≥ λ₂ ≥ 0 and λ₁ + λ₂ = 1 within
/// [`ALGEBRA_TOL`]. Values are immutable; all operations are pure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PurePair {
    lambda1: f64,
    lambda2: f64,
}

impl PurePair {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self, QStateError> {
        let valid = lambda2 >= 0.0
            && lambda1 >= lambda2
            && (lambda1 + lambda2 - 1.0).abs() <= ALGEBRA_TOL;
        if !valid {
            return Err(QStateError::InvalidSchmidtPair(lambda1, lambda2));
        }
        Ok(Self { lambda1, lambda2 })
    }

    /// Builds the pair (1 − λ₂, λ₂) from the smaller Schmidt coefficient.
    pub fn from_lambda2(lambda2: f64) -> Result<Self, QStateError> {
        if !(0.0..=0.5).contains(&lambda2) {
            return Err(QStateError::Lambda2OutOfRange(lambda2));
        }
        Ok(Self { lambda1: 1.0 - lambda2, lambda2 })
    }

    /// The maximally entangled pair (1/2, 1/2).
    pub fn perfect() -> Self {
        Self { lambda1: 0.5, lambda2: 0.5 }
    }

    /// Normalizes two non-negative Schmidt weights into an ordered pair.
    /// Callers guarantee w1 + w2 > 0.
    pub(crate) fn from_weights(w1: f64, w2: f64) -> Self {
        let sum = w1 + w2;
        let (hi, lo) = if w1 >= w2 { (w1, w2) } else { (w2, w1) };
        Self { lambda1: hi / sum, lambda2: lo / sum }
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// Singlet conversion probability p = 2λ₂: the chance local filtering
    /// turns this pair into a perfect one.
    pub fn scp(&self) -> f64 {
        2.0 * self.lambda2
    }

    /// Concurrence C = 2√(λ₁λ₂).
    pub fn concurrence(&self) -> f64 {
        2.0 * (self.lambda1 * self.lambda2).sqrt()
    }

    /// α = √(λ₁λ₂), the per-swap concurrence damping factor; α ≤ 1/2.
    pub fn alpha(&self) -> f64 {
        (self.lambda1 * self.lambda2).sqrt()
    }

    /// Concurrence of the link produced by swapping two copies of this pair,
    /// counted as 2λ₁λ₂ = α·C.
    pub fn swap_concurrence(&self) -> f64 {
        2.0 * self.lambda1 * self.lambda2
    }

    /// Fidelity (1 + C)/2 of the Werner state obtained by twirling this pair.
    pub fn werner_fidelity(&self) -> WernerFidelity {
        WernerFidelity((1.0 + self.concurrence()) / 2.0)
    }

    /// Local measurement operators converting this pair into a perfect one.
    ///
    /// M₁ = diag(√(λ₂/λ₁), 1) succeeds with probability 2λ₂; M₂ = diag(√(1 −
    /// λ₂/λ₁), 0) is the failure branch. Together they satisfy the
    /// completeness relation M₁ᵀM₁ + M₂ᵀM₂ = I.
    pub fn conversion_operators(&self) -> ConversionOperators {
        let ratio = self.lambda2 / self.lambda1;
        ConversionOperators {
            m1: [[ratio.sqrt(), 0.0], [0.0, 1.0]],
            m2: [[(1.0 - ratio).sqrt(), 0.0], [0.0, 0.0]],
        }
    }

    /// One Bernoulli conversion attempt: the perfect pair with probability
    /// `scp()`, otherwise the link vanishes.
    pub fn attempt_conversion(&self, rng: &mut impl Rng) -> Option<PurePair> {
        if rng.random::<f64>() < self.scp() {
            Some(Self::perfect())
        } else {
            None
        }
    }
}

/// The filtering operators of [`PurePair::conversion_operators`], stored as
/// 2×2 real matrices in row-major order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionOperators {
    pub m1: [[f64; 2]; 2],
    pub m2: [[f64; 2]; 2],
}

impl ConversionOperators {
    /// Largest absolute entry of M₁ᵀM₁ + M₂ᵀM₂ − I.
    pub fn completeness_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for row in 0..2 {
            for col in 0..2 {
                let mut sum = 0.0;
                for k in 0..2 {
                    sum += self.m1[k][row] * self.m1[k][col] + self.m2[k][row] * self.m2[k][col];
                }
                let expect = if row == col { 1.0 } else { 0.0 };
                defect = defect.max((sum - expect).abs());
            }
        }
        defect
    }
}

/// Outcome labels of the Bell measurement at the middle node.
///
/// Ψ± are the equal-bit combinations (|00⟩ ± |11⟩)/√2 and Φ± the crossed-bit
/// combinations (|01⟩ ± |10⟩)/√2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BellOutcome {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellOutcome {
    /// Fixed branch order used everywhere a distribution is stored or sampled.
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
    ];

    pub fn is_psi(&self) -> bool {
        matches!(self, BellOutcome::PsiPlus | BellOutcome::PsiMinus)
    }
}

/// One outcome branch of an entanglement swap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwapBranch {
    pub outcome: BellOutcome,
    pub probability: f64,
    pub state: PurePair,
}

/// The four Bell-outcome branches of a swap, in [`BellOutcome::ALL`] order.
/// Branch probabilities sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapDistribution {
    branches: [SwapBranch; 4],
}

impl SwapDistribution {
    pub fn branches(&self) -> &[SwapBranch; 4] {
        &self.branches
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// Probability-weighted singlet conversion probability over the branches.
    /// For a swap of two equal pairs this equals the input pair's SCP.
    pub fn average_scp(&self) -> f64 {
        self.branches
            .iter()
            .map(|b| b.probability * b.state.scp())
            .sum()
    }

    /// Probability-weighted concurrence over the branches.
    pub fn average_concurrence(&self) -> f64 {
        self.branches
            .iter()
            .map(|b| b.probability * b.state.concurrence())
            .sum()
    }

    /// Draws one branch, consuming exactly one uniform variate.
    pub fn sample(&self, rng: &mut impl Rng) -> &SwapBranch {
        let u = rng.random::<f64>();
        let mut acc = 0.0;
        for branch in &self.branches {
            acc += branch.probability;
            if u < acc {
                return branch;
            }
        }
        &self.branches[3]
    }
}

/// Entanglement swapping: a Bell measurement on the two middle qubits of the
/// chain a — (pair `a`) — b — (pair `b`) — c turns the two local links into
/// one link between a and c.
///
/// Projecting the joint state onto the Bell basis leaves the outer qubits in
/// a pure state per outcome:
///
/// * Ψ± each occur with probability (a₁b₁ + a₂b₂)/2 and leave Schmidt weights
///   {a₁b₁, a₂b₂};
/// * Φ± each occur with probability (a₁b₂ + a₂b₁)/2 and leave Schmidt weights
///   {a₁b₂, a₂b₁}.
///
/// For equal input pairs the Φ weights coincide, so those branches carry the
/// maximally entangled state exactly and the four probabilities reduce to
/// (λ₁² + λ₂²)/2 and λ₁λ₂.
pub fn swap(a: PurePair, b: PurePair) -> SwapDistribution {
    let same = (a.lambda1 * b.lambda1, a.lambda2 * b.lambda2);
    let cross = (a.lambda1 * b.lambda2, a.lambda2 * b.lambda1);
    let psi_probability = (same.0 + same.1) / 2.0;
    let phi_probability = (cross.0 + cross.1) / 2.0;
    // same.0 >= 1/4 > 0 always; the cross weights vanish only for two product
    // states, where the Φ branches never occur and the perfect placeholder
    // keeps the equal-pair invariant.
    let psi_state = PurePair::from_weights(same.0, same.1);
    let phi_state = if cross.0 + cross.1 > 0.0 {
        PurePair::from_weights(cross.0, cross.1)
    } else {
        PurePair::perfect()
    };
    SwapDistribution {
        branches: [
            SwapBranch { outcome: BellOutcome::PsiPlus, probability: psi_probability, state: psi_state },
            SwapBranch { outcome: BellOutcome::PsiMinus, probability: psi_probability, state: psi_state },
            SwapBranch { outcome: BellOutcome::PhiPlus, probability: phi_probability, state: phi_state },
            SwapBranch { outcome: BellOutcome::PhiMinus, probability: phi_probability, state: phi_state },
        ],
    }
}

/// Fidelity of a Werner state with respect to the target Bell state.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct WernerFidelity(f64);

impl WernerFidelity {
    pub fn new(f: f64) -> Result<Self, QStateError> {
        if !(0.25..=1.0).contains(&f) {
            return Err(QStateError::FidelityOutOfRange(f));
        }
        Ok(Self(f))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// One round of two-pair recurrence distillation:
///
/// F′ = (F² + (1 − F)²/9) / (F² + (2/3)F(1 − F) + (5/9)(1 − F)²).
///
/// F = 1 is a fixed point and the map is strictly increasing above 1/2, so
/// any fidelity in (1/2, 1] climbs toward 1 under iteration.
pub fn distill_step(f: WernerFidelity) -> WernerFidelity {
    let x = f.0;
    let r = 1.0 - x;
    let numerator = x * x + r * r / 9.0;
    let denominator = x * x + 2.0 / 3.0 * x * r + 5.0 / 9.0 * r * r;
    WernerFidelity(numerator / denominator)
}

/// Failure payload when iterated distillation does not pass `target` within
/// the iteration budget.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("fidelity target {target} not exceeded after {iterations} distillation rounds; last fidelity {last}")]
pub struct DistillationStalled {
    pub target: f64,
    pub iterations: usize,
    pub last: f64,
}

/// Smallest i such that i rounds of [`distill_step`] starting from `f0`
/// exceed `target`; i = 0 when `f0` is already above it.
pub fn distill_until(
    f0: WernerFidelity,
    target: f64,
    max_iter: usize,
) -> Result<usize, DistillationStalled> {
    let mut f = f0;
    for i in 0..=max_iter {
        if f.value() > target {
            return Ok(i);
        }
        if i < max_iter {
            f = distill_step(f);
        }
    }
    Err(DistillationStalled { target, iterations: max_iter, last: f.value() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_pcg::Pcg64;

    fn random_pair(rng: &mut impl Rng) -> PurePair {
        PurePair::from_lambda2(rng.random::<f64>() * 0.5).unwrap()
    }

    /// Schmidt pair with concurrence exactly 1/2: λ = 1/2 ± √3/4.
    pub(crate) fn half_concurrence_pair() -> PurePair {
        PurePair::from_lambda2(0.5 - 3.0_f64.sqrt() / 4.0).unwrap()
    }

    #[test]
    fn make_pair_examples() {
        let p = PurePair::from_lambda2(0.5).unwrap();
        assert_eq!((p.lambda1(), p.lambda2()), (0.5, 0.5));
        let p = PurePair::from_lambda2(0.25).unwrap();
        assert_eq!((p.lambda1(), p.lambda2()), (0.75, 0.25));
        assert_eq!(
            PurePair::from_lambda2(0.6),
            Err(QStateError::Lambda2OutOfRange(0.6))
        );
        assert!(PurePair::from_lambda2(-0.1).is_err());
        assert!(PurePair::new(0.4, 0.6).is_err());
        assert!(PurePair::new(0.7, 0.2).is_err());
    }

    #[test]
    fn scp_examples() {
        assert_eq!(PurePair::perfect().scp(), 1.0);
        assert_eq!(PurePair::from_lambda2(0.25).unwrap().scp(), 0.5);
        assert_eq!(PurePair::from_lambda2(0.0).unwrap().scp(), 0.0);
    }

    #[test]
    fn concurrence_examples() {
        assert_eq!(PurePair::perfect().concurrence(), 1.0);
        assert!((half_concurrence_pair().concurrence() - 0.5).abs() < 1e-15);
        let c = PurePair::from_lambda2(0.25).unwrap().concurrence();
        assert!((c - 0.75_f64.sqrt()).abs() < 1e-15);
        assert!((c - 0.8660254).abs() < 1e-7);
    }

    /// Applies m ⊗ I to the 4-dim vector √λ₁|00⟩ + √λ₂|11⟩ and returns the
    /// squared norm of the result.
    fn filtered_norm_sq(pair: PurePair, m: [[f64; 2]; 2]) -> f64 {
        let amp = [pair.lambda1().sqrt(), 0.0, 0.0, pair.lambda2().sqrt()];
        let mut out = [0.0_f64; 4];
        for q1 in 0..2 {
            for q2 in 0..2 {
                for k in 0..2 {
                    out[2 * q1 + q2] += m[q1][k] * amp[2 * k + q2];
                }
            }
        }
        out.iter().map(|a| a * a).sum()
    }

    #[test]
    fn conversion_operator_examples() {
        let ops = PurePair::perfect().conversion_operators();
        assert_eq!(ops.m1, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(ops.m2, [[0.0, 0.0], [0.0, 0.0]]);

        let pair = PurePair::from_lambda2(0.25).unwrap();
        let ops = pair.conversion_operators();
        assert!((ops.m1[0][0] - 1.0 / 3.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!(ops.m1[1][1], 1.0);
        assert!((filtered_norm_sq(pair, ops.m1) - 0.5).abs() < 1e-15);

        let product = PurePair::from_lambda2(0.0).unwrap();
        let ops = product.conversion_operators();
        assert_eq!(ops.m1[0][0], 0.0);
        assert_eq!(filtered_norm_sq(product, ops.m1), 0.0);
    }

    #[test]
    fn conversion_success_norm_matches_scp() {
        let mut rng = Pcg64::seed_from_u64(11);
        for _ in 0..1000 {
            let pair = random_pair(&mut rng);
            let ops = pair.conversion_operators();
            assert!(ops.completeness_defect() <= ALGEBRA_TOL);
            assert!((filtered_norm_sq(pair, ops.m1) - pair.scp()).abs() <= ALGEBRA_TOL);
        }
    }

    #[test]
    fn attempt_conversion_extremes() {
        let mut rng = Pcg64::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(
                PurePair::perfect().attempt_conversion(&mut rng),
                Some(PurePair::perfect())
            );
            assert_eq!(
                PurePair::from_lambda2(0.0).unwrap().attempt_conversion(&mut rng),
                None
            );
        }
    }

    #[test]
    fn attempt_conversion_frequency() {
        let pair = PurePair::from_lambda2(0.25).unwrap();
        let mut rng = Pcg64::seed_from_u64(7);
        let trials = 1_000_000;
        let hits = (0..trials)
            .filter(|_| pair.attempt_conversion(&mut rng).is_some())
            .count();
        let freq = hits as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.002, "freq = {freq}");
    }

    #[test]
    fn swap_of_perfect_pairs() {
        let d = swap(PurePair::perfect(), PurePair::perfect());
        for branch in d.branches() {
            assert_eq!(branch.probability, 0.25);
            assert_eq!(branch.state, PurePair::perfect());
        }
    }

    #[test]
    fn swap_of_equal_pairs() {
        let pair = PurePair::from_lambda2(0.25).unwrap();
        let d = swap(pair, pair);
        let [psi_p, psi_m, phi_p, phi_m] = d.branches();
        assert_eq!(psi_p.probability, 0.3125);
        assert_eq!(psi_m.probability, 0.3125);
        assert!((psi_p.state.lambda1() - 0.9).abs() < 1e-15);
        assert!((psi_p.state.lambda2() - 0.1).abs() < 1e-15);
        assert_eq!(phi_p.probability, 0.1875);
        assert_eq!(phi_m.probability, 0.1875);
        assert_eq!(phi_p.state, PurePair::perfect());
        assert_eq!(phi_m.state, PurePair::perfect());
    }

    #[test]
    fn swap_of_unequal_pairs() {
        // Bell projection leaves weights {a1*b1, a2*b2} on Psi and
        // {a1*b2, a2*b1} on Phi; with b perfect all four reduce to the input
        // pair and each outcome is equally likely.
        let a = PurePair::from_lambda2(0.25).unwrap();
        let d = swap(a, PurePair::perfect());
        for branch in d.branches() {
            assert_eq!(branch.probability, 0.25);
            assert!((branch.state.lambda1() - 0.75).abs() < 1e-15);
            assert!((branch.state.lambda2() - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn swap_probabilities_sum_to_one() {
        let mut rng = Pcg64::seed_from_u64(19);
        for _ in 0..1000 {
            let a = random_pair(&mut rng);
            let b = random_pair(&mut rng);
            assert!((swap(a, b).total_probability() - 1.0).abs() <= ALGEBRA_TOL);
        }
    }

    #[test]
    fn average_scp_examples() {
        let p34 = PurePair::from_lambda2(0.25).unwrap();
        assert!((swap(p34, p34).average_scp() - 0.5).abs() <= ALGEBRA_TOL);
        assert_eq!(swap(PurePair::perfect(), PurePair::perfect()).average_scp(), 1.0);
        let p91 = PurePair::from_lambda2(0.1).unwrap();
        assert!((swap(p91, p91).average_scp() - 0.2).abs() <= ALGEBRA_TOL);
    }

    #[test]
    fn equal_swap_preserves_average_scp() {
        let mut rng = Pcg64::seed_from_u64(23);
        for _ in 0..1000 {
            let a = random_pair(&mut rng);
            assert!((swap(a, a).average_scp() - a.scp()).abs() <= ALGEBRA_TOL);
        }
    }

    #[test]
    fn unequal_swap_average_scp_is_the_weaker_link() {
        let mut rng = Pcg64::seed_from_u64(29);
        for _ in 0..1000 {
            let a = random_pair(&mut rng);
            let b = random_pair(&mut rng);
            let expect = a.scp().min(b.scp());
            assert!((swap(a, b).average_scp() - expect).abs() <= ALGEBRA_TOL);
        }
    }

    #[test]
    fn swap_concurrence_examples() {
        assert_eq!(PurePair::perfect().swap_concurrence(), 0.5);
        assert_eq!(PurePair::from_lambda2(0.25).unwrap().swap_concurrence(), 0.375);
        assert_eq!(PurePair::from_lambda2(0.0).unwrap().swap_concurrence(), 0.0);
    }

    #[test]
    fn swap_concurrence_is_alpha_times_concurrence() {
        let mut rng = Pcg64::seed_from_u64(31);
        for _ in 0..1000 {
            let a = random_pair(&mut rng);
            let identity = a.alpha() * a.concurrence();
            assert!((a.swap_concurrence() - identity).abs() <= ALGEBRA_TOL);
        }
    }

    #[test]
    fn werner_fidelity_examples() {
        assert!((half_concurrence_pair().werner_fidelity().value() - 0.75).abs() < 1e-15);
        assert_eq!(PurePair::perfect().werner_fidelity().value(), 1.0);
        assert_eq!(PurePair::from_lambda2(0.0).unwrap().werner_fidelity().value(), 0.5);
        assert!(WernerFidelity::new(0.2).is_err());
        assert!(WernerFidelity::new(1.1).is_err());
    }

    #[test]
    fn distill_step_examples() {
        let one = distill_step(WernerFidelity::new(1.0).unwrap());
        assert_eq!(one.value(), 1.0);
        let next = distill_step(WernerFidelity::new(0.75).unwrap());
        assert!((next.value() - 41.0 / 52.0).abs() <= 1e-15);
        let f = 4.0 / 7.0;
        let stepped = distill_step(WernerFidelity::new(f).unwrap());
        assert!(stepped.value() > f);
    }

    #[test]
    fn distill_step_increasing_and_bounded() {
        let mut previous = 0.5;
        for i in 0..10_000 {
            let f = 0.5 + 0.5 * (i as f64 + 1.0) / 10_000.0;
            let out = distill_step(WernerFidelity::new(f).unwrap()).value();
            assert!((0.5..=1.0).contains(&out), "f = {f} escaped to {out}");
            assert!(out > previous, "map not increasing at f = {f}");
            previous = out;
        }
    }

    #[test]
    fn distill_until_examples() {
        let start = WernerFidelity::new(0.75).unwrap();
        assert_eq!(distill_until(start, 0.75, 16), Ok(1));
        let top = WernerFidelity::new(1.0).unwrap();
        assert_eq!(distill_until(top, 0.99, 16), Ok(0));
        let stalled = distill_until(WernerFidelity::new(0.5).unwrap(), 0.75, 8);
        let err = stalled.unwrap_err();
        assert_eq!(err.iterations, 8);
        assert_eq!(err.last, 0.5);
    }

    #[test]
    fn post_swap_fidelity_of_half_concurrence_pair_distills_in_eight_rounds() {
        let base = half_concurrence_pair();
        let post_swap = swap(base, base).branches()[0].state;
        let f0 = post_swap.werner_fidelity();
        assert!((f0.value() - 4.0 / 7.0).abs() <= ALGEBRA_TOL);
        let rounds = distill_until(f0, base.werner_fidelity().value(), 64).unwrap();
        assert_eq!(rounds, 8);
    }
}
