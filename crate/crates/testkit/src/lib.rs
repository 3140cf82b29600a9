//! Brute-force reference computations for the test suites.
//!
//! Everything here works on raw numbers — dense 16-dim state vectors,
//! explicit Bell projections, 2×2 singular values, big-integer rationals —
//! and shares no code with the library under test, so the two sides of every
//! comparison stay independent.

use num_bigint::BigUint;

/// One projected outcome of the four-outcome Bell measurement: its
/// probability and the ordered Schmidt coefficients of the surviving state
/// (zeros when the branch has probability 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleBranch {
    pub probability: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Entanglement swap by direct linear algebra.
///
/// Builds the 16-dim joint vector of two Schmidt pairs `a` (qubits 1, 2) and
/// `b` (qubits 3, 4), projects qubits 2 and 3 onto each Bell vector — in the
/// order (|00⟩+|11⟩)/√2, (|00⟩−|11⟩)/√2, (|01⟩+|10⟩)/√2, (|01⟩−|10⟩)/√2 —
/// and Schmidt-decomposes the unnormalized outer state by 2×2 SVD.
pub fn bell_projection_swap(a: (f64, f64), b: (f64, f64)) -> [OracleBranch; 4] {
    let mut joint = [0.0_f64; 16];
    // Basis index is q1 q2 q3 q4, most significant bit first.
    joint[0b0000] = (a.0 * b.0).sqrt();
    joint[0b0011] = (a.0 * b.1).sqrt();
    joint[0b1100] = (a.1 * b.0).sqrt();
    joint[0b1111] = (a.1 * b.1).sqrt();

    let s = std::f64::consts::FRAC_1_SQRT_2;
    // Bell vectors over (q2, q3) in |00>,|01>,|10>,|11> order.
    let bells: [[f64; 4]; 4] = [
        [s, 0.0, 0.0, s],
        [s, 0.0, 0.0, -s],
        [0.0, s, s, 0.0],
        [0.0, s, -s, 0.0],
    ];

    bells.map(|bell| {
        // Amplitude matrix of the outer qubits after projection:
        // m[q1][q4] = sum over (q2, q3) of bell* . joint.
        let mut m = [[0.0_f64; 2]; 2];
        #[allow(clippy::needless_range_loop)] // indices assemble the basis index
        for q1 in 0..2 {
            for q4 in 0..2 {
                for q2 in 0..2 {
                    for q3 in 0..2 {
                        let idx = (q1 << 3) | (q2 << 2) | (q3 << 1) | q4;
                        m[q1][q4] += bell[(q2 << 1) | q3] * joint[idx];
                    }
                }
            }
        }
        let probability: f64 = m.iter().flatten().map(|x| x * x).sum();
        if probability <= 0.0 {
            return OracleBranch { probability: 0.0, lambda1: 0.0, lambda2: 0.0 };
        }
        let (lambda1, lambda2) = schmidt_coefficients(m);
        OracleBranch { probability, lambda1, lambda2 }
    })
}

/// Ordered Schmidt coefficients of a (possibly unnormalized) two-qubit state
/// given as its 2×2 amplitude matrix: the squared singular values divided by
/// the squared norm.
pub fn schmidt_coefficients(m: [[f64; 2]; 2]) -> (f64, f64) {
    let trace: f64 = m.iter().flatten().map(|x| x * x).sum();
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (trace * trace - 4.0 * det * det).max(0.0).sqrt();
    ((trace + disc) / (2.0 * trace), (trace - disc) / (2.0 * trace))
}

/// One exact-rational round of the two-pair distillation recurrence applied
/// to fidelity p/q:
///
/// F′ = (F² + (1 − F)²/9) / (F² + (2/3)F(1 − F) + (5/9)(1 − F)²)
///    = (9p² + (q − p)²) / (9p² + 6p(q − p) + 5(q − p)²).
pub fn distill_step_rational(p: &BigUint, q: &BigUint) -> (BigUint, BigUint) {
    assert!(p <= q, "fidelity must be <= 1");
    let nine = BigUint::from(9u32);
    let r = q - p;
    let p2 = p * p;
    let num = &nine * &p2 + &r * &r;
    let den = nine * p2 + BigUint::from(6u32) * p * &r + BigUint::from(5u32) * &r * &r;
    let g = num.clone().gcd(&den);
    (num / &g, den / g)
}

/// Rounds of [`distill_step_rational`] needed to exceed `target_num /
/// target_den` starting from `p/q`, in exact arithmetic.
pub fn distill_rounds_rational(
    p: u64,
    q: u64,
    target_num: u64,
    target_den: u64,
    max_rounds: usize,
) -> Option<usize> {
    let (mut num, mut den) = (BigUint::from(p), BigUint::from(q));
    let (t_num, t_den) = (BigUint::from(target_num), BigUint::from(target_den));
    for round in 0..=max_rounds {
        if &num * &t_den > &t_num * &den {
            return Some(round);
        }
        let (n, d) = distill_step_rational(&num, &den);
        num = n;
        den = d;
    }
    None
}

trait Gcd {
    fn gcd(self, other: &Self) -> Self;
}

impl Gcd for BigUint {
    fn gcd(self, other: &Self) -> Self {
        let mut a = self;
        let mut b = other.clone();
        while b.bits() != 0 {
            let r = &a % &b;
            a = b;
            b = r;
        }
        a
    }
}
