//! Sign-pattern chain for bias-free width-2 networks with scalar input,
//! in exact rational arithmetic.
//!
//! On each side of the origin every unit of a bias-free ReLU layer is a
//! linear function of the input, so a hidden layer is described by which
//! of its two units are alive on the positive and on the negative ray:
//! 16 cases, case 16 being "dead on both rays" and absorbing. Treating
//! the case index as a Markov state and integrating the ray directions
//! as fresh, independent, and uniform per step gives the 16x16
//! column-stochastic matrix below (denominators divide 96).
//!
//! Exactness caveat: the case index is not a sufficient statistic. The
//! angle between the two surviving ray directions is a hidden continuous
//! coordinate, and conditioning on the case path skews it. The first two
//! transitions satisfy the independence assumptions exactly, so the
//! matrix powers give the true constant-function probability for depths
//! 1-3 (0, 5/32, 1045/3072); from depth 4 the true process runs slightly
//! above the matrix powers (about +0.003 at depth 4 rising to +0.007 by
//! depth 7, measured against a 2e7-sample simulation with Gaussian
//! weights). The matrix values themselves are exact rationals and all
//! structural properties (column sums, absorption, monotone case-16
//! mass) hold exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub const CASE_COUNT: usize = 16;

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Column-stochastic 16x16 matrix of exact rationals; entry `(j, i)` is
/// the probability that the next layer is case `j` given case `i`
/// (1-indexed cases).
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    entries: Vec<BigRational>,
}

impl TransitionMatrix {
    #[inline]
    pub fn get(&self, row_case: usize, col_case: usize) -> &BigRational {
        assert!((1..=CASE_COUNT).contains(&row_case) && (1..=CASE_COUNT).contains(&col_case));
        &self.entries[(row_case - 1) * CASE_COUNT + (col_case - 1)]
    }

    fn set(&mut self, row_case: usize, col_case: usize, value: BigRational) {
        self.entries[(row_case - 1) * CASE_COUNT + (col_case - 1)] = value;
    }

    pub fn column_sum(&self, col_case: usize) -> BigRational {
        (1..=CASE_COUNT).map(|r| self.get(r, col_case).clone()).sum()
    }

    /// Matrix-vector product over exact rationals.
    pub fn apply(&self, v: &CaseDistribution) -> CaseDistribution {
        let mut out = CaseDistribution::zero();
        for r in 1..=CASE_COUNT {
            let mut acc = BigRational::zero();
            for c in 1..=CASE_COUNT {
                let e = self.get(r, c);
                if !e.is_zero() {
                    acc += e * &v.entries[c - 1];
                }
            }
            out.entries[r - 1] = acc;
        }
        out
    }
}

/// Probability vector over the 16 sign-pattern cases.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseDistribution {
    entries: Vec<BigRational>,
}

impl CaseDistribution {
    fn zero() -> Self {
        CaseDistribution {
            entries: vec![BigRational::zero(); CASE_COUNT],
        }
    }

    #[inline]
    pub fn get(&self, case: usize) -> &BigRational {
        assert!((1..=CASE_COUNT).contains(&case));
        &self.entries[case - 1]
    }

    pub fn sum(&self) -> BigRational {
        self.entries.iter().cloned().sum()
    }

    /// Mass on the absorbing all-dead case.
    pub fn constant_mass(&self) -> &BigRational {
        self.get(CASE_COUNT)
    }
}

// Case-group structure of the transition law. Cases split by behavior of
// the two units: both live on both rays (1, 6, 11, 16 pattern targets),
// one-sided cases, and the dead-ray cases.
const BOTH_RAY_TARGETS: [usize; 4] = [1, 6, 11, 16];
const MIXED_TARGETS: [usize; 8] = [2, 3, 5, 8, 9, 12, 14, 15];
const ONE_RAY_TARGETS: [usize; 4] = [4, 7, 10, 13];

/// The exact transition matrix (denominators divide 96).
pub fn transition_matrix() -> TransitionMatrix {
    let mut m = TransitionMatrix {
        entries: vec![BigRational::zero(); CASE_COUNT * CASE_COUNT],
    };
    // Source case 1: both units live on both rays with independent random
    // directions; the two-ray angle integral gives 17/96, 1/32, 1/96.
    for j in BOTH_RAY_TARGETS {
        m.set(j, 1, ratio(17, 96));
    }
    for j in MIXED_TARGETS {
        m.set(j, 1, ratio(1, 32));
    }
    for j in ONE_RAY_TARGETS {
        m.set(j, 1, ratio(1, 96));
    }
    // Source cases 2, 3, 5, 9: one unit dead on one ray; the one-angle
    // integral gives 7/48, 1/24, 1/48.
    for c in [2, 3, 5, 9] {
        for j in BOTH_RAY_TARGETS {
            m.set(j, c, ratio(7, 48));
        }
        for j in MIXED_TARGETS {
            m.set(j, c, ratio(1, 24));
        }
        for j in ONE_RAY_TARGETS {
            m.set(j, c, ratio(1, 48));
        }
    }
    // Source cases 4, 8, 12: dead on the negative ray; the next layer is
    // dead there too and each of cases 4, 8, 12, 16 has probability 1/4.
    for c in [4, 8, 12] {
        for j in [4, 8, 12, 16] {
            m.set(j, c, ratio(1, 4));
        }
    }
    // Source cases 6, 11: the two rays carry opposite-sign multiples of
    // one direction; cases 1, 6, 11, 16 each with probability 1/4.
    for c in [6, 11] {
        for j in [1, 6, 11, 16] {
            m.set(j, c, ratio(1, 4));
        }
    }
    // Source cases 7, 10: independent directions per ray; all 16 cases
    // equally likely.
    for c in [7, 10] {
        for j in 1..=CASE_COUNT {
            m.set(j, c, ratio(1, 16));
        }
    }
    // Source cases 13, 14, 15: dead on the positive ray; cases 13, 14,
    // 15, 16 each with probability 1/4.
    for c in [13, 14, 15] {
        for j in [13, 14, 15, 16] {
            m.set(j, c, ratio(1, 4));
        }
    }
    // Case 16 is absorbing.
    m.set(16, 16, BigRational::one());
    m
}

/// Distribution over cases after the first hidden layer: the two weight
/// signs are independent fair coins, landing on cases 4, 7, 10, 13.
pub fn initial_distribution() -> CaseDistribution {
    let mut v = CaseDistribution::zero();
    for case in [4, 7, 10, 13] {
        v.entries[case - 1] = ratio(1, 4);
    }
    v
}

/// Case-16 mass of the sign-pattern chain: the probability that a
/// bias-free, width-2, scalar-input network with `depth` layers and
/// symmetric weight initialization is a constant function (exact for
/// depths 1-3; a close upper-ish approximation beyond, see the module
/// docs).
///
/// With ReLU on the last layer this is the case-16 mass after `depth`
/// layers. Without it, the final affine map is constant iff its input is,
/// so the chain stops one layer earlier (depth 1 is a plain affine map and
/// never constant).
pub fn exact_constant_probability(depth: usize, last_layer_relu: bool) -> Result<BigRational> {
    if depth == 0 {
        return Err(Error::arg("depth must be >= 1"));
    }
    let hidden_layers = if last_layer_relu {
        depth
    } else if depth == 1 {
        return Ok(BigRational::zero());
    } else {
        depth - 1
    };
    let p = transition_matrix();
    let mut dist = initial_distribution();
    for _ in 1..hidden_layers {
        dist = p.apply(&dist);
    }
    Ok(dist.constant_mass().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Spot values transcribed from the printed matrix, as (row, col, num,
    // den); an independent cross-check of the generator rules.
    const PRINTED_SAMPLES: [(usize, usize, i64, i64); 20] = [
        (1, 1, 17, 96),
        (2, 1, 1, 32),
        (4, 1, 1, 96),
        (16, 1, 17, 96),
        (1, 2, 7, 48),
        (4, 2, 1, 48),
        (13, 2, 1, 48),
        (16, 2, 7, 48),
        (4, 4, 1, 4),
        (8, 4, 1, 4),
        (12, 4, 1, 4),
        (16, 4, 1, 4),
        (1, 6, 1, 4),
        (7, 7, 1, 16),
        (16, 7, 1, 16),
        (13, 13, 1, 4),
        (15, 14, 1, 4),
        (16, 15, 1, 4),
        (16, 16, 1, 1),
        (1, 16, 0, 1),
    ];

    #[test]
    fn printed_entries_match() {
        let p = transition_matrix();
        for (r, c, num, den) in PRINTED_SAMPLES {
            assert_eq!(*p.get(r, c), ratio(num, den), "entry ({r}, {c})");
        }
    }

    #[test]
    fn columns_sum_to_exactly_one() {
        let p = transition_matrix();
        for c in 1..=CASE_COUNT {
            assert_eq!(p.column_sum(c), BigRational::one(), "column {c}");
        }
    }

    #[test]
    fn entries_are_probabilities() {
        let p = transition_matrix();
        for r in 1..=CASE_COUNT {
            for c in 1..=CASE_COUNT {
                let e = p.get(r, c);
                assert!(*e >= BigRational::zero() && *e <= BigRational::one());
            }
        }
    }

    #[test]
    fn case_16_is_absorbing() {
        let p = transition_matrix();
        assert_eq!(*p.get(16, 16), BigRational::one());
        for r in 1..16 {
            assert!(p.get(r, 16).is_zero());
        }
    }

    #[test]
    fn initial_distribution_layout() {
        let v = initial_distribution();
        assert_eq!(*v.get(4), ratio(1, 4));
        assert_eq!(*v.get(7), ratio(1, 4));
        assert_eq!(*v.get(10), ratio(1, 4));
        assert_eq!(*v.get(13), ratio(1, 4));
        assert!(v.get(16).is_zero());
        assert_eq!(v.sum(), BigRational::one());
    }

    #[test]
    fn chain_values_for_small_depths() {
        assert!(exact_constant_probability(1, true).unwrap().is_zero());
        assert_eq!(exact_constant_probability(2, true).unwrap(), ratio(5, 32));
        // Depth 3 relu-last, frozen from the exact product:
        assert_eq!(exact_constant_probability(3, true).unwrap(), ratio(1045, 3072));
    }

    #[test]
    fn no_last_relu_shifts_the_chain_by_one() {
        // A final affine layer is constant iff its input is.
        assert!(exact_constant_probability(1, false).unwrap().is_zero());
        assert!(exact_constant_probability(2, false).unwrap().is_zero());
        assert_eq!(exact_constant_probability(3, false).unwrap(), ratio(5, 32));
        assert_eq!(
            exact_constant_probability(10, false).unwrap(),
            exact_constant_probability(9, true).unwrap()
        );
    }

    #[test]
    fn probability_is_nondecreasing_and_below_one() {
        let mut prev = BigRational::zero();
        for depth in 1..=50 {
            let p = exact_constant_probability(depth, true).unwrap();
            assert!(p >= prev, "depth {depth}");
            assert!(p < BigRational::one());
            prev = p;
        }
    }

    #[test]
    fn distributions_stay_normalized_under_the_chain() {
        let p = transition_matrix();
        let mut dist = initial_distribution();
        for _ in 0..30 {
            dist = p.apply(&dist);
            assert_eq!(dist.sum(), BigRational::one());
        }
    }

    #[test]
    fn depth_zero_is_an_error() {
        assert!(exact_constant_probability(0, true).is_err());
    }
}
