//! Closed-form and exact-arithmetic analysis of initialization collapse.

mod bounds;
mod chain;
mod hermite;
mod lengthmap;

pub use bounds::{collapse_probability_bound, max_safe_depth};
pub use chain::{
    exact_constant_probability, initial_distribution, transition_matrix, CaseDistribution,
    TransitionMatrix, CASE_COUNT,
};
pub use hermite::{gauss_hermite, gauss_legendre, gaussian_expectation, gaussian_expectation_split};
pub use lengthmap::{
    length_map_general, length_map_relu, LengthMapParams, LengthTrajectory, QuadratureInfo,
};

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn chain_is_dominated_by_the_point_bound() {
        // The constant-function probability cannot exceed the fixed-input
        // zero probability.
        for depth in 1..=50usize {
            let exact = exact_constant_probability(depth, true)
                .unwrap()
                .to_f64()
                .unwrap();
            let bound = collapse_probability_bound(&vec![2; depth], true, false);
            assert!(exact <= bound + 1e-15, "depth {depth}: {exact} vs {bound}");
        }
    }
}
