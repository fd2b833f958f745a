//! Gauss–Hermite nodes and weights.
//!
//! Physicists' convention (weight function exp(-x^2)); nodes by Newton
//! iteration on the orthonormal Hermite recurrence with standard
//! asymptotic initial guesses. Integrals against the standard Gaussian
//! measure substitute z = sqrt(2) x and divide by sqrt(pi).

/// Nodes and weights for exp(-x^2)-weighted quadrature of the given order.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "order must be >= 2");
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0f64;
        for _ in 0..100 {
            // p1 = orthonormal H_n(z), p2 = H_{n-1}(z).
            let mut p1 = std::f64::consts::PI.powf(-0.25);
            let mut p2 = 0.0f64;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    // Return in ascending order.
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Integral of `f` against the standard Gaussian measure Dz.
pub fn gaussian_expectation(f: impl Fn(f64) -> f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        acc += w * f(sqrt2 * x);
    }
    acc * inv_sqrt_pi
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "order must be >= 2");
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Chebyshev initial guess.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0f64;
        for _ in 0..100 {
            let mut p1 = 1.0f64;
            let mut p2 = 0.0f64;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Truncation radius for Gaussian-measure integrals; exp(-z^2/2) at 12 is
/// ~5e-32, far below double precision.
const GAUSS_CUTOFF: f64 = 12.0;

/// Integral of `f` against the standard Gaussian measure, split at 0 so
/// activation-style kinks never sit inside a panel. Each half-line is a
/// smooth integrand for Gauss–Legendre, which converges geometrically;
/// `order` points are used per half.
pub fn gaussian_expectation_split(f: impl Fn(f64) -> f64, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let half = GAUSS_CUTOFF / 2.0;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = 0.0;
    for (t, w) in nodes.iter().zip(weights.iter()) {
        let z = half * (t + 1.0); // [0, GAUSS_CUTOFF]
        let gauss = (-0.5 * z * z).exp() * norm;
        acc += w * half * gauss * (f(z) + f(-z));
    }
    acc
}
