//! Base-2 entropy helpers. `0 log 0` is taken to be zero.

pub fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Binary entropy.
pub fn h_b(p: f64) -> f64 {
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// Crossover probability of two cascaded BSCs.
pub fn binary_convolution(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

/// Shannon entropy of a probability vector.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().map(|&p| xlog2x(p)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        assert_eq!(h_b(0.0), 0.0);
        assert_eq!(h_b(1.0), 0.0);
        assert!((h_b(0.5) - 1.0).abs() < 1e-15);
        assert!((h_b(0.11) - 0.499_915_958).abs() < 1e-8);
    }

    #[test]
    fn convolution_is_symmetric() {
        assert!((binary_convolution(0.1, 0.2) - 0.26).abs() < 1e-15);
        assert_eq!(binary_convolution(0.5, 0.3), 0.5);
        assert_eq!(binary_convolution(0.0, 0.3), 0.3);
    }

    #[test]
    fn uniform_entropy() {
        assert!((entropy(&[0.25; 4]) - 2.0).abs() < 1e-15);
    }
}
