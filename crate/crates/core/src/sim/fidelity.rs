/// Werner parameter of a pair with fidelity `f` to the ideal Bell state.
pub fn werner_parameter(f: f64) -> f64 {
    (4.0 * f - 1.0) / 3.0
}

pub fn fidelity_from_werner(w: f64) -> f64 {
    (3.0 * w + 1.0) / 4.0
}

/// End-to-end fidelity after `swap_count` ideal entanglement swaps over
/// `swap_count + 1` Werner links of fidelity `link_fidelity`. Werner
/// parameters multiply under swapping.
pub fn chain_fidelity(link_fidelity: f64, swap_count: u32) -> f64 {
    let w = werner_parameter(link_fidelity);
    let w_out = libm::pow(w, f64::from(swap_count) + 1.0);
    fidelity_from_werner(w_out)
}

/// Bit-flip probability in any matched measurement basis on a Werner pair
/// of fidelity `f`: `(1 - w) / 2`.
pub fn werner_error_rate(f: f64) -> f64 {
    2.0 * (1.0 - f) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_points() {
        for n in 0..5 {
            assert_eq!(chain_fidelity(1.0, n), 1.0);
        }
        for f in [0.25, 0.6, 0.9] {
            assert!((chain_fidelity(f, 0) - f).abs() < 1e-15);
        }
        assert!((chain_fidelity(0.25, 3) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn error_rate_matches_werner_parameter() {
        for f in [0.25, 0.7, 1.0] {
            let w = werner_parameter(f);
            assert!((werner_error_rate(f) - (1.0 - w) / 2.0).abs() < 1e-15);
        }
    }
}
