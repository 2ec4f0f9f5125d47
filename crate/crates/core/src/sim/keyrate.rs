/// Binary entropy in bits; `h2(0) = h2(1) = 0`.
pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * libm::log2(p) - (1.0 - p) * libm::log2(1.0 - p)
}

/// Asymptotic secret-key fraction `max(0, 1 - 2 h2(q))` with ideal error
/// correction. Defined on `[0, 0.5]`; larger error rates yield 0.
pub fn secret_fraction(qber: f64) -> f64 {
    if !(0.0..0.5).contains(&qber) {
        return 0.0;
    }
    (1.0 - 2.0 * h2(qber)).max(0.0)
}
