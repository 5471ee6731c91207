/// Coefficients of the lower bound `log2(1 + z) >= α log2(z) + β`, tight at
/// `z = z0`. At `z0 = 0` both are zero, which drops the stream.
pub fn alpha_beta(z0: f64) -> (f64, f64) {
    if !(z0 > 0.0) {
        return (0.0, 0.0);
    }
    let alpha = z0 / (1.0 + z0);
    let beta = z0.ln_1p() / std::f64::consts::LN_2 - alpha * z0.log2();
    (alpha, beta)
}
