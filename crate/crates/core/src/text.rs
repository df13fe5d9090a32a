//! Shared number formatting for text outputs.

/// Full-precision scientific notation (17 significant digits).
pub fn sci(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}
