//! Number formatting shared by every CSV writer.

/// Decimal rendering with 17 significant digits, enough to round-trip any
/// `f64`. Non-finite values render as `inf`, `-inf` or `NaN`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}
