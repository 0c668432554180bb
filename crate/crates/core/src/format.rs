/// Decimal text with 17 significant digits, enough to round-trip any `f64`.
pub fn decimal(v: f64) -> String {
    format!("{v:.16e}")
}
