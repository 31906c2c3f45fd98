/// Splits a (possibly negative) span into an integer number of equal steps
/// whose length does not exceed `|dt|` (up to 1e-9 relative rounding slack).
pub(crate) fn step_plan(span: f64, dt: f64) -> (usize, f64) {
    if span == 0.0 {
        return (0, 0.0);
    }
    let n = ((span.abs() / dt.abs()) * (1.0 - 1e-9)).ceil().max(1.0) as usize;
    (n, span / n as f64)
}
