/// Real power with an integer fast path. The exponents driven by the
/// dimension parameter N are integers for N in {3, 4, 6} and fractional
/// otherwise.
pub fn powr(x: f64, e: f64) -> f64 {
    let r = e.round();
    if (e - r).abs() < 1e-12 && r.abs() <= 64.0 {
        x.powi(r as i32)
    } else {
        x.powf(e)
    }
}
