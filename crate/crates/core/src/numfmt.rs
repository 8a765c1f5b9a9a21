//! Decimal rendering shared by the CSV and SVG writers.

/// Renders `x` with 17 significant digits, enough to round-trip any `f64`.
///
/// Plain decimal notation is used for magnitudes in `[1e-5, 1e17)`; anything
/// outside that range falls back to exponent notation.
pub fn sig17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if !(-5..17).contains(&exp) {
        return sci;
    }
    let decimals = (16 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    trim_zeros(s)
}

/// Fixed-point rendering with trailing zeros removed, for SVG coordinates.
pub fn fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    let s = trim_zeros(s);
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}
