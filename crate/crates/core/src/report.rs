//! Output formatting shared by the CLI and tests: plot-ready CSV with
//! full-precision reals and RFC 4180 quoting.

use std::borrow::Cow;

/// Canonical column set for Monte Carlo result rows.
pub const MC_CSV_HEADER: &str = "p,k,trials,successes,estimate,std_error,prediction";

/// Renders a real with 17 significant digits (round-trip safe for f64).
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Quotes a CSV field when it contains a delimiter, quote, or line break.
pub fn csv_field(s: &str) -> Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        Cow::Owned(format!("\"{}\"", s.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(s)
    }
}
