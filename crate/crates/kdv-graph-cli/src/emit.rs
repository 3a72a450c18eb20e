//! Output formatting. CSV and plain-text numbers use 6 significant digits;
//! JSON keeps full float precision (serde_json emits shortest-roundtrip).

use std::path::Path;

use kdv_graph::{Error, Result};

/// 6 significant digits, scientific notation outside [1e-4, 1e6),
/// trailing zeros trimmed.
pub fn g6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if e < -4 || e >= 6 {
        let s = format!("{x:.5e}");
        let (mant, exp) = s.split_once('e').expect("scientific format has an exponent");
        format!("{}e{}", trim_zeros(mant), exp)
    } else {
        let dec = (5 - e).max(0) as usize;
        trim_zeros(&format!("{x:.dec$}"))
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Write to the given path, or to stdout when no path is given.
pub fn write_out(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| Error::validation(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
