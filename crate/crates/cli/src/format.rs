//! Number formatting: 17 significant digits for machine output, 6 for people.

use lindblad_core::C64;

/// Entries below this magnitude print as zero in human summaries.
pub const DISPLAY_CHOP: f64 = 1e-12;

pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn trim(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// `%g`-style rendering with six significant digits.
pub fn g6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x.abs() < DISPLAY_CHOP {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.5e}");
        match s.split_once('e') {
            Some((m, e)) => format!("{}e{e}", trim(m)),
            None => s,
        }
    }
}

pub fn c6(c: C64) -> String {
    let re = c.re.abs() >= DISPLAY_CHOP;
    let im = c.im.abs() >= DISPLAY_CHOP;
    match (re, im) {
        (_, false) => g6(c.re),
        (false, true) => format!("{}i", g6(c.im)),
        (true, true) => {
            let sign = if c.im < 0.0 { '-' } else { '+' };
            format!("{}{sign}{}i", g6(c.re), g6(c.im.abs()))
        }
    }
}
