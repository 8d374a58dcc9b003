use std::sync::LazyLock;

use altjulia_core::Complex64;
use regex::Regex;

pub const GRAMMAR: &str =
    "expected a complex literal of the form a, bi, a+bi or a-bi (decimal reals, e.g. -0.8+0.2i, 2, -i)";

const NUM: &str = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?";

static REAL_PART: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"^(?P<re>[+-]?{NUM})(?:(?P<sign>[+-])(?P<im>{NUM})?i)?$")).unwrap());

static IMAG_ONLY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"^(?P<sign>[+-]?)(?P<im>{NUM})?i$")).unwrap());

fn imag(sign: &str, magnitude: Option<&str>) -> f64 {
    let value = magnitude.map_or(1.0, |m| m.parse::<f64>().unwrap());
    if sign == "-" {
        -value
    } else {
        value
    }
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`. A bare `i` stands for unit magnitude.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let text = text.trim();
    let z = if let Some(caps) = REAL_PART.captures(text) {
        let re = caps["re"].parse::<f64>().unwrap();
        let im = caps
            .name("sign")
            .map_or(0.0, |s| imag(s.as_str(), caps.name("im").map(|m| m.as_str())));
        Complex64::new(re, im)
    } else if let Some(caps) = IMAG_ONLY.captures(text) {
        Complex64::new(0.0, imag(&caps["sign"], caps.name("im").map(|m| m.as_str())))
    } else {
        return Err(format!("invalid complex number {text:?}: {GRAMMAR}"));
    };
    if !z.is_finite() {
        return Err(format!("complex number {text:?} is out of range"));
    }
    Ok(z)
}
