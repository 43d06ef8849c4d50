//! Log-scale quantities (pressures, escape rates) that may be `-inf`.

use std::cmp::Ordering;
use std::fmt;

/// A logarithm of a non-negative quantity: either a finite real or the
/// sentinel for `log 0`.
///
/// The sentinel is a separate variant rather than `f64::NEG_INFINITY` so that
/// empty systems never leak into arithmetic by accident.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogValue {
    Finite(f64),
    NegInfinity,
}

impl LogValue {
    /// `log(x)` for `x >= 0`; zero maps to the sentinel.
    pub fn from_linear(x: f64) -> Self {
        if x > 0.0 {
            LogValue::Finite(x.ln())
        } else {
            LogValue::NegInfinity
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            LogValue::Finite(v) => Some(v),
            LogValue::NegInfinity => None,
        }
    }

    pub fn is_neg_infinity(self) -> bool {
        matches!(self, LogValue::NegInfinity)
    }

    /// Plain float view, mapping the sentinel to `f64::NEG_INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            LogValue::Finite(v) => v,
            LogValue::NegInfinity => f64::NEG_INFINITY,
        }
    }

    pub fn exp(self) -> f64 {
        match self {
            LogValue::Finite(v) => v.exp(),
            LogValue::NegInfinity => 0.0,
        }
    }

    /// Shift by a finite amount; the sentinel absorbs.
    pub fn add(self, c: f64) -> Self {
        match self {
            LogValue::Finite(v) => LogValue::Finite(v + c),
            LogValue::NegInfinity => LogValue::NegInfinity,
        }
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (LogValue::NegInfinity, LogValue::NegInfinity) => Some(Ordering::Equal),
            (LogValue::NegInfinity, _) => Some(Ordering::Less),
            (_, LogValue::NegInfinity) => Some(Ordering::Greater),
            (LogValue::Finite(a), LogValue::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogValue::Finite(v) => f.write_str(&format_g12(*v)),
            LogValue::NegInfinity => f.write_str("-inf"),
        }
    }
}

/// Formats a float with 12 significant digits in `%g` style.
///
/// Infinities print as `inf`/`-inf` and NaN as `nan`. The output is a pure
/// function of the bit pattern, which the CSV writers rely on for byte
/// reproducibility.
pub fn format_g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        trim_fraction(&fixed)
    } else {
        let m = trim_fraction(mantissa);
        format!("{}e{}{:02}", m, if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentinel_orders_below_everything() {
        assert!(LogValue::NegInfinity < LogValue::Finite(-1e300));
        assert_eq!(LogValue::from_linear(0.0), LogValue::NegInfinity);
        assert_eq!(LogValue::NegInfinity.to_string(), "-inf");
        assert_eq!(LogValue::NegInfinity.exp(), 0.0);
    }

    #[test]
    fn g12_formatting() {
        assert_eq!(format_g12(0.0), "0");
        assert_eq!(format_g12(1.0), "1");
        assert_eq!(format_g12(0.5), "0.5");
        assert_eq!(format_g12(std::f64::consts::LN_2), "0.69314718056");
        assert_eq!(format_g12(-0.051293294387550), "-0.0512932943876");
        assert_eq!(format_g12(1.5e-9), "1.5e-09");
        assert_eq!(format_g12(123456789012345.0), "1.23456789012e+14");
        assert_eq!(format_g12(f64::NEG_INFINITY), "-inf");
    }
}
