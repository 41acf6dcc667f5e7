//! Significant-figure rounding in the style of the published results table:
//! two significant figures, at most two decimal places, no leading zero
//! before the decimal point (`.46`, `1.4`, `12`, `.06`).

use std::fmt;

use serde::{Deserialize, Serialize};

/// An exactly representable decimal `mantissa × 10^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rounded {
    pub mantissa: i64,
    pub exponent: i32,
}

impl Rounded {
    pub const ZERO: Rounded = Rounded {
        mantissa: 0,
        exponent: 0,
    };

    pub fn to_f64(self) -> f64 {
        self.mantissa as f64 * 10f64.powi(self.exponent)
    }

    /// `self − 1` expressed as a whole percentage, e.g. 2.7 → 170.
    ///
    /// Exact whenever the exponent is at least −2, which holds for every
    /// value produced by [`two_sig`].
    pub fn gain_percent(self) -> i64 {
        let shift = self.exponent + 2;
        let hundredths = if shift >= 0 {
            self.mantissa * 10i64.pow(shift as u32)
        } else {
            (self.mantissa as f64 / 10f64.powi(-shift)).round() as i64
        };
        hundredths - 100
    }
}

impl fmt::Display for Rounded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mantissa == 0 {
            return f.write_str("0");
        }
        let sign = if self.mantissa < 0 { "-" } else { "" };
        let digits = self.mantissa.unsigned_abs();
        if self.exponent >= 0 {
            return write!(f, "{sign}{}", digits * 10u64.pow(self.exponent as u32));
        }
        let decimals = (-self.exponent) as u32;
        let scale = 10u64.pow(decimals);
        let (int, frac) = (digits / scale, digits % scale);
        let frac = format!("{frac:0width$}", width = decimals as usize);
        if int == 0 {
            write!(f, "{sign}.{frac}")
        } else {
            write!(f, "{sign}{int}.{frac}")
        }
    }
}

/// Rounds half away from zero to `sig` significant figures, keeping at most
/// `max_decimals` digits after the decimal point.
pub fn round_sig(value: f64, sig: u32, max_decimals: u32) -> Rounded {
    assert!(sig >= 1, "at least one significant figure");
    if value == 0.0 || !value.is_finite() {
        return Rounded::ZERO;
    }
    let magnitude = value.abs().log10().floor() as i32;
    let mut exponent = (magnitude - (sig as i32 - 1)).max(-(max_decimals as i32));
    let mut mantissa = scaled_round(value, exponent);
    // 9.96 → 10.0 gains a digit; drop it so `sig` still holds
    if mantissa.unsigned_abs() >= 10u64.pow(sig) && exponent > magnitude - sig as i32 {
        exponent += 1;
        mantissa = scaled_round(value, exponent);
    }
    if mantissa == 0 {
        return Rounded::ZERO;
    }
    Rounded { mantissa, exponent }
}

fn scaled_round(value: f64, exponent: i32) -> i64 {
    let scaled = if exponent < 0 {
        value.abs() * 10f64.powi(-exponent)
    } else {
        value.abs() / 10f64.powi(exponent)
    };
    // Ratios of small integers land a few ulps either side of a half; the
    // nudge keeps exact halves such as 12.5 rounding up.
    let rounded = (scaled * (1.0 + 1e-12)).round() as i64;
    if value < 0.0 {
        -rounded
    } else {
        rounded
    }
}

/// Two significant figures, at most two decimals.
pub fn two_sig(value: f64) -> Rounded {
    round_sig(value, 2, 2)
}

pub fn format_two_sig(value: f64) -> String {
    two_sig(value).to_string()
}

/// Integral amounts print as integers; fractional ones (weighted coverage)
/// with up to two decimals.
pub fn format_amount(value: f64) -> String {
    if (value - value.round()).abs() < 1e-9 {
        format!("{}", value.round() as i64)
    } else {
        let s = format!("{value:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_cells() {
        assert_eq!(format_two_sig(19.0 / 41.0), ".46");
        assert_eq!(format_two_sig(35.0 / 36.0), ".97");
        assert_eq!(format_two_sig(12.16), "12");
        assert_eq!(format_two_sig(25.0 / 20.0), "1.3");
        assert_eq!(format_two_sig(19.0 / 4.0), "4.8");
        assert_eq!(format_two_sig(2025.0 / 680.0), "3.0");
        assert_eq!(format_two_sig(4.0 / 64.0), ".06");
        assert_eq!(format_two_sig(0.0), "0");
    }

    #[test]
    fn carry_into_next_magnitude() {
        assert_eq!(format_two_sig(9.96), "10");
        assert_eq!(format_two_sig(0.996), "1.0");
        assert_eq!(format_two_sig(99.6), "100");
    }

    #[test]
    fn large_and_negative_values() {
        assert_eq!(format_two_sig(166.67), "170");
        assert_eq!(format_two_sig(1234.0), "1200");
        assert_eq!(format_two_sig(-0.46), "-.46");
    }

    #[test]
    fn gains_use_rounded_ratio() {
        assert_eq!(two_sig(25.0 / 13.0).gain_percent(), 90);
        assert_eq!(two_sig(24.0 / 9.0).gain_percent(), 170);
        assert_eq!(two_sig(19.0 / 4.0).gain_percent(), 380);
        assert_eq!(two_sig(12.16).gain_percent(), 1100);
        assert_eq!(two_sig(0.88).gain_percent(), -12);
    }

    #[test]
    fn amounts() {
        assert_eq!(format_amount(19.0), "19");
        assert_eq!(format_amount(9.5), "9.5");
        assert_eq!(format_amount(2.0 / 3.0), "0.67");
    }
}
