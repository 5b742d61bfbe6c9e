//! CSV writing: header row, '.' decimal separator, ten significant digits,
//! newline-terminated records.

use std::io::Write;

use crate::error::Error;

pub const SIGNIFICANT_DIGITS: usize = 10;

/// Formats `v` with ten significant digits; scientific notation outside
/// `[1e-4, 1e15)`.
pub fn fmt_sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-4..15).contains(&exp) {
        return format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // Rounding can carry into a new leading digit (9.9999999999 -> 10.000000000).
    let digits = s.chars().filter(|c| c.is_ascii_digit()).skip_while(|&c| c == '0').count();
    if digits > SIGNIFICANT_DIGITS && decimals > 0 {
        format!("{v:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

pub fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv output: {e}"))
}
