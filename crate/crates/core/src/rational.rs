//! Exact rational time values.
//!
//! Onsets and durations are kept as rationals in units of quarter-note beats
//! so that onset equality (which drives chord detection) never depends on
//! float rounding. The text form is an exact decimal when the denominator is
//! of the form 2^a·5^b, and `n/d` otherwise; both forms parse back exactly.

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

/// Time in quarter-note beats, exact.
pub type Beats = Rational64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BeatsParseError {
    #[error("empty beats value")]
    Empty,
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("cannot parse `{0}` as a beats value")]
    Malformed(String),
}

/// Parse `3`, `-1.75`, or `7/8` into an exact rational.
pub fn parse_beats(s: &str) -> Result<Beats, BeatsParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(BeatsParseError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: i64 = num
            .trim()
            .parse()
            .map_err(|_| BeatsParseError::Malformed(s.to_string()))?;
        let d: i64 = den
            .trim()
            .parse()
            .map_err(|_| BeatsParseError::Malformed(s.to_string()))?;
        if d == 0 {
            return Err(BeatsParseError::ZeroDenominator(s.to_string()));
        }
        return Ok(Beats::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.trim_start().starts_with('-');
        let int_part: i64 = if int == "-" || int.is_empty() {
            0
        } else {
            int.parse()
                .map_err(|_| BeatsParseError::Malformed(s.to_string()))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(BeatsParseError::Malformed(s.to_string()));
        }
        let digits: i64 = frac
            .parse()
            .map_err(|_| BeatsParseError::Malformed(s.to_string()))?;
        let scale = 10i64
            .checked_pow(frac.len() as u32)
            .ok_or_else(|| BeatsParseError::Malformed(s.to_string()))?;
        let frac_part = Beats::new(digits, scale);
        let whole = Beats::from_integer(int_part.abs());
        let magnitude = whole + frac_part;
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let n: i64 = s
        .parse()
        .map_err(|_| BeatsParseError::Malformed(s.to_string()))?;
    Ok(Beats::from_integer(n))
}

/// Format as an exact decimal when possible, else `n/d`.
pub fn format_beats(b: Beats) -> String {
    let denom = *b.denom();
    if denom == 1 {
        return b.numer().to_string();
    }
    // denominators with only factors 2 and 5 terminate in base 10
    let mut d = denom;
    let mut twos = 0u32;
    let mut fives = 0u32;
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return format!("{}/{}", b.numer(), b.denom());
    }
    let places = twos.max(fives);
    let scaled = b * Beats::from_integer(10i64.pow(places));
    debug_assert!(scaled.is_integer());
    let scaled = scaled.to_integer();
    let sign = if scaled.is_negative() { "-" } else { "" };
    let abs = scaled.abs();
    let base = 10i64.pow(places);
    format!("{}{}.{:0width$}", sign, abs / base, abs % base, width = places as usize)
}

/// Lossy conversion for plotting and JSON output.
pub fn beats_to_f64(b: Beats) -> f64 {
    b.to_f64().unwrap_or_else(|| {
        debug_assert!(false, "beats value {b} out of f64 range");
        0.0
    })
}

/// floor(value / unit) for positive `unit`, exact.
pub fn floor_div(value: Beats, unit: Beats) -> i64 {
    debug_assert!(unit > Beats::zero());
    (value / unit).floor().to_integer()
}

/// Serde adapter keeping beats exact in JSON (`"1/3"`, `"0.5"`, `"4"`).
pub mod beats_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{format_beats, parse_beats, Beats};

    pub fn serialize<S: Serializer>(b: &Beats, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_beats(*b))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Beats, D::Error> {
        let text = String::deserialize(d)?;
        parse_beats(&text).map_err(serde::de::Error::custom)
    }
}
