use std::cmp::Ordering;
use std::fmt;

use chrono::NaiveDate;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::Rational;

/// Maximum number of fractional digits printed for a non-terminating decimal.
pub const MAX_FRACTION_DIGITS: u32 = 6;

/// A cell or an intermediate/answer value.
///
/// Table cells are only ever `Int`, `Text` or `Date`. `Decimal` comes out of
/// `AVG` and decimal literals, `Bool` out of comparisons in the select list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum Value {
    Int(i64),
    Decimal(Rational),
    Text(String),
    Date(NaiveDate),
    Bool(bool),
}

/// Returned when two values cannot be compared or combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incomparable;

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "INT",
            Value::Decimal(_) => "DECIMAL",
            Value::Text(_) => "TEXT",
            Value::Date(_) => "DATE",
            Value::Bool(_) => "BOOL",
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Int(_) | Value::Decimal(_))
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            Value::Int(i) => Some(Rational::from_integer(*i)),
            Value::Decimal(r) => Some(*r),
            _ => None,
        }
    }

    /// Total order within compatible types.
    ///
    /// Numbers compare numerically across `Int`/`Decimal`; a `Date` compares
    /// with a `Text` that parses as an ISO date.
    pub fn compare(&self, other: &Value) -> Result<Ordering, Incomparable> {
        use Value::*;
        match (self, other) {
            (Int(a), Int(b)) => Ok(a.cmp(b)),
            (Bool(a), Bool(b)) => Ok(a.cmp(b)),
            (Text(a), Text(b)) => Ok(a.cmp(b)),
            (Date(a), Date(b)) => Ok(a.cmp(b)),
            (Date(a), Text(b)) => parse_date(b).map(|b| a.cmp(&b)).ok_or(Incomparable),
            (Text(a), Date(b)) => parse_date(a).map(|a| a.cmp(b)).ok_or(Incomparable),
            (a, b) if a.is_numeric() && b.is_numeric() => {
                Ok(a.as_rational().unwrap().cmp(&b.as_rational().unwrap()))
            }
            _ => Err(Incomparable),
        }
    }

    /// Canonical answer serialization of a single cell.
    pub fn render(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Decimal(r) => format_decimal(r),
            Value::Text(s) => s.clone(),
            Value::Date(d) => d.format("%Y-%m-%d").to_string(),
            Value::Bool(b) => if *b { "1" } else { "0" }.to_string(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    if s.len() != 10 {
        return None;
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

pub fn format_date(d: NaiveDate) -> String {
    d.format("%Y-%m-%d").to_string()
}

/// Parses `123`, `-4`, `146.5` or `0.25` into an exact rational.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return None;
    }
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    if frac_part.len() > 17 || int_part.len() > 18 {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let denom = 10_i64.checked_pow(frac_part.len() as u32)?;
    let r = Rational::new(numer, denom);
    Some(if neg { -r } else { r })
}

/// Renders a rational with the fewest digits that represent it exactly.
///
/// Terminating fractions print exactly (`146.5`, never `146.50`). Anything
/// else is rounded half away from zero to [`MAX_FRACTION_DIGITS`] places and
/// trailing zeros are trimmed.
pub fn format_decimal(r: &Rational) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    let neg = r.is_negative();
    let numer = r.numer().abs() as i128;
    let denom = *r.denom() as i128;

    let mut rest = denom;
    let (mut twos, mut fives) = (0u32, 0u32);
    while rest % 2 == 0 {
        rest /= 2;
        twos += 1;
    }
    while rest % 5 == 0 {
        rest /= 5;
        fives += 1;
    }
    let (digits, scaled) = if rest == 1 {
        let digits = twos.max(fives);
        (digits, numer * 10_i128.pow(digits) / denom)
    } else {
        let digits = MAX_FRACTION_DIGITS;
        let scale = 10_i128.pow(digits);
        let q = numer * scale / denom;
        let rem = numer * scale % denom;
        (digits, if rem * 2 >= denom { q + 1 } else { q })
    };
    let scale = 10_i128.pow(digits);
    let int_part = scaled / scale;
    let mut frac = format!("{:0width$}", scaled % scale, width = digits as usize);
    while frac.ends_with('0') {
        frac.pop();
    }
    let sign = if neg && (int_part != 0 || !frac.is_empty()) { "-" } else { "" };
    if frac.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac}")
    }
}

/// True when the string is an integer or decimal number.
pub fn looks_numeric(s: &str) -> bool {
    parse_decimal(s).is_some()
}

#[allow(dead_code)]
pub(crate) fn rational_is_zero(r: &Rational) -> bool {
    r.is_zero()
}
