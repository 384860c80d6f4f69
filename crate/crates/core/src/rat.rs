//! Exact rational scalars: parsing, canonical `p/q` formatting, and
//! directed decimal rendering used when displaying certified bounds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator (both enforced by `num_rational`).
pub type Rat = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RatParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Shorthand constructor from machine integers. Panics on zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rat {
    assert!(denom != 0, "zero denominator");
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Integer as a rational.
pub fn rat_int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Unsigned integer as a rational.
pub fn rat_u64(n: u64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// 10^n as a big integer.
pub fn pow10(n: u32) -> BigInt {
    BigInt::from(10u32).pow(n)
}

/// r^e by binary powering, e >= 0.
pub fn rat_pow(r: &Rat, e: u32) -> Rat {
    let mut base = r.clone();
    let mut exp = e;
    let mut acc = Rat::one();
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= &base;
        }
        exp >>= 1;
        if exp > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Parses `p/q`, integer, or decimal/scientific literals (`-5`, `7/24`,
/// `68.3636`, `1e-8`, `2.5E3`) into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, RatParseError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(RatParseError::Empty);
    }
    if let Some((n, d)) = t.split_once('/') {
        let numer: BigInt = n
            .trim()
            .parse()
            .map_err(|_| RatParseError::Invalid(s.to_owned()))?;
        let denom: BigInt = d
            .trim()
            .parse()
            .map_err(|_| RatParseError::Invalid(s.to_owned()))?;
        if denom.is_zero() {
            return Err(RatParseError::ZeroDenominator(s.to_owned()));
        }
        return Ok(BigRational::new(numer, denom));
    }
    let (mant, exp10) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = t[i + 1..]
                .parse()
                .map_err(|_| RatParseError::Invalid(s.to_owned()))?;
            (&t[..i], e)
        }
        None => (t, 0i32),
    };
    let (negative, digits) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(RatParseError::Invalid(s.to_owned()));
    }
    let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return Err(RatParseError::Invalid(s.to_owned()));
    }
    let joined = format!("{int_part}{frac_part}");
    let mut mantissa: BigInt = joined.parse().expect("digit string");
    if negative {
        mantissa = -mantissa;
    }
    let mut value = BigRational::new(mantissa, pow10(frac_part.len() as u32));
    if exp10 >= 0 {
        value *= BigRational::from_integer(pow10(exp10 as u32));
    } else {
        value /= BigRational::from_integer(pow10(exp10.unsigned_abs()));
    }
    Ok(value)
}

/// Canonical display: `p/q`, with `/1` elided for integers.
pub fn rat_str(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serde adapter serializing a [`Rat`] as its canonical `p/q` string.
pub mod serde_str {
    use super::{parse_rat, rat_str, Rat};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rat_str(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(de::Error::custom)
    }
}

/// Serde adapter for `Option<Rat>` as an optional `p/q` string.
pub mod serde_str_opt {
    use super::{parse_rat, rat_str, Rat};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(v) => s.serialize_some(&rat_str(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rat>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|v| parse_rat(&v).map_err(de::Error::custom)).transpose()
    }
}

/// Decimal string of `r` with `sig` significant digits, rounded toward +∞.
pub fn decimal_round_up(r: &Rat, sig: u32) -> String {
    decimal_directed(r, sig, true)
}

/// Decimal string of `r` with `sig` significant digits, rounded toward −∞.
pub fn decimal_round_down(r: &Rat, sig: u32) -> String {
    decimal_directed(r, sig, false)
}

fn decimal_directed(r: &Rat, sig: u32, up: bool) -> String {
    let sig = sig.max(1);
    if r.is_zero() {
        return "0".to_owned();
    }
    if r.is_negative() {
        return format!("-{}", decimal_directed(&-r, sig, !up));
    }
    // e = floor(log10 r), found by exact comparison against powers of 10.
    let ten = rat_int(10);
    let mut e: i64 = 0;
    let mut p = Rat::one();
    while &p > r {
        p /= &ten;
        e -= 1;
    }
    while &p * &ten <= *r {
        p *= &ten;
        e += 1;
    }
    let shift = sig as i64 - 1 - e;
    let scaled = if shift >= 0 {
        r * BigRational::from_integer(pow10(shift as u32))
    } else {
        r / BigRational::from_integer(pow10((-shift) as u32))
    };
    let n = if up { scaled.ceil() } else { scaled.floor() }.to_integer();
    render_decimal(&n, e + 1 - sig as i64)
}

/// Renders n·10^exp (n > 0) in plain decimal notation, trimming redundant
/// trailing zeros after the point.
fn render_decimal(n: &BigInt, exp: i64) -> String {
    let digits = n.to_string();
    let mut out = if exp >= 0 {
        format!("{digits}{}", "0".repeat(exp as usize))
    } else {
        let point = digits.len() as i64 + exp;
        if point > 0 {
            let (a, b) = digits.split_at(point as usize);
            format!("{a}.{b}")
        } else {
            format!("0.{}{}", "0".repeat((-point) as usize), digits)
        }
    };
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

/// Exact conversion to u64 when the rational is a small nonnegative integer.
pub fn to_u64(r: &Rat) -> Option<u64> {
    if r.is_integer() && !r.is_negative() {
        r.numer().to_u64()
    } else {
        None
    }
}
