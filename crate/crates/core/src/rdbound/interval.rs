//! Rational interval arithmetic with directed rounding: certified
//! enclosures for q^{a/b} (integer root bracketing), ln (argument-reduced
//! artanh series with explicit tail bounds), exp (reduced Taylor series),
//! and 20-decimal enclosures of π and γ. No floating point anywhere; every
//! returned pair (lo, hi) satisfies lo ≤ true value ≤ hi exactly.

use super::RdError;
use crate::rat::{decimal_round_up, pow10, rat, rat_pow, rat_str, Rat};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Iteration cap for series expansions and adaptive refinement loops.
const SERIES_CAP: u32 = 10_000;

/// Largest exponent numerator/denominator accepted by [`pow_certified`].
const EXPONENT_CAP: u64 = 10_000;

/// A certified enclosure lower ≤ true value ≤ upper of a nonnegative real,
/// with upper − lower ≤ precision·upper. Constructors widen the lower end
/// to exactly upper·(1 − precision), so the reported width scales linearly
/// with the requested precision; the upper end is never touched, and every
/// claim of the form "value < upper" stays sound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedReal {
    lower: Rat,
    upper: Rat,
    precision: Rat,
}

impl CertifiedReal {
    /// Wraps an enclosure, checking 0 ≤ lower ≤ upper and
    /// upper − lower ≤ precision·upper, then widening the lower end to
    /// upper·(1 − precision).
    pub fn from_bounds(lower: Rat, upper: Rat, precision: &Rat) -> Result<Self, RdError> {
        if precision.is_negative() || *precision >= Rat::one() {
            return Err(RdError::Precondition(format!(
                "precision must lie in [0,1[, got {}",
                rat_str(precision)
            )));
        }
        if lower.is_negative() || lower > upper {
            return Err(RdError::Precondition(format!(
                "invalid enclosure [{}, {}]",
                rat_str(&lower),
                rat_str(&upper)
            )));
        }
        if &upper - &lower > precision * &upper {
            return Err(RdError::Precondition(format!(
                "enclosure [{}, {}] wider than precision {}",
                rat_str(&lower),
                rat_str(&upper),
                rat_str(precision)
            )));
        }
        let widened = &upper * &(Rat::one() - precision);
        Ok(CertifiedReal { lower: widened, upper, precision: precision.clone() })
    }

    /// Enclosure of an exactly known nonnegative rational.
    pub fn exact(x: &Rat, precision: &Rat) -> Result<Self, RdError> {
        CertifiedReal::from_bounds(x.clone(), x.clone(), precision)
    }

    pub fn lower(&self) -> &Rat {
        &self.lower
    }

    pub fn upper(&self) -> &Rat {
        &self.upper
    }

    pub fn precision(&self) -> &Rat {
        &self.precision
    }

    pub fn width(&self) -> Rat {
        &self.upper - &self.lower
    }

    pub fn contains(&self, x: &Rat) -> bool {
        &self.lower <= x && x <= &self.upper
    }

    /// Interval product; the result's precision is the sum of the
    /// operands' precisions (sound for relative widths of positive
    /// intervals).
    pub fn mul(&self, other: &CertifiedReal) -> Result<CertifiedReal, RdError> {
        CertifiedReal::from_bounds(
            &self.lower * &other.lower,
            &self.upper * &other.upper,
            &(&self.precision + &other.precision),
        )
    }

    /// Exact positive scaling.
    pub fn mul_rat(&self, x: &Rat) -> Result<CertifiedReal, RdError> {
        if !x.is_positive() {
            return Err(RdError::Domain(format!(
                "scale factor must be positive, got {}",
                rat_str(x)
            )));
        }
        CertifiedReal::from_bounds(&self.lower * x, &self.upper * x, &self.precision)
    }

    /// Exact positive division.
    pub fn div_rat(&self, x: &Rat) -> Result<CertifiedReal, RdError> {
        if !x.is_positive() {
            return Err(RdError::Domain(format!(
                "divisor must be positive, got {}",
                rat_str(x)
            )));
        }
        CertifiedReal::from_bounds(&self.lower / x, &self.upper / x, &self.precision)
    }

    /// Upper end rounded up to `digits` significant digits, rendered as a
    /// sound strict upper-bound claim: "< 78.42691 (certified)".
    pub fn display_upper(&self, digits: u32) -> String {
        format!("< {} (certified)", decimal_round_up(&self.upper, digits))
    }
}

impl fmt::Display for CertifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_upper(DISPLAY_DIGITS))
    }
}

/// Default significant digits for displayed certified bounds.
pub const DISPLAY_DIGITS: u32 = 7;

#[derive(Serialize, Deserialize)]
struct CertifiedRealRepr {
    lower: String,
    upper: String,
}

impl Serialize for CertifiedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CertifiedRealRepr { lower: rat_str(&self.lower), upper: rat_str(&self.upper) }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CertifiedReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = CertifiedRealRepr::deserialize(deserializer)?;
        let lower = crate::rat::parse_rat(&repr.lower).map_err(D::Error::custom)?;
        let upper = crate::rat::parse_rat(&repr.upper).map_err(D::Error::custom)?;
        if lower.is_negative() || lower > upper {
            return Err(D::Error::custom(format!(
                "invalid certified interval [{}, {}]",
                repr.lower, repr.upper
            )));
        }
        // The wire format carries no precision; reconstruct the achieved
        // relative width.
        let precision = if upper.is_zero() {
            Rat::zero()
        } else {
            (&upper - &lower) / &upper
        };
        Ok(CertifiedReal { lower, upper, precision })
    }
}

/// Enclosure of base^exp for rational base > 0 and rational exp, with
/// relative width ≤ eps. For exponents a/b with small a and b the integer
/// power is exact and the b-th root is bracketed by integer nth_root on
/// the value scaled by 2^{s·b}, where s grows as eps shrinks (so halving
/// eps at least halves the width); larger exponents fall back to
/// exp(exp·ln base). Negative exponents and bases below 1 go through the
/// reciprocal.
pub fn pow_certified(base: &Rat, exp: &Rat, eps: &Rat) -> Result<(Rat, Rat), RdError> {
    if !base.is_positive() {
        return Err(RdError::Domain(format!(
            "power base must be positive, got {}",
            rat_str(base)
        )));
    }
    if !eps.is_positive() || *eps >= Rat::one() {
        return Err(RdError::Precondition(format!(
            "relative width target must lie in ]0,1[, got {}",
            rat_str(eps)
        )));
    }
    if exp.is_zero() || base.is_one() {
        return Ok((Rat::one(), Rat::one()));
    }
    if exp.is_negative() {
        let (lo, hi) = pow_certified(base, &(-exp), eps)?;
        return Ok((Rat::one() / hi, Rat::one() / lo));
    }
    if *base < Rat::one() {
        let (lo, hi) = pow_certified(&(Rat::one() / base), exp, eps)?;
        return Ok((Rat::one() / hi, Rat::one() / lo));
    }
    // base > 1, exp > 0.
    let a = exp.numer().magnitude().to_u64().filter(|&a| a <= EXPONENT_CAP);
    let b = exp.denom().magnitude().to_u64().filter(|&b| b <= EXPONENT_CAP);
    match (a, b) {
        (Some(a), Some(1)) => {
            let y = rat_pow(base, a as u32);
            Ok((y.clone(), y))
        }
        (Some(a), Some(b)) => root_enclosure(&rat_pow(base, a as u32), b as u32, eps),
        _ => pow_via_exp(base, exp, eps),
    }
}

/// Fallback enclosure of base^exp = e^{exp·ln base} for base > 1 and
/// exp > 0 whose reduced numerator or denominator exceeds the exact-root
/// cap; refines the absolute width target until the relative width is
/// within eps.
fn pow_via_exp(base: &Rat, exp: &Rat, eps: &Rat) -> Result<(Rat, Rat), RdError> {
    let mut eps_abs = eps.clone();
    for _ in 0..60 {
        let (ln_lo, ln_hi) = ln_point(base, &eps_abs)?;
        let (lo, _) = exp_point(&(exp * &ln_lo), &eps_abs)?;
        let (_, hi) = exp_point(&(exp * &ln_hi), &eps_abs)?;
        if &hi - &lo <= eps * &hi {
            return Ok((lo, hi));
        }
        eps_abs /= rat(4, 1);
    }
    Err(RdError::Precondition("power enclosure did not reach the requested width".to_owned()))
}

/// Enclosure [n/2^s, (n+1)/2^s] of y^{1/b} for rational y ≥ 1, where
/// n = ⌊(⌊y·2^{sb}⌋)^{1/b}⌋; relative width 1/n ≤ eps/8 by the choice of s.
fn root_enclosure(y: &Rat, b: u32, eps: &Rat) -> Result<(Rat, Rat), RdError> {
    let mut s = 0u32;
    let mut pow2 = Rat::one();
    let target = rat(8, 1) / eps;
    while pow2 < target {
        s += 1;
        pow2 *= rat(2, 1);
        if s > 1_000 {
            return Err(RdError::Precondition("width target too small".to_owned()));
        }
    }
    // floor(y · 2^{s·b}) as a nonnegative integer.
    let scaled_num = y.numer().magnitude() << (s as usize * b as usize);
    let w: BigUint = scaled_num / y.denom().magnitude();
    let n = w.nth_root(b);
    let denom = BigInt::from(BigUint::one() << s);
    Ok((
        Rat::new(BigInt::from(n.clone()), denom.clone()),
        Rat::new(BigInt::from(n + BigUint::one()), denom),
    ))
}

/// Enclosure of artanh(z) for |z| < 1 via the odd power series, with the
/// closed-form geometric tail bound |z|^{2J+3}/((2J+3)(1−z²)); the width
/// is at most eps (absolute).
fn artanh_enclosure(z: &Rat, eps: &Rat) -> Result<(Rat, Rat), RdError> {
    let zsq = z * z;
    if zsq >= Rat::one() {
        return Err(RdError::Domain(format!("artanh argument {} out of range", rat_str(z))));
    }
    let gap = Rat::one() - &zsq;
    let mut sum = Rat::zero();
    let mut pow = z.clone();
    for j in 0..SERIES_CAP {
        sum += &pow / rat((2 * j + 1) as i64, 1);
        pow *= &zsq;
        // pow is now z^{2j+3}.
        let tail = pow.abs() / (rat((2 * j + 3) as i64, 1) * &gap);
        if tail <= *eps {
            return Ok(if z.is_negative() {
                (&sum - &tail, sum.clone())
            } else {
                (sum.clone(), &sum + &tail)
            });
        }
    }
    Err(RdError::Precondition("artanh series did not converge within cap".to_owned()))
}

/// Enclosure of ln 2 = 2·artanh(1/3) with absolute width ≤ eps.
fn ln2_enclosure(eps: &Rat) -> Result<(Rat, Rat), RdError> {
    let (lo, hi) = artanh_enclosure(&rat(1, 3), &(eps / rat(2, 1)))?;
    Ok((lo * rat(2, 1), hi * rat(2, 1)))
}

/// Enclosure of ln x for rational x > 0 with absolute width ≤ eps:
/// x = 2^k·m with m ∈ [3/4, 3/2), ln m = 2·artanh((m−1)/(m+1)).
pub fn ln_point(x: &Rat, eps: &Rat) -> Result<(Rat, Rat), RdError> {
    if !x.is_positive() {
        return Err(RdError::Domain(format!("log argument must be positive, got {}", rat_str(x))));
    }
    if !eps.is_positive() {
        return Err(RdError::Precondition("width target must be positive".to_owned()));
    }
    let mut m = x.clone();
    let mut k = 0i64;
    let upper_cut = rat(3, 2);
    let lower_cut = rat(3, 4);
    while m >= upper_cut {
        m /= rat(2, 1);
        k += 1;
        if k > 100_000 {
            return Err(RdError::Precondition("log argument out of supported range".to_owned()));
        }
    }
    while m < lower_cut {
        m *= rat(2, 1);
        k -= 1;
        if k < -100_000 {
            return Err(RdError::Precondition("log argument out of supported range".to_owned()));
        }
    }
    let z = (&m - &Rat::one()) / (&m + &Rat::one());
    let (at_lo, at_hi) = artanh_enclosure(&z, &(eps / rat(4, 1)))?;
    let (m_lo, m_hi) = (at_lo * rat(2, 1), at_hi * rat(2, 1));
    if k == 0 {
        return Ok((m_lo, m_hi));
    }
    let (l2_lo, l2_hi) = ln2_enclosure(&(eps / rat(2 * k.abs(), 1)))?;
    let k_rat = rat(k, 1);
    if k > 0 {
        Ok((&k_rat * &l2_lo + m_lo, &k_rat * &l2_hi + m_hi))
    } else {
        // Negative multiplier swaps the ln 2 endpoints.
        Ok((&k_rat * &l2_hi + m_lo, &k_rat * &l2_lo + m_hi))
    }
}

/// Enclosure of e^x for rational x ≥ 0 with absolute width ≤ eps:
/// h = x/2^k ≤ 1/2, Taylor with factorial tail bound, then k interval
/// squarings.
pub fn exp_point(x: &Rat, eps: &Rat) -> Result<(Rat, Rat), RdError> {
    if x.is_negative() {
        return Err(RdError::Domain("exp argument must be nonnegative here".to_owned()));
    }
    if !eps.is_positive() {
        return Err(RdError::Precondition("width target must be positive".to_owned()));
    }
    let half = rat(1, 2);
    let mut k = 0u32;
    let mut h = x.clone();
    while h > half {
        h /= rat(2, 1);
        k += 1;
        if k > 64 {
            return Err(RdError::Precondition("exp argument out of supported range".to_owned()));
        }
    }
    // Width inflates by at most 2·e per squaring; 6^k absorbs that.
    let inner_eps = eps / rat_pow(&rat(6, 1), k);
    let mut sum = Rat::one();
    let mut term = Rat::one();
    let mut enclosure = None;
    for j in 1..SERIES_CAP {
        term = &term * &h / rat(j as i64, 1);
        sum += &term;
        let next = &term * &h / rat((j + 1) as i64, 1);
        let tail = &next * rat(2, 1);
        if tail <= inner_eps {
            enclosure = Some((sum.clone(), &sum + &tail));
            break;
        }
    }
    let (mut lo, mut hi) =
        enclosure.ok_or_else(|| RdError::Precondition("exp series did not converge".to_owned()))?;
    for _ in 0..k {
        lo = &lo * &lo;
        hi = &hi * &hi;
    }
    Ok((lo, hi))
}

/// 20-decimal enclosure of π.
pub fn pi_enclosure() -> (Rat, Rat) {
    let denom = pow10(20);
    let lo: BigInt = "314159265358979323846".parse().expect("literal");
    (
        Rat::new(lo.clone(), denom.clone()),
        Rat::new(lo + BigInt::one(), denom),
    )
}

/// 20-decimal enclosure of the Euler–Mascheroni constant γ.
pub fn gamma_enclosure() -> (Rat, Rat) {
    let denom = pow10(20);
    let lo: BigInt = "57721566490153286060".parse().expect("literal");
    (
        Rat::new(lo.clone(), denom.clone()),
        Rat::new(lo + BigInt::one(), denom),
    )
}
