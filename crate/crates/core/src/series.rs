//! Golod–Shafarevich series in exact rational arithmetic: evaluation,
//! negativity witnesses, depth-weighted cut operations, and cut schedules.
//!
//! A series
//!
//! ```text
//! P(t) = 1 − d·t + Σ_{k≥2} r_k t^k + Σ_i c_i t^{m_i} / (1 − ρ_i t)
//! ```
//!
//! encodes a minimal pro-p presentation with `d` generators, `r_k`
//! relations of depth `k`, and optional geometric relation tails. A point
//! t₀ ∈ ]0,1[ with P(t₀) ≤ 0 certifies that the presented group is
//! infinite; P(t₀) < 0 additionally leaves margin for further cuts. No
//! floating point is used anywhere in this module.

use crate::rat::{rat_pow, rat_str, rat_u64, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Hard cap on exact power iterations (depth searches, schedule steps).
pub const ITERATION_CAP: u32 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("depth error: {0}")]
    Depth(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("iteration cap exceeded: {0}")]
    Overflow(String),
}

/// One geometric tail c·t^start/(1 − ratio·t), i.e. relations of count
/// c·ratio^j at every depth start + j.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tail {
    #[serde(with = "crate::rat::serde_str")]
    pub coeff: Rat,
    pub start: u32,
    #[serde(with = "crate::rat::serde_str")]
    pub ratio: Rat,
}

/// A relation multiset entry: `count` relations of depth `depth`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationTerm {
    pub depth: u32,
    pub count: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesRepr {
    d: u32,
    #[serde(default)]
    relations: Vec<RelationTerm>,
    #[serde(default)]
    tails: Vec<Tail>,
}

/// Golod–Shafarevich series for a minimal presentation: generator count,
/// relation depths (all ≥ 2), and optional geometric tails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRepr", into = "SeriesRepr")]
pub struct GSSeries {
    d: u32,
    relations: BTreeMap<u32, u64>,
    tails: Vec<Tail>,
}

impl TryFrom<SeriesRepr> for GSSeries {
    type Error = SeriesError;

    fn try_from(repr: SeriesRepr) -> Result<Self, SeriesError> {
        let mut s = GSSeries::new(repr.d);
        for term in repr.relations {
            s = s.cut(term.depth, term.count)?;
        }
        for tail in repr.tails {
            s = s.add_scaled_tail(&tail.coeff, tail.start, &tail.ratio)?;
        }
        Ok(s)
    }
}

impl From<GSSeries> for SeriesRepr {
    fn from(s: GSSeries) -> SeriesRepr {
        SeriesRepr {
            d: s.d,
            relations: s
                .relations
                .iter()
                .map(|(&depth, &count)| RelationTerm { depth, count })
                .collect(),
            tails: s.tails,
        }
    }
}

/// Outcome of a witness search. Both `Cuttable` and `BoundaryInfinite`
/// certify that the presented group is infinite; only `Cuttable` leaves a
/// strict margin −P(t₀) for further cuts. `Inconclusive` never asserts
/// finiteness; for purely quadratic series a failed search is upgraded to
/// a proof of positivity on ]0,1[ by an exact discriminant argument.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    #[serde(rename = "CUTTABLE")]
    Cuttable {
        #[serde(with = "crate::rat::serde_str")]
        t0: Rat,
        #[serde(with = "crate::rat::serde_str")]
        value: Rat,
    },
    #[serde(rename = "BOUNDARY_INFINITE")]
    BoundaryInfinite {
        #[serde(with = "crate::rat::serde_str")]
        t0: Rat,
    },
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive { provably_positive: bool },
}

impl Verdict {
    /// True when the verdict certifies the group is infinite.
    pub fn certifies_infinite(&self) -> bool {
        matches!(self, Verdict::Cuttable { .. } | Verdict::BoundaryInfinite { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Cuttable { t0, value } => {
                write!(f, "CUTTABLE at t0={} (P(t0) = {})", rat_str(t0), rat_str(value))
            }
            Verdict::BoundaryInfinite { t0 } => {
                write!(f, "BOUNDARY_INFINITE at t0={}", rat_str(t0))
            }
            Verdict::Inconclusive { provably_positive: true } => {
                write!(f, "INCONCLUSIVE (provably positive on ]0,1[)")
            }
            Verdict::Inconclusive { provably_positive: false } => write!(f, "INCONCLUSIVE"),
        }
    }
}

impl GSSeries {
    /// Series 1 − d·t with no relations.
    pub fn new(d: u32) -> Self {
        GSSeries { d, relations: BTreeMap::new(), tails: Vec::new() }
    }

    /// Series 1 − d·t + Σ count·t^depth; every depth must be ≥ 2.
    pub fn with_relations(d: u32, terms: &[(u32, u64)]) -> Result<Self, SeriesError> {
        let mut s = GSSeries::new(d);
        for &(depth, count) in terms {
            s = s.cut(depth, count)?;
        }
        Ok(s)
    }

    /// Series 1 − d·t + r·t².
    pub fn quadratic(d: u32, r: u64) -> Self {
        GSSeries::with_relations(d, &[(2, r)]).expect("depth 2 is valid")
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Relation count at one depth.
    pub fn relation_count(&self, depth: u32) -> u64 {
        self.relations.get(&depth).copied().unwrap_or(0)
    }

    /// Total polynomial relation count over all depths (tails excluded).
    pub fn relation_total(&self) -> u64 {
        self.relations.values().sum()
    }

    pub fn relations(&self) -> &BTreeMap<u32, u64> {
        &self.relations
    }

    pub fn tails(&self) -> &[Tail] {
        &self.tails
    }

    /// True when the series is 1 − d·t + r·t² with no tails.
    pub fn is_quadratic_only(&self) -> bool {
        self.tails.is_empty() && self.relations.keys().all(|&k| k == 2)
    }

    /// Exact value of P(t) for t ∈ ]0,1[ with every tail satisfying
    /// ratio·t < 1 (the closed-form tail sum requires convergence).
    pub fn eval(&self, t: &Rat) -> Result<Rat, SeriesError> {
        let one = Rat::one();
        if !t.is_positive() || *t >= one {
            return Err(SeriesError::Domain(format!(
                "evaluation point {} outside ]0,1[",
                rat_str(t)
            )));
        }
        let mut acc = &one - &(rat_u64(self.d as u64) * t);
        for (&depth, &count) in &self.relations {
            if count > 0 {
                acc += rat_u64(count) * rat_pow(t, depth);
            }
        }
        for tail in &self.tails {
            let rho_t = &tail.ratio * t;
            if rho_t >= one {
                return Err(SeriesError::Domain(format!(
                    "tail with ratio {} diverges at t = {} (ratio*t >= 1)",
                    rat_str(&tail.ratio),
                    rat_str(t)
                )));
            }
            acc += &tail.coeff * rat_pow(t, tail.start) / (&one - &rho_t);
        }
        Ok(acc)
    }

    /// All tails convergent at t (ratio·t < 1)?
    fn tails_converge_at(&self, t: &Rat) -> bool {
        let one = Rat::one();
        self.tails.iter().all(|tail| &tail.ratio * t < one)
    }

    /// Searches for t₀ ∈ ]0,1[ with P(t₀) ≤ 0. A quadratic-only series
    /// whose positivity on ]0,1[ follows exactly from the discriminant
    /// skips the search, since no witness can exist. Otherwise tries the
    /// canonical point t₀ = d/(2·r_total) first (when it lies in ]0,1[),
    /// then the dyadic grid j/2^n for n = 1..=max_depth with odd j
    /// ascending, skipping points where a tail diverges. The first
    /// nonpositive value wins: exactly zero yields `BoundaryInfinite`,
    /// negative yields `Cuttable`. An exhausted search yields
    /// `Inconclusive`, never a finiteness claim; the cost grows as
    /// 2^max_depth.
    pub fn find_witness(&self, max_depth: u32) -> Verdict {
        if self.provably_positive() {
            return Verdict::Inconclusive { provably_positive: true };
        }
        let try_point = |t: &Rat| -> Option<Verdict> {
            if !self.tails_converge_at(t) {
                return None;
            }
            let value = self.eval(t).expect("point pre-validated");
            if value.is_zero() {
                Some(Verdict::BoundaryInfinite { t0: t.clone() })
            } else if value.is_negative() {
                Some(Verdict::Cuttable { t0: t.clone(), value })
            } else {
                None
            }
        };
        let r_total = self.relation_total();
        if self.d > 0 && r_total > 0 {
            let t0 = Rat::new(BigInt::from(self.d), BigInt::from(2u128 * r_total as u128));
            if t0.is_positive() && t0 < Rat::one() {
                if let Some(v) = try_point(&t0) {
                    return v;
                }
            }
        }
        for n in 1..=max_depth {
            let denom = BigInt::from(1u8) << n;
            let mut j = BigInt::from(1u8);
            while j < denom {
                let t = Rat::new(j.clone(), denom.clone());
                if let Some(v) = try_point(&t) {
                    return v;
                }
                j += 2;
            }
        }
        Verdict::Inconclusive { provably_positive: self.provably_positive() }
    }

    /// Exact positivity proof for purely quadratic series. For
    /// P = 1 − d·t + r·t²: positive on ]0,1[ iff the discriminant d² − 4r
    /// is negative, or both roots lie at or beyond 1 (d ≥ 2r and
    /// 1 − d + r ≥ 0), or r = 0 with d ≤ 1. Returns false for any series
    /// with tails or relations of depth > 2.
    fn provably_positive(&self) -> bool {
        if !self.is_quadratic_only() {
            return false;
        }
        let r = self.relation_count(2);
        if r == 0 {
            return self.d <= 1;
        }
        let d = u128::from(self.d);
        let disc_negative = d * d < 4 * r as u128;
        if disc_negative {
            return true;
        }
        d >= 2 * r as u128 && 1 + r as u128 >= d
    }

    /// Adds `count` relations of the given depth. Depth-1 cuts are
    /// rejected: a depth-1 element is a generator of a minimal
    /// presentation, and cutting it changes d rather than adding a
    /// relation term. eval(cut(s,k,c), t) = eval(s,t) + c·t^k.
    pub fn cut(&self, depth: u32, count: u64) -> Result<Self, SeriesError> {
        if depth < 2 {
            return Err(SeriesError::Depth(format!(
                "cut depth must be >= 2, got {depth}"
            )));
        }
        let mut out = self.clone();
        if count > 0 {
            *out.relations.entry(depth).or_insert(0) += count;
        }
        Ok(out)
    }

    /// Appends the unit geometric tail t^k_start/(1 − ratio·t): one
    /// relation at each depth k_start + j weighted by ratio^j. ratio = 1
    /// gives t^k'/(1−t); ratio = 0 degenerates to the single monomial
    /// t^k_start, i.e. cut(s, k_start, 1).
    pub fn cut_tail(&self, k_start: u32, ratio: &Rat) -> Result<Self, SeriesError> {
        self.add_scaled_tail(&Rat::one(), k_start, ratio)
    }

    /// Appends the tail coeff·t^start/(1 − ratio·t). A tail with
    /// coeff = λ^m, start = m, ratio = λ models Σ_j λ^{m+j} t^{m+j}.
    pub fn add_scaled_tail(&self, coeff: &Rat, start: u32, ratio: &Rat) -> Result<Self, SeriesError> {
        if start < 2 {
            return Err(SeriesError::Depth(format!(
                "tail start depth must be >= 2, got {start}"
            )));
        }
        if ratio.is_negative() {
            return Err(SeriesError::Domain(format!(
                "tail ratio must be >= 0, got {}",
                rat_str(ratio)
            )));
        }
        if !coeff.is_positive() {
            return Err(SeriesError::Domain(format!(
                "tail coefficient must be > 0, got {}",
                rat_str(coeff)
            )));
        }
        let mut out = self.clone();
        out.tails.push(Tail { coeff: coeff.clone(), start, ratio: ratio.clone() });
        Ok(out)
    }

    /// Greedy infinite cut schedule at a strict witness t₀: each emitted
    /// depth k_i is the least k ≥ k_{i−1} (and ≥ 2) whose full geometric
    /// continuation t₀^k/(1−t₀) still fits in the remaining budget, and
    /// t₀^{k_i} is then spent. Consequently every prefix sum Σ t₀^{k_i}
    /// stays ≤ budget_fraction·δ where δ = −P(t₀), so every cut prefix
    /// keeps P(t₀) ≤ −(1−budget_fraction)·δ < 0.
    pub fn frobenius_schedule(
        &self,
        t0: &Rat,
        budget_fraction: &Rat,
    ) -> Result<FrobeniusSchedule, SeriesError> {
        let value = self.eval(t0)?;
        if !value.is_negative() {
            return Err(SeriesError::Precondition(format!(
                "schedule requires P(t0) < 0, got P({}) = {}",
                rat_str(t0),
                rat_str(&value)
            )));
        }
        if !budget_fraction.is_positive() || *budget_fraction >= Rat::one() {
            return Err(SeriesError::Precondition(format!(
                "budget fraction must lie in ]0,1[, got {}",
                rat_str(budget_fraction)
            )));
        }
        let delta = -value;
        Ok(FrobeniusSchedule {
            t0: t0.clone(),
            geom: Rat::one() / (Rat::one() - t0.clone()),
            remaining: budget_fraction * delta,
            next_depth: 2,
            pow: rat_pow(t0, 2),
        })
    }
}

impl fmt::Display for GSSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1")?;
        if self.d > 0 {
            write!(f, " - {}t", self.d)?;
        }
        for (&depth, &count) in &self.relations {
            match count {
                0 => {}
                1 => write!(f, " + t^{depth}")?,
                c => write!(f, " + {c}t^{depth}")?,
            }
        }
        for tail in &self.tails {
            write!(
                f,
                " + ({})t^{}/(1 - ({})t)",
                rat_str(&tail.coeff),
                tail.start,
                rat_str(&tail.ratio)
            )?;
        }
        Ok(())
    }
}

/// Infinite greedy cut schedule; see [`GSSeries::frobenius_schedule`].
/// Depths are nondecreasing and every prefix keeps the cut series strictly
/// negative at t₀.
#[derive(Debug, Clone)]
pub struct FrobeniusSchedule {
    t0: Rat,
    geom: Rat,
    remaining: Rat,
    next_depth: u32,
    pow: Rat,
}

impl Iterator for FrobeniusSchedule {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        // Terminates because t0 < 1 forces t0^k → 0 while remaining > 0.
        while &self.pow * &self.geom > self.remaining {
            self.next_depth += 1;
            self.pow *= &self.t0;
        }
        self.remaining -= &self.pow;
        Some(self.next_depth)
    }
}

/// Smallest depth k ≥ 2 with (d/2r)^k < d²/4r − 1, computed by exact power
/// iteration; a single cut of this depth keeps the quadratic series
/// negative at its canonical witness: eval(cut(1−dt+rt², k, 1), d/2r) < 0.
/// Values below 2 are clamped up to 2 (a cut depth must be ≥ 2, and t^k is
/// decreasing in k on ]0,1[ so the certificate survives).
pub fn min_single_cut_depth(d: u32, r: u64) -> Result<u32, SeriesError> {
    if d == 0 || r == 0 || 2 * r as u128 <= d as u128 {
        return Err(SeriesError::Precondition(format!(
            "need 2r > d, got d = {d}, r = {r}"
        )));
    }
    if 4 * r as u128 >= (d as u128) * (d as u128) {
        return Err(SeriesError::Precondition(format!(
            "need r < d^2/4, got d = {d}, r = {r}"
        )));
    }
    let t0 = Rat::new(BigInt::from(d), BigInt::from(2 * r as u128));
    let rhs = Rat::new(
        BigInt::from((d as u128) * (d as u128)),
        BigInt::from(4 * r as u128),
    ) - Rat::one();
    let mut pow = rat_pow(&t0, 2);
    for k in 2..=ITERATION_CAP {
        if pow < rhs {
            return Ok(k);
        }
        pow *= &t0;
    }
    Err(SeriesError::Overflow(format!(
        "no cut depth below {ITERATION_CAP} for d = {d}, r = {r}"
    )))
}

/// λ for the geometric-tail construction with a = 2r/d > 1: ⌊a⌋ when a is
/// not an integer, a − 1 otherwise (so that λ < a always holds).
pub fn lambda(d: u32, r: u64) -> Result<u64, SeriesError> {
    if d == 0 || 2 * r as u128 <= d as u128 {
        return Err(SeriesError::Precondition(format!(
            "need a = 2r/d > 1, got d = {d}, r = {r}"
        )));
    }
    let two_r = 2 * r as u128;
    let q = two_r / d as u128;
    let exact = two_r.is_multiple_of(d as u128);
    let lam = if exact { q - 1 } else { q };
    u64::try_from(lam).map_err(|_| SeriesError::Overflow("lambda exceeds u64".to_owned()))
}

/// λ and the minimal m ≥ 2 with 1 − d²/4r + (λ/a)^m/(1 − λ/a) < 0, where
/// a = 2r/d; both computed by exact rational iteration. The tail
/// λ^m t^m/(1 − λt) then certifies negativity at t₀ = d/2r, which lies in
/// the tail's convergence range since λ·t₀ = λ/a < 1.
pub fn lambda_m(d: u32, r: u64) -> Result<(u64, u32), SeriesError> {
    if 4 * r as u128 >= (d as u128) * (d as u128) {
        return Err(SeriesError::Precondition(format!(
            "need r < d^2/4, got d = {d}, r = {r}"
        )));
    }
    let lam = lambda(d, r)?;
    // q = λ/a = λd/2r < 1.
    let q = Rat::new(
        BigInt::from(lam as u128 * d as u128),
        BigInt::from(2 * r as u128),
    );
    let rhs = Rat::new(
        BigInt::from((d as u128) * (d as u128)),
        BigInt::from(4 * r as u128),
    ) - Rat::one();
    let inv_gap = Rat::one() / (Rat::one() - &q);
    let mut pow = rat_pow(&q, 2);
    for m in 2..=ITERATION_CAP {
        if &pow * &inv_gap < rhs {
            return Ok((lam, m));
        }
        pow *= &q;
    }
    Err(SeriesError::Overflow(format!(
        "no tail start below {ITERATION_CAP} for d = {d}, r = {r}"
    )))
}
