//! Class-field-theoretic bookkeeping over measured rank data: the
//! generator-rank formula for ray-class-like groups, tame and wild
//! relation-count bounds, and the exact α threshold test.
//!
//! Everything here is arithmetic on ranks measured externally (class
//! groups, unit indices, Kummer radicals are inputs, never computed).
//! The generator rank of the S-ramified Galois group is
//!
//! ```text
//! d = Σ_{v wild} [K_v:Q_p] − δ_K + Σ_{v∈S} δ_v − (r₁+r₂) + 1 + dim B_S
//! ```
//!
//! and a supplied measured rank is cross-validated against the formula.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CftError {
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error("wrong branch: {0}")]
    Branch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// One place of the ramification set S. Tame places carry the local
/// root-of-unity flag δ_v; wild places (above p) carry the local degree
/// [K_v:Q_p]. `norm` is the residue norm as a decimal string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SPlace {
    pub norm: String,
    pub tame: bool,
    pub delta_v: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_degree: Option<u32>,
}

/// Measured rank data for one field and one ramification set S:
/// signature, root-of-unity flags, the places of S, and the measured
/// dim B_S, plus an optional software-measured generator rank used as a
/// cross-check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankProfile {
    pub p: u32,
    pub r1: u32,
    pub r2: u32,
    #[serde(rename = "delta_K")]
    pub delta_k: u8,
    #[serde(rename = "S", default)]
    pub s: Vec<SPlace>,
    #[serde(rename = "B_S_rank")]
    pub b_s_rank: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured_d: Option<i64>,
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2u32;
    while (q as u64) * (q as u64) <= p as u64 {
        if p.is_multiple_of(q) {
            return false;
        }
        q += 1;
    }
    true
}

impl RankProfile {
    /// Structural validation: p prime, δ flags in {0,1} (and forced to 1
    /// when p = 2, since μ₂ = {±1} lies in every field), wild places with
    /// a positive local degree, tame places without one, norms integer
    /// strings ≥ 2.
    pub fn validate(&self) -> Result<(), CftError> {
        if !is_prime(self.p) {
            return Err(CftError::Precondition(format!("{} is not prime", self.p)));
        }
        if self.delta_k > 1 {
            return Err(CftError::Precondition(format!(
                "delta_K must be 0 or 1, got {}",
                self.delta_k
            )));
        }
        if self.p == 2 && self.delta_k != 1 {
            return Err(CftError::Consistency("p = 2 forces delta_K = 1".to_owned()));
        }
        for place in &self.s {
            if place.delta_v > 1 {
                return Err(CftError::Precondition(format!(
                    "delta_v must be 0 or 1, got {}",
                    place.delta_v
                )));
            }
            if self.p == 2 && place.delta_v != 1 {
                return Err(CftError::Consistency(
                    "p = 2 forces delta_v = 1 at every place".to_owned(),
                ));
            }
            let norm: BigUint = place.norm.parse().map_err(|_| {
                CftError::Precondition(format!("norm {:?} is not a positive integer", place.norm))
            })?;
            if norm <= BigUint::one() {
                return Err(CftError::Precondition(format!(
                    "place norm must be >= 2, got {}",
                    place.norm
                )));
            }
            match (place.tame, place.local_degree) {
                (true, Some(_)) => {
                    return Err(CftError::Precondition(
                        "tame place must not carry a local degree".to_owned(),
                    ))
                }
                (false, None) => {
                    return Err(CftError::Precondition(
                        "wild place requires a local degree".to_owned(),
                    ))
                }
                (false, Some(0)) => {
                    return Err(CftError::Precondition(
                        "wild local degree must be >= 1".to_owned(),
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn wild_places(&self) -> impl Iterator<Item = &SPlace> {
        self.s.iter().filter(|v| !v.tame)
    }

    pub fn has_wild_places(&self) -> bool {
        self.s.iter().any(|v| !v.tame)
    }
}

/// Generator rank d of the S-ramified group from the profile:
/// Σ_{wild}[K_v:Q_p] − δ_K + Σ_{v∈S}δ_v − (r₁+r₂) + 1 + dim B_S. When the
/// profile carries a measured rank, it must agree with the formula.
pub fn h1_rank(rp: &RankProfile) -> Result<i64, CftError> {
    rp.validate()?;
    let wild_degrees: i64 = rp
        .wild_places()
        .map(|v| i64::from(v.local_degree.unwrap_or(0)))
        .sum();
    let delta_sum: i64 = rp.s.iter().map(|v| i64::from(v.delta_v)).sum();
    let d = wild_degrees - i64::from(rp.delta_k) + delta_sum - i64::from(rp.r1)
        - i64::from(rp.r2)
        + 1
        + rp.b_s_rank as i64;
    if let Some(measured) = rp.measured_d {
        if measured != d {
            return Err(CftError::Consistency(format!(
                "measured generator rank {measured} disagrees with formula value {d}"
            )));
        }
    }
    Ok(d)
}

/// Relation-count upper bound in the tame case: dim B_S when S is empty,
/// dim B_S + |S| − δ_K otherwise. Profiles with wild places must use
/// [`wild_relation_count`] instead.
pub fn r_upper_bound(rp: &RankProfile) -> Result<u64, CftError> {
    rp.validate()?;
    if rp.has_wild_places() {
        return Err(CftError::Branch(
            "relation bound for wild S comes from wild_relation_count".to_owned(),
        ));
    }
    if rp.s.is_empty() {
        Ok(rp.b_s_rank)
    } else {
        // |S| >= 1 and delta_K <= 1, so the sum never underflows.
        Ok(rp.b_s_rank + rp.s.len() as u64 - u64::from(rp.delta_k))
    }
}

/// Exact relation count d − r₂ − 1 for S containing all places above p
/// (cohomological dimension 2).
pub fn wild_relation_count(d: u32, r2: u32) -> Result<u64, CftError> {
    if d < r2 + 1 {
        return Err(CftError::Precondition(format!(
            "need d >= r2 + 1, got d = {d}, r2 = {r2}"
        )));
    }
    Ok(u64::from(d) - u64::from(r2) - 1)
}

/// Exact test of d > 2 + 2√(r₁+r₂+θ) where θ = δ_K when S is empty and 0
/// otherwise, decided as d > 2 and (d−2)² > 4(r₁+r₂+θ) in integers; when
/// it holds, the relation count stays below d²/4.
pub fn alpha_test(d: u32, r1: u32, r2: u32, s_empty: bool, delta_k: u8) -> bool {
    if d <= 2 {
        return false;
    }
    let theta = if s_empty { u64::from(delta_k & 1) } else { 0 };
    let gap = u64::from(d) - 2;
    gap * gap > 4 * (u64::from(r1) + u64::from(r2) + theta)
}
