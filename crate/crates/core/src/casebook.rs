//! Fixture replay for the worked tower certifications.
//!
//! A fixture bundles everything one worked example needs: the measured
//! rank profile, a recipe for the presentation series, a ledger of cuts
//! with their depths, ramification data for the root-discriminant bound,
//! and frozen expectations (verdict, exact witness point and value, bound
//! decimal). Replay recomputes every step with the library operations and
//! emits one pass/fail line per check. Variants replay alternate
//! presentations of the same field (empty ramification set, pre-cut
//! series, alternative depth ledgers) as sub-fixtures.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cft::{alpha_test, h1_rank, r_upper_bound, wild_relation_count, CftError, RankProfile};
use crate::rat::{parse_rat, rat, rat_str, Rat};
use crate::rdbound::{
    mixed_bound, tame_bound, wild2_bound, CertifiedReal, FieldData, PlaceData, RdError,
};
use crate::series::{GSSeries, SeriesError, Verdict};

/// Maximum dyadic witness-search depth used during replay; deep enough
/// for every shipped fixture with margin to spare.
pub const REPLAY_MAX_DEPTH: u32 = 12;

/// Interval precision for replayed root-discriminant bounds: fine enough
/// that the certified upper end decides strictness against the expected
/// decimals by a comfortable margin.
pub fn replay_precision() -> Rat {
    rat(1, 10_000_000_000)
}

/// A replayed bound must land within this distance below its expected
/// decimal; without the check, expectations could silently drift far
/// above what is actually computed.
pub fn bound_decimal_slack() -> Rat {
    rat(1, 2000)
}

#[derive(Debug, Error)]
pub enum CasebookError {
    /// The fixture is malformed: schema violation, unparsable data, or
    /// inputs the library operations reject outright.
    #[error("fixture error: {0}")]
    Fixture(String),
    /// The fixture is well formed but an expectation disagrees with what
    /// replay computes.
    #[error("consistency error: {0}")]
    Consistency(String),
}

impl From<serde_json::Error> for CasebookError {
    fn from(e: serde_json::Error) -> Self {
        CasebookError::Fixture(e.to_string())
    }
}

impl From<SeriesError> for CasebookError {
    fn from(e: SeriesError) -> Self {
        CasebookError::Fixture(e.to_string())
    }
}

impl From<CftError> for CasebookError {
    fn from(e: CftError) -> Self {
        match e {
            CftError::Consistency(msg) => CasebookError::Consistency(msg),
            other => CasebookError::Fixture(other.to_string()),
        }
    }
}

impl From<RdError> for CasebookError {
    fn from(e: RdError) -> Self {
        match e {
            RdError::Consistency(msg) => CasebookError::Consistency(msg),
            other => CasebookError::Fixture(other.to_string()),
        }
    }
}

/// How a fixture obtains its presentation series: derived from the rank
/// profile (generator rank from h1, quadratic relation bound tame or
/// wild), or written out in full.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SeriesSpec {
    FromRanks(RanksMode),
    Explicit(GSSeries),
}

/// Which relation count accompanies a profile-derived series.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RanksMode {
    Tame,
    Wild,
}

/// One ledger entry: what is being cut and the series term it adds.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutEntry {
    /// The group elements being cut (inertia powers, local commutators,
    /// Frobenii, ...).
    pub description: String,
    pub cut: CutOp,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CutOp {
    /// `count` relations of the given depth: adds count·t^depth.
    Poly { depth: u32, count: u64 },
    /// Unit geometric tail t^start/(1 − ratio·t).
    Tail {
        start: u32,
        #[serde(with = "crate::rat::serde_str")]
        ratio: Rat,
    },
}

/// Which root-discriminant bound the fixture's ramification data feeds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    #[default]
    None,
    Tame,
    Wild2,
    Mixed,
}

/// Which argument certifies the verdict: the exact discriminant-style
/// generator test, an exact boundary root, or a negativity witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Route {
    AlphaTest,
    PAtT0Zero,
    Witness,
}

/// Verdict tag a fixture expects from the witness search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExpectedVerdict {
    Cuttable,
    BoundaryInfinite,
    Inconclusive,
}

impl ExpectedVerdict {
    fn matches(self, v: &Verdict) -> bool {
        matches!(
            (self, v),
            (ExpectedVerdict::Cuttable, Verdict::Cuttable { .. })
                | (ExpectedVerdict::BoundaryInfinite, Verdict::BoundaryInfinite { .. })
                | (ExpectedVerdict::Inconclusive, Verdict::Inconclusive { .. })
        )
    }

    fn label(self) -> &'static str {
        match self {
            ExpectedVerdict::Cuttable => "CUTTABLE",
            ExpectedVerdict::BoundaryInfinite => "BOUNDARY_INFINITE",
            ExpectedVerdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// Frozen expectations. `route` is mandatory on the main fixture and
/// optional on variants; `rd_bound` is a plain decimal string and only
/// valid alongside a bound kind.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub verdict: ExpectedVerdict,
    #[serde(default)]
    pub route: Option<Route>,
    #[serde(default)]
    pub witness_t0: Option<String>,
    #[serde(default)]
    pub witness_value: Option<String>,
    #[serde(default)]
    pub provably_positive: Option<bool>,
    #[serde(default)]
    pub rd_bound: Option<String>,
}

/// A sub-fixture: an alternate presentation of the same field replayed
/// against its own expectations. Variants never carry bound data and
/// their explicit series need not match the profile's generator rank
/// (they model different ramification sets or pre-cut stages).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub id: String,
    #[serde(default)]
    pub provenance: Vec<String>,
    pub series: SeriesSpec,
    #[serde(default)]
    pub cut_ledger: Vec<CutEntry>,
    pub expected: Expected,
}

/// One worked example, self-contained: measured input data, derivation
/// recipe, and frozen expectations.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFixture {
    /// Fixture format version; always 1.
    pub schema: u32,
    pub id: String,
    /// Free-form source notes for the measured data.
    #[serde(default)]
    pub provenance: Vec<String>,
    pub ranks: RankProfile,
    pub series: SeriesSpec,
    #[serde(default)]
    pub cut_ledger: Vec<CutEntry>,
    #[serde(default)]
    pub field: Option<FieldData>,
    #[serde(default)]
    pub places: Vec<PlaceData>,
    #[serde(default)]
    pub bound: BoundKind,
    pub expected: Expected,
    #[serde(default)]
    pub variants: Vec<Variant>,
}

/// One replayed check: name, outcome, human-readable detail.
#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Replay outcome for one fixture. `elapsed` is captured for callers but
/// excluded from the serialized and displayed forms so repeated replays
/// stay byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct CertReport {
    pub id: String,
    pub pass: bool,
    pub checks: Vec<CheckLine>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl fmt::Display for CertReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fixture {}: {}", self.id, if self.pass { "PASS" } else { "FAIL" })?;
        for c in &self.checks {
            write!(f, "\n  {}: {} ({})", c.name, if c.pass { "pass" } else { "FAIL" }, c.detail)?;
        }
        Ok(())
    }
}

/// Aggregate of one `replay_all` run, ordered by fixture id.
#[derive(Debug, Clone, Serialize)]
pub struct ReplaySummary {
    pub reports: Vec<CertReport>,
    pub passed: usize,
    pub total: usize,
}

impl ReplaySummary {
    /// True when every replayed fixture passed (vacuously for none).
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

impl fmt::Display for ReplaySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.reports {
            writeln!(f, "{r}")?;
        }
        write!(f, "passed {}/{} fixtures", self.passed, self.total)
    }
}

/// The shipped fixture corpus, embedded so replay needs no filesystem.
pub const EMBEDDED_FIXTURES: &[(&str, &str)] = &[
    ("biquad-43", include_str!("../fixtures/biquad-43.json")),
    ("complex-82", include_str!("../fixtures/complex-82.json")),
    ("complex-record", include_str!("../fixtures/complex-record.json")),
    ("martin", include_str!("../fixtures/martin.json")),
    ("mixed-163", include_str!("../fixtures/mixed-163.json")),
    ("prational-r2-6", include_str!("../fixtures/prational-r2-6.json")),
    ("real-record", include_str!("../fixtures/real-record.json")),
    ("wild-5460", include_str!("../fixtures/wild-5460.json")),
];

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
}

/// Parses and validates a fixture document.
pub fn load_fixture(json: &str) -> Result<CaseFixture, CasebookError> {
    let fixture: CaseFixture = serde_json::from_str(json)?;
    validate_fixture(&fixture)?;
    Ok(fixture)
}

fn validate_fixture(cf: &CaseFixture) -> Result<(), CasebookError> {
    if cf.schema != 1 {
        return Err(CasebookError::Fixture(format!(
            "unsupported fixture schema {} (expected 1)",
            cf.schema
        )));
    }
    if !valid_id(&cf.id) {
        return Err(CasebookError::Fixture(format!(
            "fixture id {:?} must be nonempty lowercase letters, digits, and hyphens",
            cf.id
        )));
    }
    if cf.expected.route.is_none() {
        return Err(CasebookError::Fixture(format!(
            "fixture {}: the main expectation must name a route",
            cf.id
        )));
    }
    if cf.expected.route == Some(Route::PAtT0Zero)
        && cf.expected.verdict != ExpectedVerdict::BoundaryInfinite
    {
        return Err(CasebookError::Fixture(format!(
            "fixture {}: route P_AT_T0_ZERO expects verdict BOUNDARY_INFINITE",
            cf.id
        )));
    }
    if cf.expected.route == Some(Route::Witness)
        && cf.expected.verdict == ExpectedVerdict::BoundaryInfinite
    {
        return Err(CasebookError::Fixture(format!(
            "fixture {}: route WITNESS expects a CUTTABLE or INCONCLUSIVE verdict",
            cf.id
        )));
    }
    if cf.bound == BoundKind::None {
        if cf.expected.rd_bound.is_some() {
            return Err(CasebookError::Fixture(format!(
                "fixture {}: rd_bound expectation requires a bound kind",
                cf.id
            )));
        }
    } else {
        if cf.field.is_none() {
            return Err(CasebookError::Fixture(format!(
                "fixture {}: a bound kind requires field data",
                cf.id
            )));
        }
        if cf.expected.rd_bound.is_none() {
            return Err(CasebookError::Fixture(format!(
                "fixture {}: a bound kind requires an expected rd_bound",
                cf.id
            )));
        }
    }
    let mut seen = BTreeSet::new();
    for v in &cf.variants {
        if !valid_id(&v.id) {
            return Err(CasebookError::Fixture(format!(
                "fixture {}: variant id {:?} must be nonempty lowercase letters, digits, and hyphens",
                cf.id, v.id
            )));
        }
        if !seen.insert(v.id.as_str()) {
            return Err(CasebookError::Fixture(format!(
                "fixture {}: duplicate variant id {}",
                cf.id, v.id
            )));
        }
        if v.expected.rd_bound.is_some() {
            return Err(CasebookError::Fixture(format!(
                "fixture {}: variant {} carries a bound expectation",
                cf.id, v.id
            )));
        }
    }
    Ok(())
}

/// Builds the series a spec describes. `check_rank` ties an explicit
/// generator count back to the profile's h1 rank; variants skip the tie
/// because they model different ramification sets.
fn build_series(
    spec: &SeriesSpec,
    ranks: &RankProfile,
    check_rank: bool,
) -> Result<GSSeries, CasebookError> {
    let d_formula = h1_rank(ranks)?;
    match spec {
        SeriesSpec::FromRanks(mode) => {
            let d = u32::try_from(d_formula).map_err(|_| {
                CasebookError::Fixture(format!(
                    "generator rank {d_formula} is not a valid generator count"
                ))
            })?;
            let r = match mode {
                RanksMode::Tame => r_upper_bound(ranks)?,
                RanksMode::Wild => wild_relation_count(d, ranks.r2)?,
            };
            Ok(GSSeries::quadratic(d, r))
        }
        SeriesSpec::Explicit(s) => {
            if check_rank && i64::from(s.d()) != d_formula {
                return Err(CasebookError::Consistency(format!(
                    "explicit series has d = {} but the rank profile gives {}",
                    s.d(),
                    d_formula
                )));
            }
            Ok(s.clone())
        }
    }
}

fn apply_cuts(series: GSSeries, ledger: &[CutEntry]) -> Result<GSSeries, CasebookError> {
    let mut s = series;
    for entry in ledger {
        s = match &entry.cut {
            CutOp::Poly { depth, count } => s.cut(*depth, *count)?,
            CutOp::Tail { start, ratio } => s.cut_tail(*start, ratio)?,
        };
    }
    Ok(s)
}

fn expected_desc(e: &Expected) -> String {
    let mut s = e.label_with_fields();
    if let Some(pp) = e.provably_positive {
        if pp {
            s.push_str(" provably positive");
        }
    }
    s
}

impl Expected {
    fn label_with_fields(&self) -> String {
        let mut s = self.verdict.label().to_owned();
        if let Some(t0) = &self.witness_t0 {
            s.push_str(&format!(" at t0={t0}"));
        }
        if let Some(v) = &self.witness_value {
            s.push_str(&format!(" with P(t0) = {v}"));
        }
        s
    }
}

/// Runs the witness search on `series`, compares against `expected`, and
/// re-evaluates any exact witness. Check names get `prefix` prepended.
fn witness_checks(
    prefix: &str,
    series: &GSSeries,
    expected: &Expected,
    checks: &mut Vec<CheckLine>,
) -> Result<(), CasebookError> {
    let found = series.find_witness(REPLAY_MAX_DEPTH);
    let mut ok = expected.verdict.matches(&found);
    if let Some(t0s) = &expected.witness_t0 {
        let want = parse_rat(t0s)
            .map_err(|e| CasebookError::Fixture(format!("bad witness_t0 {t0s:?}: {e}")))?;
        ok &= match &found {
            Verdict::Cuttable { t0, .. } | Verdict::BoundaryInfinite { t0 } => *t0 == want,
            Verdict::Inconclusive { .. } => false,
        };
    }
    if let Some(vs) = &expected.witness_value {
        let want = parse_rat(vs)
            .map_err(|e| CasebookError::Fixture(format!("bad witness_value {vs:?}: {e}")))?;
        ok &= match &found {
            Verdict::Cuttable { value, .. } => *value == want,
            _ => false,
        };
    }
    if let Some(pp) = expected.provably_positive {
        ok &= matches!(found, Verdict::Inconclusive { provably_positive } if provably_positive == pp);
    }
    let detail = if ok {
        found.to_string()
    } else {
        format!("{found}, expected {}", expected_desc(expected))
    };
    checks.push(CheckLine { name: format!("{prefix}verdict"), pass: ok, detail });

    // Certifying verdicts are re-established by direct evaluation rather
    // than trusted from the search.
    match &found {
        Verdict::Cuttable { t0, value } => {
            let v = series.eval(t0)?;
            let good = v == *value && v < rat(0, 1);
            let detail = if good {
                format!("P({}) = {} re-evaluated exactly", rat_str(t0), rat_str(&v))
            } else {
                format!(
                    "re-evaluation gave {} against reported {}",
                    rat_str(&v),
                    rat_str(value)
                )
            };
            checks.push(CheckLine { name: format!("{prefix}witness"), pass: good, detail });
        }
        Verdict::BoundaryInfinite { t0 } => {
            let v = series.eval(t0)?;
            let good = v == rat(0, 1);
            let detail = if good {
                format!("P({}) = 0 re-evaluated exactly", rat_str(t0))
            } else {
                format!("re-evaluation gave {} instead of 0", rat_str(&v))
            };
            checks.push(CheckLine { name: format!("{prefix}witness"), pass: good, detail });
        }
        Verdict::Inconclusive { .. } => {}
    }
    Ok(())
}

fn alpha_check(
    prefix: &str,
    ranks: &RankProfile,
    d: i64,
    checks: &mut Vec<CheckLine>,
) -> Result<(), CasebookError> {
    let d = u32::try_from(d).map_err(|_| {
        CasebookError::Fixture(format!("generator rank {d} is not a valid generator count"))
    })?;
    let ok = alpha_test(d, ranks.r1, ranks.r2, ranks.s.is_empty(), ranks.delta_k);
    let detail = if ok {
        format!("d = {d} clears the exact generator threshold")
    } else {
        format!("d = {d} fails the exact generator threshold")
    };
    checks.push(CheckLine { name: format!("{prefix}alpha"), pass: ok, detail });
    Ok(())
}

/// Root-discriminant bound of a fixture per its declared bound kind;
/// `None` when the fixture declares no bound.
pub fn fixture_bound(
    cf: &CaseFixture,
    precision: &Rat,
) -> Result<Option<CertifiedReal>, CasebookError> {
    validate_fixture(cf)?;
    if cf.bound == BoundKind::None {
        return Ok(None);
    }
    let fd = cf.field.as_ref().expect("validated: bound kind requires field data");
    let b = match cf.bound {
        BoundKind::None => unreachable!(),
        BoundKind::Tame => tame_bound(fd, &cf.places, precision)?,
        BoundKind::Wild2 => wild2_bound(fd, &cf.places, precision)?,
        BoundKind::Mixed => mixed_bound(fd, &cf.places, &[], precision)?,
    };
    Ok(Some(b))
}

/// Replays one fixture and reports every check, passing or not.
/// Structural problems (bad schema, unparsable data, operations rejecting
/// the inputs) surface as errors; expectation mismatches only lower
/// `pass`.
pub fn replay_report(cf: &CaseFixture) -> Result<CertReport, CasebookError> {
    validate_fixture(cf)?;
    let start = Instant::now();
    let mut checks = Vec::new();

    for place in &cf.places {
        if place.p != cf.ranks.p {
            return Err(CasebookError::Consistency(format!(
                "fixture {}: place above q = {} declares tower prime {} but the profile has {}",
                cf.id, place.q, place.p, cf.ranks.p
            )));
        }
    }

    let d = h1_rank(&cf.ranks)?;
    checks.push(CheckLine {
        name: "ranks".to_owned(),
        pass: true,
        detail: format!("h1 rank {d} matches the measured rank"),
    });

    let series = apply_cuts(build_series(&cf.series, &cf.ranks, true)?, &cf.cut_ledger)?;
    let detail = if cf.cut_ledger.is_empty() {
        series.to_string()
    } else {
        format!("{} after {} ledger cuts", series, cf.cut_ledger.len())
    };
    checks.push(CheckLine { name: "series".to_owned(), pass: true, detail });

    if cf.expected.route == Some(Route::AlphaTest) {
        alpha_check("", &cf.ranks, d, &mut checks)?;
    }
    witness_checks("", &series, &cf.expected, &mut checks)?;

    if let Some(b) = fixture_bound(cf, &replay_precision())? {
        let expected_str = cf.expected.rd_bound.as_ref().expect("validated: bound kind");
        let want = parse_rat(expected_str).map_err(|e| {
            CasebookError::Fixture(format!("bad rd_bound {expected_str:?}: {e}"))
        })?;
        let strict = *b.upper() < want;
        let close = &want - b.upper() <= bound_decimal_slack();
        let pass = strict && close;
        let detail = if strict {
            format!("{b} meets expected < {expected_str}")
        } else {
            format!("{b} misses expected < {expected_str}")
        };
        let detail = if close {
            detail
        } else {
            format!("{detail}; expected decimal sits more than {} above the bound", "1/2000")
        };
        checks.push(CheckLine { name: "bound".to_owned(), pass, detail });
    }

    for v in &cf.variants {
        let vs = apply_cuts(build_series(&v.series, &cf.ranks, false)?, &v.cut_ledger)?;
        let detail = if v.cut_ledger.is_empty() {
            vs.to_string()
        } else {
            format!("{} after {} ledger cuts", vs, v.cut_ledger.len())
        };
        checks.push(CheckLine { name: format!("variant {} series", v.id), pass: true, detail });
        if v.expected.route == Some(Route::AlphaTest) {
            alpha_check(&format!("variant {} ", v.id), &cf.ranks, d, &mut checks)?;
        }
        witness_checks(&format!("variant {} ", v.id), &vs, &v.expected, &mut checks)?;
    }

    let pass = checks.iter().all(|c| c.pass);
    Ok(CertReport { id: cf.id.clone(), pass, checks, elapsed: start.elapsed() })
}

/// Replays one fixture, erroring on the first expectation mismatch.
pub fn replay(cf: &CaseFixture) -> Result<CertReport, CasebookError> {
    let report = replay_report(cf)?;
    if let Some(fail) = report.checks.iter().find(|c| !c.pass) {
        return Err(CasebookError::Consistency(format!(
            "fixture {}: check {} failed: {}",
            report.id, fail.name, fail.detail
        )));
    }
    Ok(report)
}

/// Replays every embedded fixture whose id matches the optional glob
/// (`*` any run, `?` one byte), in id order. Mismatches are reported, not
/// raised; an empty match set is a successful empty summary.
pub fn replay_all(filter: Option<&str>) -> Result<ReplaySummary, CasebookError> {
    let mut seen = BTreeSet::new();
    let mut reports = Vec::new();
    for (name, json) in EMBEDDED_FIXTURES {
        let cf = load_fixture(json)
            .map_err(|e| CasebookError::Fixture(format!("embedded fixture {name}: {e}")))?;
        if cf.id != *name {
            return Err(CasebookError::Fixture(format!(
                "embedded fixture {name} declares id {}",
                cf.id
            )));
        }
        if !seen.insert(cf.id.clone()) {
            return Err(CasebookError::Fixture(format!("duplicate fixture id {}", cf.id)));
        }
        if let Some(pat) = filter {
            if !glob_match(pat, &cf.id) {
                continue;
            }
        }
        reports.push(replay_report(&cf)?);
    }
    reports.sort_by(|a, b| a.id.cmp(&b.id));
    let passed = reports.iter().filter(|r| r.pass).count();
    let total = reports.len();
    Ok(ReplaySummary { reports, passed, total })
}

/// Shell-style glob on fixture ids: `*` matches any run, `?` one byte.
pub fn glob_match(pattern: &str, text: &str) -> bool {
    let p = pattern.as_bytes();
    let t = text.as_bytes();
    let (mut pi, mut ti) = (0usize, 0usize);
    let mut star = usize::MAX;
    let mut mark = 0usize;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == b'?' || p[pi] == t[ti]) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == b'*' {
            star = pi;
            mark = ti;
            pi += 1;
        } else if star != usize::MAX {
            pi = star + 1;
            mark += 1;
            ti = mark;
        } else {
            return false;
        }
    }
    while pi < p.len() && p[pi] == b'*' {
        pi += 1;
    }
    pi == p.len()
}
