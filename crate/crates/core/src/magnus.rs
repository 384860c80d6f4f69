//! Zassenhaus-filtration depth of words in a free pro-p group, computed
//! through the Magnus embedding x_i ↦ 1 + X_i into the algebra of
//! noncommutative power series over F_p truncated at a total degree N.
//!
//! The depth ω(w) is the minimal total degree of a nonzero term of the
//! series image of w − 1; ω(1) = ∞. Truncation makes the computation
//! exact up to degree N: an answer of `AtLeast(N + 1)` is an honest
//! partial result, never an error. Depth is computed in the free group
//! only; lower bounds for quotients come from the Frattini-level rules
//! [`frattini_depth_bound`] and [`rank_equality_depth`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Default truncation degree for depth computations.
pub const DEFAULT_TRUNCATION: u32 = 12;

/// Default cap on stored series terms before a resource error.
pub const DEFAULT_TERM_CAP: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MagnusError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

/// A free-reduced word in a free group on `d` generators x_0, …, x_{d−1}.
/// Adjacent letters always carry distinct generator indices and no letter
/// has exponent zero; the empty letter sequence is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeWord {
    d: u32,
    letters: Vec<(u32, i64)>,
}

impl FreeWord {
    /// Identity word in ambient rank `d`.
    pub fn identity(d: u32) -> Self {
        FreeWord { d, letters: Vec::new() }
    }

    /// Builds a word from raw letters, validating indices against `d` and
    /// freely reducing (merging adjacent equal-index letters, dropping
    /// zero exponents).
    pub fn new(d: u32, letters: &[(u32, i64)]) -> Result<Self, MagnusError> {
        for &(i, _) in letters {
            if i >= d {
                return Err(MagnusError::Precondition(format!(
                    "generator index {i} out of range for rank {d}"
                )));
            }
        }
        let mut w = FreeWord::identity(d);
        for &(i, e) in letters {
            w.push(i, e);
        }
        Ok(w)
    }

    /// Builds a word inferring the ambient rank as max index + 1.
    pub fn from_letters(letters: &[(u32, i64)]) -> Self {
        let d = letters.iter().map(|&(i, _)| i + 1).max().unwrap_or(0);
        FreeWord::new(d, letters).expect("rank inferred from indices")
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn letters(&self) -> &[(u32, i64)] {
        &self.letters
    }

    /// True when the word freely reduces to the identity.
    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    fn push(&mut self, i: u32, e: i64) {
        if e == 0 {
            return;
        }
        if let Some(last) = self.letters.last_mut() {
            if last.0 == i {
                last.1 += e;
                if last.1 == 0 {
                    self.letters.pop();
                }
                return;
            }
        }
        self.letters.push((i, e));
    }

    /// Free product w · other, reduced at the seam. The ambient rank is
    /// the larger of the two.
    pub fn concat(&self, other: &FreeWord) -> FreeWord {
        let mut out = self.clone();
        out.d = out.d.max(other.d);
        for &(i, e) in &other.letters {
            out.push(i, e);
        }
        out
    }

    /// w^{-1}: letters reversed with negated exponents.
    pub fn inverse(&self) -> FreeWord {
        let mut out = FreeWord::identity(self.d);
        for &(i, e) in self.letters.iter().rev() {
            out.push(i, -e);
        }
        out
    }

    /// w^k for any integer k (k = 0 gives the identity).
    pub fn pow(&self, k: i64) -> FreeWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = FreeWord::identity(self.d);
        for _ in 0..k.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    /// Commutator [w, v] = w v w^{-1} v^{-1}.
    pub fn commutator(&self, other: &FreeWord) -> FreeWord {
        self.concat(other).concat(&self.inverse()).concat(&other.inverse())
    }

    /// Parses the text syntax: space-separated letters `x0 x1^-1`,
    /// commutator sugar `[x0,x1]`, powers on letters and brackets
    /// (`x0^4`, `[x0,x1]^-2`), arbitrarily nested. The ambient rank is
    /// max generator index + 1 over the syntax, so `x2 x2^-1` parses to
    /// the identity of rank 3; the empty string is the identity of rank 0.
    pub fn parse(input: &str) -> Result<Self, MagnusError> {
        let chars: Vec<char> = input.chars().collect();
        let mut pos = 0usize;
        let (word, max_idx) = parse_word(&chars, &mut pos)?;
        skip_ws(&chars, &mut pos);
        if pos != chars.len() {
            return Err(MagnusError::Parse(format!(
                "unexpected character '{}' at offset {pos}",
                chars[pos]
            )));
        }
        let d = max_idx.map_or(0, |m| m + 1);
        let mut out = word;
        out.d = d;
        Ok(out)
    }
}

impl FromStr for FreeWord {
    type Err = MagnusError;

    fn from_str(s: &str) -> Result<Self, MagnusError> {
        FreeWord::parse(s)
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (n, &(i, e)) in self.letters.iter().enumerate() {
            if n > 0 {
                write!(f, " ")?;
            }
            if e == 1 {
                write!(f, "x{i}")?;
            } else {
                write!(f, "x{i}^{e}")?;
            }
        }
        Ok(())
    }
}

fn skip_ws(chars: &[char], pos: &mut usize) {
    while *pos < chars.len() && chars[*pos].is_whitespace() {
        *pos += 1;
    }
}

/// Parses a sequence of items up to end-of-input, ',' or ']'. Returns the
/// word and the maximum generator index seen in the syntax (None if no
/// generator occurs).
fn parse_word(chars: &[char], pos: &mut usize) -> Result<(FreeWord, Option<u32>), MagnusError> {
    let mut word = FreeWord::identity(0);
    let mut max_idx: Option<u32> = None;
    loop {
        skip_ws(chars, pos);
        match chars.get(*pos) {
            None | Some(',') | Some(']') => return Ok((word, max_idx)),
            Some('x') => {
                *pos += 1;
                let idx = parse_uint(chars, pos)?;
                let exp = parse_power(chars, pos)?;
                max_idx = Some(max_idx.map_or(idx, |m| m.max(idx)));
                let letter = FreeWord::from_letters(&[(idx, 1)]);
                word = word.concat(&letter.pow(exp));
            }
            Some('[') => {
                *pos += 1;
                let (a, ma) = parse_word(chars, pos)?;
                expect(chars, pos, ',')?;
                let (b, mb) = parse_word(chars, pos)?;
                expect(chars, pos, ']')?;
                let exp = parse_power(chars, pos)?;
                for m in [ma, mb].into_iter().flatten() {
                    max_idx = Some(max_idx.map_or(m, |cur| cur.max(m)));
                }
                word = word.concat(&a.commutator(&b).pow(exp));
            }
            Some(&c) => {
                return Err(MagnusError::Parse(format!(
                    "unexpected character '{c}' at offset {pos}"
                )))
            }
        }
    }
}

fn expect(chars: &[char], pos: &mut usize, want: char) -> Result<(), MagnusError> {
    skip_ws(chars, pos);
    if chars.get(*pos) == Some(&want) {
        *pos += 1;
        Ok(())
    } else {
        Err(MagnusError::Parse(format!("expected '{want}' at offset {pos}")))
    }
}

fn parse_uint(chars: &[char], pos: &mut usize) -> Result<u32, MagnusError> {
    let start = *pos;
    while matches!(chars.get(*pos), Some(c) if c.is_ascii_digit()) {
        *pos += 1;
    }
    if *pos == start {
        return Err(MagnusError::Parse(format!("expected digits at offset {start}")));
    }
    chars[start..*pos]
        .iter()
        .collect::<String>()
        .parse()
        .map_err(|_| MagnusError::Parse("generator index out of range".to_owned()))
}

/// Parses an optional `^<int>` suffix; absent means exponent 1.
fn parse_power(chars: &[char], pos: &mut usize) -> Result<i64, MagnusError> {
    if chars.get(*pos) != Some(&'^') {
        return Ok(1);
    }
    *pos += 1;
    let neg = chars.get(*pos) == Some(&'-');
    if neg {
        *pos += 1;
    }
    let mag = parse_uint(chars, pos)? as i64;
    Ok(if neg { -mag } else { mag })
}

/// Truncated noncommutative power series over F_p in d variables,
/// holding only monomials of total degree ≤ trunc with nonzero
/// coefficients. Monomials are packed byte strings of generator indices,
/// so d ≤ 255.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NCSeries {
    p: u32,
    d: u32,
    trunc: u32,
    terms: HashMap<Vec<u8>, u32>,
}

impl NCSeries {
    /// The constant series 1.
    pub fn one(p: u32, d: u32, trunc: u32) -> Result<Self, MagnusError> {
        validate_params(p, d, trunc)?;
        let mut terms = HashMap::new();
        terms.insert(Vec::new(), 1);
        Ok(NCSeries { p, d, trunc, terms })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    /// Number of stored (nonzero-coefficient) terms.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of one monomial (a sequence of generator indices).
    pub fn coeff(&self, monomial: &[u8]) -> u32 {
        self.terms.get(monomial).copied().unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coeff(&[]) == 1
    }

    /// Truncated product, failing when the running term count of the
    /// result exceeds `cap`.
    pub fn mul(&self, other: &NCSeries, cap: usize) -> Result<NCSeries, MagnusError> {
        debug_assert_eq!((self.p, self.d, self.trunc), (other.p, other.d, other.trunc));
        use std::collections::hash_map::Entry;
        let mut terms: HashMap<Vec<u8>, u32> = HashMap::new();
        for (m1, &c1) in &self.terms {
            for (m2, &c2) in &other.terms {
                if m1.len() + m2.len() > self.trunc as usize {
                    continue;
                }
                let c = ((c1 as u64 * c2 as u64) % self.p as u64) as u32;
                if c == 0 {
                    continue;
                }
                let mut m = Vec::with_capacity(m1.len() + m2.len());
                m.extend_from_slice(m1);
                m.extend_from_slice(m2);
                match terms.entry(m) {
                    Entry::Occupied(mut slot) => {
                        let sum = ((*slot.get() as u64 + c as u64) % self.p as u64) as u32;
                        if sum == 0 {
                            slot.remove();
                        } else {
                            *slot.get_mut() = sum;
                        }
                    }
                    Entry::Vacant(slot) => {
                        slot.insert(c);
                        if terms.len() > cap {
                            return Err(MagnusError::Resource(format!(
                                "series exceeded {cap} stored terms"
                            )));
                        }
                    }
                }
            }
        }
        Ok(NCSeries { p: self.p, d: self.d, trunc: self.trunc, terms })
    }

    /// Self^k by binary powering under the same term cap.
    fn pow(&self, mut k: u64, cap: usize) -> Result<NCSeries, MagnusError> {
        let mut acc = NCSeries::one(self.p, self.d, self.trunc)?;
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base, cap)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base, cap)?;
            }
        }
        Ok(acc)
    }

    /// Minimal total degree of a nonzero term of self − 1, if any.
    fn min_degree_minus_one(&self) -> Option<u32> {
        self.terms
            .iter()
            .filter(|(m, &c)| !(m.is_empty() && c == 1))
            .map(|(m, _)| m.len() as u32)
            .min()
    }
}

impl fmt::Display for NCSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut monos: Vec<&Vec<u8>> = self.terms.keys().collect();
        monos.sort_by_key(|m| (m.len(), m.as_slice()));
        if monos.is_empty() {
            return write!(f, "0");
        }
        for (n, m) in monos.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            let c = self.terms[m.as_slice()];
            if m.is_empty() {
                write!(f, "{c}")?;
                continue;
            }
            if c != 1 {
                write!(f, "{c}")?;
            }
            // Run-length rendering: X0 X0 X1 -> X0^2X1.
            let mut run_start = 0;
            while run_start < m.len() {
                let sym = m[run_start];
                let mut run_end = run_start;
                while run_end < m.len() && m[run_end] == sym {
                    run_end += 1;
                }
                let len = run_end - run_start;
                if len == 1 {
                    write!(f, "X{sym}")?;
                } else {
                    write!(f, "X{sym}^{len}")?;
                }
                run_start = run_end;
            }
        }
        Ok(())
    }
}

/// Depth of a word: the exact filtration level when visible below the
/// truncation, an `AtLeast` floor when the image is 1 up to degree N, and
/// `Infinity` exactly for the identity word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthResult {
    Exact(u32),
    AtLeast(u32),
    Infinity,
}

impl fmt::Display for DepthResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DepthResult::Exact(n) => write!(f, "Exact({n})"),
            DepthResult::AtLeast(n) => write!(f, "AtLeast({n})"),
            DepthResult::Infinity => write!(f, "Infinity"),
        }
    }
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

fn validate_params(p: u32, d: u32, trunc: u32) -> Result<(), MagnusError> {
    if !is_prime(p) {
        return Err(MagnusError::Precondition(format!("{p} is not prime")));
    }
    if d > 255 {
        return Err(MagnusError::Precondition(format!(
            "rank {d} exceeds packed-monomial limit 255"
        )));
    }
    if trunc < 1 {
        return Err(MagnusError::Precondition("truncation must be >= 1".to_owned()));
    }
    Ok(())
}

/// Image of a single letter x_i^e: (1 + X_i)^e for e > 0, and
/// (Σ_{k≤N} (−X_i)^k)^{|e|} for e < 0.
fn letter_image(i: u32, e: i64, p: u32, d: u32, trunc: u32, cap: usize) -> Result<NCSeries, MagnusError> {
    let mut base = NCSeries::one(p, d, trunc)?;
    if e > 0 {
        base.terms.insert(vec![i as u8], 1);
    } else {
        for k in 1..=trunc as usize {
            let c = if k % 2 == 0 { 1 } else { p - 1 };
            base.terms.insert(vec![i as u8; k], c % p);
        }
        base.terms.retain(|_, v| *v != 0);
    }
    base.pow(e.unsigned_abs(), cap)
}

/// Magnus embedding of a word at the default term cap.
pub fn embed(w: &FreeWord, p: u32, trunc: u32) -> Result<NCSeries, MagnusError> {
    embed_with_cap(w, p, trunc, DEFAULT_TERM_CAP)
}

/// Magnus embedding x_i ↦ 1 + X_i of a word into the truncated series
/// algebra, with an explicit cap on stored terms.
pub fn embed_with_cap(
    w: &FreeWord,
    p: u32,
    trunc: u32,
    cap: usize,
) -> Result<NCSeries, MagnusError> {
    validate_params(p, w.d(), trunc)?;
    let mut acc = NCSeries::one(p, w.d(), trunc)?;
    for &(i, e) in w.letters() {
        let img = letter_image(i, e, p, w.d(), trunc, cap)?;
        acc = acc.mul(&img, cap)?;
    }
    Ok(acc)
}

/// Zassenhaus depth of a word at the default term cap.
pub fn depth(w: &FreeWord, p: u32, trunc: u32) -> Result<DepthResult, MagnusError> {
    depth_with_cap(w, p, trunc, DEFAULT_TERM_CAP)
}

/// Zassenhaus depth: minimal total degree of a nonzero term of the
/// embedded image minus 1, `AtLeast(trunc + 1)` when the image is 1 in
/// the truncation, `Infinity` exactly for the identity word.
pub fn depth_with_cap(
    w: &FreeWord,
    p: u32,
    trunc: u32,
    cap: usize,
) -> Result<DepthResult, MagnusError> {
    if w.is_identity() {
        validate_params(p, w.d(), trunc)?;
        return Ok(DepthResult::Infinity);
    }
    let image = embed_with_cap(w, p, trunc, cap)?;
    Ok(match image.min_degree_minus_one() {
        Some(n) => DepthResult::Exact(n),
        None => DepthResult::AtLeast(trunc + 1),
    })
}

/// Depth floor 2^{n−1} for elements of the n-th Frattini subgroup.
pub fn frattini_depth_bound(n: u32) -> Result<u128, MagnusError> {
    if n < 1 {
        return Err(MagnusError::Precondition("Frattini level must be >= 1".to_owned()));
    }
    1u128
        .checked_shl(n - 1)
        .ok_or_else(|| MagnusError::Resource(format!("2^{} exceeds u128", n - 1)))
}

/// Depth floor 2^n certified for the inertia element when measured
/// p-ranks with and without the auxiliary place agree at Frattini level
/// n. A bookkeeping rule applied to fixture data, not a computation.
pub fn rank_equality_depth(n: u32) -> Result<u128, MagnusError> {
    if n < 1 {
        return Err(MagnusError::Precondition("Frattini level must be >= 1".to_owned()));
    }
    1u128
        .checked_shl(n)
        .ok_or_else(|| MagnusError::Resource(format!("2^{n} exceeds u128")))
}
