//! Quantified performance requirements.
//!
//! A [`Proposition`] is a piecewise-linear fuzzy satisfaction function over a
//! minimized performance metric. It is made of [`Fragment`]s that tile
//! `[v_min, v_max]`; adjacent fragments share a boundary point and, at that
//! point, the left fragment's value applies.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Preference shape of a fragment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FragmentKind {
    /// Greater value preferred.
    G,
    /// Smaller value preferred.
    S,
    /// All values equally preferred.
    E,
}

impl FragmentKind {
    pub const ALL: [FragmentKind; 3] = [FragmentKind::G, FragmentKind::S, FragmentKind::E];

    pub fn symbol(self) -> char {
        match self {
            FragmentKind::G => 'G',
            FragmentKind::S => 'S',
            FragmentKind::E => 'E',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'G' => Some(FragmentKind::G),
            'S' => Some(FragmentKind::S),
            'E' => Some(FragmentKind::E),
            _ => None,
        }
    }
}

impl fmt::Display for FragmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// One piece of a proposition over `[v_lo, v_hi]`, linear from `s_lo` to `s_hi`
/// (constant `s_lo` for [`FragmentKind::E`]).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Fragment<T> {
    pub kind: FragmentKind,
    pub v_lo: T,
    pub v_hi: T,
    pub s_lo: T,
    pub s_hi: T,
}

impl<T: Scalar> Fragment<T> {
    pub fn new(kind: FragmentKind, v_lo: T, v_hi: T, s_lo: T, s_hi: T) -> Self {
        Fragment {
            kind,
            v_lo,
            v_hi,
            s_lo,
            s_hi,
        }
    }

    pub fn constant(v_lo: T, v_hi: T, s: T) -> Self {
        Fragment::new(FragmentKind::E, v_lo, v_hi, s, s)
    }

    pub fn width(&self) -> T {
        self.v_hi - self.v_lo
    }

    /// A G/S fragment whose scores actually change.
    pub fn is_distinguishable(&self) -> bool {
        self.kind != FragmentKind::E && self.s_lo != self.s_hi
    }

    /// Fuzzy membership at `v`, which is expected to lie inside the fragment.
    pub fn value_at(&self, v: T) -> T {
        match self.kind {
            FragmentKind::E => self.s_lo,
            FragmentKind::G | FragmentKind::S => {
                if v <= self.v_lo {
                    return self.s_lo;
                }
                if v >= self.v_hi {
                    return self.s_hi;
                }
                let t = (v - self.v_lo) / (self.v_hi - self.v_lo);
                (self.s_lo + t * (self.s_hi - self.s_lo)).clamp_to(T::zero(), T::one())
            }
        }
    }

    /// Exact area under the fragment.
    pub fn area(&self) -> T {
        match self.kind {
            FragmentKind::E => self.width() * self.s_lo,
            FragmentKind::G | FragmentKind::S => {
                self.width() * (self.s_lo + self.s_hi) / T::lit(2.0)
            }
        }
    }

    /// Same interval and scores, stretched or compressed onto `[v_lo, v_hi]`.
    pub fn respanned(&self, v_lo: T, v_hi: T) -> Self {
        Fragment { v_lo, v_hi, ..*self }
    }
}

/// A single invariant violation found by [`Proposition::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NoFragments,
    InvertedBounds { v_min: f64, v_max: f64 },
    TilingGap { index: usize, expected: f64, found: f64 },
    ZeroWidth { index: usize },
    ScoreOutOfRange { index: usize },
    ConstantMismatch { index: usize },
    NonMonotone { index: usize, at: f64 },
    NonFinite { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoFragments => write!(f, "no fragments"),
            Violation::InvertedBounds { v_min, v_max } => {
                write!(f, "inverted bounds: v_min={v_min} >= v_max={v_max}")
            }
            Violation::TilingGap {
                index,
                expected,
                found,
            } => write!(
                f,
                "tiling gap at v={expected}: fragment {index} starts at {found}"
            ),
            Violation::ZeroWidth { index } => write!(f, "fragment {index} has zero or negative width"),
            Violation::ScoreOutOfRange { index } => {
                write!(f, "fragment {index} has a score outside [0,1]")
            }
            Violation::ConstantMismatch { index } => {
                write!(f, "E fragment {index} has s_lo != s_hi")
            }
            Violation::NonMonotone { index, at } => {
                write!(f, "non-monotone satisfaction in fragment {index} near v={at}")
            }
            Violation::NonFinite { index } => write!(f, "fragment {index} has a non-finite value"),
        }
    }
}

impl Violation {
    pub fn is_tiling_gap(&self) -> bool {
        matches!(self, Violation::TilingGap { .. })
    }

    pub fn is_non_monotone(&self) -> bool {
        matches!(self, Violation::NonMonotone { .. })
    }
}

#[derive(Debug, Error)]
pub enum RequirementError {
    #[error("invalid proposition: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("encoding must have odd length, got {0}")]
    EncodingLength(usize),
    #[error("expected a fragment kind at token {0}")]
    ExpectedKind(usize),
    #[error("expected a boundary value at token {0}")]
    ExpectedBoundary(usize),
    #[error("boundary at token {0} is not strictly increasing inside (v_min, v_max)")]
    NonIncreasingBoundary(usize),
    #[error("expected {expected} score pairs, got {found}")]
    ScoreCount { expected: usize, found: usize },
    #[error("scores of fragment {0} are inconsistent with its kind")]
    ScoreKindMismatch(usize),
    #[error("malformed encoding text: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Piecewise fuzzy satisfaction function over a minimized metric.
///
/// Fields are only reachable through constructors; [`Proposition::from_parts`]
/// skips checks so invalid values can still be inspected with
/// [`Proposition::validate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Proposition<T> {
    v_min: T,
    v_max: T,
    fragments: Vec<Fragment<T>>,
}

impl<T: Scalar> Proposition<T> {
    /// Builds a proposition and rejects it if any invariant fails, including
    /// monotonicity.
    pub fn new(v_min: T, v_max: T, fragments: Vec<Fragment<T>>) -> Result<Self, RequirementError> {
        let p = Self::from_parts(v_min, v_max, fragments);
        p.check()?;
        Ok(p)
    }

    /// Builds without checking anything.
    pub fn from_parts(v_min: T, v_max: T, fragments: Vec<Fragment<T>>) -> Self {
        Proposition {
            v_min,
            v_max,
            fragments,
        }
    }

    /// A single E fragment at score `s`.
    pub fn constant(v_min: T, v_max: T, s: T) -> Result<Self, RequirementError> {
        Self::new(v_min, v_max, vec![Fragment::constant(v_min, v_max, s)])
    }

    /// A single S fragment falling linearly from `s_lo` to `s_hi`.
    pub fn ramp(v_min: T, v_max: T, s_lo: T, s_hi: T) -> Result<Self, RequirementError> {
        Self::new(
            v_min,
            v_max,
            vec![Fragment::new(FragmentKind::S, v_min, v_max, s_lo, s_hi)],
        )
    }

    pub fn v_min(&self) -> T {
        self.v_min
    }

    pub fn v_max(&self) -> T {
        self.v_max
    }

    pub fn fragments(&self) -> &[Fragment<T>] {
        &self.fragments
    }

    pub fn len(&self) -> usize {
        self.fragments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fragments.is_empty()
    }

    /// Internal boundary points, excluding `v_min` and `v_max`.
    pub fn boundaries(&self) -> Vec<T> {
        self.fragments.iter().skip(1).map(|f| f.v_lo).collect()
    }

    /// Per-fragment `(s_lo, s_hi)` pairs.
    pub fn scores(&self) -> Vec<(T, T)> {
        self.fragments.iter().map(|f| (f.s_lo, f.s_hi)).collect()
    }

    /// Index of the fragment governing `v` after clamping; boundaries belong to
    /// the left fragment.
    pub fn fragment_index(&self, v: T) -> usize {
        let v = v.clamp_to(self.v_min, self.v_max);
        let idx = self.fragments.partition_point(|f| f.v_hi < v);
        idx.min(self.fragments.len().saturating_sub(1))
    }

    /// Satisfaction score of performance value `v`, always in `[0, 1]`.
    pub fn evaluate(&self, v: T) -> T {
        if self.fragments.is_empty() {
            return T::zero();
        }
        let v = v.clamp_to(self.v_min, self.v_max);
        self.fragments[self.fragment_index(v)]
            .value_at(v)
            .clamp_to(T::zero(), T::one())
    }

    /// Area under the satisfaction function over `[v_min, v_max]`.
    pub fn integral(&self) -> T {
        self.fragments.iter().map(Fragment::area).sum()
    }

    /// Number of fragments after merging neighbours that describe the same line
    /// without a jump (e.g. two E fragments at one score).
    pub fn effective_fragment_count(&self) -> usize {
        let mut count = 0;
        let mut prev: Option<&Fragment<T>> = None;
        for f in &self.fragments {
            let merged = prev.is_some_and(|p| {
                if p.s_hi != f.s_lo {
                    return false;
                }
                let slope = |x: &Fragment<T>| (x.s_hi - x.s_lo) / x.width();
                let (a, b) = (slope(p), slope(f));
                (a - b).abs() <= T::epsilon() * T::lit(16.0) * (T::one() + a.abs())
            });
            if !merged {
                count += 1;
            }
            prev = Some(f);
        }
        count
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity_violations().is_empty()
    }

    fn monotonicity_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, f) in self.fragments.iter().enumerate() {
            if f.s_hi > f.s_lo {
                out.push(Violation::NonMonotone {
                    index: i,
                    at: f.v_lo.as_f64(),
                });
            }
            if let Some(next) = self.fragments.get(i + 1) {
                if next.s_lo > f.s_hi {
                    out.push(Violation::NonMonotone {
                        index: i + 1,
                        at: f.v_hi.as_f64(),
                    });
                }
            }
        }
        out
    }

    /// Every invariant violation, or an empty list.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.fragments.is_empty() {
            out.push(Violation::NoFragments);
        }
        if !(self.v_min < self.v_max) {
            out.push(Violation::InvertedBounds {
                v_min: self.v_min.as_f64(),
                v_max: self.v_max.as_f64(),
            });
        }
        let mut expected = self.v_min;
        for (i, f) in self.fragments.iter().enumerate() {
            let finite = [f.v_lo, f.v_hi, f.s_lo, f.s_hi].iter().all(|x| x.is_finite());
            if !finite {
                out.push(Violation::NonFinite { index: i });
                continue;
            }
            if f.v_lo != expected {
                out.push(Violation::TilingGap {
                    index: i,
                    expected: expected.as_f64(),
                    found: f.v_lo.as_f64(),
                });
            }
            if !(f.v_lo < f.v_hi) {
                out.push(Violation::ZeroWidth { index: i });
            }
            let in_unit = |s: T| s >= T::zero() && s <= T::one();
            if !in_unit(f.s_lo) || !in_unit(f.s_hi) {
                out.push(Violation::ScoreOutOfRange { index: i });
            }
            if f.kind == FragmentKind::E && f.s_lo != f.s_hi {
                out.push(Violation::ConstantMismatch { index: i });
            }
            expected = f.v_hi;
        }
        if let Some(last) = self.fragments.last() {
            if last.v_hi.is_finite() && last.v_hi != self.v_max {
                out.push(Violation::TilingGap {
                    index: self.fragments.len(),
                    expected: self.v_max.as_f64(),
                    found: last.v_hi.as_f64(),
                });
            }
        }
        out.extend(self.monotonicity_violations());
        out
    }

    pub fn check(&self) -> Result<(), RequirementError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(RequirementError::Invalid(v))
        }
    }

    pub fn encode(&self) -> PropositionEncoding<T> {
        let mut tokens = Vec::with_capacity(self.fragments.len() * 2);
        for (i, f) in self.fragments.iter().enumerate() {
            if i > 0 {
                tokens.push(Token::Boundary(f.v_lo));
            }
            tokens.push(Token::Kind(f.kind));
        }
        PropositionEncoding { tokens }
    }

    /// Rebuilds a proposition from its token form and per-fragment scores.
    pub fn decode(
        enc: &PropositionEncoding<T>,
        scores: &[(T, T)],
        v_min: T,
        v_max: T,
    ) -> Result<Self, RequirementError> {
        let tokens = &enc.tokens;
        if tokens.len() % 2 == 0 {
            return Err(RequirementError::EncodingLength(tokens.len()));
        }
        let n = tokens.len().div_ceil(2);
        if scores.len() != n {
            return Err(RequirementError::ScoreCount {
                expected: n,
                found: scores.len(),
            });
        }
        let mut kinds = Vec::with_capacity(n);
        let mut edges = vec![v_min];
        for (pos, tok) in tokens.iter().enumerate() {
            match (pos % 2, tok) {
                (0, Token::Kind(k)) => kinds.push(*k),
                (0, _) => return Err(RequirementError::ExpectedKind(pos)),
                (_, Token::Boundary(b)) => {
                    let prev = *edges.last().expect("edges seeded with v_min");
                    if !(*b > prev && *b < v_max) {
                        return Err(RequirementError::NonIncreasingBoundary(pos));
                    }
                    edges.push(*b);
                }
                (_, _) => return Err(RequirementError::ExpectedBoundary(pos)),
            }
        }
        edges.push(v_max);
        let fragments = kinds
            .iter()
            .zip(scores)
            .enumerate()
            .map(|(i, (&kind, &(s_lo, s_hi)))| {
                if kind == FragmentKind::E && s_lo != s_hi {
                    return Err(RequirementError::ScoreKindMismatch(i));
                }
                Ok(Fragment::new(kind, edges[i], edges[i + 1], s_lo, s_hi))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let p = Self::from_parts(v_min, v_max, fragments);
        let structural: Vec<_> = p
            .validate()
            .into_iter()
            .filter(|v| !v.is_non_monotone())
            .collect();
        if structural.is_empty() {
            Ok(p)
        } else {
            Err(RequirementError::Invalid(structural))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("proposition serializes")
    }

    /// Parses the JSON form and rejects invalid propositions.
    pub fn from_json(s: &str) -> Result<Self, RequirementError> {
        let p: Self = serde_json::from_str(s)?;
        p.check()?;
        Ok(p)
    }

    pub(crate) fn fragments_mut(&mut self) -> &mut Vec<Fragment<T>> {
        &mut self.fragments
    }
}

impl<T: Scalar> fmt::Display for Proposition<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.encode())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Token<T> {
    Kind(FragmentKind),
    Boundary(T),
}

/// Interleaved kinds and internal boundary values, e.g. `{E, 2, S, 3.5, E, 5, S}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PropositionEncoding<T> {
    pub tokens: Vec<Token<T>>,
}

impl<T: Scalar> PropositionEncoding<T> {
    pub fn new(tokens: Vec<Token<T>>) -> Self {
        PropositionEncoding { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Parses the brace form produced by `Display`.
    pub fn parse(s: &str) -> Result<Self, RequirementError> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| RequirementError::Parse(s.to_string()))?;
        let tokens = inner
            .split(',')
            .map(str::trim)
            .map(|t| {
                let mut chars = t.chars();
                match (chars.next().and_then(FragmentKind::from_symbol), chars.next()) {
                    (Some(k), None) => Ok(Token::Kind(k)),
                    _ => t
                        .parse::<T>()
                        .map(Token::Boundary)
                        .map_err(|_| RequirementError::Parse(t.to_string())),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PropositionEncoding { tokens })
    }
}

impl<T: Scalar> fmt::Display for PropositionEncoding<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, tok) in self.tokens.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match tok {
                Token::Kind(k) => write!(f, "{k}")?,
                Token::Boundary(b) => write!(f, "{b}")?,
            }
        }
        write!(f, "}}")
    }
}
