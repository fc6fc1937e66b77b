//! Truth degrees and the finite truth spaces `C_n = {0, 1/n, ..., 1}`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default comparison tolerance for continuous degrees.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// A truth degree in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Degree(f64);

impl Degree {
    pub const ZERO: Degree = Degree(0.0);
    pub const ONE: Degree = Degree(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(Degree(value))
        } else {
            Err(Error::DegreeOutOfRange(value))
        }
    }

    /// Clamps into `[0, 1]`; NaN maps to 0.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            Degree(0.0)
        } else {
            Degree(value.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Degree {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Degree::new(value)
    }
}

impl From<Degree> for f64 {
    fn from(d: Degree) -> f64 {
        d.0
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The truth space `C_n`. Graded values are identified by their integer
/// numerator `i` (value `i/n`), so comparisons on the scale are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct GradedScale {
    n: u32,
}

impl GradedScale {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidScale);
        }
        Ok(GradedScale { n })
    }

    #[inline]
    pub fn n(self) -> u32 {
        self.n
    }

    /// Number of truth values, `n + 1`.
    #[inline]
    pub fn len(self) -> usize {
        self.n as usize + 1
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        false
    }

    /// The real value of numerator `i`.
    #[inline]
    pub fn value(self, i: u32) -> f64 {
        debug_assert!(i <= self.n);
        i as f64 / self.n as f64
    }

    pub fn values(self) -> impl Iterator<Item = f64> {
        (0..=self.n).map(move |i| self.value(i))
    }

    /// Nearest-value quantization `[v]^n`, returned as a numerator.
    ///
    /// `0` when `v <= 1/(2n)`, `i` when `(2i-1)/(2n) < v <= (2i+1)/(2n)`,
    /// `n` when `v > (2n-1)/(2n)`. Boundaries are compared as the
    /// correctly rounded quotients, so decimal literals such as `0.3` with
    /// `n = 5` land on the closed right end of their interval.
    pub fn quantize_index(self, v: f64) -> u32 {
        let n = self.n;
        if v.is_nan() {
            return 0;
        }
        let two_n = 2.0 * n as f64;
        let mut i = (v * n as f64).round().clamp(0.0, n as f64) as u32;
        while i > 0 && v <= (2 * i - 1) as f64 / two_n {
            i -= 1;
        }
        while i < n && v > (2 * i + 1) as f64 / two_n {
            i += 1;
        }
        i
    }

    /// `[v]^n` as a real value.
    #[inline]
    pub fn quantize(self, v: f64) -> f64 {
        self.value(self.quantize_index(v))
    }

    /// The numerator of `v` if `v` lies on the scale (up to float noise).
    pub fn index_of(self, v: f64) -> Option<u32> {
        let scaled = v * self.n as f64;
        let i = scaled.round();
        if (scaled - i).abs() <= 1e-7 && i >= 0.0 && i <= self.n as f64 {
            Some(i as u32)
        } else {
            None
        }
    }

    pub fn contains(self, v: f64) -> bool {
        self.index_of(v).is_some()
    }
}

impl TryFrom<u32> for GradedScale {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        GradedScale::new(n)
    }
}

impl From<GradedScale> for u32 {
    fn from(s: GradedScale) -> u32 {
        s.n
    }
}

impl fmt::Display for GradedScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.n)
    }
}

/// How degrees of an interpretation are compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Mode {
    /// Continuous degrees, equal when within `epsilon`.
    Fuzzy { epsilon: f64 },
    /// Degrees on `C_n`, compared exactly by numerator.
    Graded { n: GradedScale },
}

impl Default for Mode {
    fn default() -> Self {
        Mode::Fuzzy {
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl Mode {
    pub fn graded(scale: GradedScale) -> Self {
        Mode::Graded { n: scale }
    }

    pub fn scale(self) -> Option<GradedScale> {
        match self {
            Mode::Graded { n } => Some(n),
            Mode::Fuzzy { .. } => None,
        }
    }

    /// Three-way comparison of two degrees.
    ///
    /// Graded mode compares numerators when both values sit on the scale and
    /// falls back to a `1e-12` tolerance otherwise (off-scale values arise
    /// only from families that are not closed on `C_n`, e.g. Product).
    pub fn cmp(self, a: f64, b: f64) -> Ordering {
        match self {
            Mode::Fuzzy { epsilon } => tolerant_cmp(a, b, epsilon),
            Mode::Graded { n } => match (n.index_of(a), n.index_of(b)) {
                (Some(i), Some(j)) => i.cmp(&j),
                _ => tolerant_cmp(a, b, 1e-12),
            },
        }
    }

    #[inline]
    pub fn gt(self, a: f64, b: f64) -> bool {
        self.cmp(a, b) == Ordering::Greater
    }

    #[inline]
    pub fn ge(self, a: f64, b: f64) -> bool {
        self.cmp(a, b) != Ordering::Less
    }

    #[inline]
    pub fn eq(self, a: f64, b: f64) -> bool {
        self.cmp(a, b) == Ordering::Equal
    }

    /// Snap a computed value back onto the scale when it is within float
    /// noise of a grid point. Identity in fuzzy mode.
    pub fn normalize(self, v: f64) -> f64 {
        match self {
            Mode::Graded { n } => match n.index_of(v) {
                Some(i) => n.value(i),
                None => v,
            },
            Mode::Fuzzy { .. } => v,
        }
    }
}

pub(crate) fn tolerant_cmp(a: f64, b: f64, eps: f64) -> Ordering {
    if (a - b).abs() <= eps {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}
