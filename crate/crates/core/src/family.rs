//! The seven candidate complexity families and their predictor transforms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An asymptotic cost class. Variant order is the parsimony order used to
/// break exact ties between fits: lower-order families come first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ComplexityFamily {
    Constant,
    Log,
    SquareRoot,
    Linear,
    NLogN,
    Quadratic,
    Cubic,
}

impl ComplexityFamily {
    pub const ALL: [ComplexityFamily; 7] = [
        ComplexityFamily::Constant,
        ComplexityFamily::Log,
        ComplexityFamily::SquareRoot,
        ComplexityFamily::Linear,
        ComplexityFamily::NLogN,
        ComplexityFamily::Quadratic,
        ComplexityFamily::Cubic,
    ];

    /// The predictor `g(n)` the family regresses on. Natural log throughout.
    pub fn transform(self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain(format!(
                "{self} transform is defined for n >= 1, got 0"
            )));
        }
        Ok(self.transform_real(n as f64))
    }

    /// Transform on a real-valued size. Used for curve rendering and by
    /// callers that have already validated `n >= 1`.
    pub fn transform_real(self, n: f64) -> f64 {
        match self {
            ComplexityFamily::Constant => 1.0,
            ComplexityFamily::Log => n.ln(),
            ComplexityFamily::SquareRoot => n.sqrt(),
            ComplexityFamily::Linear => n,
            ComplexityFamily::NLogN => n * n.ln(),
            ComplexityFamily::Quadratic => n * n,
            ComplexityFamily::Cubic => n * n * n,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ComplexityFamily::Constant => "CONSTANT",
            ComplexityFamily::Log => "LOG",
            ComplexityFamily::SquareRoot => "SQUAREROOT",
            ComplexityFamily::Linear => "LINEAR",
            ComplexityFamily::NLogN => "NLOGN",
            ComplexityFamily::Quadratic => "QUADRATIC",
            ComplexityFamily::Cubic => "CUBIC",
        }
    }

    /// Big-O notation, for plot legends.
    pub fn notation(self) -> &'static str {
        match self {
            ComplexityFamily::Constant => "O(1)",
            ComplexityFamily::Log => "O(log N)",
            ComplexityFamily::SquareRoot => "O(\u{221a}N)",
            ComplexityFamily::Linear => "O(N)",
            ComplexityFamily::NLogN => "O(N log N)",
            ComplexityFamily::Quadratic => "O(N\u{b2})",
            ComplexityFamily::Cubic => "O(N\u{b3})",
        }
    }
}

impl fmt::Display for ComplexityFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ComplexityFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ComplexityFamily::ALL
            .into_iter()
            .find(|f| f.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown complexity family `{s}`")))
    }
}
