use crate::error::{LbsError, Result};
use std::fmt;
use std::str::FromStr;

/// Link g mapping a positive parameter to its linear predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Link {
    #[default]
    Log,
    SquareRoot,
    /// Only valid where the predictor is positive.
    Identity,
}

impl Link {
    /// g(x)
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Link::Log => x.ln(),
            Link::SquareRoot => x.sqrt(),
            Link::Identity => x,
        }
    }

    /// g⁻¹(η), or `None` when η lies outside the link's range.
    pub fn inverse(self, eta: f64) -> Option<f64> {
        let x = match self {
            Link::Log => eta.exp(),
            Link::SquareRoot if eta > 0.0 => eta * eta,
            Link::Identity => eta,
            _ => return None,
        };
        (x > 0.0 && x.is_finite()).then_some(x)
    }

    /// g′(x)
    pub fn d1(self, x: f64) -> f64 {
        match self {
            Link::Log => 1.0 / x,
            Link::SquareRoot => 0.5 / x.sqrt(),
            Link::Identity => 1.0,
        }
    }

    /// g″(x)
    pub fn d2(self, x: f64) -> f64 {
        match self {
            Link::Log => -1.0 / (x * x),
            Link::SquareRoot => -0.25 / (x * x.sqrt()),
            Link::Identity => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Link::Log => "log",
            Link::SquareRoot => "sqrt",
            Link::Identity => "identity",
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Link {
    type Err = LbsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "log" => Ok(Link::Log),
            "sqrt" | "squareroot" | "square_root" => Ok(Link::SquareRoot),
            "identity" | "id" => Ok(Link::Identity),
            other => Err(LbsError::Config(format!("unknown link '{other}'"))),
        }
    }
}
