//! Outward rounding for double-precision bounds.
//!
//! Every real-valued bound in this crate is computed in `f64` and then pushed
//! outward by a relative slack of `2^-bits`. Lower bounds move down, upper
//! bounds move up, so a positive margin assembled from them stays a valid
//! certificate as long as the accumulated floating error is below the slack.

use serde::{Deserialize, Serialize};

pub const DEFAULT_SLACK_BITS: u32 = 40;

/// Relative rounding slack `2^-bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slack {
    bits: u32,
}

impl Default for Slack {
    fn default() -> Self {
        Slack {
            bits: DEFAULT_SLACK_BITS,
        }
    }
}

impl Slack {
    /// `bits` must lie in `1..=52`; outside that range the slack is either
    /// meaningless (no headroom over the f64 mantissa) or larger than the value.
    pub fn from_bits(bits: u32) -> Option<Self> {
        (1..=52).contains(&bits).then_some(Slack { bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Halves the exponent, i.e. doubles the relative slack.
    pub fn doubled(&self) -> Self {
        Slack {
            bits: self.bits.saturating_sub(1).max(1),
        }
    }

    pub fn relative(&self) -> f64 {
        (-(self.bits as f64)).exp2()
    }

    /// Rounds `x` toward `+inf` by the relative slack.
    pub fn up(&self, x: f64) -> f64 {
        let r = self.relative();
        if x > 0.0 {
            x * (1.0 + r)
        } else if x < 0.0 {
            x * (1.0 - r)
        } else {
            // an exact zero from a sum of positive terms never happens here,
            // but keep the result strictly on the safe side
            f64::MIN_POSITIVE
        }
    }

    /// Rounds `x` toward `-inf` by the relative slack.
    pub fn down(&self, x: f64) -> f64 {
        let r = self.relative();
        if x > 0.0 {
            x * (1.0 - r)
        } else if x < 0.0 {
            x * (1.0 + r)
        } else {
            -f64::MIN_POSITIVE
        }
    }
}

/// Direction in which a reported value was rounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    Down,
    Up,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Directed {
    pub value: f64,
    pub rounding: Rounding,
}

impl Directed {
    pub fn up(slack: Slack, x: f64) -> Self {
        Directed {
            value: slack.up(x),
            rounding: Rounding::Up,
        }
    }

    pub fn down(slack: Slack, x: f64) -> Self {
        Directed {
            value: slack.down(x),
            rounding: Rounding::Down,
        }
    }
}
