use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PipelineError;

/// How many secondary references make an item's label too broad to use when
/// resolving a redundancy group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum BroadLinkThreshold {
    /// Fixed number of references.
    Count(u32),
    /// Fraction of the counted secondary set, rounded up.
    Fraction(f64),
}

impl BroadLinkThreshold {
    pub fn resolve(self, secondary_size: usize) -> usize {
        match self {
            BroadLinkThreshold::Count(n) => n as usize,
            BroadLinkThreshold::Fraction(f) => ((f * secondary_size as f64).ceil() as usize).max(1),
        }
    }
}

impl fmt::Display for BroadLinkThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BroadLinkThreshold::Count(n) => write!(f, "{n}"),
            BroadLinkThreshold::Fraction(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for BroadLinkThreshold {
    type Err = PipelineError;

    /// `"9"` is a count, `"0.25"` a fraction of the secondary set.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let invalid =
            || PipelineError::InvalidConfig(format!("invalid broad-link threshold `{s}`"));
        if s.contains('.') {
            let f: f64 = s.parse().map_err(|_| invalid())?;
            if !(f > 0.0 && f <= 1.0) {
                return Err(invalid());
            }
            Ok(BroadLinkThreshold::Fraction(f))
        } else {
            let n: u32 = s.parse().map_err(|_| invalid())?;
            if n == 0 {
                return Err(invalid());
            }
            Ok(BroadLinkThreshold::Count(n))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeConfig {
    /// `None` selects the default, max(5, ⌈25% of the secondary set⌉).
    pub broad_link_threshold: Option<BroadLinkThreshold>,
    pub weight_unique: f64,
    pub weight_plus_alpha: f64,
}

impl Default for MergeConfig {
    fn default() -> Self {
        MergeConfig {
            broad_link_threshold: None,
            weight_unique: 1.0,
            weight_plus_alpha: 1.0,
        }
    }
}

impl MergeConfig {
    pub const DEFAULT_MIN_BROAD_LINKS: usize = 5;
    pub const DEFAULT_BROAD_FRACTION: f64 = 0.25;

    pub fn validate(&self) -> Result<(), PipelineError> {
        for (name, w) in [
            ("weight_unique", self.weight_unique),
            ("weight_plus_alpha", self.weight_plus_alpha),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(PipelineError::InvalidConfig(format!(
                    "{name} must be a nonnegative number, got {w}"
                )));
            }
        }
        match self.broad_link_threshold {
            Some(BroadLinkThreshold::Count(0)) => Err(PipelineError::InvalidConfig(
                "broad-link threshold must be positive".into(),
            )),
            Some(BroadLinkThreshold::Fraction(f)) if !(f > 0.0 && f <= 1.0) => {
                Err(PipelineError::InvalidConfig(format!(
                    "broad-link fraction must be in (0, 1], got {f}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Minimum reference count at which a label is considered too broad.
    pub fn broad_link_limit(&self, secondary_size: usize) -> usize {
        match self.broad_link_threshold {
            Some(t) => t.resolve(secondary_size),
            None => Self::DEFAULT_MIN_BROAD_LINKS.max(
                BroadLinkThreshold::Fraction(Self::DEFAULT_BROAD_FRACTION).resolve(secondary_size),
            ),
        }
    }
}
