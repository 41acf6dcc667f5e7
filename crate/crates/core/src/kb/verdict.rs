use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Deontic status attached to every leaf of a knowledge-base tree.
///
/// `Permitted`, `Prohibited` and `Demanded` are settled verdicts. `Gray` and
/// `Recommended` are placeholders marking a lack of consensus; each stands for
/// a pair of settled verdicts (see [`resolve_verdict`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeonticVerdict {
    Permitted,
    Prohibited,
    Demanded,
    Gray,
    Recommended,
}

impl DeonticVerdict {
    pub const ALL: [DeonticVerdict; 5] = [
        DeonticVerdict::Permitted,
        DeonticVerdict::Prohibited,
        DeonticVerdict::Demanded,
        DeonticVerdict::Gray,
        DeonticVerdict::Recommended,
    ];

    pub fn is_settled(self) -> bool {
        matches!(
            self,
            DeonticVerdict::Permitted | DeonticVerdict::Prohibited | DeonticVerdict::Demanded
        )
    }

    pub fn is_placeholder(self) -> bool {
        !self.is_settled()
    }

    /// Lowercase wire name, as used in KB documents.
    pub fn as_str(self) -> &'static str {
        match self {
            DeonticVerdict::Permitted => "permitted",
            DeonticVerdict::Prohibited => "prohibited",
            DeonticVerdict::Demanded => "demanded",
            DeonticVerdict::Gray => "gray",
            DeonticVerdict::Recommended => "recommended",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            DeonticVerdict::Permitted => "Permitted",
            DeonticVerdict::Prohibited => "Prohibited",
            DeonticVerdict::Demanded => "Demanded",
            DeonticVerdict::Gray => "Gray",
            DeonticVerdict::Recommended => "Recommended",
        }
    }

    /// Predicate used when an action statement is rendered: "X is <phrase>".
    pub fn predicate(self) -> &'static str {
        match self {
            DeonticVerdict::Gray => "a Gray action",
            other => other.display_name(),
        }
    }
}

impl fmt::Display for DeonticVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl std::str::FromStr for DeonticVerdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DeonticVerdict::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown verdict `{s}`"))
    }
}

/// Expands a verdict into the settled verdicts it may stand for.
pub fn resolve_verdict(verdict: DeonticVerdict) -> BTreeSet<DeonticVerdict> {
    use DeonticVerdict::*;
    match verdict {
        Permitted | Prohibited | Demanded => BTreeSet::from([verdict]),
        Gray => BTreeSet::from([Permitted, Prohibited]),
        Recommended => BTreeSet::from([Permitted, Demanded]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use DeonticVerdict::*;

    #[test]
    fn settled_verdicts_resolve_to_themselves() {
        for v in [Permitted, Prohibited, Demanded] {
            assert_eq!(resolve_verdict(v), BTreeSet::from([v]));
        }
    }

    #[test]
    fn placeholders_resolve_to_pairs() {
        assert_eq!(
            resolve_verdict(Gray),
            BTreeSet::from([Permitted, Prohibited])
        );
        assert_eq!(
            resolve_verdict(Recommended),
            BTreeSet::from([Permitted, Demanded])
        );
    }

    #[test]
    fn resolution_size_tracks_settledness() {
        for v in DeonticVerdict::ALL {
            let resolved = resolve_verdict(v);
            assert!(!resolved.is_empty());
            assert!(resolved.iter().all(|r| r.is_settled()));
            assert_eq!(resolved.len() == 1, v.is_settled());
            if v.is_placeholder() {
                assert_eq!(resolved.len(), 2);
            }
        }
    }

    #[test]
    fn wire_names_round_trip() {
        for v in DeonticVerdict::ALL {
            let json = serde_json::to_string(&v).unwrap();
            assert_eq!(json, format!("\"{}\"", v.as_str()));
            assert_eq!(serde_json::from_str::<DeonticVerdict>(&json).unwrap(), v);
            assert_eq!(v.as_str().parse::<DeonticVerdict>().unwrap(), v);
        }
        assert!(serde_json::from_str::<DeonticVerdict>("\"Gray\"").is_err());
    }
}
