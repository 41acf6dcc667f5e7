use serde::{Deserialize, Serialize};

use crate::sigfig::two_sig;

use super::labels::LabelCounts;
use super::MergeConfig;

/// Derived metrics for one side at one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub counts: LabelCounts,
    /// ∈S
    pub in_scope: u64,
    /// G
    pub total: u64,
    /// S+, weighted
    pub coverage: f64,
    /// %N = S+ / G; absent when G = 0
    pub efficiency: Option<f64>,
}

impl MetricsRow {
    pub fn new(counts: LabelCounts, config: &MergeConfig) -> Self {
        let total = counts.total();
        let coverage = config.weight_unique * counts.unique as f64
            + config.weight_plus_alpha * counts.plus_alpha as f64;
        MetricsRow {
            counts,
            in_scope: counts.in_scope(),
            total,
            coverage,
            efficiency: (total > 0).then(|| coverage / total as f64),
        }
    }
}

/// T/E ratios. A ratio is absent when its E value is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    pub in_scope: Option<f64>,
    pub out_of_scope: Option<f64>,
    pub total: Option<f64>,
    pub coverage: Option<f64>,
    pub efficiency: Option<f64>,
}

/// Gains in whole percent: the two-significant-figure T/E ratio minus 100%.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gains {
    /// Conservative gain, counting shared observations.
    pub in_scope: Option<i64>,
    /// Headline gain on S+.
    pub coverage: Option<i64>,
    pub efficiency: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsComparison {
    pub e: MetricsRow,
    pub t: MetricsRow,
    pub ratios: Ratios,
    pub gains: Gains,
}

fn ratio(t: f64, e: f64) -> Option<f64> {
    (e != 0.0).then(|| t / e)
}

pub fn compute_metrics(
    counts_e: LabelCounts,
    counts_t: LabelCounts,
    config: &MergeConfig,
) -> MetricsComparison {
    let e = MetricsRow::new(counts_e, config);
    let t = MetricsRow::new(counts_t, config);
    let ratios = Ratios {
        in_scope: ratio(t.in_scope as f64, e.in_scope as f64),
        out_of_scope: ratio(counts_t.out_of_scope as f64, counts_e.out_of_scope as f64),
        total: ratio(t.total as f64, e.total as f64),
        coverage: ratio(t.coverage, e.coverage),
        efficiency: match (t.efficiency, e.efficiency) {
            (Some(te), Some(ee)) => ratio(te, ee),
            _ => None,
        },
    };
    let gain = |r: Option<f64>| r.map(|r| two_sig(r).gain_percent());
    let gains = Gains {
        in_scope: gain(ratios.in_scope),
        coverage: gain(ratios.coverage),
        efficiency: gain(ratios.efficiency),
    };
    MetricsComparison {
        e,
        t,
        ratios,
        gains,
    }
}
