use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::observation::{
    self, Dataset, MappingSet, ObservationError, RedundancyGrouping, ScopeVoteRecord, SourceSet,
};

use super::metrics::{compute_metrics, MetricsComparison};
use super::stages::{
    apply_scope_votes, merge_redundant, raw_audit, resolved_side, AuditEntry, Stage, StageResult,
};
use super::{MergeConfig, PipelineError};

/// Everything needed to compare the two analyses of one subject paper.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub subject_paper: String,
    pub dataset_e: Dataset,
    pub dataset_t: Dataset,
    /// E → T labels.
    pub mapping_e: MappingSet,
    /// T → E labels.
    pub mapping_t: MappingSet,
    pub votes_e: Vec<ScopeVoteRecord>,
    pub votes_t: Vec<ScopeVoteRecord>,
    pub grouping_e: RedundancyGrouping,
    pub grouping_t: RedundancyGrouping,
}

/// `bundle.json`: file names relative to the manifest's directory. Votes and
/// groupings are optional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleManifest {
    pub subject_paper: String,
    pub dataset_e: PathBuf,
    pub dataset_t: PathBuf,
    pub mapping_e: PathBuf,
    pub mapping_t: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub votes_e: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub votes_t: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grouping_e: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grouping_t: Option<PathBuf>,
}

pub const MANIFEST_FILE: &str = "bundle.json";

fn read(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|cause| PipelineError::Io {
        path: path.display().to_string(),
        cause,
    })
}

fn in_file<T>(path: &Path, r: Result<T, ObservationError>) -> Result<T, PipelineError> {
    r.map_err(|cause| PipelineError::Document {
        path: path.display().to_string(),
        cause,
    })
}

impl Bundle {
    /// Loads a bundle from a manifest file or a directory holding `bundle.json`.
    pub fn load(path: impl AsRef<Path>) -> Result<Bundle, PipelineError> {
        let path = path.as_ref();
        let manifest_path = if path.is_dir() {
            path.join(MANIFEST_FILE)
        } else {
            path.to_path_buf()
        };
        let manifest: BundleManifest =
            serde_json::from_str(&read(&manifest_path)?).map_err(|cause| {
                PipelineError::Manifest {
                    path: manifest_path.display().to_string(),
                    cause,
                }
            })?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let at = |p: &Path| base.join(p);

        let e_path = at(&manifest.dataset_e);
        let dataset_e = in_file(&e_path, observation::load_dataset(&read(&e_path)?))?;
        let t_path = at(&manifest.dataset_t);
        let dataset_t = in_file(&t_path, observation::load_dataset(&read(&t_path)?))?;

        let p = at(&manifest.mapping_e);
        let mapping_e = in_file(
            &p,
            observation::load_mapping(&read(&p)?, &dataset_e, &dataset_t),
        )?;
        let p = at(&manifest.mapping_t);
        let mapping_t = in_file(
            &p,
            observation::load_mapping(&read(&p)?, &dataset_t, &dataset_e),
        )?;

        let votes =
            |file: &Option<PathBuf>, ds: &Dataset| -> Result<Vec<ScopeVoteRecord>, PipelineError> {
                match file {
                    None => Ok(Vec::new()),
                    Some(f) => {
                        let p = at(f);
                        in_file(&p, observation::load_votes(&read(&p)?, ds))
                    }
                }
            };
        let grouping =
            |file: &Option<PathBuf>, ds: &Dataset| -> Result<RedundancyGrouping, PipelineError> {
                match file {
                    None => Ok(RedundancyGrouping::empty(ds.source_set)),
                    Some(f) => {
                        let p = at(f);
                        in_file(&p, observation::load_grouping(&read(&p)?, ds))
                    }
                }
            };

        let bundle = Bundle {
            subject_paper: manifest.subject_paper.clone(),
            votes_e: votes(&manifest.votes_e, &dataset_e)?,
            votes_t: votes(&manifest.votes_t, &dataset_t)?,
            grouping_e: grouping(&manifest.grouping_e, &dataset_e)?,
            grouping_t: grouping(&manifest.grouping_t, &dataset_t)?,
            dataset_e,
            dataset_t,
            mapping_e,
            mapping_t,
        };
        bundle.check()?;
        Ok(bundle)
    }

    /// Cross-document consistency that single loaders cannot see.
    pub fn check(&self) -> Result<(), PipelineError> {
        if self.dataset_e.source_set != SourceSet::E || self.dataset_t.source_set != SourceSet::T {
            return Err(PipelineError::Contract(
                "bundle datasets must be E and T respectively".into(),
            ));
        }
        for ds in [&self.dataset_e, &self.dataset_t] {
            if ds.subject_paper != self.subject_paper {
                return Err(PipelineError::Contract(format!(
                    "dataset `{}` analyses `{}`, bundle is for `{}`",
                    ds.name, ds.subject_paper, self.subject_paper
                )));
            }
        }
        if self.mapping_e.primary_set() != SourceSet::E
            || self.mapping_t.primary_set() != SourceSet::T
        {
            return Err(PipelineError::Contract(
                "mapping_e must go E→T and mapping_t T→E".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub result: StageResult,
    pub metrics: MetricsComparison,
}

/// All three stages for one subject paper, with the audit trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub subject_paper: String,
    pub config: MergeConfig,
    pub stages: Vec<StageReport>,
    pub audit: Vec<AuditEntry>,
}

impl MetricsTable {
    pub fn stage(&self, stage: Stage) -> &StageReport {
        self.stages
            .iter()
            .find(|s| s.result.stage == stage)
            .expect("all stages are present")
    }
}

pub fn run_pipeline(bundle: &Bundle, config: &MergeConfig) -> Result<MetricsTable, PipelineError> {
    config.validate()?;
    let mut audit = Vec::new();
    let mut stages = Vec::with_capacity(3);
    let mut push = |result: StageResult| {
        let metrics = compute_metrics(result.e.counts, result.t.counts, config);
        stages.push(StageReport { result, metrics });
    };

    audit.extend(raw_audit(&bundle.mapping_e));
    audit.extend(raw_audit(&bundle.mapping_t));
    push(StageResult {
        stage: Stage::Raw,
        e: resolved_side(&bundle.mapping_e),
        t: resolved_side(&bundle.mapping_t),
    });

    let voted_e = apply_scope_votes(&bundle.mapping_e, &bundle.votes_e)?;
    let voted_t = apply_scope_votes(&bundle.mapping_t, &bundle.votes_t)?;
    audit.extend(voted_e.audit);
    audit.extend(voted_t.audit);
    push(StageResult {
        stage: Stage::NoOutOfScope,
        e: resolved_side(&voted_e.mapping),
        t: resolved_side(&voted_t.mapping),
    });

    let merged_e = merge_redundant(&voted_e.mapping, &bundle.grouping_e, config)?;
    let merged_t = merge_redundant(&voted_t.mapping, &bundle.grouping_t, config)?;
    audit.extend(merged_e.audit);
    audit.extend(merged_t.audit);
    push(StageResult {
        stage: Stage::NoRedundancy,
        e: merged_e.side,
        t: merged_t.side,
    });

    Ok(MetricsTable {
        subject_paper: bundle.subject_paper.clone(),
        config: *config,
        stages,
        audit,
    })
}
