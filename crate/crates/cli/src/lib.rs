//! The `ethkb` command line.

use std::collections::BTreeSet;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ethkb_core::kb::{load_tree, validate_json, KbError};
use ethkb_core::observation::{dataset_to_csv, hierarchy_check, load_dataset};
use ethkb_core::pipeline::{run_pipeline, BroadLinkThreshold, Bundle, MergeConfig};
use ethkb_core::report::{format_table, ReportFormat};
use ethkb_core::{DeonticVerdict, Provenance};

#[derive(Debug, Parser)]
#[command(
    name = "ethkb",
    version,
    about = "Deontic KB trees and expert-vs-KB analysis comparison"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check KB documents; prints nothing when every file is valid.
    KbValidate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Print the rendered statement of every leaf.
    KbRender(RenderArgs),
    /// Run the comparison pipeline over one or more bundles.
    Compare(CompareArgs),
    /// Start the walkthrough HTTP service.
    Serve(ServeArgs),
    /// Convert an observation dataset to CSV.
    DatasetCsv {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RenderFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub path: PathBuf,
    /// Only leaves with this verdict.
    #[arg(long)]
    pub verdict: Option<DeonticVerdict>,
    /// Allowed leaf provenances, comma separated. Defaults to all.
    #[arg(long, value_delimiter = ',')]
    pub provenance: Vec<Provenance>,
    #[arg(long, value_enum, default_value_t = RenderFormat::Text)]
    pub format: RenderFormat,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Bundle directories or `bundle.json` manifests.
    #[arg(required = true)]
    pub bundles: Vec<PathBuf>,
    /// Reference count at which a label is too broad to resolve a group:
    /// an integer count or a fraction such as 0.25 of the secondary set.
    #[arg(long)]
    pub broad_threshold: Option<BroadLinkThreshold>,
    #[arg(long, conflicts_with = "weights")]
    pub weight_unique: Option<f64>,
    #[arg(long, conflicts_with = "weights")]
    pub weight_plus_alpha: Option<f64>,
    /// Both weights as `unique,plus_alpha`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub weights: Option<Vec<f64>>,
    #[arg(long, default_value = "text")]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CompareArgs {
    pub fn merge_config(&self) -> Result<MergeConfig> {
        let mut config = MergeConfig {
            broad_link_threshold: self.broad_threshold,
            ..MergeConfig::default()
        };
        match self.weights.as_deref() {
            Some([u, a]) => {
                config.weight_unique = *u;
                config.weight_plus_alpha = *a;
            }
            Some(other) => bail!("--weights takes two values, got {}", other.len()),
            None => {
                config.weight_unique = self.weight_unique.unwrap_or(config.weight_unique);
                config.weight_plus_alpha =
                    self.weight_plus_alpha.unwrap_or(config.weight_plus_alpha);
            }
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Directory of KB tree documents.
    #[arg(long)]
    pub kb_dir: PathBuf,
    /// Where session logs are kept. Sessions are not persisted without it.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Built UI assets served at `/`.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(text: &str, out_path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match out_path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => out
            .write_all(text.as_bytes())
            .context("cannot write output"),
    }
}

/// Runs every command except `serve`. Reports go to `out`, warnings to `err`.
pub fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    match command {
        Command::KbValidate { paths } => kb_validate(paths, out),
        Command::KbRender(args) => kb_render(args, out),
        Command::Compare(args) => compare(args, out, err),
        Command::DatasetCsv {
            path,
            out: out_path,
        } => {
            let dataset = load_dataset(&read(path)?).with_context(|| path.display().to_string())?;
            emit(&dataset_to_csv(&dataset), out_path.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Serve(args) => {
            let config = ethkb_service::ServeConfig {
                addr: args.addr,
                kb_dir: args.kb_dir.clone(),
                data_dir: args.data_dir.clone(),
                ui_dir: args.ui_dir.clone(),
            };
            let runtime =
                tokio::runtime::Runtime::new().context("cannot start the async runtime")?;
            runtime.block_on(ethkb_service::serve(config))?;
            Ok(EXIT_OK)
        }
    }
}

fn kb_validate(paths: &[PathBuf], out: &mut dyn Write) -> Result<u8> {
    let mut status = EXIT_OK;
    for path in paths {
        let text = read(path)?;
        match validate_json(&text) {
            Ok(violations) => {
                for v in &violations {
                    writeln!(out, "{}: {v}", path.display())?;
                }
                if !violations.is_empty() {
                    status = EXIT_FAILURE;
                }
            }
            Err(e) => {
                writeln!(out, "{}: {e}", path.display())?;
                status = EXIT_FAILURE;
            }
        }
    }
    Ok(status)
}

fn kb_render(args: &RenderArgs, out: &mut dyn Write) -> Result<u8> {
    let tree = load_tree(&read(&args.path)?).with_context(|| args.path.display().to_string())?;
    let tree = if args.provenance.is_empty() {
        tree
    } else {
        let allowed: BTreeSet<Provenance> = args.provenance.iter().copied().collect();
        match tree.filter_by_provenance(&allowed) {
            Ok(t) => t,
            Err(KbError::EmptyResult) => {
                bail!("{}: no leaf has an allowed provenance", args.path.display())
            }
            Err(e) => return Err(e).with_context(|| args.path.display().to_string()),
        }
    };
    let statements = tree.enumerate_leaves(args.verdict);
    match args.format {
        RenderFormat::Text => {
            for s in &statements {
                writeln!(out, "{}", s.rendered_text)?;
            }
        }
        RenderFormat::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(&statements)?)?;
        }
    }
    Ok(EXIT_OK)
}

fn compare(args: &CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    let config = args.merge_config()?;
    let mut tables = Vec::with_capacity(args.bundles.len());
    for path in &args.bundles {
        let bundle = Bundle::load(path).with_context(|| format!("bundle {}", path.display()))?;
        for (dataset, mapping) in [
            (&bundle.dataset_e, &bundle.mapping_e),
            (&bundle.dataset_t, &bundle.mapping_t),
        ] {
            for w in hierarchy_check(dataset, mapping) {
                writeln!(
                    err,
                    "warning: {}: parent `{}` and all its children ({}) carry point-awarding labels",
                    dataset.name,
                    w.parent,
                    w.children.join(", ")
                )?;
            }
        }
        tables.push(
            run_pipeline(&bundle, &config).with_context(|| format!("bundle {}", path.display()))?,
        );
    }
    emit(
        &format_table(&tables, args.format),
        args.out.as_deref(),
        out,
    )?;
    Ok(EXIT_OK)
}
