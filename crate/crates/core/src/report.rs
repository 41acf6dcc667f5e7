//! Renders metrics tables as a plain-text table, CSV, or JSON.
//!
//! Ratios and efficiencies use two significant figures (see
//! [`crate::sigfig`]); counts print as integers. A trailing `*` in the text
//! table marks a cell that changed since the previous stage.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::pipeline::{MetricsComparison, MetricsRow, MetricsTable, Stage};
use crate::sigfig::{format_amount, format_two_sig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!(
                "unknown report format `{other}` (expected text, csv or json)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    InScope,
    Unique,
    PlusAlpha,
    Shared,
    OutOfScope,
    Total,
    Coverage,
    Efficiency,
}

impl Metric {
    /// Row order of the published table.
    pub const ROWS: [Metric; 8] = [
        Metric::InScope,
        Metric::Unique,
        Metric::PlusAlpha,
        Metric::Shared,
        Metric::OutOfScope,
        Metric::Total,
        Metric::Coverage,
        Metric::Efficiency,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::InScope => "in_scope",
            Metric::Unique => "unique",
            Metric::PlusAlpha => "plus_alpha",
            Metric::Shared => "shared",
            Metric::OutOfScope => "out_of_scope",
            Metric::Total => "total",
            Metric::Coverage => "coverage",
            Metric::Efficiency => "efficiency",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Metric::InScope => "∈S",
            Metric::Unique => "ℵ",
            Metric::PlusAlpha => "+α",
            Metric::Shared => "∅",
            Metric::OutOfScope => "∉S",
            Metric::Total => "G",
            Metric::Coverage => "S+",
            Metric::Efficiency => "%N",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Column {
    E,
    T,
    #[serde(rename = "T/E")]
    Ratio,
    #[serde(rename = "gain")]
    Gain,
}

impl Column {
    pub fn as_str(self) -> &'static str {
        match self {
            Column::E => "E",
            Column::T => "T",
            Column::Ratio => "T/E",
            Column::Gain => "gain",
        }
    }
}

/// One formatted table cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub subject_paper: String,
    pub stage: Stage,
    pub column: Column,
    pub metric: Metric,
    pub value: String,
    pub changed: bool,
}

const ABSENT: &str = "-";

fn side_value(row: &MetricsRow, metric: Metric) -> String {
    match metric {
        Metric::InScope => row.in_scope.to_string(),
        Metric::Unique => row.counts.unique.to_string(),
        Metric::PlusAlpha => row.counts.plus_alpha.to_string(),
        Metric::Shared => row.counts.shared.to_string(),
        Metric::OutOfScope => row.counts.out_of_scope.to_string(),
        Metric::Total => row.total.to_string(),
        Metric::Coverage => format_amount(row.coverage),
        Metric::Efficiency => row
            .efficiency
            .map_or_else(|| ABSENT.to_string(), format_two_sig),
    }
}

fn ratio_value(m: &MetricsComparison, metric: Metric) -> Option<String> {
    let r = match metric {
        Metric::InScope => m.ratios.in_scope,
        Metric::OutOfScope => m.ratios.out_of_scope,
        Metric::Total => m.ratios.total,
        Metric::Coverage => m.ratios.coverage,
        Metric::Efficiency => m.ratios.efficiency,
        _ => return None,
    };
    Some(r.map_or_else(|| ABSENT.to_string(), format_two_sig))
}

pub fn format_gain(gain: Option<i64>) -> String {
    match gain {
        Some(g) if g >= 0 => format!("+{g}%"),
        Some(g) => format!("{g}%"),
        None => ABSENT.to_string(),
    }
}

fn gain_value(m: &MetricsComparison, metric: Metric) -> Option<String> {
    let g = match metric {
        Metric::InScope => m.gains.in_scope,
        Metric::Coverage => m.gains.coverage,
        Metric::Efficiency => m.gains.efficiency,
        _ => return None,
    };
    Some(format_gain(g))
}

/// Every cell of the table in stage, row, column order.
pub fn table_cells(table: &MetricsTable) -> Vec<Cell> {
    let mut cells: Vec<Cell> = Vec::new();
    for (s, report) in table.stages.iter().enumerate() {
        let m = &report.metrics;
        for metric in Metric::ROWS {
            let values = [
                (Column::E, Some(side_value(&m.e, metric))),
                (Column::T, Some(side_value(&m.t, metric))),
                (Column::Ratio, ratio_value(m, metric)),
                (Column::Gain, gain_value(m, metric)),
            ];
            for (column, value) in values {
                let Some(value) = value else { continue };
                let changed = s > 0
                    && column != Column::Gain
                    && cells.iter().any(|c| {
                        c.stage == table.stages[s - 1].result.stage
                            && c.metric == metric
                            && c.column == column
                            && c.value != value
                    });
                cells.push(Cell {
                    subject_paper: table.subject_paper.clone(),
                    stage: report.result.stage,
                    column,
                    metric,
                    value,
                    changed,
                });
            }
        }
    }
    cells
}

pub fn format_table(tables: &[MetricsTable], format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => tables
            .iter()
            .map(format_text)
            .collect::<Vec<_>>()
            .join("\n"),
        ReportFormat::Csv => format_csv(tables),
        ReportFormat::Json => format_json(tables),
    }
}

fn pad_left(s: &str, width: usize) -> String {
    let n = s.chars().count();
    format!("{}{s}", " ".repeat(width.saturating_sub(n)))
}

fn pad_right(s: &str, width: usize) -> String {
    let n = s.chars().count();
    format!("{s}{}", " ".repeat(width.saturating_sub(n)))
}

const LABEL_W: usize = 6;
const CELL_W: usize = 7;

pub fn format_text(table: &MetricsTable) -> String {
    let cells = table_cells(table);
    let lookup = |stage: Stage, metric: Metric, column: Column| {
        cells
            .iter()
            .find(|c| c.stage == stage && c.metric == metric && c.column == column)
            .map(|c| {
                if c.changed {
                    format!("{}*", c.value)
                } else {
                    c.value.clone()
                }
            })
            .unwrap_or_default()
    };
    let stages: Vec<Stage> = table.stages.iter().map(|s| s.result.stage).collect();

    let mut out = String::new();
    writeln!(out, "{}", table.subject_paper).unwrap();
    let mut line = pad_right("", LABEL_W);
    for stage in &stages {
        line.push_str(&pad_right(&format!("  {}", stage.title()), 3 * CELL_W));
    }
    writeln!(out, "{}", line.trim_end()).unwrap();
    let mut line = pad_right("", LABEL_W);
    for _ in &stages {
        for col in [Column::E, Column::T, Column::Ratio] {
            line.push_str(&pad_left(col.as_str(), CELL_W));
        }
    }
    writeln!(out, "{line}").unwrap();
    for metric in Metric::ROWS {
        let mut line = pad_right(metric.symbol(), LABEL_W);
        for &stage in &stages {
            for col in [Column::E, Column::T, Column::Ratio] {
                line.push_str(&pad_left(&lookup(stage, metric, col), CELL_W));
            }
        }
        writeln!(out, "{}", line.trim_end()).unwrap();
    }
    writeln!(out).unwrap();
    writeln!(out, "gains (T/E - 100%)").unwrap();
    for metric in [Metric::Coverage, Metric::InScope, Metric::Efficiency] {
        let parts: Vec<String> = stages
            .iter()
            .map(|&stage| format!("{} {}", stage.title(), lookup(stage, metric, Column::Gain)))
            .collect();
        writeln!(out, "  {} gain: {}", metric.symbol(), parts.join(", ")).unwrap();
    }
    writeln!(out, "* changed from the previous stage").unwrap();
    out
}

pub fn format_csv(tables: &[MetricsTable]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "subject_paper",
            "stage",
            "side",
            "metric",
            "value",
            "changed",
        ])
        .expect("in-memory write");
    for table in tables {
        for cell in table_cells(table) {
            writer
                .write_record([
                    cell.subject_paper.as_str(),
                    cell.stage.as_str(),
                    cell.column.as_str(),
                    cell.metric.as_str(),
                    cell.value.as_str(),
                    if cell.changed { "true" } else { "false" },
                ])
                .expect("in-memory write");
        }
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8")
}

#[derive(Serialize)]
struct JsonReport<'a> {
    tables: &'a [MetricsTable],
}

pub fn format_json(tables: &[MetricsTable]) -> String {
    let mut s = serde_json::to_string_pretty(&JsonReport { tables }).expect("metrics serialize");
    s.push('\n');
    s
}
