//! Report records and their json, csv and text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use colombeau_core::gd::NetManifest;
use colombeau_core::ge::BatteryManifest;
use colombeau_core::verdict::{Config, LabeledEstimate, Outcome, Verdict};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::scenario::TaskKind;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub name: String,
    pub kind: TaskKind,
    pub target: String,
    pub status: TaskStatus,
    pub error: Option<String>,
    pub verdict: Option<Verdict>,
    /// Estimates of tasks that produce no verdict.
    pub estimates: Vec<LabeledEstimate>,
    pub metrics: BTreeMap<String, f64>,
    pub data: Option<serde_json::Value>,
    pub nets: Vec<NetManifest>,
    /// Wall time; kept out of the json so reruns compare byte for byte.
    #[serde(skip)]
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub scenario: String,
    pub description: String,
    pub battery: BatteryManifest,
    pub config: Config,
    pub tasks: Vec<TaskRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn parse(s: &str) -> Result<Format> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" | "txt" => Ok(Format::Text),
            other => Err(CliError::Bound(format!("unknown format '{other}'"))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

pub fn verdict_label(v: &Verdict) -> &'static str {
    match v.outcome {
        Outcome::RefutedWithWitness { .. } => "refuted",
        Outcome::SupportedUpTo { .. } => "supported",
        Outcome::Inconclusive { .. } => "inconclusive",
    }
}

fn collect_estimates<'a>(v: &'a Verdict, path: &str, out: &mut Vec<(String, &'a LabeledEstimate)>) {
    for e in &v.estimates {
        out.push((path.to_string(), e));
    }
    for c in &v.components {
        let p = if path.is_empty() {
            c.name.clone()
        } else {
            format!("{path}/{}", c.name)
        };
        collect_estimates(&c.verdict, &p, out);
    }
}

impl TaskRecord {
    /// Every order estimate with its component path.
    pub fn all_estimates(&self) -> Vec<(String, &LabeledEstimate)> {
        let mut out: Vec<(String, &LabeledEstimate)> =
            self.estimates.iter().map(|e| (String::new(), e)).collect();
        if let Some(v) = &self.verdict {
            collect_estimates(v, "", &mut out);
        }
        out
    }

    pub fn outcome_label(&self) -> &'static str {
        match (&self.status, &self.verdict) {
            (TaskStatus::Error, _) => "error",
            (_, Some(v)) => verdict_label(v),
            (_, None) => "done",
        }
    }
}

impl Report {
    pub fn has_errors(&self) -> bool {
        self.tasks.iter().any(|t| t.status == TaskStatus::Error)
    }

    pub fn estimate_count(&self) -> usize {
        self.tasks.iter().map(|t| t.all_estimates().len()).sum()
    }

    pub fn task(&self, name: &str) -> Option<&TaskRecord> {
        self.tasks.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: "report".into(),
            message: e.to_string(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "task",
            "kind",
            "outcome",
            "component",
            "label",
            "status",
            "slope",
            "intercept",
            "residual",
            "used",
            "window_start",
            "window_end",
        ])
        .expect("in-memory csv");
        for t in &self.tasks {
            for (path, e) in t.all_estimates() {
                let num = |f: fn(&colombeau_core::asymptotics::OrderEstimate) -> f64| {
                    e.estimate
                        .as_ref()
                        .map(|o| format!("{:?}", f(o)))
                        .unwrap_or_default()
                };
                let used = e
                    .estimate
                    .as_ref()
                    .map(|o| o.used.to_string())
                    .unwrap_or_default();
                w.write_record([
                    t.name.as_str(),
                    &t.kind.name(),
                    t.outcome_label(),
                    &path,
                    &e.label,
                    &e.status,
                    &num(|o| o.slope),
                    &num(|o| o.intercept),
                    &num(|o| o.residual),
                    &used,
                    &num(|o| o.window_start),
                    &num(|o| o.window_end),
                ])
                .expect("in-memory csv");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario {}  battery {}", self.scenario, self.battery.id);
        for t in &self.tasks {
            let _ = write!(
                s,
                "{:<28} {:<18} {:<13}",
                t.name,
                t.kind.name(),
                t.outcome_label()
            );
            if let Some(e) = &t.error {
                let _ = write!(s, " {e}");
            }
            if let Some(v) = &t.verdict {
                for (k, c) in &v.certificates {
                    let _ = write!(s, " {k}={c}");
                }
                if let Some(w) = v.witness() {
                    let _ = write!(s, " |w|={:e} at eps={:e}", w.magnitude, w.eps);
                }
                if let Outcome::Inconclusive { reason } = &v.outcome {
                    let _ = write!(s, " ({reason})");
                }
            }
            for (k, m) in &t.metrics {
                let _ = write!(s, " {k}={m}");
            }
            let _ = writeln!(s, " [{:.1} ms]", t.wall_ms);
        }
        s
    }

    pub fn render(&self, f: Format) -> String {
        match f {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
            Format::Text => self.to_text(),
        }
    }

    /// Write one file per format into `dir`, named after the scenario.
    pub fn emit(&self, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
        let io = |p: &Path, e: std::io::Error| CliError::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut out = Vec::new();
        for &f in formats {
            let p = dir.join(format!("{}.{}", self.scenario, f.extension()));
            std::fs::write(&p, self.render(f)).map_err(|e| io(&p, e))?;
            out.push(p);
        }
        Ok(out)
    }
}
