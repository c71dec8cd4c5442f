//! Re-evaluates every witness of a report through the library.

use colombeau_core::ge::{self, EFunc};
use colombeau_core::gs::{self, FunctionNet};
use colombeau_core::verdict::{replay_matches, Probe, Verdict, Witness};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::objects::World;
use crate::report::Report;
use crate::scenario::TaskKind;

pub const REPLAY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayLine {
    pub task: String,
    pub path: String,
    pub recorded: f64,
    pub replayed: Option<f64>,
    pub error: Option<String>,
    pub ok: bool,
}

/// The derivative axis a witness at `path` was recorded against, if any.
fn axis_of(v: &Verdict, path: &str, w: &Witness) -> Option<usize> {
    let head = path.split('/').next().unwrap_or("");
    if let Some(i) = head.strip_prefix('d').and_then(|i| i.parse().ok()) {
        return Some(i);
    }
    if head.is_empty() && !matches!(w.probe, Probe::NetSpread { .. } | Probe::EFuncSpread { .. }) {
        return v.certificate("axis").map(|a| a as usize);
    }
    None
}

fn replay_one(
    world: &World,
    kind: TaskKind,
    target: &str,
    other: Option<&str>,
    v: &Verdict,
    path: &str,
    w: &Witness,
) -> Result<f64> {
    let by = "replay";
    let efunc = |r: EFunc| -> Result<f64> {
        let r = match axis_of(v, path, w) {
            Some(i) if kind == TaskKind::GeConstant => r.derive(i)?,
            _ => r,
        };
        Ok(ge::replay_efunc(&r, w)?)
    };
    let net = |u: &FunctionNet| -> Result<f64> {
        match axis_of(v, path, w) {
            Some(i) if kind == TaskKind::GsConstant => Ok(gs::replay_net(&u.derivative(i)?, w)?),
            _ => Ok(gs::replay_net(u, w)?),
        }
    };
    match kind {
        TaskKind::GsModerate | TaskKind::GsNegligible | TaskKind::GsConstant => {
            net(world.net(target, by)?)
        }
        TaskKind::GeModerate
        | TaskKind::GeNegligible
        | TaskKind::Characterization
        | TaskKind::Invertible
        | TaskKind::GeConstant
        | TaskKind::GdModerate
        | TaskKind::GdNegligible => efunc(world.efunc(target, by)?),
        TaskKind::StrictlyNonzero | TaskKind::NumberModerate | TaskKind::NumberNegligible => {
            Ok(ge::replay_number(world.number(target, by)?, None, w)?)
        }
        TaskKind::Leq => {
            let s = world.number(
                other.ok_or_else(|| CliError::Bound("leq replay needs other".into()))?,
                by,
            )?;
            Ok(ge::replay_number(world.number(target, by)?, Some(s), w)?)
        }
        TaskKind::Nondegenerate => Ok(ge::replay_number(
            &world.matrix(target, by)?.det()?,
            None,
            w,
        )?),
        _ => Err(CliError::Bound(format!(
            "task kind {} records no witnesses",
            kind.name()
        ))),
    }
}

/// Replay every witness of `report` against the objects of `world`.
pub fn replay_report(
    world: &World,
    scenario: &crate::scenario::Scenario,
    report: &Report,
    tol: f64,
) -> Vec<ReplayLine> {
    let mut out = Vec::new();
    for rec in &report.tasks {
        let Some(v) = &rec.verdict else { continue };
        let other = scenario
            .tasks
            .iter()
            .find(|t| t.name == rec.name)
            .and_then(|t| t.other.as_deref());
        for (path, w) in v.all_witnesses() {
            let r = replay_one(world, rec.kind, &rec.target, other, v, &path, w);
            let (replayed, error) = match r {
                Ok(x) => (Some(x), None),
                Err(e) => (None, Some(e.to_string())),
            };
            out.push(ReplayLine {
                task: rec.name.clone(),
                path,
                recorded: w.magnitude,
                ok: replayed.is_some_and(|x| replay_matches(w.magnitude, x, tol)),
                replayed,
                error,
            });
        }
    }
    out
}
