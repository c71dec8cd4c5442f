//! Task execution.

use std::collections::BTreeMap;
use std::time::Instant;

use colombeau_core::asymptotics::{fit_order, window_above_floor, Sample};
use colombeau_core::gd::{self, formalism_translate, NetSet};
use colombeau_core::ge;
use colombeau_core::gs;
use colombeau_core::testfn::{CompactBox, TestFunction};
use colombeau_core::verdict::{LabeledEstimate, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{CliError, Result};
use crate::objects::{compact, Object, World};
use crate::report::{TaskRecord, TaskStatus};
use crate::scenario::{TaskKind, TaskSpec};

/// Attempts per requested pair in a spot check.
const SPOT_ATTEMPTS: usize = 20;

#[derive(Debug, Default)]
struct Output {
    verdict: Option<Verdict>,
    estimates: Vec<LabeledEstimate>,
    metrics: BTreeMap<String, f64>,
    data: Option<serde_json::Value>,
    nets: Vec<gd::NetManifest>,
}

impl Output {
    fn verdict(v: Verdict) -> Self {
        Output {
            verdict: Some(v),
            ..Default::default()
        }
    }
}

fn need_k(t: &TaskSpec) -> Result<CompactBox> {
    compact(
        t.k.as_ref()
            .ok_or_else(|| CliError::Bound(format!("task {} needs k", t.name)))?,
    )
}

fn need_other(t: &TaskSpec) -> Result<&str> {
    t.other
        .as_deref()
        .ok_or_else(|| CliError::Bound(format!("task {} needs other", t.name)))
}

fn need_m0(t: &TaskSpec) -> Result<u32> {
    t.m0.ok_or_else(|| CliError::Bound(format!("task {} needs m0", t.name)))
}

/// Run one task; failures are recorded, not propagated.
pub fn run_task(w: &World, t: &TaskSpec) -> TaskRecord {
    let start = Instant::now();
    let result = execute(w, t);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut rec = TaskRecord {
        name: t.name.clone(),
        kind: t.kind,
        target: t.target.clone(),
        status: TaskStatus::Ok,
        error: None,
        verdict: None,
        estimates: Vec::new(),
        metrics: BTreeMap::new(),
        data: None,
        nets: Vec::new(),
        wall_ms,
    };
    match result {
        Ok(o) => {
            rec.verdict = o.verdict;
            rec.estimates = o.estimates;
            rec.metrics = o.metrics;
            rec.data = o.data;
            rec.nets = o.nets;
        }
        Err(e) => {
            rec.status = TaskStatus::Error;
            rec.error = Some(e.to_string());
        }
    }
    rec
}

/// The net set of a gd task: named test nets, or the battery's constant nets.
pub fn task_nets(w: &World, t: &TaskSpec, k: &CompactBox) -> Result<NetSet> {
    let by = format!("task '{}'", t.name);
    let set = if t.nets.is_empty() {
        NetSet::from_battery(&w.battery)
    } else {
        let nets = t
            .nets
            .iter()
            .map(|n| w.test_net(n, &by).cloned())
            .collect::<Result<Vec<_>>>()?;
        NetSet::new(nets, w.battery.grid.clone())?
    };
    Ok(set.certify(k)?)
}

fn execute(w: &World, t: &TaskSpec) -> Result<Output> {
    let by = format!("task '{}'", t.name);
    let (b, cfg) = (&w.battery, &w.config);
    let grid = &b.grid;
    Ok(match t.kind {
        TaskKind::GsModerate => Output::verdict(gs::gs_moderate_verdict(
            w.net(&t.target, &by)?,
            &need_k(t)?,
            t.alpha_max,
            grid,
            cfg,
        )?),
        TaskKind::GsNegligible => Output::verdict(gs::gs_negligible_verdict(
            w.net(&t.target, &by)?,
            &need_k(t)?,
            grid,
            cfg,
        )?),
        TaskKind::GsConstant => Output::verdict(gs::gs_constant_check(
            w.net(&t.target, &by)?,
            &need_k(t)?,
            grid,
            cfg,
        )?),
        TaskKind::GsWitnessSearch => {
            let u = w.net(&t.target, &by)?;
            let mut o = Output::default();
            match gs::gs_witness_search(u, &need_k(t)?, need_m0(t)?, grid, cfg)? {
                Some(net) => {
                    let values = gs::gs_point_eval(u, &net.point)?.samples(grid);
                    let window = &values[grid.asymptotic_window()];
                    let min = window
                        .iter()
                        .map(|s| s.magnitude.abs())
                        .fold(f64::INFINITY, f64::min);
                    o.metrics.insert("found".into(), 1.0);
                    o.metrics.insert("hits".into(), net.hits as f64);
                    o.metrics.insert("window".into(), net.window as f64);
                    o.metrics.insert("min_window_value".into(), min);
                    o.estimates
                        .push(LabeledEstimate::fit("u(x_eps)", &values, grid));
                    o.data = Some(json!({ "witness_net": net, "values": values }));
                }
                None => {
                    o.metrics.insert("found".into(), 0.0);
                }
            }
            o
        }
        TaskKind::GsPointValue => {
            let u = w.net(&t.target, &by)?;
            let x = w.gs_point(need_other(t)?, &by)?;
            x.check_support(grid)?;
            let values = gs::gs_point_eval(u, x)?.samples(grid);
            let zeros = values.iter().filter(|s| s.magnitude == 0.0).count();
            let mut o = Output::default();
            o.metrics.insert("zero_samples".into(), zeros as f64);
            o.estimates
                .push(LabeledEstimate::fit("u(x_eps)", &values, grid));
            o.data = Some(json!({ "values": values }));
            o
        }
        TaskKind::GeModerate => Output::verdict(ge::ge_moderate_verdict(
            &w.efunc(&t.target, &by)?,
            &need_k(t)?,
            t.alpha_max,
            b,
            cfg,
        )?),
        TaskKind::GeNegligible => Output::verdict(ge::ge_negligible_verdict(
            &w.efunc(&t.target, &by)?,
            &need_k(t)?,
            b,
            cfg,
        )?),
        TaskKind::Characterization => {
            let c = ge::characterization_pipeline(
                &w.efunc(&t.target, &by)?,
                &need_k(t)?,
                need_m0(t)?,
                b,
                cfg,
            )?;
            let point = c
                .point
                .map(|x| x.coords.iter().map(|e| e.to_string()).collect::<Vec<_>>());
            let orders = ge::select_orders(&c.evidence, b);
            let mut o = Output::verdict(c.verdict);
            for r in &c.evidence.rows {
                o.metrics
                    .insert(format!("hits(q={})", r.q), r.pairs.len() as f64);
            }
            o.data = Some(json!({ "evidence": c.evidence, "orders": orders, "point": point }));
            o
        }
        TaskKind::StrictlyNonzero => Output::verdict(ge::strictly_nonzero_verdict(
            w.number(&t.target, &by)?,
            b,
            cfg,
        )?),
        TaskKind::NumberModerate => Output::verdict(ge::number_moderate_verdict(
            w.number(&t.target, &by)?,
            b,
            cfg,
        )?),
        TaskKind::NumberNegligible => Output::verdict(ge::number_negligible_verdict(
            w.number(&t.target, &by)?,
            b,
            cfg,
        )?),
        TaskKind::Invertible => {
            let mut ks = t.ks.iter().map(compact).collect::<Result<Vec<_>>>()?;
            if let Some(k) = &t.k {
                ks.insert(0, compact(k)?);
            }
            Output::verdict(ge::ge_invertible_verdict(
                &w.efunc(&t.target, &by)?,
                &ks,
                b,
                cfg,
            )?)
        }
        TaskKind::Leq => Output::verdict(ge::leq_verdict(
            w.number(&t.target, &by)?,
            w.number(need_other(t)?, &by)?,
            b,
            cfg,
        )?),
        TaskKind::Nondegenerate => Output::verdict(ge::nondegenerate_verdict(
            w.matrix(&t.target, &by)?,
            b,
            cfg,
        )?),
        TaskKind::GeConstant => {
            let k2 = compact(
                t.k2.as_ref()
                    .ok_or_else(|| CliError::Bound(format!("task {} needs k2", t.name)))?,
            )?;
            let x = w.point(need_other(t)?, &by)?;
            Output::verdict(ge::ge_constant_check(
                &w.efunc(&t.target, &by)?,
                &need_k(t)?,
                &k2,
                x,
                b,
                cfg,
            )?)
        }
        TaskKind::Profile => profile(w, t, &by)?,
        TaskKind::GdModerate | TaskKind::GdNegligible => {
            let k = need_k(t)?;
            let nets = task_nets(w, t, &k)?;
            let r = w.efunc(&t.target, &by)?;
            let v = if t.kind == TaskKind::GdModerate {
                gd::gd_moderate_verdict(&r, &k, t.alpha_max, &nets, cfg)?
            } else {
                gd::gd_negligible_verdict(&r, &k, &nets, cfg)?
            };
            Output {
                verdict: Some(v),
                nets: nets.manifest(),
                ..Default::default()
            }
        }
        TaskKind::GdConstancy => {
            let x = w.gd_point(&t.target, &by)?;
            let phis: Vec<TestFunction> = b
                .orders()
                .flat_map(|q| grid.values().into_iter().map(move |e| (q, e)))
                .map(|(q, e)| b.scaled(q, e))
                .collect();
            let c = gd::constancy_check(x, &phis, &need_k(t)?.nodes());
            let mut o = Output::default();
            o.metrics
                .insert("constant".into(), if c.constant { 1.0 } else { 0.0 });
            o.data = Some(json!(c));
            o
        }
        TaskKind::GdSpotCheck => spot_check(w, t, &by)?,
    })
}

fn profile(w: &World, t: &TaskSpec, by: &str) -> Result<Output> {
    let b = &w.battery;
    let orders: Vec<u32> = if t.orders.is_empty() {
        b.orders().collect()
    } else {
        t.orders.clone()
    };
    let sub = t.subtract.unwrap_or(0.0);
    let x = t.x.clone().unwrap_or_else(|| vec![0.0; b.n]);
    let value = |phi: &TestFunction| -> Result<f64> {
        Ok(match w.get(&t.target, by)? {
            Object::Number(r) => r.eval(phi),
            _ => w.efunc(&t.target, by)?.value(phi, &x)?.unwrap_or(f64::NAN),
        })
    };
    let mut o = Output::default();
    for q in orders {
        let samples = b
            .grid
            .values()
            .into_iter()
            .map(|e| Ok(Sample::new(e, (value(&b.scaled(q, e))? - sub).abs())))
            .collect::<Result<Vec<_>>>()?;
        let label = format!("q={q}");
        let est = match t.floor {
            None => LabeledEstimate::fit(label, &samples, &b.grid),
            Some(floor) => {
                let window = window_above_floor(&samples, floor);
                match fit_order(&samples, window) {
                    Ok(e) => LabeledEstimate {
                        label,
                        estimate: Some(e),
                        status: "ok".into(),
                    },
                    Err(e) => LabeledEstimate {
                        label,
                        estimate: None,
                        status: e.to_string(),
                    },
                }
            }
        };
        if let Some(e) = &est.estimate {
            o.metrics.insert(format!("slope(q={q})"), e.slope);
        }
        o.estimates.push(est);
    }
    Ok(o)
}

/// Random guarded pairs on which the formalism round trip and the C/J
/// point-value identity must hold exactly.
fn spot_check(w: &World, t: &TaskSpec, by: &str) -> Result<Output> {
    let seed = t
        .seed
        .ok_or_else(|| CliError::Bound(format!("task {} needs a seed", t.name)))?;
    let want = t.samples.unwrap_or(100);
    let b = &w.battery;
    let r = w.efunc(&t.target, by)?;
    let x = w.gd_point(need_other(t)?, by)?;
    let pc = gd::gd_point_eval_c(&r, x)?;
    let j = formalism_translate(&r);
    let pj = gd::gd_point_eval_j(&j, &x.conjugated())?;
    let nodes = need_k(t)?.nodes();
    let eps = b.grid.values();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut guarded, mut skipped, mut round_trip, mut cj) = (0usize, 0usize, 0usize, 0usize);
    let mut attempts = 0;
    while guarded < want && attempts < SPOT_ATTEMPTS * want {
        attempts += 1;
        let q = rng.random_range(0..=b.q_max);
        let e = eps[rng.random_range(0..eps.len())];
        let xv = &nodes[rng.random_range(0..nodes.len())];
        let phi = b.scaled(q, e);
        let direct = r.value(&phi, xv)?;
        let via_j = j.eval_c(&phi, xv)?;
        let psi = phi.translated(xv);
        let lhs = pj.eval(&psi, xv)?;
        let rhs = pc.eval_translated(&psi, xv)?;
        match (direct, lhs) {
            (Some(_), Some(_)) => guarded += 1,
            _ => {
                skipped += 1;
                continue;
            }
        }
        if direct.map(f64::to_bits) != via_j.map(f64::to_bits) {
            round_trip += 1;
        }
        if lhs.map(f64::to_bits) != rhs.map(f64::to_bits) {
            cj += 1;
        }
    }
    let mut o = Output::default();
    o.metrics.insert("guarded".into(), guarded as f64);
    o.metrics.insert("skipped".into(), skipped as f64);
    o.metrics
        .insert("round_trip_mismatches".into(), round_trip as f64);
    o.metrics.insert("cj_mismatches".into(), cj as f64);
    if skipped * 2 > guarded + skipped {
        o.data =
            Some(json!({ "warning": "more than half of the sampled pairs violate the guard" }));
    }
    Ok(o)
}
