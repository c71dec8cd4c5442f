//! Acceptance checks. One PASS/FAIL line per criterion; exits nonzero on
//! any failure.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use colombeau_cli::replay::replay_report;
use colombeau_cli::{bundled, run_scenario, Report, Scenario, World};
use colombeau_core::asymptotics::EpsGrid;
use colombeau_core::expr::Expr;
use colombeau_core::ge::EFunc;
use colombeau_core::ge::{construct_point, gather_evidence, select_orders, GenNumberGe};
use colombeau_core::gs::{gs_point_eval, gs_witness_search, FunctionNet, GenPointGs};
use colombeau_core::multiindex;
use colombeau_core::testfn::{make_bump, make_moment_testfn, CompactBox, DistributionSpec, Domain};
use colombeau_core::verdict::{Config, Verdict};
use serde_json::Value;

type Check = Result<String, String>;

struct Runs {
    cache: BTreeMap<String, (Scenario, World, Report)>,
}

impl Runs {
    fn get(&mut self, name: &str) -> Result<&(Scenario, World, Report), String> {
        if !self.cache.contains_key(name) {
            let s = bundled(name)
                .ok_or_else(|| format!("no bundled scenario {name}"))?
                .map_err(|e| e.to_string())?;
            let world = World::build(&s).map_err(|e| e.to_string())?;
            let report = run_scenario(&s, false).map_err(|e| e.to_string())?;
            if report.has_errors() {
                return Err(format!("{name}: task errors"));
            }
            self.cache.insert(name.to_string(), (s, world, report));
        }
        Ok(&self.cache[name])
    }
}

fn verdict<'a>(report: &'a Report, task: &str) -> Result<&'a Verdict, String> {
    report
        .task(task)
        .and_then(|t| t.verdict.as_ref())
        .ok_or_else(|| format!("task {task} has no verdict"))
}

fn metric(report: &Report, task: &str, key: &str) -> Result<f64, String> {
    report
        .task(task)
        .and_then(|t| t.metrics.get(key).copied())
        .ok_or_else(|| format!("task {task} has no metric {key}"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn replays(runs: &mut Runs, scenario: &str, task: &str) -> Result<usize, String> {
    let (s, world, report) = runs.get(scenario)?;
    let lines: Vec<_> = replay_report(world, s, report, 1e-12)
        .into_iter()
        .filter(|l| l.task == task)
        .collect();
    ensure(!lines.is_empty(), || format!("{task}: nothing to replay"))?;
    if let Some(bad) = lines.iter().find(|l| !l.ok) {
        return Err(format!(
            "{task}/{} does not replay: {:?}",
            bad.path, bad.replayed
        ));
    }
    Ok(lines.len())
}

fn moment_factory() -> Check {
    let start = Instant::now();
    let mut worst_constrained: f64 = 0.0;
    let mut worst_designated: f64 = 0.0;
    let cases = (0..=6).map(|q| (1, q)).chain((0..=3).map(|q| (2, q)));
    for (n, q) in cases {
        let phi = make_moment_testfn(n, q, 1, 1.0).map_err(|e| e.to_string())?;
        let g = &phi.generator;
        for alpha in multiindex::up_to(n, q + 1) {
            let m = g.quad_moment(&alpha);
            let d = multiindex::degree(&alpha);
            if d == q + 1 && alpha[0] == q + 1 {
                worst_designated = worst_designated.max((m - 1.0).abs());
            } else {
                let target = if d == 0 { 1.0 } else { 0.0 };
                worst_constrained = worst_constrained.max((m - target).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst_constrained <= 1e-8, || {
        format!("constrained moment off by {worst_constrained:e}")
    })?;
    ensure(worst_designated <= 1e-6, || {
        format!("designated moment off by {worst_designated:e}")
    })?;
    ensure(secs < 10.0, || format!("took {secs:.2} s"))?;
    Ok(format!(
        "max constrained error {worst_constrained:.1e}, designated {worst_designated:.1e}, {secs:.2} s"
    ))
}

fn scaling_laws() -> Check {
    let grid = EpsGrid::default();
    let mut worst: f64 = 0.0;
    for n in 1..=2 {
        let mut fns = vec![make_bump(n, 1.0).map_err(|e| e.to_string())?];
        for q in 0..=3 {
            fns.push(make_moment_testfn(n, q, 1, 1.0).map_err(|e| e.to_string())?);
        }
        for phi in &fns {
            for alpha in multiindex::up_to(n, 4) {
                let base = phi.integrate(|y| multiindex::monomial(y, &alpha));
                let d = multiindex::degree(&alpha) as i32;
                for eps in grid.values() {
                    let s = phi.scaled(eps).map_err(|e| e.to_string())?;
                    let got = s.integrate(|y| multiindex::monomial(y, &alpha));
                    let want = eps.powi(d) * base;
                    let err = (got - want).abs() / (eps.powi(d) * base.abs().max(1.0));
                    worst = worst.max(err);
                }
            }
        }
    }
    ensure(worst <= 1e-9, || format!("relative error {worst:e}"))?;
    Ok(format!(
        "max error {worst:.1e} relative to eps^|alpha|, |alpha| <= 4, n = 1, 2"
    ))
}

fn embedding_rates(runs: &mut Runs) -> Check {
    let (_, world, report) = runs.get("embedding_rates")?;
    let mut slopes = Vec::new();
    for q in 0..=4u32 {
        let slope = metric(report, "sine_rates", &format!("slope(q={q})"))?;
        let (lo, hi) = (q as f64 + 0.7, q as f64 + 1.3);
        ensure(slope >= lo && slope <= hi, || {
            format!("q={q}: slope {slope} outside [{lo}, {hi}]")
        })?;
        slopes.push(format!("{slope:.3}"));
    }
    let sine = EFunc::embed(
        &DistributionSpec::smooth(Expr::parse("sin(x0)").unwrap(), world.domain.clone())
            .map_err(|e| e.to_string())?,
    );
    let x = 0.3f64;
    let eps = 2f64.powi(-6);
    let mut worst: f64 = 0.0;
    for q in 0..=4u32 {
        let v = sine
            .value(&world.battery.scaled(q, eps), &[x])
            .map_err(|e| e.to_string())?
            .ok_or("guard")?
            - x.sin();
        let k = q + 1;
        let deriv = match k % 4 {
            0 => x.sin(),
            1 => x.cos(),
            2 => -x.sin(),
            _ => -x.cos(),
        };
        let fact: f64 = (1..=k).map(f64::from).product();
        let oracle = deriv / fact * eps.powi(k as i32);
        worst = worst.max(((v - oracle) / oracle).abs());
    }
    ensure(worst <= 0.05, || {
        format!("Taylor oracle off by {worst:.3} relative")
    })?;
    Ok(format!(
        "slopes q=0..4: {}; Taylor oracle rel error {worst:.1e}",
        slopes.join(" ")
    ))
}

fn delta_products(runs: &mut Runs) -> Check {
    let report = &runs.get("delta_squared")?.2;
    for q in 0..=4u32 {
        let s1 = metric(report, "delta_rate", &format!("slope(q={q})"))?;
        let s2 = metric(report, "delta_sq_rate", &format!("slope(q={q})"))?;
        ensure((s1 + 1.0).abs() <= 0.05, || {
            format!("delta slope {s1} at q={q}")
        })?;
        ensure((s2 + 2.0).abs() <= 0.1, || {
            format!("delta^2 slope {s2} at q={q}")
        })?;
    }
    ensure(verdict(report, "delta_sq_negligible")?.is_refuted(), || {
        "delta^2 not refuted".into()
    })?;
    let n = replays(runs, "delta_squared", "delta_sq_negligible")?;
    Ok(format!(
        "slopes -1 and -2 for q=0..4; negligibility refuted, {n} witness replays"
    ))
}

fn characterization(runs: &mut Runs) -> Check {
    let (_, world, report) = runs.get("delta_squared")?;
    let battery = &world.battery;
    let delta = world
        .efunc("delta", "acceptance")
        .map_err(|e| e.to_string())?;
    let k = CompactBox::new(vec![-0.5], vec![0.5], 17).map_err(|e| e.to_string())?;
    let ev = gather_evidence(&delta, &k, 1, battery, &world.config).map_err(|e| e.to_string())?;
    for q in battery.orders() {
        ensure(ev.qualifies(q), || format!("no evidence at q={q}"))?;
    }
    let x = construct_point(&ev, &[0.0], &k, battery).map_err(|e| e.to_string())?;
    let value = GenNumberGe::point_value(&delta, &x).map_err(|e| e.to_string())?;
    let mut pairs = 0;
    for q in select_orders(&ev, battery) {
        for p in &ev.row(q).ok_or("missing row")?.pairs {
            let v = value.eval(&battery.scaled(q, p.eps)).abs();
            ensure(v >= p.eps, || {
                format!("|R(X)| = {v:e} < eps = {:e} at q={q}", p.eps)
            })?;
            pairs += 1;
        }
    }
    let zero = verdict(report, "zero_characterization")?;
    ensure(zero.is_supported(), || format!("zero: {}", zero.name()))?;
    for q in battery.orders() {
        let hits = metric(report, "zero_characterization", &format!("hits(q={q})"))?;
        ensure(hits == 0.0, || {
            format!("zero has {hits} evidence hits at q={q}")
        })?;
    }
    Ok(format!(
        "evidence at q=0..{}, |R(X)| >= eps at {pairs} pairs; zero supported",
        battery.q_max
    ))
}

fn special_point_values() -> Check {
    let domain = Arc::new(Domain::interval(-1.0, 2.0).map_err(|e| e.to_string())?);
    let u = FunctionNet::parse("bump(2*(x0/eps - 1))", domain).map_err(|e| e.to_string())?;
    let grid = EpsGrid::default();
    let window = grid.asymptotic_window();
    let eps_values = grid.values();
    let mut checked = 0;
    for j in 0..64 {
        let x0 = j as f64 / 63.0;
        let value = gs_point_eval(&u, &GenPointGs::constant(&[x0])).map_err(|e| e.to_string())?;
        for (i, &eps) in eps_values.iter().enumerate() {
            let v = value.eval(eps);
            let outside = (2.0 * (x0 / eps - 1.0)).abs() >= 1.0;
            ensure((v == 0.0) == outside, || {
                format!("x0={x0}, eps={eps}: value {v:e}")
            })?;
            if eps < 1.0 / 6.0 && x0 >= 0.25 || window.contains(&i) {
                ensure(v == 0.0, || format!("x0={x0}, eps={eps}: value {v:e}"))?;
            }
            checked += 1;
        }
    }
    let psi_max = (0..=4000)
        .map(|i| -0.5 + i as f64 / 4000.0)
        .map(|s| {
            Expr::parse("bump(2*x0)")
                .unwrap()
                .eval(&colombeau_core::expr::EvalCtx::at(1.0, &[s]))
        })
        .fold(0.0, f64::max);
    let k = CompactBox::new(vec![0.0], vec![1.0], 64).map_err(|e| e.to_string())?;
    let w = gs_witness_search(&u, &k, 1, &grid, &Config::default())
        .map_err(|e| e.to_string())?
        .ok_or("no witness net")?;
    let along = gs_point_eval(&u, &w.point).map_err(|e| e.to_string())?;
    let values: Vec<f64> = eps_values[window].iter().map(|&e| along.eval(e)).collect();
    let first = values[0];
    ensure(values.iter().all(|&v| v == first), || {
        "witness value is not constant".into()
    })?;
    ensure(first >= 0.9 * psi_max, || {
        format!("witness value {first} < 0.9 * {psi_max}")
    })?;
    Ok(format!(
        "{checked} classical samples follow the support rule, all zero on the window; witness value {first:.6} vs max psi {psi_max:.6}"
    ))
}

fn invertibility(runs: &mut Runs) -> Check {
    let (_, world, report) = runs.get("invertibility")?;
    let battery = &world.battery;
    let nz = verdict(report, "e_strictly_nonzero")?;
    ensure(nz.is_supported() && nz.certificate("q") == Some(1), || {
        "eps not strictly nonzero with q=1".into()
    })?;
    let prod = world
        .number("e_times_inv", "acceptance")
        .map_err(|e| e.to_string())?;
    let annihilated = world
        .number("annihilated", "acceptance")
        .map_err(|e| e.to_string())?;
    let eps_values = battery.grid.values();
    for q in battery.orders() {
        for &eps in &eps_values[battery.grid.asymptotic_window()] {
            let v = prod.eval(&battery.scaled(q, eps));
            ensure(v == 1.0, || format!("r * inv(r) = {v} at q={q}, eps={eps}"))?;
        }
        for &eps in &eps_values {
            let v = annihilated.eval(&battery.scaled(q, eps));
            ensure(v == 0.0, || format!("r * s = {v} at q={q}, eps={eps}"))?;
        }
    }
    ensure(
        verdict(report, "holes_strictly_nonzero")?.is_refuted(),
        || "holes not refuted".into(),
    )?;
    ensure(verdict(report, "partner_negligible")?.is_refuted(), || {
        "partner is negligible".into()
    })?;
    let a = replays(runs, "invertibility", "holes_strictly_nonzero")?;
    let b = replays(runs, "invertibility", "partner_negligible")?;
    Ok(format!(
        "q=1 and r * inv(r) = 1; r * s = 0 on the full battery; {} witnesses replay",
        a + b
    ))
}

fn matrices(runs: &mut Runs) -> Check {
    let (_, world, report) = runs.get("matrices")?;
    let battery = &world.battery;
    let v = verdict(report, "diag_nondegenerate")?;
    ensure(v.is_supported() && v.certificate("q") == Some(2), || {
        "diag(e, e): no det certificate q=2".into()
    })?;
    let a = world
        .matrix("diag", "acceptance")
        .map_err(|e| e.to_string())?;
    let prod = a
        .mul(&a.adjugate_inverse().map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for q in battery.orders() {
        for &eps in &battery.grid.values()[battery.grid.asymptotic_window()] {
            for (i, row) in prod.eval(&battery.scaled(q, eps)).iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    worst = worst.max((x - if i == j { 1.0 } else { 0.0 }).abs());
                }
            }
        }
    }
    ensure(worst <= 1e-12, || format!("A * inv(A) - I = {worst:e}"))?;
    ensure(
        verdict(report, "degenerate_nondegenerate")?.is_refuted(),
        || "[[e,0],[1,0]] not refuted".into(),
    )?;
    Ok(format!(
        "det certificate q=2, |A * inv(A) - I| <= {worst:e}; degenerate matrix refuted"
    ))
}

fn constants(runs: &mut Runs) -> Check {
    let report = &runs.get("constants")?.2;
    let rho = verdict(report, "rho_r_constant")?;
    ensure(rho.is_supported(), || "rho(r) not constant".into())?;
    let spread = rho
        .components
        .iter()
        .find(|c| c.name == "spread")
        .ok_or("no spread component")?;
    ensure(
        spread.verdict.is_supported()
            && !spread.verdict.estimates.is_empty()
            && spread
                .verdict
                .estimates
                .iter()
                .all(|e| e.status == "identically zero on window"),
        || "spread is not identically zero".into(),
    )?;
    let id = verdict(report, "identity_constant")?;
    let d0 = id
        .components
        .iter()
        .find(|c| c.name == "d0")
        .ok_or("no d0 component")?;
    let w = d0.verdict.witness().ok_or("D iota(id) has no witness")?;
    ensure(
        w.magnitude == 1.0 && w.sequence.iter().all(|s| s.magnitude == 1.0),
        || format!("D iota(id) = {} is not exactly 1", w.magnitude),
    )?;
    let n = replays(runs, "constants", "identity_constant")?;
    Ok(format!(
        "spread identically 0; D iota(id) = 1 exactly, {n} witnesses replay"
    ))
}

fn normalized(v: &Verdict) -> Value {
    fn strip(v: &mut Value) {
        match v {
            Value::Object(map) => {
                map.remove("label");
                map.remove("battery");
                map.remove("net");
                if map.get("probe").is_some_and(Value::is_string) {
                    map.remove("probe");
                }
                map.values_mut().for_each(strip);
            }
            Value::Array(items) => items.iter_mut().for_each(strip),
            _ => {}
        }
    }
    let mut value = serde_json::to_value(v).expect("verdicts serialize");
    strip(&mut value);
    value
}

fn diffeo_consistency(runs: &mut Runs) -> Check {
    let report = &runs.get("diffeo_invariant")?.2;
    let shared = [
        "delta_moderate",
        "delta_sq_negligible",
        "heaviside_moderate",
        "h_defect_negligible",
        "h_defect_away",
    ];
    for name in shared {
        let ge = verdict(report, &format!("{name}_ge"))?;
        let gd = verdict(report, &format!("{name}_gd"))?;
        ensure(normalized(ge) == normalized(gd), || {
            format!("{name}: {} vs {}", ge.name(), gd.name())
        })?;
    }
    let t = "formalism_spot_check";
    let guarded = metric(report, t, "guarded")?;
    let round_trip = metric(report, t, "round_trip_mismatches")?;
    let cj = metric(report, t, "cj_mismatches")?;
    ensure(guarded >= 100.0, || format!("only {guarded} guarded pairs"))?;
    ensure(round_trip == 0.0 && cj == 0.0, || {
        format!("{round_trip} round-trip and {cj} C/J mismatches")
    })?;
    Ok(format!(
        "{} shared verdicts equal; {guarded} guarded pairs exact",
        shared.len()
    ))
}

fn determinism(runs: &mut Runs) -> Check {
    let mut witnesses = 0;
    for (name, _) in colombeau_cli::BUNDLED {
        let s = bundled(name).unwrap().map_err(|e| e.to_string())?;
        let a = run_scenario(&s, false).map_err(|e| e.to_string())?;
        let b = run_scenario(&s, true).map_err(|e| e.to_string())?;
        ensure(
            a.to_json() == b.to_json() && a.to_csv() == b.to_csv(),
            || format!("{name}: reruns differ"),
        )?;
        let (s, world, report) = runs.get(name)?;
        ensure(report.to_json() == a.to_json(), || {
            format!("{name}: reruns differ")
        })?;
        for line in replay_report(world, s, report, 1e-12) {
            ensure(line.ok, || {
                format!("{name}/{}/{} does not replay", line.task, line.path)
            })?;
            witnesses += 1;
        }
    }
    Ok(format!(
        "{} scenarios byte-identical over three runs; {witnesses} witnesses replay to 1e-12",
        colombeau_cli::BUNDLED.len()
    ))
}

fn main() -> ExitCode {
    let mut runs = Runs {
        cache: BTreeMap::new(),
    };
    let results: Vec<(&str, Check)> = vec![
        ("moment factory", moment_factory()),
        ("scaling laws", scaling_laws()),
        ("embedding rates", embedding_rates(&mut runs)),
        ("delta products", delta_products(&mut runs)),
        ("characterization pipeline", characterization(&mut runs)),
        ("special point values", special_point_values()),
        ("invertibility", invertibility(&mut runs)),
        ("matrices", matrices(&mut runs)),
        ("constants", constants(&mut runs)),
        ("test-object nets", diffeo_consistency(&mut runs)),
        ("determinism and replay", determinism(&mut runs)),
    ];
    let mut failed = 0;
    for (i, (name, result)) in results.iter().enumerate() {
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
