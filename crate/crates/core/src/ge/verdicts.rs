//! Battery verdicts: moderateness, negligibility, evidence and point
//! construction, strict nonzeroness, invertibility, order, constants.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{Battery, EFunc, GenNumberGe, GenPointGe, MatrixGe};
use crate::asymptotics::{eps_pow, EpsGrid, Sample};
use crate::error::{CoreError, Result};
use crate::expr::{Expr, TableEntry};
use crate::multiindex::{self, MultiIndex};
use crate::real;
use crate::sweep::{self, Family, NegligibleOutcome, Reduce, Row, Sampling};
use crate::testfn::{CompactBox, TestFunction};
use crate::verdict::{Config, Probe, Relation, Verdict, Witness};

// ------------------------------------------------------------- families

/// A finite family of test functions standing in for a quantifier over
/// `A_q`: the battery here, registered test-object nets in `gd`.
pub(crate) trait Probes: Sync {
    fn n(&self) -> usize;
    fn grid(&self) -> &EpsGrid;
    fn id(&self) -> String;
    /// One family of `|∂^α R|` rows per member.
    fn families(
        &self,
        r: &EFunc,
        sampling: Sampling<'_>,
        alpha: &[u32],
        reduce: Reduce,
    ) -> Result<Vec<Family>>;
    /// Probe and test function behind one row of a family.
    fn locate(&self, fam: &Family, alpha: &[u32], row: &Row) -> Result<(Probe, TestFunction)>;
}

impl Probes for Battery {
    fn n(&self) -> usize {
        self.n
    }

    fn grid(&self) -> &EpsGrid {
        &self.grid
    }

    fn id(&self) -> String {
        Battery::id(self)
    }

    fn families(
        &self,
        r: &EFunc,
        sampling: Sampling<'_>,
        alpha: &[u32],
        reduce: Reduce,
    ) -> Result<Vec<Family>> {
        self.orders()
            .map(|q| efunc_family(r, sampling, alpha, q, self, reduce))
            .collect()
    }

    fn locate(&self, fam: &Family, alpha: &[u32], row: &Row) -> Result<(Probe, TestFunction)> {
        Ok((efunc_probe(alpha, row), self.scaled(fam.q, row.eps)))
    }
}

pub(crate) fn efunc_family(
    r: &EFunc,
    sampling: Sampling<'_>,
    alpha: &[u32],
    q: u32,
    battery: &Battery,
    reduce: Reduce,
) -> Result<Family> {
    let rows = sweep::sweep(&battery.grid.values(), sampling, reduce, |e, x| {
        r.eval(&battery.scaled(q, e), x, alpha)
    })?;
    Ok(Family {
        q,
        label: format!("q={q} alpha={alpha:?}"),
        rows,
    })
}

fn number_families(battery: &Battery, f: impl Fn(&TestFunction) -> f64) -> Vec<Family> {
    battery
        .orders()
        .map(|q| Family {
            q,
            label: format!("q={q}"),
            rows: battery
                .grid
                .values()
                .into_iter()
                .map(|eps| Row {
                    eps,
                    magnitude: f(&battery.scaled(q, eps)),
                    point: Vec::new(),
                    skips: 0,
                })
                .collect(),
        })
        .collect()
}

fn attach_estimates(mut v: Verdict, fams: &[Family], grid: &EpsGrid) -> Verdict {
    for f in fams {
        v.estimates
            .push(sweep::estimate(f.label.clone(), &f.samples(), grid));
        v.guard_skips += f.skips();
    }
    v
}

fn sampling<'a>(k: &'a CompactBox, cfg: &Config) -> Sampling<'a> {
    Sampling::Box {
        k,
        stencil: cfg.eps_stencil,
    }
}

fn check_dim(r: &EFunc, n: usize) -> Result<()> {
    if r.n() != n {
        return Err(CoreError::DimensionMismatch {
            expected: r.n(),
            found: n,
        });
    }
    Ok(())
}

fn witness_at(
    probe: Probe,
    phi: &TestFunction,
    row: &Row,
    exponent: f64,
    relation: Relation,
    sequence: Vec<Sample>,
) -> Witness {
    Witness {
        probe,
        test_function: Some(phi.tag()),
        eps: row.eps,
        magnitude: row.magnitude,
        exponent,
        relation,
        sequence,
    }
}

fn witness(
    probe: Probe,
    battery: &Battery,
    q: u32,
    row: &Row,
    exponent: f64,
    relation: Relation,
    sequence: Vec<Sample>,
) -> Witness {
    witness_at(
        probe,
        &battery.scaled(q, row.eps),
        row,
        exponent,
        relation,
        sequence,
    )
}

fn efunc_probe(alpha: &[u32], row: &Row) -> Probe {
    Probe::EFunc {
        alpha: alpha.to_vec(),
        x: row.point.clone(),
    }
}

// ------------------------------------------------- moderate / negligible

pub(crate) fn moderate_on(
    r: &EFunc,
    sampling: Sampling<'_>,
    alpha_max: u32,
    probes: &dyn Probes,
    cfg: &Config,
) -> Result<Verdict> {
    check_dim(r, probes.n())?;
    if alpha_max > r.budget {
        return Err(CoreError::DerivativeOrderExhausted);
    }
    let cutoff = probes.grid().window_cutoff();
    let mut all = Vec::new();
    let mut n_cert = 0;
    for alpha in multiindex::up_to(r.n(), alpha_max) {
        let fams = probes.families(r, sampling, &alpha, Reduce::Sup)?;
        let found = sweep::moderate_search(&fams, cfg.n_max, cutoff)?;
        all.extend(fams.iter().cloned());
        match found {
            Some(n) => n_cert = n_cert.max(n),
            None => {
                let p = -(cfg.n_max as f64);
                let top = sweep::top_family(&fams).expect("probe families are non-empty");
                let (row, seq) =
                    sweep::upper_failure(top, p, cutoff)?.expect("failed search has a violation");
                let (probe, phi) = probes.locate(top, &alpha, row)?;
                let w = witness_at(probe, &phi, row, p, Relation::Above, seq);
                return Ok(attach_estimates(Verdict::refuted(w), &all, probes.grid()));
            }
        }
    }
    let v = Verdict::supported(alpha_max, Some(probes.id())).certify("N", n_cert as i64);
    Ok(attach_estimates(v, &all, probes.grid()))
}

pub(crate) fn negligible_on(
    r: &EFunc,
    sampling: Sampling<'_>,
    probes: &dyn Probes,
    cfg: &Config,
) -> Result<Verdict> {
    let moderate = moderate_on(r, sampling, 0, probes, cfg)?;
    if !moderate.is_supported() {
        return Ok(
            Verdict::inconclusive("negligibility requires a moderate element")
                .component("moderate", moderate),
        );
    }
    let zero = vec![0; r.n()];
    let fams = probes.families(r, sampling, &zero, Reduce::Sup)?;
    let cutoff = probes.grid().window_cutoff();
    let v = match sweep::negligible_all_orders(&fams, cfg.m_max, cutoff)? {
        NegligibleOutcome::Supported(pairs) => {
            sweep::certify_pairs(Verdict::supported(cfg.m_max, Some(probes.id())), &pairs)
        }
        NegligibleOutcome::Refuted {
            passed,
            m,
            row,
            family,
            sequence,
        } => {
            let (probe, phi) = probes.locate(family, &zero, row)?;
            let w = witness_at(probe, &phi, row, m as f64, Relation::Above, sequence);
            sweep::certify_pairs(Verdict::refuted(w), &passed).certify("passed_up_to", m as i64 - 1)
        }
    };
    Ok(attach_estimates(v, &fams, probes.grid())
        .certify("N", moderate.certificate("N").unwrap_or(0)))
}

/// `∃N ∀φ ∈ A_N: sup_K |∂^α R(S_ε φ, x)| = O(ε^{-N})` for `|α| ≤ alpha_max`.
pub fn ge_moderate_verdict(
    r: &EFunc,
    k: &CompactBox,
    alpha_max: u32,
    battery: &Battery,
    cfg: &Config,
) -> Result<Verdict> {
    r.domain.check_compact(k)?;
    moderate_on(r, sampling(k, cfg), alpha_max, battery, cfg)
}

/// `∀m ∃q ∀φ ∈ A_q: sup_K |R(S_ε φ, x)| = O(ε^m)`, given moderateness.
pub fn ge_negligible_verdict(
    r: &EFunc,
    k: &CompactBox,
    battery: &Battery,
    cfg: &Config,
) -> Result<Verdict> {
    r.domain.check_compact(k)?;
    negligible_on(r, sampling(k, cfg), battery, cfg)
}

// --------------------------------------------------------------- numbers

fn number_probe_witness(
    battery: &Battery,
    fam: &Family,
    row: &Row,
    exponent: f64,
    relation: Relation,
    seq: Vec<Sample>,
) -> Witness {
    witness(Probe::Number, battery, fam.q, row, exponent, relation, seq)
}

/// `r ∈ ℂ_M(n)` on the battery.
pub fn number_moderate_verdict(
    r: &GenNumberGe,
    battery: &Battery,
    cfg: &Config,
) -> Result<Verdict> {
    let fams = number_families(battery, |phi| r.eval(phi).abs());
    let cutoff = battery.grid.window_cutoff();
    let v = match sweep::moderate_search(&fams, cfg.n_max, cutoff)? {
        Some(n) => Verdict::supported(0, Some(battery.id())).certify("N", n as i64),
        None => {
            let p = -(cfg.n_max as f64);
            let top = sweep::top_family(&fams).expect("battery is non-empty");
            let (row, seq) =
                sweep::upper_failure(top, p, cutoff)?.expect("failed search has a violation");
            Verdict::refuted(number_probe_witness(
                battery,
                top,
                row,
                p,
                Relation::Above,
                seq,
            ))
        }
    };
    Ok(attach_estimates(v, &fams, &battery.grid))
}

/// `r ∈ ℂ_N(n)` on the battery, given moderateness.
pub fn number_negligible_verdict(
    r: &GenNumberGe,
    battery: &Battery,
    cfg: &Config,
) -> Result<Verdict> {
    let moderate = number_moderate_verdict(r, battery, cfg)?;
    if !moderate.is_supported() {
        return Ok(
            Verdict::inconclusive("negligibility requires a moderate number")
                .component("moderate", moderate),
        );
    }
    let fams = number_families(battery, |phi| r.eval(phi).abs());
    let cutoff = battery.grid.window_cutoff();
    let v = match sweep::negligible_all_orders(&fams, cfg.m_max, cutoff)? {
        NegligibleOutcome::Supported(pairs) => {
            sweep::certify_pairs(Verdict::supported(cfg.m_max, Some(battery.id())), &pairs)
        }
        NegligibleOutcome::Refuted {
            passed,
            m,
            row,
            family,
            sequence,
        } => sweep::certify_pairs(
            Verdict::refuted(number_probe_witness(
                battery,
                family,
                row,
                m as f64,
                Relation::Above,
                sequence,
            )),
            &passed,
        )
        .certify("passed_up_to", m as i64 - 1),
    };
    Ok(attach_estimates(v, &fams, &battery.grid))
}

fn lower_bound_verdict(
    fams: &[Family],
    battery: &Battery,
    probe: impl Fn(&Row) -> Probe,
) -> Verdict {
    let cutoff = battery.grid.window_cutoff();
    let v = match sweep::lower_search(fams, cutoff) {
        Some(q) => Verdict::supported(q, Some(battery.id())).certify("q", q as i64),
        None => {
            let top = sweep::top_family(fams).expect("battery is non-empty");
            let p = top.q.max(1) as f64;
            match sweep::lower_failure(top, p, cutoff) {
                Some((row, seq)) => Verdict::refuted(witness(
                    probe(row),
                    battery,
                    top.q,
                    row,
                    p,
                    Relation::Below,
                    seq,
                )),
                None => Verdict::inconclusive("lower-bound search failed below the top order only"),
            }
        }
    };
    attach_estimates(v, fams, &battery.grid)
}

/// `∃q ∀φ ∈ A_q: |r(S_ε φ)| ≥ ε^q` on the asymptotic window.
pub fn strictly_nonzero_verdict(
    r: &GenNumberGe,
    battery: &Battery,
    _cfg: &Config,
) -> Result<Verdict> {
    let fams = number_families(battery, |phi| r.eval(phi).abs());
    Ok(lower_bound_verdict(&fams, battery, |_| Probe::Number))
}

/// Strict nonzeroness of the determinant.
pub fn nondegenerate_verdict(a: &MatrixGe, battery: &Battery, cfg: &Config) -> Result<Verdict> {
    let v = strictly_nonzero_verdict(&a.det()?, battery, cfg)?;
    Ok(v.note("verdict of det(A)"))
}

/// `r ≤ s`: pointwise on the battery, else up to a negligible slack.
pub fn leq_verdict(
    r: &GenNumberGe,
    s: &GenNumberGe,
    battery: &Battery,
    cfg: &Config,
) -> Result<Verdict> {
    let pointwise = battery.orders().all(|q| {
        battery.grid.values().into_iter().all(|eps| {
            let phi = battery.scaled(q, eps);
            r.eval(&phi) <= s.eval(&phi)
        })
    });
    if pointwise {
        return Ok(Verdict::supported(cfg.m_max, Some(battery.id()))
            .certify("stage", 1)
            .note("r <= s pointwise on every battery sample"));
    }
    let fams = number_families(battery, |phi| (r.eval(phi) - s.eval(phi)).max(0.0));
    let cutoff = battery.grid.window_cutoff();
    let v = match sweep::negligible_all_orders(&fams, cfg.m_max, cutoff)? {
        NegligibleOutcome::Supported(pairs) => {
            sweep::certify_pairs(Verdict::supported(cfg.m_max, Some(battery.id())), &pairs)
                .certify("stage", 2)
                .note("r <= s up to a negligible slack")
        }
        NegligibleOutcome::Refuted {
            m,
            row,
            family,
            sequence,
            ..
        } => Verdict::refuted(witness(
            Probe::NumberSlack,
            battery,
            family.q,
            row,
            m as f64,
            Relation::Above,
            sequence,
        )),
    };
    Ok(attach_estimates(v, &fams, &battery.grid))
}

// ------------------------------------------------------- invertibility

/// `∀K ∃q ∀φ ∈ A_q: inf_K |R(S_ε φ, x)| ≥ ε^q`, one component per `K`.
pub fn ge_invertible_verdict(
    r: &EFunc,
    ks: &[CompactBox],
    battery: &Battery,
    cfg: &Config,
) -> Result<Verdict> {
    check_dim(r, battery.n)?;
    if ks.is_empty() {
        return Err(CoreError::InvalidArgument("no compact sets given".into()));
    }
    let zero = vec![0; r.n()];
    let mut parts = Vec::new();
    for k in ks {
        r.domain.check_compact(k)?;
        let fams = battery.families(r, sampling(k, cfg), &zero, Reduce::Inf)?;
        parts.push(lower_bound_verdict(&fams, battery, |row| {
            efunc_probe(&zero, row)
        }));
    }
    let mut v = match parts.iter().find(|p| !p.is_supported()) {
        None => {
            let q = parts
                .iter()
                .filter_map(|p| p.certificate("q"))
                .max()
                .unwrap_or(0);
            Verdict::supported(q as u32, Some(battery.id())).certify("q", q)
        }
        Some(p) => {
            let mut first = p.clone();
            first.components.clear();
            first.estimates.clear();
            first
        }
    };
    for (i, p) in parts.into_iter().enumerate() {
        v = v.component(format!("K{i}"), p);
    }
    Ok(v)
}

/// `S(φ, x) = 1/R(φ, x)` where defined, `0` elsewhere.
pub fn invert_function(r: &EFunc) -> EFunc {
    r.invert()
}

/// `ρ(r)(φ, x) = r(φ)`.
pub fn rho_embed(r: &GenNumberGe, domain: std::sync::Arc<crate::testfn::Domain>) -> EFunc {
    EFunc::rho(r, domain)
}

// ---------------------------------------------------- evidence and points

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidencePair {
    pub eps: f64,
    pub x: Vec<f64>,
    #[serde(with = "real")]
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRow {
    pub q: u32,
    pub generator: String,
    /// Window samples with `|R(S_ε φ_q, x)| > ε^{m0}`, largest ε first.
    pub pairs: Vec<EvidencePair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub m0: u32,
    pub min_hits: usize,
    pub rows: Vec<EvidenceRow>,
}

impl Evidence {
    pub fn qualifies(&self, q: u32) -> bool {
        self.rows
            .iter()
            .any(|r| r.q == q && r.pairs.len() >= self.min_hits)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|r| r.pairs.len() < self.min_hits)
    }

    pub fn row(&self, q: u32) -> Option<&EvidenceRow> {
        self.rows.iter().find(|r| r.q == q)
    }
}

/// Per battery order, the K-grid argmax pairs exceeding `ε^{m0}`.
pub fn gather_evidence(
    r: &EFunc,
    k: &CompactBox,
    m0: u32,
    battery: &Battery,
    cfg: &Config,
) -> Result<Evidence> {
    check_dim(r, battery.n)?;
    r.domain.check_compact(k)?;
    let zero = vec![0; r.n()];
    let window = battery.grid.asymptotic_window();
    let mut rows = Vec::new();
    for q in battery.orders() {
        let fam = efunc_family(r, sampling(k, cfg), &zero, q, battery, Reduce::Sup)?;
        let pairs = fam.rows[window.clone()]
            .iter()
            .filter(|row| !row.point.is_empty() && row.magnitude > eps_pow(row.eps, m0 as f64))
            .map(|row| EvidencePair {
                eps: row.eps,
                x: row.point.clone(),
                magnitude: row.magnitude,
            })
            .collect();
        rows.push(EvidenceRow {
            q,
            generator: battery.phi(q).id().to_string(),
            pairs,
        });
    }
    Ok(Evidence {
        m0,
        min_hits: cfg.evidence_min_hits,
        rows,
    })
}

/// Orders `q_1 < q_2 < …` chosen by `q_1 = 1`, `q_{l+1} = a_l + 1`, where
/// `a_l` is the certified moment order of `φ_{q_l}`, skipping orders
/// without enough evidence.
pub fn select_orders(evidence: &Evidence, battery: &Battery) -> Vec<u32> {
    let mut out = Vec::new();
    let mut next = 1;
    while next <= battery.q_max {
        match (next..=battery.q_max).find(|&q| evidence.qualifies(q)) {
            Some(q) => {
                out.push(q);
                next = battery.phi(q).certified_order().order + 1;
            }
            None => break,
        }
    }
    out
}

/// The point `X` with `X(S_{ε_{q_l,k}} φ_{q_l}) = x_{q_l,k}` and `X = x0`
/// everywhere else.
pub fn construct_point(
    evidence: &Evidence,
    x0: &[f64],
    k: &CompactBox,
    battery: &Battery,
) -> Result<GenPointGe> {
    if !k.contains(x0) {
        return Err(CoreError::InvalidArgument(format!(
            "x0 = {x0:?} is not in K"
        )));
    }
    let orders = select_orders(evidence, battery);
    if orders.len() < 2 {
        let thin: Vec<String> = evidence
            .rows
            .iter()
            .filter(|r| r.pairs.len() < evidence.min_hits)
            .map(|r| format!("q={} ({} hits)", r.q, r.pairs.len()))
            .collect();
        return Err(CoreError::ThinEvidence(format!(
            "usable orders {orders:?}, need at least 2; below {} hits: {}",
            evidence.min_hits,
            thin.join(", ")
        )));
    }
    let coords = (0..x0.len())
        .map(|i| {
            let entries = orders
                .iter()
                .flat_map(|&q| {
                    let row = evidence.row(q).expect("selected orders have rows");
                    row.pairs.iter().map(move |p| TableEntry {
                        generator: Some(row.generator.clone()),
                        eps: p.eps,
                        value: p.x[i],
                    })
                })
                .collect();
            Expr::table(x0[i], entries)
        })
        .collect();
    GenPointGe::new(coords, k.clone())
}

/// Outcome of [`characterization_pipeline`].
#[derive(Debug, Clone)]
pub struct Characterization {
    pub verdict: Verdict,
    pub evidence: Evidence,
    pub point: Option<GenPointGe>,
}

/// `R̃ = 0` iff `R̃(X̃) = 0` for all compactly supported `X̃`: build `X` from
/// evidence and check that `R(X)` exceeds `ε^{m0}` along it.
pub fn characterization_pipeline(
    r: &EFunc,
    k: &CompactBox,
    m0: u32,
    battery: &Battery,
    cfg: &Config,
) -> Result<Characterization> {
    let evidence = gather_evidence(r, k, m0, battery, cfg)?;
    let orders = select_orders(&evidence, battery);
    let done = |verdict: Verdict, point| {
        Ok(Characterization {
            verdict: verdict.certify("m0", m0 as i64),
            evidence: evidence.clone(),
            point,
        })
    };
    match orders.len() {
        0 => {
            return done(
                Verdict::supported(m0, Some(battery.id())).note("no evidence at any order q >= 1"),
                None,
            )
        }
        1 => {
            return done(
                Verdict::inconclusive(format!("evidence only at order {}", orders[0])),
                None,
            )
        }
        _ => {}
    }
    let x = construct_point(&evidence, &k.center(), k, battery)?;
    let rx = GenNumberGe::point_value(r, &x)?;
    let mut last = None;
    for &q in &orders {
        let row = evidence.row(q).expect("selected orders have rows");
        let mut seq = Vec::new();
        for p in &row.pairs {
            let phi = battery.scaled(q, p.eps);
            let v = rx.eval(&phi).abs();
            if v.partial_cmp(&eps_pow(p.eps, m0 as f64)) != Some(Ordering::Greater) {
                return done(
                    Verdict::inconclusive(format!(
                        "constructed point loses the evidence at q={q}, eps={:e}",
                        p.eps
                    )),
                    Some(x),
                );
            }
            seq.push(Sample::new(p.eps, v));
        }
        last = Some((q, seq));
    }
    let (q, seq) = last.expect("at least two orders");
    let finest = *seq.last().expect("qualifying rows are non-empty");
    let phi = battery.scaled(q, finest.eps);
    let w = Witness {
        probe: Probe::PointValue {
            point: x.coords.clone(),
            coords: x.eval(&phi),
        },
        test_function: Some(phi.tag()),
        eps: finest.eps,
        magnitude: finest.magnitude,
        exponent: m0 as f64,
        relation: Relation::Above,
        sequence: seq,
    };
    let v = Verdict::refuted(w).certify("orders", orders.len() as i64);
    done(v, Some(x))
}

// --------------------------------------------------------------- constants

/// Polyline through overlapping boxes joining the centers of `K1` and `K2`.
pub fn connecting_polyline(r: &EFunc, k1: &CompactBox, k2: &CompactBox) -> Result<Vec<Vec<f64>>> {
    let d = &r.domain;
    let b1 = d.box_containing(k1).ok_or_else(|| {
        CoreError::InvalidArgument("K1 must lie inside one box of the domain".into())
    })?;
    let b2 = d.box_containing(k2).ok_or_else(|| {
        CoreError::InvalidArgument("K2 must lie inside one box of the domain".into())
    })?;
    let path = d.box_path(b1, b2).ok_or(CoreError::Disconnected)?;
    let clip_lo: Vec<f64> = k1.lo.iter().zip(&k2.lo).map(|(a, b)| a.min(*b)).collect();
    let clip_hi: Vec<f64> = k1.hi.iter().zip(&k2.hi).map(|(a, b)| a.max(*b)).collect();
    let mut pts = vec![k1.center()];
    for w in path.windows(2) {
        let overlap = d.boxes[w[0]]
            .intersection(&d.boxes[w[1]])
            .expect("consecutive path boxes overlap");
        pts.push(overlap.clipped_center(&clip_lo, &clip_hi));
    }
    pts.push(k2.center());
    Ok(pts)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Length of a polyline.
pub fn polyline_length(pts: &[Vec<f64>]) -> f64 {
    pts.windows(2).map(|w| dist(&w[0], &w[1])).sum()
}

/// Bound `L` on the length of connecting curves for points of `K1 ∪ K2`.
pub fn curve_length_bound(poly: f64, k1: &CompactBox, k2: &CompactBox) -> f64 {
    let (d1, d2) = (k1.diameter(), k2.diameter());
    (poly + (d1 + d2) / 2.0).max(d1).max(d2)
}

const SEGMENT_SAMPLES: usize = 17;

/// `D_i R̃ = 0` for all `i`, versus `R̃` equal to the constant `R̃(X̃)`.
pub fn ge_constant_check(
    r: &EFunc,
    k1: &CompactBox,
    k2: &CompactBox,
    x: &GenPointGe,
    battery: &Battery,
    cfg: &Config,
) -> Result<Verdict> {
    check_dim(r, battery.n)?;
    let poly = connecting_polyline(r, k1, k2)?;
    let poly_len = polyline_length(&poly);
    let l = curve_length_bound(poly_len, k1, k2);
    r.domain.check_compact(&x.support)?;

    let mut m_points = k1.nodes();
    m_points.extend(k2.nodes());
    for w in poly.windows(2) {
        for j in 0..=SEGMENT_SAMPLES {
            let t = j as f64 / SEGMENT_SAMPLES as f64;
            m_points.push(
                w[0].iter()
                    .zip(&w[1])
                    .map(|(a, b)| a + t * (b - a))
                    .collect(),
            );
        }
    }
    let mut derivs = Vec::new();
    for i in 0..r.n() {
        derivs.push(negligible_on(
            &r.derive(i)?,
            Sampling::Points(&m_points),
            battery,
            cfg,
        )?);
    }
    let deriv_verdict = derivs
        .iter()
        .position(|v| !v.is_supported())
        .map(|i| derivs[i].clone().certify("axis", i as i64));

    let spread = spread_verdict(r, k1, x, battery, cfg)?;
    let mut v = match (&deriv_verdict, spread.is_supported()) {
        (None, true) => Verdict::supported(cfg.m_max, Some(battery.id())),
        (Some(d), false) if d.is_refuted() => {
            let mut d = d.clone();
            d.components.clear();
            d.estimates.clear();
            d
        }
        _ => Verdict::inconclusive("derivative and spread verdicts disagree"),
    };
    v.metrics.insert("polyline_length".into(), poly_len);
    v.metrics.insert("L".into(), l);
    for (i, d) in derivs.into_iter().enumerate() {
        v = v.component(format!("d{i}"), d);
    }
    Ok(v.component("spread", spread))
}

fn spread_verdict(
    r: &EFunc,
    k1: &CompactBox,
    x: &GenPointGe,
    battery: &Battery,
    cfg: &Config,
) -> Result<Verdict> {
    let mut fams = Vec::new();
    for q in battery.orders() {
        let rows = sweep::sweep(
            &battery.grid.values(),
            sampling(k1, cfg),
            Reduce::Sup,
            |e, y| {
                let phi = battery.scaled(q, e);
                let at = x.eval_checked(&phi)?;
                match (r.value(&phi, y)?, r.value(&phi, &at)?) {
                    (Some(a), Some(b)) => Ok(Some(a - b)),
                    _ => Ok(None),
                }
            },
        )?;
        fams.push(Family {
            q,
            label: format!("spread q={q}"),
            rows,
        });
    }
    let cutoff = battery.grid.window_cutoff();
    let v = match sweep::negligible_all_orders(&fams, cfg.m_max, cutoff)? {
        NegligibleOutcome::Supported(pairs) => {
            sweep::certify_pairs(Verdict::supported(cfg.m_max, Some(battery.id())), &pairs)
        }
        NegligibleOutcome::Refuted {
            m,
            row,
            family,
            sequence,
            ..
        } => {
            let phi = battery.scaled(family.q, row.eps);
            let probe = Probe::EFuncSpread {
                y: row.point.clone(),
                point: x.eval(&phi),
            };
            Verdict::refuted(witness(
                probe,
                battery,
                family.q,
                row,
                m as f64,
                Relation::Above,
                sequence,
            ))
        }
    };
    Ok(attach_estimates(v, &fams, &battery.grid))
}

// ------------------------------------------------------------------ replay

fn witness_tf(w: &Witness) -> Result<TestFunction> {
    w.test_function
        .as_ref()
        .ok_or_else(|| CoreError::InvalidArgument("witness has no test function".into()))?
        .resolve()
}

fn guarded(r: &EFunc, phi: &TestFunction, x: &[f64], alpha: &MultiIndex) -> Result<f64> {
    r.eval(phi, x, alpha)?
        .ok_or_else(|| CoreError::DomainGuard {
            center: phi.shift.iter().zip(x).map(|(s, v)| s + v).collect(),
            radius: phi.support_radius(),
        })
}

/// Recompute the magnitude of a witness recorded against `R`.
pub fn replay_efunc(r: &EFunc, w: &Witness) -> Result<f64> {
    let phi = witness_tf(w)?;
    let zero = vec![0; r.n()];
    match &w.probe {
        Probe::EFunc { alpha, x } | Probe::GdNet { alpha, x, .. } => {
            Ok(guarded(r, &phi, x, alpha)?.abs())
        }
        Probe::EFuncSpread { y, point } => {
            Ok((guarded(r, &phi, y, &zero)? - guarded(r, &phi, point, &zero)?).abs())
        }
        Probe::PointValue { point, .. } => {
            let at: Vec<f64> = {
                let x = GenPointGe {
                    coords: point.clone(),
                    support: CompactBox::point(vec![0.0; point.len()]),
                };
                x.eval(&phi)
            };
            Ok(if r.guard(&phi, &at) {
                r.value_unguarded(&phi, &at).abs()
            } else {
                0.0
            })
        }
        other => Err(CoreError::InvalidArgument(format!(
            "probe {other:?} does not belong to an element"
        ))),
    }
}

/// Recompute the magnitude of a witness recorded against `r` (and `s` for
/// order witnesses).
pub fn replay_number(r: &GenNumberGe, s: Option<&GenNumberGe>, w: &Witness) -> Result<f64> {
    let phi = witness_tf(w)?;
    match (&w.probe, s) {
        (Probe::Number, _) => Ok(r.eval(&phi).abs()),
        (Probe::NumberSlack, Some(s)) => Ok((r.eval(&phi) - s.eval(&phi)).max(0.0)),
        (other, _) => Err(CoreError::InvalidArgument(format!(
            "probe {other:?} does not belong to a number"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::EpsGrid;
    use crate::testfn::{DistributionSpec, Domain, OpenBox};
    use std::sync::Arc;

    fn battery(q_max: u32) -> Battery {
        Battery::new(1, q_max, 1.0, EpsGrid::default()).unwrap()
    }

    fn line() -> Arc<Domain> {
        Arc::new(Domain::interval(-2.0, 2.0).unwrap())
    }

    fn small(a: f64, b: f64) -> CompactBox {
        CompactBox::new(vec![a], vec![b], 9).unwrap()
    }

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn delta_is_moderate_and_its_square_is_not_negligible() {
        let b = battery(4);
        let d = EFunc::embed(&DistributionSpec::delta(line()));
        let v = ge_moderate_verdict(&d, &small(-0.5, 0.5), 0, &b, &cfg()).unwrap();
        assert!(v.is_supported());
        assert!(v.certificate("N").unwrap() <= 2);
        let sq = d.mul(&d).unwrap();
        let v = ge_negligible_verdict(&sq, &small(-0.5, 0.5), &b, &cfg()).unwrap();
        assert!(v.is_refuted());
        let w = v.witness().unwrap();
        assert_eq!(replay_efunc(&sq, w).unwrap(), w.magnitude);
    }

    #[test]
    fn numbers() {
        let b = battery(3);
        let e = GenNumberGe::scale_of();
        let v = strictly_nonzero_verdict(&e, &b, &cfg()).unwrap();
        assert_eq!(v.certificate("q"), Some(1));
        let inv2 = GenNumberGe::parse("eps^-2").unwrap();
        assert_eq!(
            strictly_nonzero_verdict(&inv2, &b, &cfg())
                .unwrap()
                .certificate("q"),
            Some(1)
        );
        let holes = GenNumberGe::parse("eps*(1 - dyadic(eps))").unwrap();
        let v = strictly_nonzero_verdict(&holes, &b, &cfg()).unwrap();
        assert!(v.is_refuted());
        assert_eq!(
            replay_number(&holes, None, v.witness().unwrap()).unwrap(),
            0.0
        );
        let partner = holes.zero_divisor_partner();
        let v = number_negligible_verdict(&partner, &b, &cfg()).unwrap();
        assert!(v.is_refuted());
        assert_eq!(v.witness().unwrap().magnitude, 1.0);
    }

    #[test]
    fn order_relation() {
        let b = battery(2);
        let e = GenNumberGe::scale_of();
        let zero = GenNumberGe::constant(0.0);
        assert_eq!(
            leq_verdict(&zero, &e, &b, &cfg())
                .unwrap()
                .certificate("stage"),
            Some(1)
        );
        let s = GenNumberGe::parse("eps + eps^10").unwrap();
        assert!(leq_verdict(&e, &s, &b, &cfg()).unwrap().is_supported());
        let slack = GenNumberGe::parse("eps^20").unwrap();
        assert_eq!(
            leq_verdict(&slack, &zero, &b, &cfg())
                .unwrap()
                .certificate("stage"),
            Some(2)
        );
        let v = leq_verdict(&GenNumberGe::constant(1.0), &zero, &b, &cfg()).unwrap();
        assert!(v.is_refuted());
        let w = v.witness().unwrap();
        assert_eq!(
            replay_number(&GenNumberGe::constant(1.0), Some(&zero), w).unwrap(),
            1.0
        );
    }

    #[test]
    fn invertibility_of_identity_fails_at_origin() {
        let b = battery(3);
        let dom = Arc::new(Domain::interval(-1.0, 1.0).unwrap());
        let id = EFunc::embed(
            &DistributionSpec::smooth(Expr::parse("x").unwrap(), dom.clone()).unwrap(),
        );
        let v = ge_invertible_verdict(&id, &[CompactBox::point(vec![0.0])], &b, &cfg()).unwrap();
        assert!(v.is_refuted());
        let rho = rho_embed(&GenNumberGe::scale_of(), dom);
        let v = ge_invertible_verdict(&rho, &[small(-0.5, 0.5)], &b, &cfg()).unwrap();
        assert_eq!(v.certificate("q"), Some(1));
    }

    #[test]
    fn pipeline_on_delta_and_zero() {
        let b = battery(4);
        let d = EFunc::embed(&DistributionSpec::delta(line()));
        let k = small(-0.5, 0.5);
        let c = characterization_pipeline(&d, &k, 1, &b, &cfg()).unwrap();
        assert!(c.verdict.is_refuted());
        let x = c.point.unwrap();
        let rx = GenNumberGe::point_value(&d, &x).unwrap();
        for row in c.evidence.rows.iter().filter(|r| r.q >= 1) {
            assert!(row.pairs.len() >= 5);
            for p in &row.pairs {
                let v = rx.eval(&b.scaled(row.q, p.eps)).abs();
                assert!(v >= p.eps);
            }
        }
        let w = c.verdict.witness().unwrap();
        assert_eq!(replay_efunc(&d, w).unwrap(), w.magnitude);
        let zero = EFunc::constant(0.0, line());
        assert!(characterization_pipeline(&zero, &k, 1, &b, &cfg())
            .unwrap()
            .verdict
            .is_supported());
    }

    #[test]
    fn constants() {
        let b = battery(2);
        let boxes = vec![
            OpenBox::new(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap(),
            OpenBox::new(vec![1.0, 1.0], vec![3.0, 3.0]).unwrap(),
        ];
        let dom = Arc::new(Domain::new(boxes).unwrap());
        let b2 = Battery::new(2, 1, 1.0, EpsGrid::new(0.5, 4, 16).unwrap()).unwrap();
        let k1 = CompactBox::new(vec![0.5, 0.5], vec![0.75, 0.75], 3).unwrap();
        let k2 = CompactBox::new(vec![2.25, 2.25], vec![2.5, 2.5], 3).unwrap();
        let r = rho_embed(&GenNumberGe::scale_of(), dom.clone());
        let x = GenPointGe::constant(&[2.4, 2.4]);
        let v = ge_constant_check(&r, &k1, &k2, &x, &b2, &cfg()).unwrap();
        assert!(v.is_supported());
        let poly = v.metrics["polyline_length"];
        let centers = 2f64.sqrt() * (1.5 - 0.625) + 2f64.sqrt() * (2.375 - 1.5);
        assert!((poly - centers).abs() < 1e-12);
        assert!(v.metrics["L"] <= centers + k1.diameter() + k2.diameter());

        let dom1 = Arc::new(Domain::interval(-1.0, 1.0).unwrap());
        let id = EFunc::embed(&DistributionSpec::smooth(Expr::parse("x").unwrap(), dom1).unwrap());
        let v = ge_constant_check(
            &id,
            &small(-0.5, -0.25),
            &small(0.25, 0.5),
            &GenPointGe::constant(&[0.3]),
            &b,
            &cfg(),
        )
        .unwrap();
        assert!(v.is_refuted());
        assert_eq!(v.witness().unwrap().magnitude, 1.0);
    }
}
