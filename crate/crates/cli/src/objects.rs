//! Builds named objects from a scenario, resolving references in
//! dependency order.

use std::collections::BTreeMap;
use std::sync::Arc;

use colombeau_core::asymptotics::EpsGrid;
use colombeau_core::expr::Expr;
use colombeau_core::gd::{GdPoint, TestObjectNet};
use colombeau_core::ge::{self, Battery, EFunc, GenNumberGe, GenPointGe, MatrixGe};
use colombeau_core::gs::{FunctionNet, GenPointGs, PointSupport};
use colombeau_core::testfn::generator::default_nodes;
use colombeau_core::testfn::{CompactBox, DistributionSpec, Domain, OpenBox};
use colombeau_core::verdict::Config;

use crate::error::{CliError, Result};
use crate::scenario::{BoxSpec, DistName, ObjectSpec, OpName, Scenario};

/// Default number of sample points per axis of a compact set.
pub const DEFAULT_POINTS: usize = 17;

#[derive(Debug, Clone)]
pub enum Object {
    Dist(DistributionSpec),
    EFunc(EFunc),
    Number(GenNumberGe),
    Point(GenPointGe),
    Matrix(MatrixGe),
    Net(FunctionNet),
    GsPoint(GenPointGs),
    TestNet(TestObjectNet),
    GdPoint(GdPoint),
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Dist(_) => "distribution",
            Object::EFunc(_) => "efunc",
            Object::Number(_) => "number",
            Object::Point(_) => "point",
            Object::Matrix(_) => "matrix",
            Object::Net(_) => "net",
            Object::GsPoint(_) => "gs_point",
            Object::TestNet(_) => "test_net",
            Object::GdPoint(_) => "gd_point",
        }
    }
}

pub fn compact(b: &BoxSpec) -> Result<CompactBox> {
    Ok(CompactBox::new(
        b.lo.clone(),
        b.hi.clone(),
        b.points.unwrap_or(DEFAULT_POINTS),
    )?)
}

fn parse(text: &str, name: &str) -> Result<Expr> {
    Expr::parse(text).map_err(|e| CliError::Invalid {
        name: name.to_string(),
        message: format!("expression '{text}': {e}"),
    })
}

fn references(spec: &ObjectSpec) -> Vec<&String> {
    let mut out: Vec<&String> = Vec::new();
    match spec {
        ObjectSpec::Efunc {
            embed, rho, args, ..
        } => {
            out.extend(embed.iter());
            out.extend(rho.iter());
            out.extend(args.iter());
        }
        ObjectSpec::Number { args, point, .. } => {
            out.extend(args.iter());
            out.extend(point.iter());
        }
        ObjectSpec::Point {
            evidence: Some(e), ..
        } => out.push(&e.target),
        ObjectSpec::Matrix { rows } => out.extend(rows.iter().flatten()),
        _ => {}
    }
    out
}

/// The domain, battery and built objects of a scenario.
#[derive(Debug, Clone)]
pub struct World {
    pub domain: Arc<Domain>,
    pub battery: Battery,
    pub config: Config,
    pub objects: BTreeMap<String, Object>,
}

impl World {
    pub fn build(s: &Scenario) -> Result<Self> {
        if s.domain
            .boxes
            .iter()
            .any(|b| b.lo.len() != s.domain.n || b.hi.len() != s.domain.n)
        {
            return Err(CliError::Bound(format!(
                "domain boxes must have dimension {}",
                s.domain.n
            )));
        }
        let boxes = s
            .domain
            .boxes
            .iter()
            .map(|b| OpenBox::new(b.lo.clone(), b.hi.clone()))
            .collect::<colombeau_core::error::Result<Vec<_>>>()?;
        let domain = Arc::new(Domain::new(boxes)?);
        let b = &s.battery;
        let grid = EpsGrid::new(b.grid.base, b.grid.start, b.grid.end)?;
        let nodes = b.nodes.unwrap_or_else(|| default_nodes(s.domain.n));
        let battery = Battery::with_nodes(s.domain.n, b.q_max, b.rho, grid, nodes)?;
        let mut w = World {
            domain,
            battery,
            config: s.config.clone(),
            objects: BTreeMap::new(),
        };
        for name in s.objects.keys() {
            w.resolve(s, name, &mut Vec::new())?;
        }
        Ok(w)
    }

    fn resolve(&mut self, s: &Scenario, name: &str, stack: &mut Vec<String>) -> Result<()> {
        if self.objects.contains_key(name) {
            return Ok(());
        }
        if let Some(at) = stack.iter().position(|n| n == name) {
            let mut cycle = stack[at..].to_vec();
            cycle.push(name.to_string());
            return Err(CliError::Cycle(cycle));
        }
        let spec = s.objects.get(name).ok_or_else(|| CliError::Undefined {
            name: name.to_string(),
            by: stack
                .last()
                .map_or("a task".to_string(), |n| format!("object '{n}'")),
        })?;
        stack.push(name.to_string());
        for dep in references(spec) {
            self.resolve(s, dep, stack)?;
        }
        stack.pop();
        let obj = self.make(name, spec)?;
        self.objects.insert(name.to_string(), obj);
        Ok(())
    }

    pub fn get(&self, name: &str, by: &str) -> Result<&Object> {
        self.objects.get(name).ok_or_else(|| CliError::Undefined {
            name: name.to_string(),
            by: by.to_string(),
        })
    }

    fn mismatch(name: &str, expected: &'static str, found: &Object) -> CliError {
        CliError::Type {
            name: name.to_string(),
            expected,
            found: found.kind(),
        }
    }

    pub fn dist(&self, name: &str, by: &str) -> Result<&DistributionSpec> {
        match self.get(name, by)? {
            Object::Dist(d) => Ok(d),
            o => Err(Self::mismatch(name, "distribution", o)),
        }
    }

    /// An element; distributions are embedded on the fly.
    pub fn efunc(&self, name: &str, by: &str) -> Result<EFunc> {
        match self.get(name, by)? {
            Object::EFunc(r) => Ok(r.clone()),
            Object::Dist(d) => Ok(EFunc::embed(d)),
            o => Err(Self::mismatch(name, "efunc", o)),
        }
    }

    pub fn number(&self, name: &str, by: &str) -> Result<&GenNumberGe> {
        match self.get(name, by)? {
            Object::Number(r) => Ok(r),
            o => Err(Self::mismatch(name, "number", o)),
        }
    }

    pub fn point(&self, name: &str, by: &str) -> Result<&GenPointGe> {
        match self.get(name, by)? {
            Object::Point(x) => Ok(x),
            o => Err(Self::mismatch(name, "point", o)),
        }
    }

    pub fn matrix(&self, name: &str, by: &str) -> Result<&MatrixGe> {
        match self.get(name, by)? {
            Object::Matrix(a) => Ok(a),
            o => Err(Self::mismatch(name, "matrix", o)),
        }
    }

    pub fn net(&self, name: &str, by: &str) -> Result<&FunctionNet> {
        match self.get(name, by)? {
            Object::Net(u) => Ok(u),
            o => Err(Self::mismatch(name, "net", o)),
        }
    }

    pub fn gs_point(&self, name: &str, by: &str) -> Result<&GenPointGs> {
        match self.get(name, by)? {
            Object::GsPoint(x) => Ok(x),
            o => Err(Self::mismatch(name, "gs_point", o)),
        }
    }

    pub fn test_net(&self, name: &str, by: &str) -> Result<&TestObjectNet> {
        match self.get(name, by)? {
            Object::TestNet(t) => Ok(t),
            o => Err(Self::mismatch(name, "test_net", o)),
        }
    }

    pub fn gd_point(&self, name: &str, by: &str) -> Result<&GdPoint> {
        match self.get(name, by)? {
            Object::GdPoint(x) => Ok(x),
            o => Err(Self::mismatch(name, "gd_point", o)),
        }
    }

    fn make(&self, name: &str, spec: &ObjectSpec) -> Result<Object> {
        let by = format!("object '{name}'");
        let invalid = |message: &str| CliError::Invalid {
            name: name.to_string(),
            message: message.to_string(),
        };
        let arity = |args: &[String], k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(invalid(&format!("expected {k} args, got {}", args.len())))
            }
        };
        Ok(match spec {
            ObjectSpec::Distribution {
                dist,
                f,
                derivative,
            } => {
                let need_f = || {
                    f.as_deref()
                        .map(|t| parse(t, name))
                        .transpose()?
                        .ok_or_else(|| invalid("missing f"))
                };
                let mut d = match dist {
                    DistName::Delta => DistributionSpec::delta(self.domain.clone()),
                    DistName::Heaviside => DistributionSpec::heaviside(self.domain.clone())?,
                    DistName::Smooth => DistributionSpec::smooth(need_f()?, self.domain.clone())?,
                    DistName::LocallyIntegrable => {
                        DistributionSpec::locally_integrable(need_f()?, self.domain.clone())?
                    }
                };
                for &axis in derivative {
                    d = d.derivative(axis)?;
                }
                Object::Dist(d)
            }
            ObjectSpec::Efunc {
                embed,
                formula,
                rho,
                op,
                args,
                c,
                axis,
                budget,
            } => {
                let given = [
                    embed.is_some(),
                    formula.is_some(),
                    rho.is_some(),
                    op.is_some(),
                ];
                if given.iter().filter(|&&g| g).count() != 1 {
                    return Err(invalid("give exactly one of embed, formula, rho, op"));
                }
                let r = if let Some(u) = embed {
                    EFunc::embed(self.dist(u, &by)?)
                } else if let Some(f) = formula {
                    EFunc::formula(parse(f, name)?, self.domain.clone())?
                } else if let Some(r) = rho {
                    ge::rho_embed(self.number(r, &by)?, self.domain.clone())
                } else {
                    let op = op.expect("one source is given");
                    match op {
                        OpName::Add | OpName::Sub | OpName::Mul => {
                            arity(args, 2)?;
                            let (a, b) = (self.efunc(&args[0], &by)?, self.efunc(&args[1], &by)?);
                            match op {
                                OpName::Add => a.add(&b)?,
                                OpName::Sub => a.sub(&b)?,
                                _ => a.mul(&b)?,
                            }
                        }
                        OpName::Neg => {
                            arity(args, 1)?;
                            self.efunc(&args[0], &by)?.scale(-1.0)
                        }
                        OpName::Scale => {
                            arity(args, 1)?;
                            self.efunc(&args[0], &by)?
                                .scale(c.ok_or_else(|| invalid("scale needs c"))?)
                        }
                        OpName::Derive => {
                            arity(args, 1)?;
                            self.efunc(&args[0], &by)?
                                .derive(axis.ok_or_else(|| invalid("derive needs axis"))?)?
                        }
                        OpName::Invert => {
                            arity(args, 1)?;
                            ge::invert_function(&self.efunc(&args[0], &by)?)
                        }
                        OpName::Partner | OpName::PointValue => {
                            return Err(invalid(&format!("{op:?} is not an element operation")))
                        }
                    }
                };
                Object::EFunc(match budget {
                    Some(d) => r.with_budget(*d),
                    None => r,
                })
            }
            ObjectSpec::Number {
                expr,
                op,
                args,
                point,
            } => match (expr, op) {
                (Some(e), None) => Object::Number(GenNumberGe::expr(parse(e, name)?)?),
                (None, Some(op)) => {
                    let n = |i: usize| self.number(&args[i], &by);
                    Object::Number(match op {
                        OpName::Add | OpName::Sub | OpName::Mul => {
                            arity(args, 2)?;
                            match op {
                                OpName::Add => n(0)?.add(n(1)?),
                                OpName::Sub => n(0)?.sub(n(1)?),
                                _ => n(0)?.mul(n(1)?),
                            }
                        }
                        OpName::Neg => {
                            arity(args, 1)?;
                            n(0)?.neg()
                        }
                        OpName::Invert => {
                            arity(args, 1)?;
                            n(0)?.invert()
                        }
                        OpName::Partner => {
                            arity(args, 1)?;
                            n(0)?.zero_divisor_partner()
                        }
                        OpName::PointValue => {
                            arity(args, 1)?;
                            let x = point
                                .as_deref()
                                .ok_or_else(|| invalid("point_value needs point"))?;
                            GenNumberGe::point_value(
                                &self.efunc(&args[0], &by)?,
                                self.point(x, &by)?,
                            )?
                        }
                        OpName::Scale | OpName::Derive => {
                            return Err(invalid(&format!("{op:?} is not a number operation")))
                        }
                    })
                }
                _ => return Err(invalid("give exactly one of expr, op")),
            },
            ObjectSpec::Point {
                coords,
                support,
                evidence,
            } => match (evidence, support) {
                (Some(e), None) if coords.is_empty() => {
                    let k = compact(&e.k)?;
                    let r = self.efunc(&e.target, &by)?;
                    let ev = ge::gather_evidence(&r, &k, e.m0, &self.battery, &self.config)?;
                    let x0 = e.x0.clone().unwrap_or_else(|| k.center());
                    Object::Point(ge::construct_point(&ev, &x0, &k, &self.battery)?)
                }
                (None, Some(b)) => {
                    let coords = coords
                        .iter()
                        .map(|c| parse(c, name))
                        .collect::<Result<Vec<_>>>()?;
                    Object::Point(GenPointGe::new(coords, compact(b)?)?)
                }
                _ => return Err(invalid("give either coords with support, or evidence")),
            },
            ObjectSpec::Matrix { rows } => {
                let rows = rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|e| self.number(e, &by).cloned())
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Object::Matrix(MatrixGe::new(rows)?)
            }
            ObjectSpec::Net { expr, max_order } => {
                let u = FunctionNet::new(parse(expr, name)?, self.domain.clone())?;
                Object::Net(match max_order {
                    Some(d) => u.with_max_order(*d),
                    None => u,
                })
            }
            ObjectSpec::GsPoint {
                coords,
                support,
                eta,
            } => {
                let coords = coords
                    .iter()
                    .map(|c| parse(c, name))
                    .collect::<Result<Vec<_>>>()?;
                let support = support
                    .as_ref()
                    .map(|b| {
                        Ok::<_, CliError>(PointSupport {
                            k: compact(b)?,
                            eta: *eta,
                        })
                    })
                    .transpose()?;
                Object::GsPoint(GenPointGs::new(coords, support)?)
            }
            ObjectSpec::TestNet { q, sigma } => Object::TestNet(TestObjectNet::new(
                name,
                self.battery.phi(*q).clone(),
                *q,
                parse(sigma, name)?,
            )?),
            ObjectSpec::GdPoint { coords, support } => {
                let coords = coords
                    .iter()
                    .map(|c| parse(c, name))
                    .collect::<Result<Vec<_>>>()?;
                Object::GdPoint(GdPoint::new(coords, compact(support)?)?)
            }
        })
    }
}
