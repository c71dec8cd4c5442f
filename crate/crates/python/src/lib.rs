//! Python bindings: test functions, the battery, elements of the full
//! algebra, generalized numbers, function nets and the verdict procedures.

use std::sync::Arc;

use colombeau_core::asymptotics::{fit_order as core_fit_order, EpsGrid, Sample};
use colombeau_core::expr::Expr;
use colombeau_core::gd::{self, NetSet};
use colombeau_core::ge::{self, Battery, EFunc, GenNumberGe};
use colombeau_core::gs::{self, FunctionNet};
use colombeau_core::testfn::{
    make_bump, make_moment_testfn, CompactBox, DistributionSpec, Domain, TestFunction,
};
use colombeau_core::verdict::{Config, Verdict};
use colombeau_core::CoreError;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn core<T>(r: Result<T, CoreError>) -> PyResult<T> {
    r.map_err(err)
}

fn parse(text: &str) -> PyResult<Expr> {
    core(Expr::parse(text))
}

fn compact(lo: Vec<f64>, hi: Vec<f64>, points: usize) -> PyResult<CompactBox> {
    core(CompactBox::new(lo, hi, points))
}

/// A certified test function, possibly scaled and translated.
#[pyclass(name = "TestFunction", module = "colombeau", skip_from_py_object)]
#[derive(Clone)]
struct PyTestFunction(TestFunction);

#[pymethods]
impl PyTestFunction {
    /// Moment generator of order `q` (mass 1) or integral 0 (`mass=0`).
    #[staticmethod]
    #[pyo3(signature = (n, q, mass = 1, rho = 1.0))]
    fn moment(n: usize, q: u32, mass: u8, rho: f64) -> PyResult<Self> {
        core(make_moment_testfn(n, q, mass, rho)).map(Self)
    }

    #[staticmethod]
    #[pyo3(signature = (n, rho = 1.0))]
    fn bump(n: usize, rho: f64) -> PyResult<Self> {
        core(make_bump(n, rho)).map(Self)
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id().to_string()
    }

    #[getter]
    fn scale(&self) -> f64 {
        self.0.scale
    }

    #[getter]
    fn shift(&self) -> Vec<f64> {
        self.0.shift.clone()
    }

    /// `(order, next_moment)` of the moment certificate.
    fn certified_order(&self) -> (u32, f64) {
        let c = self.0.certified_order();
        (c.order, c.next_moment)
    }

    fn moment_of(&self, alpha: Vec<u32>) -> PyResult<f64> {
        if alpha.len() != self.0.n() {
            return Err(err("multi-index has the wrong length"));
        }
        Ok(self.0.generator.quad_moment(&alpha))
    }

    fn scaled(&self, eps: f64) -> PyResult<Self> {
        core(self.0.scaled(eps)).map(Self)
    }

    fn translated(&self, x: Vec<f64>) -> Self {
        Self(self.0.translated(&x))
    }

    fn __call__(&self, y: Vec<f64>) -> f64 {
        self.0.eval(&y)
    }

    fn __repr__(&self) -> String {
        format!(
            "TestFunction({}, scale={}, shift={:?})",
            self.0.id(),
            self.0.scale,
            self.0.shift
        )
    }
}

/// One certified `φ_q` per order `q ≤ q_max` and an ε-grid `base^k`.
#[pyclass(name = "Battery", module = "colombeau")]
struct PyBattery(Battery);

#[pymethods]
impl PyBattery {
    #[new]
    #[pyo3(signature = (n = 1, q_max = 4, base = 0.5, start = 4, end = 36, rho = 1.0))]
    fn new(n: usize, q_max: u32, base: f64, start: u32, end: u32, rho: f64) -> PyResult<Self> {
        let grid = core(EpsGrid::new(base, start, end))?;
        core(Battery::new(n, q_max, rho, grid)).map(Self)
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id()
    }

    #[getter]
    fn eps(&self) -> Vec<f64> {
        self.0.grid.values()
    }

    fn phi(&self, q: u32) -> PyResult<PyTestFunction> {
        if q > self.0.q_max {
            return Err(err(format!("order {q} exceeds q_max = {}", self.0.q_max)));
        }
        Ok(PyTestFunction(self.0.phi(q).clone()))
    }

    fn manifest_json(&self) -> String {
        serde_json::to_string(&self.0.manifest()).expect("manifest serializes")
    }
}

/// Result of a verdict procedure.
#[pyclass(name = "Verdict", module = "colombeau")]
struct PyVerdict(Verdict);

#[pymethods]
impl PyVerdict {
    #[getter]
    fn name(&self) -> &'static str {
        self.0.name()
    }

    #[getter]
    fn refuted(&self) -> bool {
        self.0.is_refuted()
    }

    #[getter]
    fn supported(&self) -> bool {
        self.0.is_supported()
    }

    #[getter]
    fn inconclusive(&self) -> bool {
        self.0.is_inconclusive()
    }

    #[getter]
    fn max_order(&self) -> Option<u32> {
        self.0.max_order()
    }

    fn certificate(&self, key: &str) -> Option<i64> {
        self.0.certificate(key)
    }

    /// `(eps, magnitude, exponent)` of the witness, if refuted.
    fn witness(&self) -> Option<(f64, f64, f64)> {
        self.0.witness().map(|w| (w.eps, w.magnitude, w.exponent))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("verdicts serialize")
    }

    fn __repr__(&self) -> String {
        format!("Verdict({})", self.0.name())
    }
}

fn domain(lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Arc<Domain>> {
    let b = core(colombeau_core::testfn::OpenBox::new(lo, hi))?;
    Ok(Arc::new(core(Domain::new(vec![b]))?))
}

/// `R(φ, x)` on an open box.
#[pyclass(name = "EFunc", module = "colombeau", skip_from_py_object)]
#[derive(Clone)]
struct PyEFunc(EFunc);

#[pymethods]
impl PyEFunc {
    #[staticmethod]
    fn delta(lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Self> {
        Ok(Self(EFunc::embed(&DistributionSpec::delta(domain(
            lo, hi,
        )?))))
    }

    #[staticmethod]
    fn heaviside(lo: f64, hi: f64) -> PyResult<Self> {
        let d = core(DistributionSpec::heaviside(domain(vec![lo], vec![hi])?))?;
        Ok(Self(EFunc::embed(&d)))
    }

    /// `ι(f)` for a smooth closed form `f` in `x0, x1, ...`.
    #[staticmethod]
    fn smooth(f: &str, lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Self> {
        let d = core(DistributionSpec::smooth(parse(f)?, domain(lo, hi)?))?;
        Ok(Self(EFunc::embed(&d)))
    }

    /// A closed form in `x0, ...`, `eps` and the generator tag.
    #[staticmethod]
    fn formula(f: &str, lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Self> {
        core(EFunc::formula(parse(f)?, domain(lo, hi)?)).map(Self)
    }

    #[staticmethod]
    fn rho(r: &PyNumber, lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Self> {
        Ok(Self(ge::rho_embed(&r.0, domain(lo, hi)?)))
    }

    fn __add__(&self, o: &Self) -> PyResult<Self> {
        core(self.0.add(&o.0)).map(Self)
    }

    fn __sub__(&self, o: &Self) -> PyResult<Self> {
        core(self.0.sub(&o.0)).map(Self)
    }

    fn __mul__(&self, o: &Self) -> PyResult<Self> {
        core(self.0.mul(&o.0)).map(Self)
    }

    fn scale(&self, c: f64) -> Self {
        Self(self.0.scale(c))
    }

    fn derive(&self, axis: usize) -> PyResult<Self> {
        core(self.0.derive(axis)).map(Self)
    }

    fn invert(&self) -> Self {
        Self(ge::invert_function(&self.0))
    }

    /// `∂^α R(φ, x)`, `None` outside `U(Ω)`.
    #[pyo3(signature = (phi, x, alpha = None))]
    fn __call__(
        &self,
        phi: &PyTestFunction,
        x: Vec<f64>,
        alpha: Option<Vec<u32>>,
    ) -> PyResult<Option<f64>> {
        let alpha = alpha.unwrap_or_else(|| vec![0; self.0.n()]);
        core(self.0.eval(&phi.0, &x, &alpha))
    }

    /// `R(T_x φ, x)` from the translated formalism; equals `R(φ, x)`.
    fn eval_translated(&self, phi: &PyTestFunction, x: Vec<f64>) -> PyResult<Option<f64>> {
        core(gd::formalism_translate(&self.0).eval_c(&phi.0, &x))
    }
}

/// A generalized number `r(φ)`.
#[pyclass(name = "Number", module = "colombeau", skip_from_py_object)]
#[derive(Clone)]
struct PyNumber(GenNumberGe);

#[pymethods]
impl PyNumber {
    #[new]
    fn new(expr: &str) -> PyResult<Self> {
        core(GenNumberGe::parse(expr)).map(Self)
    }

    fn __add__(&self, o: &Self) -> Self {
        Self(self.0.add(&o.0))
    }

    fn __sub__(&self, o: &Self) -> Self {
        Self(self.0.sub(&o.0))
    }

    fn __mul__(&self, o: &Self) -> Self {
        Self(self.0.mul(&o.0))
    }

    fn __neg__(&self) -> Self {
        Self(self.0.neg())
    }

    fn invert(&self) -> Self {
        Self(self.0.invert())
    }

    fn zero_divisor_partner(&self) -> Self {
        Self(self.0.zero_divisor_partner())
    }

    fn __call__(&self, phi: &PyTestFunction) -> f64 {
        self.0.eval(&phi.0)
    }
}

/// A net `u_ε(x)` of smooth functions.
#[pyclass(name = "FunctionNet", module = "colombeau")]
struct PyFunctionNet(FunctionNet);

#[pymethods]
impl PyFunctionNet {
    #[new]
    fn new(expr: &str, lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Self> {
        core(FunctionNet::parse(expr, domain(lo, hi)?)).map(Self)
    }

    fn __call__(&self, eps: f64, x: Vec<f64>) -> f64 {
        self.0.eval(eps, &x)
    }

    /// Samples of `u_ε(x)` at the constant point `x` over the battery grid.
    fn point_values(&self, x: Vec<f64>, battery: &PyBattery) -> PyResult<Vec<f64>> {
        let v = core(gs::gs_point_eval(&self.0, &gs::GenPointGs::constant(&x)))?;
        Ok(battery
            .0
            .grid
            .values()
            .into_iter()
            .map(|e| v.eval(e))
            .collect())
    }
}

/// Least-squares slope of `log|R|` against `log ε` over the trailing half.
#[pyfunction]
fn fit_order(eps: Vec<f64>, magnitudes: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    if eps.len() != magnitudes.len() {
        return Err(err("eps and magnitudes differ in length"));
    }
    let samples: Vec<Sample> = eps
        .iter()
        .zip(&magnitudes)
        .map(|(&e, &m)| Sample::new(e, m))
        .collect();
    let window = colombeau_core::asymptotics::asymptotic_window(samples.len());
    let fit = core(core_fit_order(&samples, window))?;
    Ok((fit.slope, fit.intercept, fit.residual))
}

#[pyfunction]
#[pyo3(signature = (r, lo, hi, battery, alpha_max = 0, points = 17))]
fn moderate(
    r: &PyEFunc,
    lo: Vec<f64>,
    hi: Vec<f64>,
    battery: &PyBattery,
    alpha_max: u32,
    points: usize,
) -> PyResult<PyVerdict> {
    let k = compact(lo, hi, points)?;
    core(ge::ge_moderate_verdict(
        &r.0,
        &k,
        alpha_max,
        &battery.0,
        &Config::default(),
    ))
    .map(PyVerdict)
}

#[pyfunction]
#[pyo3(signature = (r, lo, hi, battery, points = 17))]
fn negligible(
    r: &PyEFunc,
    lo: Vec<f64>,
    hi: Vec<f64>,
    battery: &PyBattery,
    points: usize,
) -> PyResult<PyVerdict> {
    let k = compact(lo, hi, points)?;
    core(ge::ge_negligible_verdict(
        &r.0,
        &k,
        &battery.0,
        &Config::default(),
    ))
    .map(PyVerdict)
}

/// Negligibility against the battery's constant test-object nets.
#[pyfunction]
#[pyo3(signature = (r, lo, hi, battery, points = 17))]
fn gd_negligible(
    r: &PyEFunc,
    lo: Vec<f64>,
    hi: Vec<f64>,
    battery: &PyBattery,
    points: usize,
) -> PyResult<PyVerdict> {
    let k = compact(lo, hi, points)?;
    let nets = core(NetSet::from_battery(&battery.0).certify(&k))?;
    core(gd::gd_negligible_verdict(
        &r.0,
        &k,
        &nets,
        &Config::default(),
    ))
    .map(PyVerdict)
}

#[pyfunction]
fn number_negligible(r: &PyNumber, battery: &PyBattery) -> PyResult<PyVerdict> {
    core(ge::number_negligible_verdict(
        &r.0,
        &battery.0,
        &Config::default(),
    ))
    .map(PyVerdict)
}

#[pyfunction]
fn strictly_nonzero(r: &PyNumber, battery: &PyBattery) -> PyResult<PyVerdict> {
    core(ge::strictly_nonzero_verdict(
        &r.0,
        &battery.0,
        &Config::default(),
    ))
    .map(PyVerdict)
}

#[pyfunction]
#[pyo3(signature = (u, lo, hi, battery, points = 17))]
fn net_negligible(
    u: &PyFunctionNet,
    lo: Vec<f64>,
    hi: Vec<f64>,
    battery: &PyBattery,
    points: usize,
) -> PyResult<PyVerdict> {
    let k = compact(lo, hi, points)?;
    core(gs::gs_negligible_verdict(
        &u.0,
        &k,
        &battery.0.grid,
        &Config::default(),
    ))
    .map(PyVerdict)
}

/// Run a scenario given as TOML text or a bundled name; returns the json report.
#[pyfunction]
#[pyo3(signature = (scenario, parallel = false))]
fn run_scenario(py: Python<'_>, scenario: &str, parallel: bool) -> PyResult<String> {
    let s = match colombeau_cli::bundled(scenario) {
        Some(s) => s.map_err(err)?,
        None => colombeau_cli::Scenario::parse(scenario, "<python>").map_err(err)?,
    };
    let report = py
        .detach(|| colombeau_cli::run_scenario(&s, parallel))
        .map_err(err)?;
    Ok(report.to_json())
}

#[pymodule]
fn colombeau(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTestFunction>()?;
    m.add_class::<PyBattery>()?;
    m.add_class::<PyVerdict>()?;
    m.add_class::<PyEFunc>()?;
    m.add_class::<PyNumber>()?;
    m.add_class::<PyFunctionNet>()?;
    m.add_function(wrap_pyfunction!(fit_order, m)?)?;
    m.add_function(wrap_pyfunction!(moderate, m)?)?;
    m.add_function(wrap_pyfunction!(negligible, m)?)?;
    m.add_function(wrap_pyfunction!(gd_negligible, m)?)?;
    m.add_function(wrap_pyfunction!(number_negligible, m)?)?;
    m.add_function(wrap_pyfunction!(strictly_nonzero, m)?)?;
    m.add_function(wrap_pyfunction!(net_negligible, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
