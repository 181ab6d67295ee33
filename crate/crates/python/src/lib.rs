use std::sync::Arc;

use pyo3::exceptions::{PyArithmeticError, PyKeyError, PyValueError};
use pyo3::prelude::*;

use supergeo::geometry::{self as geo, MetricContext};
use supergeo::lie_killing::{killing_check, solve_killing, KillingMode};
use supergeo::morphism::MapGeometry;
use supergeo::scenario::{self, Scenario as CoreScenario};
use supergeo::{Error, GeneratorPool, Superfunction as CoreFunction};

fn to_py(e: Error) -> PyErr {
    if e.is_parse() {
        PyValueError::new_err(e.to_string())
    } else {
        PyArithmeticError::new_err(e.to_string())
    }
}

fn names(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Element of a Grassmann algebra with rational-function coefficients.
#[pyclass(name = "Superfunction", module = "supergeo_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Superfunction {
    inner: CoreFunction,
}

#[pymethods]
impl Superfunction {
    #[new]
    #[pyo3(signature = (text, even = Vec::new(), odd = Vec::new(), flesh = Vec::new()))]
    fn new(text: &str, even: Vec<String>, odd: Vec<String>, flesh: Vec<String>) -> PyResult<Self> {
        let pool: Arc<GeneratorPool> =
            GeneratorPool::with_names(&names(&even), &names(&odd), &names(&flesh)).map_err(to_py)?;
        let inner = scenario::parse_expression(text, &pool).map_err(to_py)?;
        Ok(Superfunction { inner })
    }

    /// Sibling expression over the same generators.
    fn parse(&self, text: &str) -> PyResult<Self> {
        let inner = scenario::parse_expression(text, self.inner.pool()).map_err(to_py)?;
        Ok(Superfunction { inner })
    }

    /// `"even"`, `"odd"` or `None` for inhomogeneous elements.
    #[getter]
    fn parity(&self) -> Option<String> {
        self.inner.parity().map(|p| p.to_string())
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn body(&self) -> Self {
        Superfunction { inner: CoreFunction::from_ratfunc(self.inner.pool(), self.inner.body()) }
    }

    fn partial(&self, name: &str) -> PyResult<Self> {
        Ok(Superfunction { inner: self.inner.partial_named(name).map_err(to_py)? })
    }

    fn invert(&self) -> PyResult<Self> {
        Ok(Superfunction { inner: self.inner.invert().map_err(to_py)? })
    }

    fn __add__(&self, o: &Self) -> PyResult<Self> {
        Ok(Superfunction { inner: self.inner.checked_add(&o.inner).map_err(to_py)? })
    }

    fn __sub__(&self, o: &Self) -> PyResult<Self> {
        Ok(Superfunction { inner: self.inner.checked_sub(&o.inner).map_err(to_py)? })
    }

    fn __mul__(&self, o: &Self) -> PyResult<Self> {
        Ok(Superfunction { inner: self.inner.checked_mul(&o.inner).map_err(to_py)? })
    }

    fn __neg__(&self) -> Self {
        Superfunction { inner: -&self.inner }
    }

    fn __eq__(&self, o: &Self) -> bool {
        self.inner == o.inner
    }

    fn __str__(&self) -> String {
        self.inner.render()
    }

    fn __repr__(&self) -> String {
        format!("Superfunction({:?})", self.inner.render())
    }
}

/// A parsed scenario: charts, metrics, vector fields and morphisms by name.
#[pyclass(name = "Scenario", module = "supergeo_py", frozen)]
struct Scenario {
    inner: CoreScenario,
}

impl Scenario {
    fn metric(&self, name: &str) -> PyResult<&geo::BilinearForm> {
        self.inner.metric(name).ok_or_else(|| PyKeyError::new_err(format!("no metric `{name}`")))
    }

    fn field(&self, name: &str) -> PyResult<&geo::VectorField> {
        self.inner.field(name).ok_or_else(|| PyKeyError::new_err(format!("no vector field `{name}`")))
    }

    fn map(&self, name: &str) -> PyResult<MapGeometry> {
        let decl = self.inner.morphism(name).ok_or_else(|| PyKeyError::new_err(format!("no morphism `{name}`")))?;
        let h = self.metric(&decl.source_metric)?;
        let g = self.metric(&decl.target_metric)?;
        MapGeometry::new(decl.phi.clone(), h, g).map_err(to_py)
    }
}

#[pymethods]
impl Scenario {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Scenario { inner: CoreScenario::parse(text).map_err(to_py)? })
    }

    fn metrics(&self) -> Vec<String> {
        self.inner.metrics.iter().map(|(n, _)| n.clone()).collect()
    }

    fn fields(&self) -> Vec<String> {
        self.inner.fields.iter().map(|(n, _)| n.clone()).collect()
    }

    fn morphisms(&self) -> Vec<String> {
        self.inner.morphisms.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Signature `(t, s, m)` of a metric.
    fn signature(&self, metric: &str) -> PyResult<(usize, usize, usize)> {
        let s = geo::validate_metric(self.metric(metric)?).map_err(to_py)?;
        Ok((s.t, s.s, s.m))
    }

    /// Killing verdicts as `(mode, pass)` pairs for modes i, ii and v.
    fn is_killing(&self, field: &str, metric: &str) -> PyResult<Vec<(String, bool)>> {
        let ctx = MetricContext::new(self.metric(metric)?).map_err(to_py)?;
        let rep = killing_check(self.field(field)?, &ctx, &KillingMode::ALL).map_err(to_py)?;
        Ok(rep.results.iter().map(|r| (r.mode.to_string(), r.pass)).collect())
    }

    /// Even and odd dimension of the polynomial Killing fields up to `degree`.
    fn killing_dimensions(&self, metric: &str, degree: u32) -> PyResult<(usize, usize)> {
        Ok(solve_killing(self.metric(metric)?, degree).map_err(to_py)?.dims())
    }

    /// Tension field components keyed by target coordinate.
    fn tension(&self, morphism: &str) -> PyResult<Vec<(String, String)>> {
        let map = self.map(morphism)?;
        let tau = map.tension().map_err(to_py)?;
        let target = map.phi.target().clone();
        Ok(tau
            .components()
            .iter()
            .enumerate()
            .map(|(a, c)| (target.coord_name(a).to_string(), c.render()))
            .collect())
    }

    fn energy_density(&self, morphism: &str) -> PyResult<String> {
        Ok(self.map(morphism)?.energy_density().map_err(to_py)?.render())
    }

    /// Exact action as a `"p/q"` string.
    fn action(&self, morphism: &str) -> PyResult<String> {
        Ok(supergeo::integration::action(&self.map(morphism)?).map_err(to_py)?.to_string())
    }
}

/// Runs scenario text and returns `(exit_code, report)`.
#[pyfunction]
#[pyo3(signature = (text, name = "scenario.sg", seed = 0))]
fn run(text: &str, name: &str, seed: u64) -> (i32, String) {
    let out = scenario::run_source(name, text, seed);
    (out.exit_code, out.report)
}

#[pymodule]
fn supergeo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Superfunction>()?;
    m.add_class::<Scenario>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
