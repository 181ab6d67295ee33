//! Charts, vector fields, bilinear forms, supermetrics, OSp frames and the
//! Levi-Civita connection.
//!
//! Vector fields carry left coefficients, `X = Σ X^i ∂_i`, ordered with the even
//! coordinates first and the odd coordinates after them. A bilinear form stores
//! `B_ij = B(∂_i, ∂_j)` in a [`SuperMatrix`] whose parity is the form's parity.

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, MetricViolation, Result};
use crate::grassmann::{GeneratorPool, Parity, Superfunction, Var};
use crate::superlinalg::{self, det_commuting, gram_schmidt_osp, Signature, SuperMatrix};

/// A single global coordinate chart with a rational box for integration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pool: Arc<GeneratorPool>,
    coords: Vec<Var>,
    bounds: Vec<(BigRational, BigRational)>,
}

impl Chart {
    pub fn new(pool: Arc<GeneratorPool>, bounds: Vec<(BigRational, BigRational)>) -> Result<Arc<Self>> {
        let odd = pool.odd_coordinates();
        if odd.len() % 2 == 1 {
            return Err(Error::InvalidChart(format!("{} odd coordinates; the count must be even", odd.len())));
        }
        if bounds.len() != pool.num_even() {
            return Err(Error::InvalidChart(format!(
                "{} box intervals for {} even coordinates",
                bounds.len(),
                pool.num_even()
            )));
        }
        for (k, (a, b)) in bounds.iter().enumerate() {
            if a >= b {
                return Err(Error::InvalidChart(format!("empty interval for `{}`", pool.even_names()[k])));
            }
        }
        let coords = (0..pool.num_even()).map(Var::Even).chain(odd.into_iter().map(Var::Odd)).collect();
        Ok(Arc::new(Chart { pool, coords, bounds }))
    }

    /// Chart over the unit box.
    pub fn unit(even: &[&str], odd: &[&str], flesh: &[&str]) -> Result<Arc<Self>> {
        let pool = GeneratorPool::with_names(even, odd, flesh)?;
        let bounds = vec![(BigRational::zero(), BigRational::from_integer(1.into())); even.len()];
        Self::new(pool, bounds)
    }

    pub fn pool(&self) -> &Arc<GeneratorPool> {
        &self.pool
    }

    pub fn bounds(&self) -> &[(BigRational, BigRational)] {
        &self.bounds
    }

    /// `(n, 2m)`.
    pub fn dims(&self) -> (usize, usize) {
        let n = self.pool.num_even();
        (n, self.coords.len() - n)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Var] {
        &self.coords
    }

    pub fn coord_parity(&self, i: usize) -> Parity {
        self.coords[i].parity()
    }

    pub fn coord_name(&self, i: usize) -> &str {
        self.pool.name(self.coords[i])
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        let v = self.pool.lookup(name)?;
        self.coords.iter().position(|c| *c == v)
    }

    pub fn num_flesh(&self) -> usize {
        self.pool.num_odd() - (self.coords.len() - self.pool.num_even())
    }

    /// Midpoint of the box.
    pub fn sample_point(&self) -> Vec<BigRational> {
        let two = BigRational::from_integer(2.into());
        self.bounds.iter().map(|(a, b)| (a + b) / &two).collect()
    }

    /// The coordinate function `ξ^i`.
    pub fn coordinate_function(&self, i: usize) -> Superfunction {
        Superfunction::generator(&self.pool, self.coords[i])
    }

    pub fn zero(&self) -> Superfunction {
        Superfunction::zero(&self.pool)
    }
}

pub fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn check_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<()> {
    if same_chart(a, b) {
        Ok(())
    } else {
        Err(Error::ChartMismatch)
    }
}

/// Homogeneous vector field with left coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    chart: Arc<Chart>,
    parity: Parity,
    comps: Vec<Superfunction>,
}

impl VectorField {
    pub fn new(chart: &Arc<Chart>, parity: Parity, comps: Vec<Superfunction>) -> Result<Self> {
        if comps.len() != chart.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} components on a chart of dimension {}",
                comps.len(),
                chart.dim()
            )));
        }
        for (i, c) in comps.iter().enumerate() {
            if !crate::grassmann::same_pool(c.pool(), chart.pool()) {
                return Err(Error::PoolMismatch);
            }
            if !c.has_parity(parity + chart.coord_parity(i)) {
                return Err(Error::Inhomogeneous("vector field"));
            }
        }
        Ok(VectorField { chart: chart.clone(), parity, comps })
    }

    /// Infers the parity; the zero field is even.
    pub fn from_components(chart: &Arc<Chart>, comps: Vec<Superfunction>) -> Result<Self> {
        match Self::new(chart, Parity::Even, comps.clone()) {
            Err(Error::Inhomogeneous(_)) => Self::new(chart, Parity::Odd, comps),
            r => r,
        }
    }

    pub fn zero(chart: &Arc<Chart>, parity: Parity) -> Self {
        VectorField { chart: chart.clone(), parity, comps: vec![chart.zero(); chart.dim()] }
    }

    /// The coordinate field `∂_i`.
    pub fn coordinate(chart: &Arc<Chart>, i: usize) -> Self {
        let mut comps = vec![chart.zero(); chart.dim()];
        comps[i] = Superfunction::one(chart.pool());
        VectorField { chart: chart.clone(), parity: chart.coord_parity(i), comps }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn components(&self) -> &[Superfunction] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &Superfunction {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// `X(f) = Σ X^i ∂_i f`.
    pub fn apply(&self, f: &Superfunction) -> Result<Superfunction> {
        if !crate::grassmann::same_pool(f.pool(), self.chart.pool()) {
            return Err(Error::ChartMismatch);
        }
        let mut acc = self.chart.zero();
        for (xi, v) in self.comps.iter().zip(self.chart.coords()) {
            if xi.is_zero() {
                continue;
            }
            acc = &acc + &(xi * &f.partial(*v)?);
        }
        Ok(acc)
    }

    /// `[X, Y]^k = X(Y^k) - (-1)^{|X||Y|} Y(X^k)`.
    pub fn bracket(&self, y: &VectorField) -> Result<VectorField> {
        check_chart(&self.chart, &y.chart)?;
        let flip = self.parity.koszul(y.parity);
        let comps = (0..self.chart.dim())
            .map(|k| Ok(&self.apply(&y.comps[k])? - &y.apply(&self.comps[k])?.negate_if(flip)))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField { chart: self.chart.clone(), parity: self.parity + y.parity, comps })
    }

    pub fn add(&self, o: &VectorField) -> Result<VectorField> {
        check_chart(&self.chart, &o.chart)?;
        let comps: Vec<_> = self.comps.iter().zip(&o.comps).map(|(a, b)| a + b).collect();
        let parity = if self.is_zero() {
            o.parity
        } else if o.is_zero() || o.parity == self.parity {
            self.parity
        } else {
            return Err(Error::Inhomogeneous("vector field sum"));
        };
        Ok(VectorField { chart: self.chart.clone(), parity, comps })
    }

    pub fn neg(&self) -> VectorField {
        VectorField { comps: self.comps.iter().map(|c| -c).collect(), ..self.clone() }
    }

    pub fn sub(&self, o: &VectorField) -> Result<VectorField> {
        self.add(&o.neg())
    }

    /// `f · X` for homogeneous `f`.
    pub fn scale(&self, f: &Superfunction) -> Result<VectorField> {
        let fp = f.parity().ok_or(Error::Inhomogeneous("scalar factor"))?;
        let comps = self.comps.iter().map(|c| f.checked_mul(c)).collect::<Result<Vec<_>>>()?;
        Ok(VectorField { chart: self.chart.clone(), parity: self.parity + fp, comps })
    }

    pub fn scale_rational(&self, r: &BigRational) -> VectorField {
        VectorField { comps: self.comps.iter().map(|c| c.scale(r)).collect(), ..self.clone() }
    }

    /// `d_x: x; d_th1: 1` style listing of the nonzero components.
    pub fn render(&self) -> String {
        let parts: Vec<String> = self
            .comps
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("d_{}: {}", self.chart.coord_name(i), c))
            .collect();
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join("; ")
        }
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// One-form with components `F_i = F(∂_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneForm {
    chart: Arc<Chart>,
    parity: Parity,
    comps: Vec<Superfunction>,
}

impl OneForm {
    pub fn new(chart: &Arc<Chart>, parity: Parity, comps: Vec<Superfunction>) -> Result<Self> {
        if comps.len() != chart.dim() {
            return Err(Error::DimensionMismatch("one-form components".into()));
        }
        for (i, c) in comps.iter().enumerate() {
            if !c.has_parity(parity + chart.coord_parity(i)) {
                return Err(Error::Inhomogeneous("one-form"));
            }
        }
        Ok(OneForm { chart: chart.clone(), parity, comps })
    }

    /// `df` with `(df)_i = (-1)^{|f||ξ^i|} ∂_i f`, so that `df[Y] = (-1)^{|f||Y|} Y(f)`.
    pub fn differential(chart: &Arc<Chart>, f: &Superfunction) -> Result<Self> {
        let fp = f.parity().ok_or(Error::Inhomogeneous("function"))?;
        let comps = chart
            .coords()
            .iter()
            .map(|v| Ok(f.partial(*v)?.negate_if(fp.koszul(v.parity()))))
            .collect::<Result<Vec<_>>>()?;
        Ok(OneForm { chart: chart.clone(), parity: fp, comps })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn components(&self) -> &[Superfunction] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// `F(X) = Σ (-1)^{|X^i||F|} X^i F_i`.
    pub fn eval(&self, x: &VectorField) -> Result<Superfunction> {
        check_chart(&self.chart, x.chart())?;
        let mut acc = self.chart.zero();
        for (i, (xi, fi)) in x.components().iter().zip(&self.comps).enumerate() {
            let flip = (x.parity() + self.chart.coord_parity(i)).koszul(self.parity);
            acc = &acc + &(xi * fi).negate_if(flip);
        }
        Ok(acc)
    }
}

/// Homogeneous bilinear form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearForm {
    chart: Arc<Chart>,
    matrix: SuperMatrix,
}

impl BilinearForm {
    pub fn new(chart: &Arc<Chart>, matrix: SuperMatrix) -> Result<Self> {
        if matrix.dims() != chart.dims() {
            return Err(Error::DimensionMismatch("bilinear form components".into()));
        }
        if !crate::grassmann::same_pool(matrix.pool(), chart.pool()) && matrix.size() > 0 {
            return Err(Error::PoolMismatch);
        }
        Ok(BilinearForm { chart: chart.clone(), matrix })
    }

    pub fn from_rows(chart: &Arc<Chart>, rows: Vec<Vec<Superfunction>>) -> Result<Self> {
        let (n, m) = chart.dims();
        Self::new(chart, SuperMatrix::from_rows(n, m, rows)?)
    }

    pub fn zero(chart: &Arc<Chart>, parity: Parity) -> Self {
        let (n, m) = chart.dims();
        BilinearForm { chart: chart.clone(), matrix: SuperMatrix::zeros(chart.pool(), n, m, parity) }
    }

    /// The standard metric `g₀` on a chart whose dimensions match `sig`.
    pub fn standard(chart: &Arc<Chart>, sig: Signature) -> Result<Self> {
        Self::new(chart, superlinalg::standard_metric(chart.pool(), sig))
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn parity(&self) -> Parity {
        self.matrix.parity()
    }

    pub fn matrix(&self) -> &SuperMatrix {
        &self.matrix
    }

    pub fn component(&self, i: usize, j: usize) -> &Superfunction {
        self.matrix.get(i, j)
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    pub fn eval(&self, x: &VectorField, y: &VectorField) -> Result<Superfunction> {
        check_chart(&self.chart, x.chart())?;
        check_chart(&self.chart, y.chart())?;
        Ok(self.matrix.bilinear(x.components(), x.parity(), y.components(), y.parity()))
    }

    pub fn is_supersymmetric(&self) -> bool {
        let n = self.chart.dim();
        (0..n).all(|i| {
            (i..n).all(|j| {
                let flip = self.chart.coord_parity(i).koszul(self.chart.coord_parity(j));
                *self.component(i, j) == self.component(j, i).clone().negate_if(flip)
            })
        })
    }

    pub fn add(&self, o: &BilinearForm) -> Result<BilinearForm> {
        check_chart(&self.chart, &o.chart)?;
        Ok(BilinearForm { chart: self.chart.clone(), matrix: self.matrix.add(&o.matrix)? })
    }

    pub fn sub(&self, o: &BilinearForm) -> Result<BilinearForm> {
        check_chart(&self.chart, &o.chart)?;
        Ok(BilinearForm { chart: self.chart.clone(), matrix: self.matrix.sub(&o.matrix)? })
    }

    /// `f · B` for an even function `f`.
    pub fn scale_even(&self, f: &Superfunction) -> Result<BilinearForm> {
        if f.parity() != Some(Parity::Even) {
            return Err(Error::Inhomogeneous("even scalar factor"));
        }
        let (n, m) = self.chart.dims();
        let rows = self.matrix.rows().iter().map(|r| r.iter().map(|e| f * e).collect()).collect();
        Ok(BilinearForm {
            chart: self.chart.clone(),
            matrix: SuperMatrix::new(n, m, self.parity(), rows)?,
        })
    }

    /// Row-major component listing.
    pub fn render(&self) -> String {
        self.matrix.render()
    }
}

/// Checks that `g` is even, supersymmetric and nondegenerate, and returns the
/// signature of its body at the chart's sample point.
pub fn validate_metric(g: &BilinearForm) -> Result<Signature> {
    let chart = g.chart();
    let n = chart.dim();
    let (ne, no) = chart.dims();
    if no % 2 == 1 {
        return Err(MetricViolation::OddDimension(no).into());
    }
    if g.parity() == Parity::Odd {
        for i in 0..n {
            for j in 0..n {
                if !g.component(i, j).is_zero() {
                    return Err(MetricViolation::NotEven(i, j).into());
                }
            }
        }
    }
    for i in 0..n {
        for j in i..n {
            let flip = chart.coord_parity(i).koszul(chart.coord_parity(j));
            if *g.component(i, j) != g.component(j, i).clone().negate_if(flip) {
                return Err(MetricViolation::NotSupersymmetric(i, j).into());
            }
        }
    }
    let pool = chart.pool();
    let body_block = |r: std::ops::Range<usize>| -> Vec<Vec<Superfunction>> {
        r.clone()
            .map(|i| r.clone().map(|j| Superfunction::from_ratfunc(pool, g.component(i, j).body())).collect())
            .collect()
    };
    let det_even = det_commuting(body_block(0..ne), pool);
    let det_odd = det_commuting(body_block(ne..n), pool);
    if det_even.is_zero() || det_odd.is_zero() {
        return Err(MetricViolation::Degenerate.into());
    }
    let point = chart.sample_point();
    let mut sample = Vec::with_capacity(ne);
    for i in 0..ne {
        let mut row = Vec::with_capacity(ne);
        for j in 0..ne {
            row.push(g.component(i, j).body_at(&point).ok_or(MetricViolation::DegenerateAtSample)?);
        }
        sample.push(row);
    }
    if det_odd.body_at(&point).is_none_or(|v| v.is_zero()) {
        return Err(MetricViolation::DegenerateAtSample.into());
    }
    let (t, s) = inertia(sample).ok_or(MetricViolation::DegenerateAtSample)?;
    Ok(Signature::new(t, s, no / 2))
}

/// `(negative, positive)` inertia of a symmetric rational matrix, or `None` if singular.
fn inertia(mut a: Vec<Vec<BigRational>>) -> Option<(usize, usize)> {
    let (mut neg, mut pos) = (0, 0);
    while !a.is_empty() {
        let n = a.len();
        let k = match (0..n).find(|&k| !a[k][k].is_zero()) {
            Some(k) => k,
            None => {
                let (i, j) = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).find(|&(i, j)| !a[i][j].is_zero())?;
                // replace e_i by e_i + e_j; the new diagonal entry is 2 a_ij
                for r in 0..n {
                    let v = a[r][j].clone();
                    a[r][i] += v;
                }
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[i][c] += v;
                }
                i
            }
        };
        let p = a[k][k].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        let mut next = Vec::with_capacity(n - 1);
        for r in (0..n).filter(|&r| r != k) {
            let f = &a[r][k] / &p;
            next.push((0..n).filter(|&c| c != k).map(|c| &a[r][c] - &f * &a[k][c]).collect());
        }
        a = next;
    }
    Some((neg, pos))
}

/// Affine connection with `∇_{∂_i} ∂_j = Σ_k Γ^k_ij ∂_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    chart: Arc<Chart>,
    /// `gamma[k][i][j] = Γ^k_ij`
    gamma: Vec<Vec<Vec<Superfunction>>>,
}

impl Connection {
    pub fn flat(chart: &Arc<Chart>) -> Self {
        let n = chart.dim();
        Connection { chart: chart.clone(), gamma: vec![vec![vec![chart.zero(); n]; n]; n] }
    }

    pub fn from_christoffel(chart: &Arc<Chart>, gamma: Vec<Vec<Vec<Superfunction>>>) -> Result<Self> {
        let n = chart.dim();
        for (k, gk) in gamma.iter().enumerate() {
            for (i, gi) in gk.iter().enumerate() {
                for (j, e) in gi.iter().enumerate() {
                    let p = chart.coord_parity(i) + chart.coord_parity(j) + chart.coord_parity(k);
                    if !e.has_parity(p) {
                        return Err(Error::Inhomogeneous("Christoffel symbol"));
                    }
                }
                if gi.len() != n {
                    return Err(Error::DimensionMismatch("Christoffel table".into()));
                }
            }
        }
        if gamma.len() != n || gamma.iter().any(|g| g.len() != n) {
            return Err(Error::DimensionMismatch("Christoffel table".into()));
        }
        Ok(Connection { chart: chart.clone(), gamma })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    /// `Γ^k_ij`.
    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> &Superfunction {
        &self.gamma[k][i][j]
    }

    pub fn is_flat(&self) -> bool {
        self.gamma.iter().flatten().flatten().all(|e| e.is_zero())
    }

    /// `(∇_X Y)^k = X(Y^k) + Σ_{ij} X^i (-1)^{|ξ^i||Y^j|} Y^j Γ^k_ij`.
    pub fn covariant(&self, x: &VectorField, y: &VectorField) -> Result<VectorField> {
        check_chart(&self.chart, x.chart())?;
        check_chart(&self.chart, y.chart())?;
        let n = self.chart.dim();
        let mut comps = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = x.apply(y.component(k))?;
            for i in 0..n {
                let xi = x.component(i);
                if xi.is_zero() {
                    continue;
                }
                let pi = self.chart.coord_parity(i);
                let mut inner = self.chart.zero();
                for j in 0..n {
                    let (yj, g) = (y.component(j), &self.gamma[k][i][j]);
                    if yj.is_zero() || g.is_zero() {
                        continue;
                    }
                    let flip = pi.koszul(y.parity() + self.chart.coord_parity(j));
                    inner = &inner + &(yj * g).negate_if(flip);
                }
                acc = &acc + &(xi * &inner);
            }
            comps.push(acc);
        }
        VectorField::new(&self.chart, x.parity() + y.parity(), comps)
    }
}

/// Levi-Civita connection of a supermetric from the graded Koszul formula
/// `Γ_ijl = ⟨∇_{∂_i} ∂_j, ∂_l⟩` and `Γ^k_ij = Σ_l Γ_ijl (g⁻¹)_lk`.
pub fn levi_civita(g: &BilinearForm) -> Result<Connection> {
    validate_metric(g)?;
    let chart = g.chart();
    let n = chart.dim();
    let ginv = g.matrix().inverse()?;
    let coords = chart.coords();
    let par = |i: usize| chart.coord_parity(i);
    let dg: Vec<Vec<Vec<Superfunction>>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| (0..n).map(|c| g.component(b, c).partial(coords[a])).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let half = BigRational::new(1.into(), 2.into());
    let mut lower = vec![vec![vec![chart.zero(); n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let a = dg[i][j][l].clone();
                let b = dg[j][l][i].clone().negate_if(par(i).koszul(par(j) + par(l)));
                let c = dg[l][i][j].clone().negate_if((par(i) + par(j)).koszul(par(l)));
                lower[i][j][l] = (&(&a + &b) - &c).scale(&half);
            }
        }
    }
    let mut gamma = vec![vec![vec![chart.zero(); n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = chart.zero();
                for l in 0..n {
                    let (a, b) = (&lower[i][j][l], ginv.get(l, k));
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                gamma[k][i][j] = acc;
            }
        }
    }
    Connection::from_christoffel(chart, gamma)
}

/// Nonzero components of `∇_X Y - (-1)^{|X||Y|} ∇_Y X - [X, Y]` over coordinate pairs.
pub fn torsion_residuals(conn: &Connection) -> Result<Vec<(usize, usize, VectorField)>> {
    let chart = conn.chart();
    let n = chart.dim();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (VectorField::coordinate(chart, i), VectorField::coordinate(chart, j));
            let flip = x.parity().koszul(y.parity());
            let a = conn.covariant(&x, &y)?;
            let b = conn.covariant(&y, &x)?;
            let b = if flip { b.neg() } else { b };
            let r = a.sub(&b)?.sub(&x.bracket(&y)?)?;
            if !r.is_zero() {
                out.push((i, j, r));
            }
        }
    }
    Ok(out)
}

/// Nonzero values of `X⟨Y,Z⟩ - ⟨∇_X Y, Z⟩ - (-1)^{|X||Y|} ⟨Y, ∇_X Z⟩` over coordinate triples.
pub fn metricity_residuals(conn: &Connection, g: &BilinearForm) -> Result<Vec<(usize, usize, usize, Superfunction)>> {
    let chart = conn.chart();
    let n = chart.dim();
    let fields: Vec<VectorField> = (0..n).map(|i| VectorField::coordinate(chart, i)).collect();
    let mut out = Vec::new();
    for (i, x) in fields.iter().enumerate() {
        for (j, y) in fields.iter().enumerate() {
            let nxy = conn.covariant(x, y)?;
            for (k, z) in fields.iter().enumerate() {
                let lhs = x.apply(&g.eval(y, z)?)?;
                let nxz = conn.covariant(x, z)?;
                let rhs = &g.eval(&nxy, z)? + &g.eval(y, &nxz)?.negate_if(x.parity().koszul(y.parity()));
                let r = &lhs - &rhs;
                if !r.is_zero() {
                    out.push((i, j, k, r));
                }
            }
        }
    }
    Ok(out)
}

/// Frame `e_1, …, e_{t+s+2m}` with `g(e_i, e_j) = (g₀)_ij`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OspFrame {
    chart: Arc<Chart>,
    signature: Signature,
    fields: Vec<VectorField>,
}

impl OspFrame {
    /// Runs graded Gram-Schmidt on the component matrix of `g`, with signs decided
    /// at the chart's sample point.
    pub fn from_metric(g: &BilinearForm) -> Result<Self> {
        let chart = g.chart();
        let basis = gram_schmidt_osp(g.matrix(), Some(&chart.sample_point()))?;
        let sig = basis.signature;
        let fields = (0..chart.dim())
            .map(|k| VectorField::new(chart, superlinalg::slot_parity(sig.even_dim(), k), basis.frame.column(k)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(g, sig, fields)
    }

    /// Validates the defining equations against `g`.
    pub fn new(g: &BilinearForm, signature: Signature, fields: Vec<VectorField>) -> Result<Self> {
        let chart = g.chart();
        if signature.dim() != chart.dim() || fields.len() != chart.dim() {
            return Err(Error::FrameMismatch("frame size differs from the chart dimension".into()));
        }
        let g0 = superlinalg::standard_metric(chart.pool(), signature);
        for (i, ei) in fields.iter().enumerate() {
            if ei.parity() != superlinalg::slot_parity(signature.even_dim(), i) {
                return Err(Error::FrameMismatch(format!("e_{} has the wrong parity", i + 1)));
            }
            for (j, ej) in fields.iter().enumerate() {
                if g.eval(ei, ej)? != *g0.get(i, j) {
                    return Err(Error::FrameMismatch(format!("g(e_{}, e_{}) differs from g0", i + 1, j + 1)));
                }
            }
        }
        Ok(OspFrame { chart: chart.clone(), signature, fields })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// `J e_k`.
    pub fn j(&self, k: usize) -> VectorField {
        let (m, sign) = superlinalg::j_image(self.signature, k);
        if sign < 0 {
            self.fields[m].neg()
        } else {
            self.fields[m].clone()
        }
    }

    /// The frame `e'_k = Σ_m e_m A_mk` for a constant matrix `A` in the OSp group.
    pub fn transformed(&self, g: &BilinearForm, a: &[Vec<BigRational>]) -> Result<Self> {
        let n = self.fields.len();
        if a.len() != n || a.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("frame transformation".into()));
        }
        let mut fields = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = VectorField::zero(&self.chart, superlinalg::slot_parity(self.signature.even_dim(), k));
            for (m, e) in self.fields.iter().enumerate() {
                if !a[m][k].is_zero() {
                    acc = acc.add(&e.scale_rational(&a[m][k]))?;
                }
            }
            fields.push(acc);
        }
        Self::new(g, self.signature, fields)
    }

    /// Checks the defining equations against `g` again.
    pub fn verify(&self, g: &BilinearForm) -> Result<()> {
        Self::new(g, self.signature, self.fields.clone()).map(|_| ())
    }
}

fn check_frame(frame: &OspFrame, g: &BilinearForm) -> Result<()> {
    if !same_chart(frame.chart(), g.chart()) {
        return Err(Error::FrameMismatch("frame and metric live on different charts".into()));
    }
    Ok(())
}

/// `div X = Σ_j (-1)^{|e_j||X|} ⟨∇_{e_j} X, J e_j⟩_g`.
pub fn divergence(x: &VectorField, g: &BilinearForm, conn: &Connection, frame: &OspFrame) -> Result<Superfunction> {
    check_frame(frame, g)?;
    check_chart(x.chart(), g.chart())?;
    let mut acc = g.chart().zero();
    for (j, e) in frame.fields().iter().enumerate() {
        let v = g.eval(&conn.covariant(e, x)?, &frame.j(j))?;
        acc = &acc + &v.negate_if(e.parity().koszul(x.parity()));
    }
    Ok(acc)
}

/// Divergence as the supertrace of `Y ↦ (-1)^{|X||Y|} ∇_Y X` in the coordinate basis.
pub fn divergence_coordinate(x: &VectorField, conn: &Connection) -> Result<Superfunction> {
    let chart = conn.chart();
    let mut acc = chart.zero();
    for i in 0..chart.dim() {
        let pi = chart.coord_parity(i);
        let col = conn.covariant(&VectorField::coordinate(chart, i), x)?;
        // right coefficient of (-1)^{|X||i|} ∇_{∂_i} X along ∂_i; the two signs cancel
        let entry = col.component(i).clone();
        acc = &acc + &entry.negate_if(pi.koszul(x.parity() + Parity::Odd));
    }
    Ok(acc)
}

/// `str_g K = Σ_j K(e_j, J e_j)`.
pub fn str_with_metric(k: &BilinearForm, g: &BilinearForm, frame: &OspFrame) -> Result<Superfunction> {
    check_frame(frame, g)?;
    check_chart(k.chart(), g.chart())?;
    let mut acc = g.chart().zero();
    for (j, e) in frame.fields().iter().enumerate() {
        acc = &acc + &k.eval(e, &frame.j(j))?;
    }
    Ok(acc)
}

/// `str_g K` for even `K` through the metric inverse: `Σ_j (-1)^{|ξ^j|} (K g⁻¹)_jj`.
pub fn str_with_metric_matrix(k: &BilinearForm, g: &BilinearForm) -> Result<Superfunction> {
    check_chart(k.chart(), g.chart())?;
    if k.parity() != Parity::Even {
        return Err(Error::Precondition("matrix path supports even forms only".into()));
    }
    Ok(k.matrix().mul(&g.matrix().inverse()?)?.supertrace())
}

/// A validated supermetric together with its Levi-Civita connection and, when
/// exact square roots allow it, an OSp frame.
#[derive(Clone, Debug)]
pub struct MetricContext {
    pub g: BilinearForm,
    pub signature: Signature,
    pub conn: Connection,
    frame: std::result::Result<OspFrame, Error>,
}

impl MetricContext {
    pub fn new(g: &BilinearForm) -> Result<Self> {
        let signature = validate_metric(g)?;
        let conn = levi_civita(g)?;
        let frame = OspFrame::from_metric(g);
        Ok(MetricContext { g: g.clone(), signature, conn, frame })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.g.chart()
    }

    pub fn frame(&self) -> Result<&OspFrame> {
        self.frame.as_ref().map_err(|e| e.clone())
    }

    pub fn divergence(&self, x: &VectorField) -> Result<Superfunction> {
        divergence(x, &self.g, &self.conn, self.frame()?)
    }

    pub fn str_with_metric(&self, k: &BilinearForm) -> Result<Superfunction> {
        str_with_metric(k, &self.g, self.frame()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf(chart: &Arc<Chart>, name: &str) -> Superfunction {
        Superfunction::named(chart.pool(), name).unwrap()
    }

    fn int(chart: &Arc<Chart>, v: i64) -> Superfunction {
        Superfunction::from_int(chart.pool(), v)
    }

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    fn field(chart: &Arc<Chart>, comps: Vec<Superfunction>) -> VectorField {
        VectorField::from_components(chart, comps).unwrap()
    }

    #[test]
    fn apply_examples() {
        let c = Chart::unit(&["x"], &["th1", "th2"], &[]).unwrap();
        let (x, t1, t2) = (sf(&c, "x"), sf(&c, "th1"), sf(&c, "th2"));
        let z = c.zero();
        let xdx = field(&c, vec![x.clone(), z.clone(), z.clone()]);
        assert_eq!(xdx.apply(&(&x * &x)).unwrap(), (&x * &x).scale_int(2));
        let dt1 = VectorField::coordinate(&c, 1);
        assert_eq!(dt1.apply(&(&t1 * &t2)).unwrap(), t2);
        let t1dx = field(&c, vec![t1.clone(), z.clone(), z.clone()]);
        assert_eq!(t1dx.apply(&(&x * &t2)).unwrap(), &t1 * &t2);
    }

    #[test]
    fn bracket_examples() {
        let c = Chart::unit(&["x"], &["th", "ph"], &[]).unwrap();
        let (x, th) = (sf(&c, "x"), sf(&c, "th"));
        let z = c.zero();
        let dth = VectorField::coordinate(&c, 1);
        let dx = VectorField::coordinate(&c, 0);
        let th_dx = field(&c, vec![th.clone(), z.clone(), z.clone()]);
        assert_eq!(dth.bracket(&th_dx).unwrap(), dx);
        assert!(dth.bracket(&dth).unwrap().is_zero());
        let xdx = field(&c, vec![x.clone(), z.clone(), z.clone()]);
        assert_eq!(xdx.bracket(&dx).unwrap(), dx.neg());
    }

    #[test]
    fn standard_odd_block_values() {
        let c = Chart::unit(&[], &["th1", "th2"], &[]).unwrap();
        let g = BilinearForm::standard(&c, Signature::new(0, 0, 1)).unwrap();
        let (d1, d2) = (VectorField::coordinate(&c, 0), VectorField::coordinate(&c, 1));
        assert_eq!(g.eval(&d1, &d2).unwrap(), int(&c, -1));
        assert_eq!(g.eval(&d2, &d1).unwrap(), int(&c, 1));
    }

    #[test]
    fn validate_examples() {
        let c = Chart::unit(&["x", "y"], &["th1", "th2"], &[]).unwrap();
        let g0 = BilinearForm::standard(&c, Signature::new(0, 2, 1)).unwrap();
        assert_eq!(validate_metric(&g0).unwrap(), Signature::new(0, 2, 1));
        let c2 = Chart::unit(&["x", "y"], &[], &[]).unwrap();
        let mink = BilinearForm::from_rows(&c2, vec![vec![int(&c2, 1), int(&c2, 0)], vec![int(&c2, 0), int(&c2, -1)]]).unwrap();
        assert_eq!(validate_metric(&mink).unwrap(), Signature::new(1, 1, 0));
        let x = sf(&c2, "x");
        let degenerate = BilinearForm::from_rows(&c2, vec![vec![x.clone(), x.clone()], vec![x.clone(), x.clone()]]).unwrap();
        assert_eq!(validate_metric(&degenerate), Err(MetricViolation::Degenerate.into()));
        let asym = BilinearForm::from_rows(&c2, vec![vec![int(&c2, 1), int(&c2, 2)], vec![int(&c2, 0), int(&c2, 1)]]).unwrap();
        assert_eq!(validate_metric(&asym), Err(MetricViolation::NotSupersymmetric(0, 1).into()));
    }

    #[test]
    fn polar_christoffel_symbols() {
        let c = Chart::new(
            GeneratorPool::with_names(&["x", "y"], &[], &[]).unwrap(),
            vec![(q(1), q(2)), (q(0), q(1))],
        )
        .unwrap();
        let x = sf(&c, "x");
        let g = BilinearForm::from_rows(&c, vec![vec![int(&c, 1), int(&c, 0)], vec![int(&c, 0), &x * &x]]).unwrap();
        let conn = levi_civita(&g).unwrap();
        assert_eq!(conn.christoffel(0, 1, 1), &-&x);
        assert_eq!(conn.christoffel(1, 0, 1), &x.invert().unwrap());
        assert_eq!(conn.christoffel(1, 1, 0), &x.invert().unwrap());
        assert!(torsion_residuals(&conn).unwrap().is_empty());
        assert!(metricity_residuals(&conn, &g).unwrap().is_empty());
    }

    #[test]
    fn flat_levi_civita_vanishes() {
        let c = Chart::unit(&["x", "y"], &["th1", "th2"], &[]).unwrap();
        let g0 = BilinearForm::standard(&c, Signature::new(0, 2, 1)).unwrap();
        assert!(levi_civita(&g0).unwrap().is_flat());
    }

    #[test]
    fn nilpotent_metric_certificates() {
        let c = Chart::unit(&["x"], &["th1", "th2"], &[]).unwrap();
        let (t1, t2) = (sf(&c, "th1"), sf(&c, "th2"));
        let one = int(&c, 1);
        let z = c.zero();
        let g = BilinearForm::from_rows(
            &c,
            vec![
                vec![&one + &(&t1 * &t2), z.clone(), z.clone()],
                vec![z.clone(), z.clone(), int(&c, -1)],
                vec![z.clone(), one.clone(), z.clone()],
            ],
        )
        .unwrap();
        let conn = levi_civita(&g).unwrap();
        assert!(!conn.is_flat());
        assert!(torsion_residuals(&conn).unwrap().is_empty());
        assert!(metricity_residuals(&conn, &g).unwrap().is_empty());
        let frame = OspFrame::from_metric(&g).unwrap();
        frame.verify(&g).unwrap();
    }

    #[test]
    fn divergence_examples() {
        let c = Chart::unit(&["x"], &[], &[]).unwrap();
        let g = BilinearForm::standard(&c, Signature::new(0, 1, 0)).unwrap();
        let conn = levi_civita(&g).unwrap();
        let frame = OspFrame::from_metric(&g).unwrap();
        let xdx = field(&c, vec![sf(&c, "x")]);
        assert!(divergence(&xdx, &g, &conn, &frame).unwrap().is_one());

        let c = Chart::unit(&[], &["th1", "th2"], &[]).unwrap();
        let g = BilinearForm::standard(&c, Signature::new(0, 0, 1)).unwrap();
        let conn = levi_civita(&g).unwrap();
        let frame = OspFrame::from_metric(&g).unwrap();
        let d1 = VectorField::coordinate(&c, 0);
        assert!(divergence(&d1, &g, &conn, &frame).unwrap().is_zero());
        let t1d1 = field(&c, vec![sf(&c, "th1"), c.zero()]);
        let a = divergence(&t1d1, &g, &conn, &frame).unwrap();
        let b = divergence_coordinate(&t1d1, &conn).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, int(&c, -1));
    }

    #[test]
    fn metric_supertrace_of_metric() {
        let c = Chart::unit(&["x", "y"], &["th1", "th2"], &[]).unwrap();
        let g = BilinearForm::standard(&c, Signature::new(0, 2, 1)).unwrap();
        let frame = OspFrame::from_metric(&g).unwrap();
        assert_eq!(str_with_metric(&g, &g, &frame).unwrap(), int(&c, 0));
        assert_eq!(str_with_metric_matrix(&g, &g).unwrap(), int(&c, 0));
        let zero = BilinearForm::zero(&c, Parity::Even);
        assert!(str_with_metric(&zero, &g, &frame).unwrap().is_zero());
    }
}
