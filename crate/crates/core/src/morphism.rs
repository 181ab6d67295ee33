//! Morphisms between charts, fields along maps, the pullback connection and the
//! harmonic map and Noether machinery.
//!
//! A morphism `Φ: M → N` is given by the pullbacks `φ♯(η^a)` of the target
//! coordinates. Flesh generators may appear in the pullbacks but the target chart
//! must be flesh-free. Fields along `Φ` carry left components `V^a = V(η^a)` in the
//! target's coordinate order, with coefficients living on the source.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{same_chart, BilinearForm, Chart, MetricContext, OneForm, OspFrame, VectorField};
use crate::grassmann::{same_pool, Parity, Superfunction, Var};
use crate::lie_killing::{killing_check, lie_derivative_bilinear, KillingMode};
use crate::poly::Polynomial;
use crate::superlinalg::SuperMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    source: Arc<Chart>,
    target: Arc<Chart>,
    images: Vec<Superfunction>,
}

impl Morphism {
    /// `images[a] = φ♯(η^a)`, one per target coordinate.
    pub fn new(source: &Arc<Chart>, target: &Arc<Chart>, images: Vec<Superfunction>) -> Result<Self> {
        if target.num_flesh() > 0 {
            return Err(Error::InvalidMorphism("target chart carries flesh generators".into()));
        }
        if images.len() != target.dim() {
            return Err(Error::InvalidMorphism(format!(
                "{} pullbacks for a target of dimension {}",
                images.len(),
                target.dim()
            )));
        }
        for (a, f) in images.iter().enumerate() {
            if !same_pool(f.pool(), source.pool()) {
                return Err(Error::PoolMismatch);
            }
            if !f.has_parity(target.coord_parity(a)) {
                return Err(Error::InvalidMorphism(format!(
                    "pullback of {} must be {}",
                    target.coord_name(a),
                    target.coord_parity(a)
                )));
            }
        }
        Ok(Morphism { source: source.clone(), target: target.clone(), images })
    }

    pub fn identity(chart: &Arc<Chart>) -> Result<Self> {
        let images = (0..chart.dim()).map(|i| chart.coordinate_function(i)).collect();
        Self::new(chart, chart, images)
    }

    pub fn source(&self) -> &Arc<Chart> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Chart> {
        &self.target
    }

    pub fn images(&self) -> &[Superfunction] {
        &self.images
    }

    /// `φ♯ f` by substitution; denominators are inverted after substitution.
    pub fn pullback(&self, f: &Superfunction) -> Result<Superfunction> {
        if !same_pool(f.pool(), self.target.pool()) {
            return Err(Error::ChartMismatch);
        }
        let tpool = self.target.pool();
        let mut odd_image = vec![None; tpool.num_odd()];
        let mut even_image = vec![None; tpool.num_even()];
        for (a, v) in self.target.coords().iter().enumerate() {
            match v {
                Var::Even(k) => even_image[*k] = Some(&self.images[a]),
                Var::Odd(k) => odd_image[*k] = Some(&self.images[a]),
            }
        }
        let even: Vec<&Superfunction> = even_image.into_iter().map(|e| e.expect("even coordinate")).collect();
        let mut acc = self.source.zero();
        for (mask, c) in f.terms() {
            let num = substitute(c.numer(), &even, &self.source);
            let den = substitute(c.denom(), &even, &self.source);
            let mut t = if c.denom().is_one() { num } else { num.checked_mul(&den.invert()?)? };
            let mut bits = mask;
            while bits != 0 {
                let k = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let img = odd_image[k].expect("flesh-free target");
                t = t.checked_mul(img)?;
            }
            acc = acc.checked_add(&t)?;
        }
        Ok(acc)
    }

    /// `dΦ[Y]^a = Y(φ♯ η^a)`.
    pub fn differential(&self, y: &VectorField) -> Result<FieldAlong> {
        if !same_chart(y.chart(), &self.source) {
            return Err(Error::ChartMismatch);
        }
        let comps = self.images.iter().map(|f| y.apply(f)).collect::<Result<Vec<_>>>()?;
        FieldAlong::new(self, y.parity(), comps)
    }

    /// `φ∘ξ` with components `φ♯(ξ^a)`.
    pub fn compose_field(&self, xi: &VectorField) -> Result<FieldAlong> {
        if !same_chart(xi.chart(), &self.target) {
            return Err(Error::ChartMismatch);
        }
        let comps = xi.components().iter().map(|c| self.pullback(c)).collect::<Result<Vec<_>>>()?;
        FieldAlong::new(self, xi.parity(), comps)
    }

    /// `V(f) = Σ_a V^a φ♯(∂_a f)` for a target function `f`.
    pub fn apply_along(&self, v: &FieldAlong, f: &Superfunction) -> Result<Superfunction> {
        let mut acc = self.source.zero();
        for (a, var) in self.target.coords().iter().enumerate() {
            if v.comps[a].is_zero() {
                continue;
            }
            let d = self.pullback(&f.partial(*var)?)?;
            acc = &acc + &(&v.comps[a] * &d);
        }
        Ok(acc)
    }

    /// Component matrix of a target form with entries pulled back to the source.
    pub fn pullback_matrix(&self, m: &SuperMatrix) -> Result<SuperMatrix> {
        let (p, q) = m.dims();
        let rows = m
            .rows()
            .iter()
            .map(|r| r.iter().map(|e| self.pullback(e)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        SuperMatrix::new(p, q, m.parity(), rows)
    }

    /// `(Φ*F)(∂_i) = F_Φ(dΦ[∂_i])`.
    pub fn pullback_oneform(&self, f: &OneForm) -> Result<OneForm> {
        let pulled = f.components().iter().map(|c| self.pullback(c)).collect::<Result<Vec<_>>>()?;
        let comps = (0..self.source.dim())
            .map(|i| {
                let v = self.differential(&VectorField::coordinate(&self.source, i))?;
                Ok(pair_oneform(&pulled, f.parity(), &v, &self.target, &self.source))
            })
            .collect::<Result<Vec<_>>>()?;
        OneForm::new(&self.source, f.parity() + Parity::Even, comps)
    }

    /// `(Φ*B)_ij = B_Φ(dΦ[∂_i], dΦ[∂_j])`.
    pub fn pullback_bilinear(&self, b: &BilinearForm) -> Result<BilinearForm> {
        let pulled = self.pullback_matrix(b.matrix())?;
        let cols = (0..self.source.dim())
            .map(|i| self.differential(&VectorField::coordinate(&self.source, i)))
            .collect::<Result<Vec<_>>>()?;
        pulled_form(&self.source, &pulled, &cols)
    }

    /// `eta1 -> x*x; ...`, one entry per target coordinate.
    pub fn render(&self) -> String {
        (0..self.target.dim())
            .map(|a| format!("{} -> {}", self.target.coord_name(a), self.images[a]))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn substitute(p: &Polynomial, even: &[&Superfunction], source: &Arc<Chart>) -> Superfunction {
    let pool = source.pool();
    let mut acc = source.zero();
    for (exps, c) in p.terms() {
        let mut t = Superfunction::constant(pool, c.clone());
        for (k, &e) in exps.iter().enumerate() {
            if e > 0 {
                t = &t * &even[k].pow(e);
            }
        }
        acc = &acc + &t;
    }
    acc
}

fn pair_oneform(f: &[Superfunction], fp: Parity, v: &FieldAlong, target: &Chart, source: &Chart) -> Superfunction {
    let mut acc = source.zero();
    for (a, (va, fa)) in v.comps.iter().zip(f).enumerate() {
        if va.is_zero() || fa.is_zero() {
            continue;
        }
        let flip = (v.parity + target.coord_parity(a)).koszul(fp);
        acc = &acc + &(va * fa).negate_if(flip);
    }
    acc
}

fn pulled_form(source: &Arc<Chart>, pulled: &SuperMatrix, cols: &[FieldAlong]) -> Result<BilinearForm> {
    let n = cols.len();
    let mut rows = vec![vec![source.zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            rows[i][j] = pulled.bilinear(&cols[i].comps, cols[i].parity, &cols[j].comps, cols[j].parity);
        }
    }
    let (p, q) = source.dims();
    BilinearForm::new(source, SuperMatrix::new(p, q, pulled.parity(), rows)?)
}

/// Homogeneous section of the pulled-back tangent bundle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldAlong {
    source: Arc<Chart>,
    target: Arc<Chart>,
    parity: Parity,
    comps: Vec<Superfunction>,
}

impl FieldAlong {
    pub fn new(phi: &Morphism, parity: Parity, comps: Vec<Superfunction>) -> Result<Self> {
        if comps.len() != phi.target.dim() {
            return Err(Error::DimensionMismatch("field along a map".into()));
        }
        for (a, c) in comps.iter().enumerate() {
            if !same_pool(c.pool(), phi.source.pool()) {
                return Err(Error::PoolMismatch);
            }
            if !c.has_parity(parity + phi.target.coord_parity(a)) {
                return Err(Error::Inhomogeneous("field along a map"));
            }
        }
        Ok(FieldAlong { source: phi.source.clone(), target: phi.target.clone(), parity, comps })
    }

    pub fn zero(phi: &Morphism, parity: Parity) -> Self {
        FieldAlong {
            source: phi.source.clone(),
            target: phi.target.clone(),
            parity,
            comps: vec![phi.source.zero(); phi.target.dim()],
        }
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn components(&self) -> &[Superfunction] {
        &self.comps
    }

    pub fn component(&self, a: usize) -> &Superfunction {
        &self.comps[a]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    fn check(&self, o: &FieldAlong) -> Result<()> {
        if !same_chart(&self.source, &o.source) || !same_chart(&self.target, &o.target) {
            return Err(Error::ChartMismatch);
        }
        Ok(())
    }

    pub fn add(&self, o: &FieldAlong) -> Result<FieldAlong> {
        self.check(o)?;
        let parity = if self.is_zero() {
            o.parity
        } else if o.is_zero() || o.parity == self.parity {
            self.parity
        } else {
            return Err(Error::Inhomogeneous("sum of fields along a map"));
        };
        let comps = self.comps.iter().zip(&o.comps).map(|(a, b)| a + b).collect();
        Ok(FieldAlong { parity, comps, ..self.clone() })
    }

    pub fn neg(&self) -> FieldAlong {
        FieldAlong { comps: self.comps.iter().map(|c| -c).collect(), ..self.clone() }
    }

    pub fn sub(&self, o: &FieldAlong) -> Result<FieldAlong> {
        self.add(&o.neg())
    }

    /// `f · V` for homogeneous `f`.
    pub fn scale(&self, f: &Superfunction) -> Result<FieldAlong> {
        let fp = f.parity().ok_or(Error::Inhomogeneous("scalar factor"))?;
        let comps = self.comps.iter().map(|c| f.checked_mul(c)).collect::<Result<Vec<_>>>()?;
        Ok(FieldAlong { parity: self.parity + fp, comps, ..self.clone() })
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self
            .comps
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(a, c)| format!("d_{}: {}", self.target.coord_name(a), c))
            .collect();
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join("; ")
        }
    }
}

impl fmt::Display for FieldAlong {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// A residual that a theorem or identity predicts to vanish.
#[derive(Clone, Debug)]
pub struct Residual {
    pub label: String,
    pub value: Superfunction,
    /// False when the hypotheses of the predicting statement fail for this input.
    pub required: bool,
}

impl Residual {
    fn new(label: impl Into<String>, value: Superfunction, required: bool) -> Self {
        Residual { label: label.into(), value, required }
    }
}

#[derive(Clone, Debug)]
pub struct NoetherReport {
    pub hypothesis: String,
    pub hypothesis_holds: bool,
    /// Nonzero entries of the hypothesis residual.
    pub hypothesis_residuals: Vec<(String, Superfunction)>,
    pub harmonic: bool,
    pub residuals: Vec<Residual>,
}

impl NoetherReport {
    /// Every residual whose hypotheses hold is zero.
    pub fn pass(&self) -> bool {
        self.residuals.iter().all(|r| !r.required || r.value.is_zero())
    }
}

/// Source and target geometry of a morphism with the pulled-back data cached.
#[derive(Clone, Debug)]
pub struct MapGeometry {
    pub phi: Morphism,
    pub source: MetricContext,
    pub target: MetricContext,
    pulled_g: SuperMatrix,
    pulled_gamma: Vec<Vec<Vec<Superfunction>>>,
    coord_images: Vec<FieldAlong>,
    pullback_metric: BilinearForm,
}

impl MapGeometry {
    pub fn new(phi: Morphism, h: &BilinearForm, g: &BilinearForm) -> Result<Self> {
        if !same_chart(h.chart(), phi.source()) || !same_chart(g.chart(), phi.target()) {
            return Err(Error::ChartMismatch);
        }
        let source = MetricContext::new(h)?;
        let target = MetricContext::new(g)?;
        let pulled_g = phi.pullback_matrix(g.matrix())?;
        let n = phi.target().dim();
        let mut pulled_gamma = vec![vec![Vec::with_capacity(n); n]; n];
        for (c, plane) in pulled_gamma.iter_mut().enumerate() {
            for (a, row) in plane.iter_mut().enumerate() {
                for b in 0..n {
                    row.push(phi.pullback(target.conn.christoffel(c, a, b))?);
                }
            }
        }
        let coord_images = (0..phi.source().dim())
            .map(|i| phi.differential(&VectorField::coordinate(phi.source(), i)))
            .collect::<Result<Vec<_>>>()?;
        let pullback_metric = pulled_form(phi.source(), &pulled_g, &coord_images)?;
        Ok(MapGeometry { phi, source, target, pulled_g, pulled_gamma, coord_images, pullback_metric })
    }

    pub fn source_chart(&self) -> &Arc<Chart> {
        self.phi.source()
    }

    pub fn differential(&self, y: &VectorField) -> Result<FieldAlong> {
        self.phi.differential(y)
    }

    /// `dΦ[∂_i]`.
    pub fn coordinate_image(&self, i: usize) -> &FieldAlong {
        &self.coord_images[i]
    }

    /// `⟨V, W⟩_{g_Φ}`.
    pub fn pairing(&self, v: &FieldAlong, w: &FieldAlong) -> Superfunction {
        self.pulled_g.bilinear(&v.comps, v.parity, &w.comps, w.parity)
    }

    /// `Φ*g`.
    pub fn pullback_metric(&self) -> &BilinearForm {
        &self.pullback_metric
    }

    /// `(∇_X V)^c = X(V^c) + Σ_{ab} (-1)^{|X||V^b|} V^b X(φ♯η^a) φ♯Γ^c_ab`.
    pub fn pull_covariant(&self, x: &VectorField, v: &FieldAlong) -> Result<FieldAlong> {
        let target = self.phi.target();
        let n = target.dim();
        let dx = self.phi.differential(x)?;
        let mut comps = Vec::with_capacity(n);
        for c in 0..n {
            let mut acc = x.apply(&v.comps[c])?;
            for b in 0..n {
                let vb = &v.comps[b];
                if vb.is_zero() {
                    continue;
                }
                let mut inner = self.source_chart().zero();
                for a in 0..n {
                    let (xa, gam) = (&dx.comps[a], &self.pulled_gamma[c][a][b]);
                    if xa.is_zero() || gam.is_zero() {
                        continue;
                    }
                    inner = &inner + &(xa * gam);
                }
                if inner.is_zero() {
                    continue;
                }
                let flip = x.parity().koszul(v.parity + target.coord_parity(b));
                acc = &acc + &(vb * &inner).negate_if(flip);
            }
            comps.push(acc);
        }
        FieldAlong::new(&self.phi, x.parity() + v.parity, comps)
    }

    /// `B_{X,Y} = ∇_X(dΦ[Y]) - dΦ[∇_X Y]`.
    pub fn second_fundamental_form(&self, x: &VectorField, y: &VectorField) -> Result<FieldAlong> {
        let a = self.pull_covariant(x, &self.phi.differential(y)?)?;
        let b = self.phi.differential(&self.source.conn.covariant(x, y)?)?;
        a.sub(&b)
    }

    /// `τ(Φ) = Σ_j B_{e_j, J e_j}` in the source's own frame.
    pub fn tension(&self) -> Result<FieldAlong> {
        self.tension_in_frame(self.source.frame()?)
    }

    pub fn tension_in_frame(&self, frame: &OspFrame) -> Result<FieldAlong> {
        if !same_chart(frame.chart(), self.source_chart()) {
            return Err(Error::FrameMismatch("frame lives on another chart".into()));
        }
        let mut acc = FieldAlong::zero(&self.phi, Parity::Even);
        for (j, e) in frame.fields().iter().enumerate() {
            acc = acc.add(&self.second_fundamental_form(e, &frame.j(j))?)?;
        }
        Ok(acc)
    }

    pub fn is_harmonic(&self) -> Result<bool> {
        Ok(self.tension()?.is_zero())
    }

    /// `div ξ = Σ_i (-1)^{|e_i||ξ|} ⟨∇_{e_i} ξ, dΦ[J e_i]⟩`.
    pub fn divergence_along(&self, xi: &FieldAlong) -> Result<Superfunction> {
        let frame = self.source.frame()?;
        let mut acc = self.source_chart().zero();
        for (i, e) in frame.fields().iter().enumerate() {
            let nab = self.pull_covariant(e, xi)?;
            let v = self.pairing(&nab, &self.phi.differential(&frame.j(i))?);
            acc = &acc + &v.negate_if(e.parity().koszul(xi.parity));
        }
        Ok(acc)
    }

    /// `W_ξ = Σ_j ⟨ξ, dΦ[e_j]⟩ J e_j`.
    pub fn noether_current(&self, xi: &FieldAlong) -> Result<VectorField> {
        let frame = self.source.frame()?;
        let chart = self.source_chart();
        let mut acc = VectorField::zero(chart, xi.parity);
        for (j, e) in frame.fields().iter().enumerate() {
            let c = self.pairing(xi, &self.phi.differential(e)?);
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&frame.j(j).scale(&c)?)?;
        }
        Ok(acc)
    }

    /// `div W_ξ - div ξ - ⟨ξ, τ⟩`.
    pub fn div_identity_residual(&self, xi: &FieldAlong) -> Result<Superfunction> {
        let tau = self.tension()?;
        let w = self.noether_current(xi)?;
        let lhs = self.source.divergence(&w)?;
        Ok(&(&lhs - &self.divergence_along(xi)?) - &self.pairing(xi, &tau))
    }

    /// Entries of `Φ*(L_ξ g)(∂_i, ∂_j)` minus its expression through `∇(φ∘ξ)`.
    pub fn pullback_lie_residuals(&self, xi: &VectorField) -> Result<Vec<(String, Superfunction)>> {
        let lhs = self.phi.pullback_bilinear(&lie_derivative_bilinear(xi, &self.target.g)?)?;
        let composed = self.phi.compose_field(xi)?;
        let chart = self.source_chart();
        let n = chart.dim();
        let nabla = (0..n)
            .map(|i| self.pull_covariant(&VectorField::coordinate(chart, i), &composed))
            .collect::<Result<Vec<_>>>()?;
        let xp = xi.parity();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let (pi, pj) = (chart.coord_parity(i), chart.coord_parity(j));
                let a = self.pairing(&nabla[i], &self.coord_images[j]).negate_if(xp.koszul(pi));
                let b = self
                    .pairing(&self.coord_images[i], &nabla[j])
                    .negate_if(xp.koszul(pi) ^ xp.koszul(pj));
                let r = &(lhs.component(i, j) - &a) - &b;
                if !r.is_zero() {
                    out.push((format!("({},{})", chart.coord_name(i), chart.coord_name(j)), r));
                }
            }
        }
        Ok(out)
    }

    /// Noether theorem for a target field `ξ`: Killing `ξ` gives `div(φ∘ξ) = 0`,
    /// and for harmonic `Φ` also `div W_{φ∘ξ} = 0`.
    pub fn noether_target(&self, xi: &VectorField) -> Result<NoetherReport> {
        let killing = killing_check(xi, &self.target, &[KillingMode::I])?;
        let mode = &killing.results[0];
        let harmonic = self.is_harmonic()?;
        let composed = self.phi.compose_field(xi)?;
        let mut residuals = vec![Residual::new("div(phi o xi)", self.divergence_along(&composed)?, mode.pass)];
        let w = self.noether_current(&composed)?;
        residuals.push(Residual::new("div W", self.source.divergence(&w)?, mode.pass && harmonic));
        residuals.push(Residual::new("div identity", self.div_identity_residual(&composed)?, true));
        let lemma = first_entry(self.source_chart(), self.pullback_lie_residuals(xi)?);
        residuals.push(Residual::new("pullback Lie lemma", lemma, true));
        Ok(NoetherReport {
            hypothesis: "L_xi g = 0".into(),
            hypothesis_holds: mode.pass,
            hypothesis_residuals: mode.residuals.clone(),
            harmonic,
            residuals,
        })
    }

    /// Noether theorem for a source field `ξ` with `L_ξ(Φ*g) = 0`.
    pub fn noether_domain(&self, xi: &VectorField) -> Result<NoetherReport> {
        let chart = self.source_chart();
        let l = lie_derivative_bilinear(xi, &self.pullback_metric)?;
        let hypothesis_residuals = nonzero_entries(chart, &l);
        let holds = hypothesis_residuals.is_empty();
        let harmonic = self.is_harmonic()?;
        let image = self.phi.differential(xi)?;
        let mut residuals = vec![Residual::new("div(dPhi[xi])", self.divergence_along(&image)?, holds)];
        let w = self.noether_current(&image)?;
        residuals.push(Residual::new("div W", self.source.divergence(&w)?, holds && harmonic));
        residuals.push(Residual::new("div identity", self.div_identity_residual(&image)?, true));
        Ok(NoetherReport {
            hypothesis: "L_xi (Phi* g) = 0".into(),
            hypothesis_holds: holds,
            hypothesis_residuals,
            harmonic,
            residuals,
        })
    }

    /// `e(Φ) = ½ str_h Φ*g`.
    pub fn energy_density(&self) -> Result<Superfunction> {
        let s = self.source.str_with_metric(&self.pullback_metric)?;
        Ok(s.scale(&half()))
    }

    /// `S = e(Φ) h - Φ*g`.
    pub fn stress_energy(&self) -> Result<BilinearForm> {
        let e = self.energy_density()?;
        self.source.g.scale_even(&e)?.sub(&self.pullback_metric)
    }

    /// `(∇_X S)(Y, Z) = X S(Y, Z) - S(∇_X Y, Z) - (-1)^{|X||Y|} S(Y, ∇_X Z)`.
    pub fn covariant_form(
        &self,
        s: &BilinearForm,
        x: &VectorField,
        y: &VectorField,
        z: &VectorField,
    ) -> Result<Superfunction> {
        let conn = &self.source.conn;
        let a = x.apply(&s.eval(y, z)?)?;
        let b = s.eval(&conn.covariant(x, y)?, z)?;
        let c = s.eval(y, &conn.covariant(x, z)?)?.negate_if(x.parity().koszul(y.parity()));
        Ok(&(&a - &b) - &c)
    }

    /// `div S[ξ] = Σ_i (-1)^{|e_i||ξ|} (∇_{e_i} S)(ξ, J e_i)`.
    pub fn form_divergence(&self, s: &BilinearForm, xi: &VectorField) -> Result<Superfunction> {
        let frame = self.source.frame()?;
        let mut acc = self.source_chart().zero();
        for (i, e) in frame.fields().iter().enumerate() {
            let v = self.covariant_form(s, e, xi, &frame.j(i))?;
            acc = &acc + &v.negate_if(e.parity().koszul(xi.parity()));
        }
        Ok(acc)
    }

    /// `Y_ξ = Σ_i S(ξ, e_i) J e_i`.
    pub fn stress_current(&self, s: &BilinearForm, xi: &VectorField) -> Result<VectorField> {
        let frame = self.source.frame()?;
        let mut acc = VectorField::zero(self.source_chart(), xi.parity());
        for (i, e) in frame.fields().iter().enumerate() {
            let c = s.eval(xi, e)?;
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&frame.j(i).scale(&c)?)?;
        }
        Ok(acc)
    }

    /// Stress-energy checks for a source field `ξ`: the divergence identity against
    /// the tension, the current identity, and conservation for Killing `ξ` and
    /// harmonic `Φ`.
    pub fn stress_check(&self, xi: &VectorField) -> Result<NoetherReport> {
        let chart = self.source_chart();
        let frame = self.source.frame()?;
        let s = self.stress_energy()?;
        let tau = self.tension()?;
        let harmonic = tau.is_zero();
        let lh = lie_derivative_bilinear(xi, &self.source.g)?;
        let hypothesis_residuals = nonzero_entries(chart, &lh);
        let killing = hypothesis_residuals.is_empty();

        let div_s = self.form_divergence(&s, xi)?;
        let r1 = &div_s + &self.pairing(&self.phi.differential(xi)?, &tau);

        let y = self.stress_current(&s, xi)?;
        let div_y = self.source.divergence(&y)?;
        let fields = frame.fields();
        let mut corr = chart.zero();
        for i in 0..fields.len() {
            for (j, ej) in fields.iter().enumerate() {
                let l = lh.eval(&fields[i], &frame.j(j))?;
                if l.is_zero() {
                    continue;
                }
                let t = &l * &s.eval(ej, &frame.j(i))?;
                corr = &corr + &t.negate_if(ej.parity().is_odd());
            }
        }
        let r2 = &(&div_y - &div_s) - &corr.scale(&half());
        Ok(NoetherReport {
            hypothesis: "L_xi h = 0".into(),
            hypothesis_holds: killing,
            hypothesis_residuals,
            harmonic,
            residuals: vec![
                Residual::new("div S[xi] + <dPhi[xi], tau>", r1, true),
                Residual::new("div Y - div S[xi] - correction", r2, true),
                Residual::new("div Y", div_y, killing && harmonic),
            ],
        })
    }
}

fn half() -> num_rational::BigRational {
    num_rational::BigRational::new(1.into(), 2.into())
}

fn nonzero_entries(chart: &Chart, b: &BilinearForm) -> Vec<(String, Superfunction)> {
    let n = chart.dim();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = b.component(i, j);
            if !v.is_zero() {
                out.push((format!("({},{})", chart.coord_name(i), chart.coord_name(j)), v.clone()));
            }
        }
    }
    out
}

/// The first nonzero entry, or zero when there is none.
fn first_entry(chart: &Chart, entries: Vec<(String, Superfunction)>) -> Superfunction {
    match entries.into_iter().next() {
        Some((_, v)) => v,
        None => chart.zero(),
    }
}
