//! Berezin integration over the chart box and the superharmonic action.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{validate_metric, BilinearForm, Chart};
use crate::grassmann::{same_pool, Superfunction};
use crate::morphism::MapGeometry;

/// `[d^n x d^m θ] · sqrt(|sdet h|)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolumeDensity {
    chart: Arc<Chart>,
    scale: Superfunction,
}

impl VolumeDensity {
    /// The flat density with scale factor 1.
    pub fn standard(chart: &Arc<Chart>) -> Self {
        VolumeDensity { chart: chart.clone(), scale: Superfunction::one(chart.pool()) }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn scale(&self) -> &Superfunction {
        &self.scale
    }
}

/// The absolute value is taken by the sign of the body at the chart's sample point.
pub fn volume_density(h: &BilinearForm) -> Result<VolumeDensity> {
    validate_metric(h)?;
    let chart = h.chart();
    let ber = h.matrix().berezinian()?;
    let body = ber
        .body_at(&chart.sample_point())
        .ok_or_else(|| Error::NonInvertible("Berezinian at the sample point".into()))?;
    let signed = if body.is_negative() { -&ber } else { ber };
    Ok(VolumeDensity { chart: chart.clone(), scale: signed.sqrt()? })
}

/// `∫_box berezin_top(scale · f) dx`, exact.
pub fn integrate(f: &Superfunction, vol: &VolumeDensity) -> Result<BigRational> {
    if !same_pool(f.pool(), vol.chart.pool()) {
        return Err(Error::ChartMismatch);
    }
    let top = vol.scale.checked_mul(f)?.berezin_top()?;
    if !top.denom().is_constant() {
        return Err(Error::NonPolynomialIntegrand);
    }
    let bounds = vol.chart.bounds();
    let mut total = BigRational::zero();
    for (exps, c) in top.numer().terms() {
        let mut t = c.clone();
        for (k, &e) in exps.iter().enumerate() {
            let (a, b) = &bounds[k];
            t *= integrate_power(a, b, e);
        }
        for (a, b) in bounds.iter().skip(exps.len()) {
            t *= b - a;
        }
        total += t;
    }
    Ok(total / top.denom().constant_value())
}

fn integrate_power(a: &BigRational, b: &BigRational, e: u32) -> BigRational {
    let n = e as usize + 1;
    let pw = |x: &BigRational| num_traits::pow(x.clone(), n);
    (pw(b) - pw(a)) / BigRational::from_integer(BigInt::from(n))
}

/// `A(Φ) = ½ ∫ dsvol_h str_h(Φ*g)`.
pub fn action(geo: &MapGeometry) -> Result<BigRational> {
    let vol = volume_density(&geo.source.g)?;
    let integrand = geo.source.str_with_metric(geo.pullback_metric())?;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    Ok(integrate(&integrand, &vol)? * half)
}
