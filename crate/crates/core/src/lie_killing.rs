//! Lie derivatives, the flow-free Killing characterizations and a degree-bounded
//! Killing solver.
//!
//! Three characterizations are checked independently: `L_X g = 0` (mode i), the
//! symmetrized covariant derivative (mode ii), and membership of the frame Lie
//! derivative in the orthosymplectic algebra (mode v).

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::{BilinearForm, Chart, MetricContext, OneForm, OspFrame, VectorField};
use crate::grassmann::{Parity, Superfunction};
use crate::linear;
use crate::poly::Polynomial;
use crate::ratfunc::RationalFunction;
use crate::superlinalg::{self, SuperMatrix};

/// `L_X f = X(f)`.
pub fn lie_derivative_function(x: &VectorField, f: &Superfunction) -> Result<Superfunction> {
    x.apply(f)
}

/// `(L_X F)[Y] = X(F[Y]) - (-1)^{|X||F|} F([X, Y])`, evaluated on coordinate fields.
pub fn lie_derivative_oneform(x: &VectorField, f: &OneForm) -> Result<OneForm> {
    let chart = x.chart();
    let flip = x.parity().koszul(f.parity());
    let comps = (0..chart.dim())
        .map(|i| {
            let d = VectorField::coordinate(chart, i);
            let a = x.apply(&f.components()[i])?;
            let b = f.eval(&x.bracket(&d)?)?.negate_if(flip);
            Ok(&a - &b)
        })
        .collect::<Result<Vec<_>>>()?;
    OneForm::new(chart, x.parity() + f.parity(), comps)
}

/// `(L_X B)(Y, Z) = X B(Y, Z) - B([X, Y], Z) - (-1)^{|X||Y|} B(Y, [X, Z])` on coordinate pairs.
pub fn lie_derivative_bilinear(x: &VectorField, b: &BilinearForm) -> Result<BilinearForm> {
    let chart = x.chart();
    if !crate::geometry::same_chart(chart, b.chart()) {
        return Err(Error::ChartMismatch);
    }
    let n = chart.dim();
    let coords: Vec<VectorField> = (0..n).map(|i| VectorField::coordinate(chart, i)).collect();
    let brackets = coords.iter().map(|d| x.bracket(d)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut v = x.apply(b.component(i, j))?;
            v = &v - &b.eval(&brackets[i], &coords[j])?;
            let t = b.eval(&coords[i], &brackets[j])?.negate_if(x.parity().koszul(chart.coord_parity(i)));
            v = &v - &t;
            row.push(v);
        }
        rows.push(row);
    }
    let (p, q) = chart.dims();
    BilinearForm::new(chart, SuperMatrix::new(p, q, x.parity() + b.parity(), rows)?)
}

/// `⟨∇_Y X, Z⟩ + (-1)^{|X||Y|+|X||Z|+|Y||Z|} ⟨∇_Z X, Y⟩` on coordinate pairs.
pub fn symmetrized_covariant(x: &VectorField, ctx: &MetricContext) -> Result<Vec<Vec<Superfunction>>> {
    let chart = ctx.chart();
    let n = chart.dim();
    let coords: Vec<VectorField> = (0..n).map(|i| VectorField::coordinate(chart, i)).collect();
    let nabla = coords.iter().map(|d| ctx.conn.covariant(d, x)).collect::<Result<Vec<_>>>()?;
    let xp = x.parity();
    let mut out = vec![vec![chart.zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let (pi, pj) = (chart.coord_parity(i), chart.coord_parity(j));
            let flip = xp.koszul(pi) ^ xp.koszul(pj) ^ pi.koszul(pj);
            let a = ctx.g.eval(&nabla[i], &coords[j])?;
            let b = ctx.g.eval(&nabla[j], &coords[i])?.negate_if(flip);
            out[i][j] = &a + &b;
        }
    }
    Ok(out)
}

/// Matrix `L` with `L_X e_i = Σ_m e_m L_mi`, in right coefficients.
pub fn frame_lie_matrix(x: &VectorField, frame: &OspFrame) -> Result<SuperMatrix> {
    let chart = frame.chart();
    let n = chart.dim();
    let (p, q) = chart.dims();
    let right = |v: &VectorField, k: usize| -> Superfunction {
        let c = v.component(k).clone();
        c.negate_if((v.parity() + chart.coord_parity(k)).koszul(chart.coord_parity(k)))
    };
    let e = frame.fields();
    let r_rows: Vec<Vec<Superfunction>> = (0..n).map(|k| (0..n).map(|m| right(&e[m], k)).collect()).collect();
    let r = SuperMatrix::new(p, q, Parity::Even, r_rows)?;
    let lx = e.iter().map(|ei| x.bracket(ei)).collect::<Result<Vec<_>>>()?;
    let v_rows: Vec<Vec<Superfunction>> = (0..n).map(|k| (0..n).map(|i| right(&lx[i], k)).collect()).collect();
    let v = SuperMatrix::new(p, q, x.parity(), v_rows)?;
    let l = r.inverse()?.mul(&v)?;
    // re-index into the frame's own block layout
    let sig = frame.signature();
    SuperMatrix::new(sig.even_dim(), sig.odd_dim(), x.parity(), l.rows().to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KillingMode {
    I,
    II,
    V,
}

impl KillingMode {
    pub const ALL: [KillingMode; 3] = [KillingMode::I, KillingMode::II, KillingMode::V];
}

impl fmt::Display for KillingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KillingMode::I => "i",
            KillingMode::II => "ii",
            KillingMode::V => "v",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ModeResult {
    pub mode: KillingMode,
    pub pass: bool,
    /// Nonzero residual entries, labelled by the coordinate or frame indices involved.
    pub residuals: Vec<(String, Superfunction)>,
}

#[derive(Clone, Debug)]
pub struct KillingReport {
    pub results: Vec<ModeResult>,
}

impl KillingReport {
    /// All evaluated modes return the same verdict.
    pub fn agree(&self) -> bool {
        self.results.windows(2).all(|w| w[0].pass == w[1].pass)
    }

    pub fn pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn mode(&self, m: KillingMode) -> Option<&ModeResult> {
        self.results.iter().find(|r| r.mode == m)
    }
}

fn pair_label(chart: &Chart, i: usize, j: usize) -> String {
    format!("({},{})", chart.coord_name(i), chart.coord_name(j))
}

pub fn killing_check(x: &VectorField, ctx: &MetricContext, modes: &[KillingMode]) -> Result<KillingReport> {
    let chart = ctx.chart();
    let n = chart.dim();
    let mut results = Vec::new();
    for &mode in modes {
        let residuals = match mode {
            KillingMode::I => {
                let l = lie_derivative_bilinear(x, &ctx.g)?;
                let mut r = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        if !l.component(i, j).is_zero() {
                            r.push((pair_label(chart, i, j), l.component(i, j).clone()));
                        }
                    }
                }
                r
            }
            KillingMode::II => {
                let s = symmetrized_covariant(x, ctx)?;
                let mut r = Vec::new();
                for (i, row) in s.into_iter().enumerate() {
                    for (j, v) in row.into_iter().enumerate() {
                        if !v.is_zero() {
                            r.push((pair_label(chart, i, j), v));
                        }
                    }
                }
                r
            }
            KillingMode::V => {
                let frame = ctx
                    .frame()
                    .map_err(|e| Error::Precondition(format!("mode v needs an OSp frame: {e}")))?;
                let l = frame_lie_matrix(x, frame)?;
                superlinalg::osp_residuals(&l, frame.signature())?
                    .into_iter()
                    .map(|(j, k, v)| (format!("(e{},e{})", j + 1, k + 1), v))
                    .collect()
            }
        };
        results.push(ModeResult { mode, pass: residuals.is_empty(), residuals });
    }
    Ok(KillingReport { results })
}

/// Basis of the polynomial Killing fields up to a degree bound.
#[derive(Clone, Debug)]
pub struct KillingBasis {
    pub degree: u32,
    pub even: Vec<VectorField>,
    pub odd: Vec<VectorField>,
    /// Ansatz coefficients of each basis field; rows are in `even ++ odd` order.
    pub coefficients: Vec<Vec<BigRational>>,
}

impl KillingBasis {
    pub fn dims(&self) -> (usize, usize) {
        (self.even.len(), self.odd.len())
    }

    pub fn fields(&self) -> impl Iterator<Item = &VectorField> {
        self.even.iter().chain(&self.odd)
    }

    /// Rank of the coefficient matrix of each parity; equal to the dimensions when the
    /// basis is linearly independent.
    pub fn rank_certificate(&self) -> (usize, usize) {
        let (e, _) = self.dims();
        let rank = |rows: &[Vec<BigRational>]| {
            let ncols = rows.first().map_or(0, |r| r.len());
            linear::rank(rows, ncols)
        };
        (rank(&self.coefficients[..e]), rank(&self.coefficients[e..]))
    }
}

impl KillingBasis {
    /// Pairs `(a, b)` of basis indices whose bracket leaves the span. A bracket lies in
    /// the span exactly when it is Killing and stays within the degree bound, since the
    /// basis spans every such field.
    pub fn closure_defects(&self, b: &BilinearForm) -> Result<Vec<(usize, usize)>> {
        let fields: Vec<&VectorField> = self.fields().collect();
        let mut out = Vec::new();
        for (a, x) in fields.iter().enumerate() {
            for (c, y) in fields.iter().enumerate().skip(a) {
                let z = x.bracket(y)?;
                let degree_ok = z.components().iter().all(|f| {
                    f.terms().all(|(_, r)| r.is_polynomial() && r.numer().total_degree() <= self.degree)
                });
                if !degree_ok || !lie_derivative_bilinear(&z, b)?.is_zero() {
                    out.push((a, c));
                }
            }
        }
        Ok(out)
    }
}

/// Exponent vectors of total degree at most `d`, by degree then lex.
fn monomials(nvars: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0; nvars]];
    let mut frontier = vec![vec![0u32; nvars]];
    for _ in 0..d {
        let mut next = Vec::new();
        for m in &frontier {
            let last = m.iter().rposition(|&e| e > 0).unwrap_or(0);
            for k in last..nvars {
                let mut e = m.clone();
                e[k] += 1;
                next.push(e);
            }
        }
        next.sort();
        next.dedup();
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Subsets of `mask`, by size then index order.
fn submasks(mask: u64) -> Vec<u64> {
    let bits: Vec<u32> = (0..64).filter(|b| mask & (1 << b) != 0).collect();
    let mut out: Vec<u64> = (0..1u64 << bits.len())
        .map(|s| bits.iter().enumerate().filter(|(i, _)| s & (1 << i) != 0).fold(0, |m, (_, b)| m | (1 << b)))
        .collect();
    out.sort_by_key(|&m| (m.count_ones(), (0..64).filter(|b| m & (1 << b) != 0).collect::<Vec<u32>>()));
    out
}

/// Killing fields of `g` with even-variable degree at most `degree`.
pub fn solve_killing(g: &BilinearForm, degree: u32) -> Result<KillingBasis> {
    crate::geometry::validate_metric(g)?;
    solve_lie_invariant(g, degree)
}

/// Polynomial vector fields with `L_X b = 0`, for any polynomial even form `b`.
pub fn solve_lie_invariant(b: &BilinearForm, degree: u32) -> Result<KillingBasis> {
    let chart = b.chart();
    let n = chart.dim();
    for i in 0..n {
        for j in 0..n {
            if !b.component(i, j).is_polynomial() {
                return Err(Error::UnsupportedMetric(format!(
                    "component {} has a denominator",
                    pair_label(chart, i, j)
                )));
            }
        }
    }
    let pool = chart.pool();
    let nev = pool.num_even();
    let monos = monomials(nev, degree);
    let masks = submasks(pool.coordinate_mask());
    let mut even = Vec::new();
    let mut odd = Vec::new();
    let mut coefficients = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        let mut unknowns: Vec<VectorField> = Vec::new();
        for k in 0..n {
            let want = parity + chart.coord_parity(k);
            for &mask in masks.iter().filter(|m| (m.count_ones() % 2 == 1) == want.is_odd()) {
                for e in &monos {
                    let coef = RationalFunction::from_poly(Polynomial::monomial(e.clone(), BigRational::one()));
                    let mut comps = vec![chart.zero(); n];
                    comps[k] = Superfunction::term(pool, mask, coef);
                    unknowns.push(VectorField::new(chart, parity, comps)?);
                }
            }
        }
        let ncols = unknowns.len();
        let mut rows: BTreeMap<(usize, usize, u64, Vec<u32>), Vec<BigRational>> = BTreeMap::new();
        for (col, u) in unknowns.iter().enumerate() {
            let l = lie_derivative_bilinear(u, b)?;
            for i in 0..n {
                for j in 0..n {
                    for (mask, c) in l.component(i, j).terms() {
                        for (exps, v) in c.numer().terms() {
                            let row = rows
                                .entry((i, j, mask, exps.clone()))
                                .or_insert_with(|| vec![BigRational::zero(); ncols]);
                            row[col] += v;
                        }
                    }
                }
            }
        }
        let rows: Vec<Vec<BigRational>> = rows.into_values().collect();
        for v in linear::nullspace(&rows, ncols) {
            let mut comps = vec![chart.zero(); n];
            for (c, u) in v.iter().zip(&unknowns) {
                if c.is_zero() {
                    continue;
                }
                for (k, uk) in u.components().iter().enumerate() {
                    if !uk.is_zero() {
                        comps[k] = &comps[k] + &uk.scale(c);
                    }
                }
            }
            let field = VectorField::new(chart, parity, comps)?;
            if parity == Parity::Even {
                even.push(field);
            } else {
                odd.push(field);
            }
            coefficients.push(v);
        }
    }
    Ok(KillingBasis { degree, even, odd, coefficients })
}
