//! Seeded generators and independent classical oracles shared by the integration tests.

#![allow(dead_code)]

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use supergeo::geometry::{BilinearForm, Chart, VectorField};
use supergeo::lie_killing::solve_killing;
use supergeo::superlinalg::{Signature, SuperMatrix};
use supergeo::{GeneratorPool, Parity, Polynomial, RationalFunction, Superfunction};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn small(rng: &mut ChaCha8Rng) -> BigRational {
    let mut v = 0;
    while v == 0 {
        v = rng.gen_range(-3..=3);
    }
    q(v, 1)
}

pub fn random_poly(rng: &mut ChaCha8Rng, nvars: usize, max_deg: u32, terms: usize) -> Polynomial {
    let mut p = Polynomial::zero(nvars);
    for _ in 0..terms {
        let mut exps = vec![0u32; nvars];
        let mut budget = rng.gen_range(0..=max_deg);
        while budget > 0 && nvars > 0 {
            exps[rng.gen_range(0..nvars)] += 1;
            budget -= 1;
        }
        p = p.add(&Polynomial::monomial(exps, small(rng)));
    }
    p
}

/// Masks over the odd generators of `pool` with the requested parity.
fn masks(pool: &GeneratorPool, parity: Parity, flesh: bool) -> Vec<u64> {
    let allowed = if flesh { pool.coordinate_mask() | pool.flesh_mask() } else { pool.coordinate_mask() };
    (0..1u64 << pool.num_odd())
        .filter(|m| m & !allowed == 0 && (m.count_ones() % 2 == 1) == parity.is_odd())
        .collect()
}

pub fn random_superfunction(
    rng: &mut ChaCha8Rng,
    pool: &Arc<GeneratorPool>,
    parity: Parity,
    max_deg: u32,
    flesh: bool,
) -> Superfunction {
    let ms = masks(pool, parity, flesh);
    let mut acc = Superfunction::zero(pool);
    if ms.is_empty() {
        return acc;
    }
    for _ in 0..rng.gen_range(1..=3) {
        let m = *ms.choose(rng).unwrap();
        let terms = rng.gen_range(1..=2);
        let c = random_poly(rng, pool.num_even(), max_deg, terms);
        acc = &acc + &Superfunction::term(pool, m, RationalFunction::from_poly(c));
    }
    acc
}

pub fn random_field(rng: &mut ChaCha8Rng, chart: &Arc<Chart>, parity: Parity, max_deg: u32) -> VectorField {
    let comps = (0..chart.dim())
        .map(|i| {
            if rng.gen_bool(0.3) {
                chart.zero()
            } else {
                random_superfunction(rng, chart.pool(), parity + chart.coord_parity(i), max_deg, false)
            }
        })
        .collect();
    VectorField::new(chart, parity, comps).unwrap()
}

/// Random integer combination of fields sharing a parity.
pub fn combination(rng: &mut ChaCha8Rng, fields: &[VectorField], parity: Parity) -> VectorField {
    let chart = fields[0].chart().clone();
    let mut acc = VectorField::zero(&chart, parity);
    for f in fields.iter().filter(|f| f.parity() == parity) {
        if rng.gen_bool(0.6) {
            acc = acc.add(&f.scale_rational(&small(rng))).unwrap();
        }
    }
    acc
}

pub fn flat(even: &[&str], odd: &[&str], t: usize) -> BilinearForm {
    let c = Chart::unit(even, odd, &[]).unwrap();
    let sig = Signature::new(t, even.len() - t, odd.len() / 2);
    BilinearForm::standard(&c, sig).unwrap()
}

/// `dx² + x² dy²` on the box `[1,2] × [0,1]`.
pub fn polar() -> BilinearForm {
    let pool = GeneratorPool::with_names(&["x", "y"], &[], &[]).unwrap();
    let c = Chart::new(pool, vec![(q(1, 1), q(2, 1)), (q(0, 1), q(1, 1))]).unwrap();
    let x = Superfunction::named(c.pool(), "x").unwrap();
    let one = Superfunction::one(c.pool());
    BilinearForm::from_rows(&c, vec![vec![one, c.zero()], vec![c.zero(), &x * &x]]).unwrap()
}

/// `(1 + θ₁θ₂) dx² ⊕ J₂` on `(0,1|2)`.
pub fn nilpotent() -> BilinearForm {
    let c = Chart::unit(&["x"], &["th1", "th2"], &[]).unwrap();
    let p = c.pool();
    let t12 = &Superfunction::named(p, "th1").unwrap() * &Superfunction::named(p, "th2").unwrap();
    let one = Superfunction::one(p);
    let z = c.zero();
    BilinearForm::from_rows(
        &c,
        vec![
            vec![&one + &t12, z.clone(), z.clone()],
            vec![z.clone(), z.clone(), -&one],
            vec![z.clone(), one.clone(), z],
        ],
    )
    .unwrap()
}

/// The three metrics of the Killing and Levi-Civita suites.
pub fn test_metrics() -> Vec<(&'static str, BilinearForm)> {
    vec![
        ("flat (0,2|2)", flat(&["x", "y"], &["th1", "th2"], 0)),
        ("dx^2 + x^2 dy^2", polar()),
        ("(1+th1 th2) dx^2 + J2", nilpotent()),
    ]
}

/// Killing fields of each test metric to mix into random samples: the polynomial
/// solver basis where it applies, `∂_y` for the curved metric.
pub fn known_killing(g: &BilinearForm) -> Vec<VectorField> {
    match solve_killing(g, 1) {
        Ok(b) => b.fields().cloned().collect(),
        Err(_) => vec![VectorField::coordinate(g.chart(), 1)],
    }
}

/// Dimension of the polynomial Killing algebra of flat `(t,s|2m)`: translations
/// plus `osp`, counted from the block description `so(n) ⊕ sp(2m)` and `n·2m`.
pub fn flat_killing_dims(n: usize, m: usize) -> (usize, usize) {
    (n + n * n.saturating_sub(1) / 2 + m * (2 * m + 1), 2 * m + n * 2 * m)
}

fn rf(p: Polynomial) -> RationalFunction {
    RationalFunction::from_poly(p)
}

/// Classical Christoffel symbols `½ g^{kl}(∂_i g_jl + ∂_j g_il - ∂_l g_ij)` of a
/// diagonal metric with rational-function entries, computed without the library's
/// connection code.
pub fn classical_christoffel_diagonal(diag: &[RationalFunction]) -> Vec<Vec<Vec<RationalFunction>>> {
    let n = diag.len();
    let nv = diag[0].nvars();
    let half = q(1, 2);
    let mut out = vec![vec![vec![RationalFunction::zero(nv); n]; n]; n];
    for k in 0..n {
        let inv = diag[k].recip().unwrap();
        for i in 0..n {
            for j in 0..n {
                let gjk = if j == k { diag[k].derivative(i) } else { RationalFunction::zero(nv) };
                let gik = if i == k { diag[k].derivative(j) } else { RationalFunction::zero(nv) };
                let gij = if i == j { diag[i].derivative(k) } else { RationalFunction::zero(nv) };
                out[k][i][j] = gjk.add(&gik).sub(&gij).mul(&inv).scale(&half);
            }
        }
    }
    out
}

/// Classical divergence `|g|^{-1/2} ∂_i(|g|^{1/2} X^i)` with a supplied `sqrt|g|`.
pub fn classical_divergence(sqrt_det: &RationalFunction, comps: &[RationalFunction]) -> RationalFunction {
    let nv = sqrt_det.nvars();
    let mut acc = RationalFunction::zero(nv);
    for (i, c) in comps.iter().enumerate() {
        acc = acc.add(&sqrt_det.mul(c).derivative(i));
    }
    acc.div(sqrt_det).unwrap()
}

pub fn poly_var(nv: usize, k: usize) -> RationalFunction {
    rf(Polynomial::var(nv, k))
}

pub fn random_supermatrix(
    rng: &mut ChaCha8Rng,
    pool: &Arc<GeneratorPool>,
    p: usize,
    qd: usize,
    parity: Parity,
    max_deg: u32,
) -> SuperMatrix {
    let n = p + qd;
    let slot = |i: usize| Parity::from_bit(i >= p);
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if rng.gen_bool(0.25) {
                        Superfunction::zero(pool)
                    } else {
                        random_superfunction(rng, pool, parity + slot(i) + slot(j), max_deg, false)
                    }
                })
                .collect()
        })
        .collect();
    SuperMatrix::new(p, qd, parity, rows).unwrap()
}

/// An even supermatrix with unit body on the diagonal, hence invertible.
pub fn random_invertible(rng: &mut ChaCha8Rng, pool: &Arc<GeneratorPool>, p: usize, qd: usize) -> SuperMatrix {
    let n = p + qd;
    let mut m = random_supermatrix(rng, pool, p, qd, Parity::Even, 1);
    let mut rows = m.rows().to_vec();
    for (i, row) in rows.iter_mut().enumerate().take(n) {
        for (j, e) in row.iter_mut().enumerate() {
            let soul = e.soul();
            *e = if i == j {
                &Superfunction::constant(pool, small(rng)) + &soul
            } else if rng.gen_bool(0.5) {
                e.clone()
            } else {
                soul
            };
        }
    }
    m = SuperMatrix::new(p, qd, Parity::Even, rows).unwrap();
    m
}

/// `g = Lᵀ g₀ L`-style random metric: `L` is upper triangular with nonzero integer
/// diagonal in the even block and identity on the odd block, plus nilpotent and odd
/// couplings above the diagonal. Gram-Schmidt then only meets square norms.
pub fn random_admissible_metric(rng: &mut ChaCha8Rng, chart: &Arc<Chart>, sig: Signature) -> BilinearForm {
    let pool = chart.pool();
    let (p, qd) = chart.dims();
    let n = p + qd;
    let slot = |i: usize| Parity::from_bit(i >= p);
    let mut l = vec![vec![Superfunction::zero(pool); n]; n];
    for i in 0..n {
        for j in 0..n {
            l[i][j] = if i == j {
                if i < p {
                    &Superfunction::constant(pool, small(rng)) + &random_superfunction(rng, pool, Parity::Even, 0, false).soul()
                } else {
                    Superfunction::one(pool)
                }
            } else if i < j {
                random_superfunction(rng, pool, slot(i) + slot(j), 1, false)
            } else {
                Superfunction::zero(pool)
            };
        }
    }
    let lm = SuperMatrix::new(p, qd, Parity::Even, l).unwrap();
    let g0 = supergeo::superlinalg::standard_metric(pool, sig);
    let mut rows = vec![vec![Superfunction::zero(pool); n]; n];
    for i in 0..n {
        for j in 0..n {
            rows[i][j] = g0.bilinear(&lm.column(i), slot(i), &lm.column(j), slot(j));
        }
    }
    BilinearForm::new(chart, SuperMatrix::new(p, qd, Parity::Even, rows).unwrap()).unwrap()
}
