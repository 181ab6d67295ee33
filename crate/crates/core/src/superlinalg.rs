//! Supermatrices over the superfunction ring.
//!
//! Rows and columns are indexed by a homogeneous basis whose first `p` vectors
//! are even and last `q` odd. A matrix acts on right coefficients,
//! `L e_j = Σ_i e_i L_ij`, so composition is the ordinary matrix product and a
//! homogeneous matrix of parity `|L|` has entries of parity `|L| + |i| + |j|`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, MetricViolation, Result};
use crate::grassmann::{GeneratorPool, Parity, Superfunction};
use crate::linear;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperMatrix {
    p: usize,
    q: usize,
    parity: Parity,
    rows: Vec<Vec<Superfunction>>,
    pool: Arc<GeneratorPool>,
}

/// Parity of the `i`-th basis vector in a `p|q` basis.
pub fn slot_parity(p: usize, i: usize) -> Parity {
    Parity::from_bit(i >= p)
}

impl SuperMatrix {
    /// Checks that every entry has the parity its position demands.
    pub fn new(p: usize, q: usize, parity: Parity, rows: Vec<Vec<Superfunction>>) -> Result<Self> {
        let n = p + q;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!("expected a {n}x{n} supermatrix")));
        }
        let pool = match rows.first().and_then(|r| r.first()) {
            Some(e) => e.pool().clone(),
            None => GeneratorPool::new(vec![], vec![])?,
        };
        for (i, row) in rows.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if !crate::grassmann::same_pool(e.pool(), &pool) {
                    return Err(Error::PoolMismatch);
                }
                if !e.has_parity(parity + slot_parity(p, i) + slot_parity(p, j)) {
                    return Err(Error::Inhomogeneous("supermatrix"));
                }
            }
        }
        Ok(SuperMatrix { p, q, parity, rows, pool })
    }

    /// Infers the parity from the entries; the zero matrix is even.
    pub fn from_rows(p: usize, q: usize, rows: Vec<Vec<Superfunction>>) -> Result<Self> {
        match Self::new(p, q, Parity::Even, rows.clone()) {
            Err(Error::Inhomogeneous(_)) => Self::new(p, q, Parity::Odd, rows),
            r => r,
        }
    }

    pub fn zeros(pool: &Arc<GeneratorPool>, p: usize, q: usize, parity: Parity) -> Self {
        let n = p + q;
        SuperMatrix {
            p,
            q,
            parity,
            rows: vec![vec![Superfunction::zero(pool); n]; n],
            pool: pool.clone(),
        }
    }

    pub fn identity(pool: &Arc<GeneratorPool>, p: usize, q: usize) -> Self {
        let mut m = Self::zeros(pool, p, q, Parity::Even);
        for i in 0..p + q {
            m.rows[i][i] = Superfunction::one(pool);
        }
        m
    }

    /// Constant matrix from integer entries.
    pub fn from_ints(pool: &Arc<GeneratorPool>, p: usize, q: usize, entries: &[&[i64]]) -> Result<Self> {
        let rows = entries
            .iter()
            .map(|r| r.iter().map(|&v| Superfunction::from_int(pool, v)).collect())
            .collect();
        Self::from_rows(p, q, rows)
    }

    pub fn pool(&self) -> &Arc<GeneratorPool> {
        &self.pool
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn size(&self) -> usize {
        self.p + self.q
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn slot_parity(&self, i: usize) -> Parity {
        slot_parity(self.p, i)
    }

    pub fn get(&self, i: usize, j: usize) -> &Superfunction {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<Superfunction>] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> Vec<Superfunction> {
        self.rows.iter().map(|r| r[j].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|e| e.is_zero())
    }

    fn check_shape(&self, o: &Self) -> Result<()> {
        if self.p != o.p || self.q != o.q {
            return Err(Error::DimensionMismatch(format!(
                "{}|{} vs {}|{}",
                self.p, self.q, o.p, o.q
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_shape(o)?;
        let rows = self
            .rows
            .iter()
            .zip(&o.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.checked_add(y)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        if self.is_zero() {
            return Ok(SuperMatrix { parity: o.parity, rows, ..self.clone() });
        }
        if !o.is_zero() && o.parity != self.parity {
            return Err(Error::Inhomogeneous("supermatrix sum"));
        }
        Ok(SuperMatrix { rows, ..self.clone() })
    }

    pub fn neg(&self) -> Self {
        SuperMatrix {
            rows: self.rows.iter().map(|r| r.iter().map(|e| -e).collect()).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check_shape(o)?;
        let n = self.size();
        let mut rows = vec![vec![Superfunction::zero(&self.pool); n]; n];
        for (i, out) in rows.iter_mut().enumerate() {
            for (j, slot) in out.iter_mut().enumerate() {
                let mut acc = Superfunction::zero(&self.pool);
                for k in 0..n {
                    acc = acc.checked_add(&self.rows[i][k].checked_mul(&o.rows[k][j])?)?;
                }
                *slot = acc;
            }
        }
        Ok(SuperMatrix { p: self.p, q: self.q, parity: self.parity + o.parity, rows, pool: self.pool.clone() })
    }

    /// `AB - (-1)^{|A||B|} BA`.
    pub fn supercommutator(&self, o: &Self) -> Result<Self> {
        let ab = self.mul(o)?;
        let ba = o.mul(self)?;
        if self.parity.koszul(o.parity) {
            ab.add(&ba)
        } else {
            ab.sub(&ba)
        }
    }

    /// `Σ_j (-1)^{|j|(|M|+1)} M_jj`.
    pub fn supertrace(&self) -> Superfunction {
        let mut acc = Superfunction::zero(&self.pool);
        for j in 0..self.size() {
            let flip = self.slot_parity(j).koszul(self.parity + Parity::Odd);
            acc = &acc + &self.rows[j][j].clone().negate_if(flip);
        }
        acc
    }

    /// Two-sided inverse by Gauss-Jordan elimination with unit pivots.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.size();
        let mut a = self.rows.clone();
        let mut inv = Self::identity(&self.pool, self.p, self.q).rows;
        for c in 0..n {
            let r = (c..n)
                .find(|&r| !a[r][c].body().is_zero())
                .ok_or_else(|| Error::NonInvertible("supermatrix body is singular".into()))?;
            a.swap(r, c);
            inv.swap(r, c);
            let pinv = a[c][c].invert()?;
            a[c] = a[c].iter().map(|e| &pinv * e).collect();
            inv[c] = inv[c].iter().map(|e| &pinv * e).collect();
            for r in 0..n {
                if r == c || a[r][c].is_zero() {
                    continue;
                }
                let f = a[r][c].clone();
                for k in 0..n {
                    let d = &f * &a[c][k];
                    a[r][k] = &a[r][k] - &d;
                    let d = &f * &inv[c][k];
                    inv[r][k] = &inv[r][k] - &d;
                }
            }
        }
        Ok(SuperMatrix { p: self.p, q: self.q, parity: self.parity, rows: inv, pool: self.pool.clone() })
    }

    fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Vec<Vec<Superfunction>> {
        self.rows[rows].iter().map(|r| r[cols.clone()].to_vec()).collect()
    }

    /// `Ber(M) = det(A - B D⁻¹ C) / det(D)`.
    pub fn berezinian(&self) -> Result<Superfunction> {
        if self.parity != Parity::Even {
            return Err(Error::Inhomogeneous("Berezinian of an odd supermatrix"));
        }
        let (p, q) = (self.p, self.q);
        let n = p + q;
        let a = self.block(0..p, 0..p);
        let b = self.block(0..p, p..n);
        let c = self.block(p..n, 0..p);
        let d = SuperMatrix::new(0, q, Parity::Even, self.block(p..n, p..n))?;
        let dinv = match d.inverse() {
            Ok(m) => m.rows,
            Err(_) => return Err(Error::NonInvertibleBlock),
        };
        let mut schur = a;
        for i in 0..p {
            for j in 0..p {
                let mut acc = Superfunction::zero(&self.pool);
                for k in 0..q {
                    for l in 0..q {
                        acc = &acc + &(&(&b[i][k] * &dinv[k][l]) * &c[l][j]);
                    }
                }
                schur[i][j] = &schur[i][j] - &acc;
            }
        }
        let num = det_commuting(schur, &self.pool);
        let den = det_commuting(d.rows, &self.pool);
        num.checked_div(&den)
    }

    /// `B(X, Y)` for a bilinear form with component matrix `self`, `B_ij = B(∂_i, ∂_j)`,
    /// and vectors given by left coefficients `X = Σ X^i ∂_i`.
    pub fn bilinear(&self, x: &[Superfunction], xp: Parity, y: &[Superfunction], yp: Parity) -> Superfunction {
        let bp = self.parity;
        let mut acc = Superfunction::zero(&self.pool);
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            let pi = self.slot_parity(i);
            let xsign = (xp + pi).koszul(bp);
            let mut inner = Superfunction::zero(&self.pool);
            for (j, yj) in y.iter().enumerate() {
                let bij = &self.rows[i][j];
                if yj.is_zero() || bij.is_zero() {
                    continue;
                }
                let ysign = (yp + self.slot_parity(j)).koszul(bp + pi);
                inner = &inner + &(yj * bij).negate_if(ysign);
            }
            acc = &acc + &(xi * &inner).negate_if(xsign);
        }
        acc
    }

    /// Row-major text with `|` between the even and odd column blocks.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, row) in self.rows.iter().enumerate() {
            if i == self.p && self.p > 0 && self.q > 0 {
                out.push_str("---\n");
            }
            out.push('[');
            for (j, e) in row.iter().enumerate() {
                if j == self.p && self.p > 0 {
                    out.push_str(" |");
                } else if j > 0 {
                    out.push(',');
                }
                out.push(' ');
                out.push_str(&e.render());
            }
            out.push_str(" ]\n");
        }
        out
    }
}

impl fmt::Display for SuperMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Determinant of a square matrix with pairwise commuting (even) entries.
pub fn det_commuting(mut m: Vec<Vec<Superfunction>>, pool: &Arc<GeneratorPool>) -> Superfunction {
    let n = m.len();
    if n == 0 {
        return Superfunction::one(pool);
    }
    if let Some(r) = (0..n).find(|&r| !m[r][0].body().is_zero()) {
        let negate = r != 0;
        m.swap(0, r);
        let pivot = m[0][0].clone();
        let pinv = pivot.invert().expect("unit pivot");
        let top = m[0].clone();
        let minor: Vec<Vec<Superfunction>> = m[1..]
            .iter()
            .map(|row| {
                let f = &row[0] * &pinv;
                (1..n).map(|k| &row[k] - &(&f * &top[k])).collect()
            })
            .collect();
        return (&pivot * &det_commuting(minor, pool)).negate_if(negate);
    }
    let mut acc = Superfunction::zero(pool);
    for r in 0..n {
        if m[r][0].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Superfunction>> = m
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != r)
            .map(|(_, row)| row[1..].to_vec())
            .collect();
        acc = &acc + &(&m[r][0] * &det_commuting(minor, pool)).negate_if(r % 2 == 1);
    }
    acc
}

/// Signature `(t, s | 2m)`: `t` timelike and `s` spacelike even directions, `2m` odd ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub t: usize,
    pub s: usize,
    pub m: usize,
}

impl Signature {
    pub fn new(t: usize, s: usize, m: usize) -> Self {
        Signature { t, s, m }
    }

    pub fn even_dim(&self) -> usize {
        self.t + self.s
    }

    pub fn odd_dim(&self) -> usize {
        2 * self.m
    }

    pub fn dim(&self) -> usize {
        self.even_dim() + self.odd_dim()
    }

    /// Sign `(g₀)_kk` of an even basis vector.
    fn even_sign(&self, k: usize) -> i64 {
        if k < self.t {
            -1
        } else {
            1
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{}|{})", self.t, self.s, 2 * self.m)
    }
}

/// `g₀ = diag(G_{t,s}, J_{2m})` with `J_2 = [[0,-1],[1,0]]`.
pub fn standard_metric(pool: &Arc<GeneratorPool>, sig: Signature) -> SuperMatrix {
    let n = sig.even_dim();
    let mut g = SuperMatrix::zeros(pool, n, sig.odd_dim(), Parity::Even);
    for k in 0..n {
        g.rows[k][k] = Superfunction::from_int(pool, sig.even_sign(k));
    }
    for l in 0..sig.m {
        let a = n + 2 * l;
        g.rows[a][a + 1] = Superfunction::from_int(pool, -1);
        g.rows[a + 1][a] = Superfunction::from_int(pool, 1);
    }
    g
}

/// Matrix of `J` in an OSp basis: column `k` holds the coefficients of `J e_k`.
pub fn j_map(pool: &Arc<GeneratorPool>, sig: Signature) -> SuperMatrix {
    let n = sig.even_dim();
    let mut j = SuperMatrix::zeros(pool, n, sig.odd_dim(), Parity::Even);
    for k in 0..n {
        j.rows[k][k] = Superfunction::from_int(pool, sig.even_sign(k));
    }
    for l in 0..sig.m {
        let a = n + 2 * l;
        j.rows[a + 1][a] = Superfunction::from_int(pool, 1);
        j.rows[a][a + 1] = Superfunction::from_int(pool, -1);
    }
    j
}

/// Index of the frame vector `J e_k` points along, with its sign.
pub fn j_image(sig: Signature, k: usize) -> (usize, i64) {
    let n = sig.even_dim();
    if k < n {
        (k, sig.even_sign(k))
    } else if (k - n) % 2 == 0 {
        (k + 1, 1)
    } else {
        (k - 1, -1)
    }
}

/// Whether `⟨Lv, w⟩ = -(-1)^{|L||v|} ⟨v, Lw⟩` on all pairs of standard basis vectors.
pub fn osp_algebra_check(l: &SuperMatrix, sig: Signature) -> Result<bool> {
    Ok(osp_residuals(l, sig)?.is_empty())
}

/// Nonzero values of `⟨L e_j, e_k⟩ + (-1)^{|L||e_j|} ⟨e_j, L e_k⟩`.
pub fn osp_residuals(l: &SuperMatrix, sig: Signature) -> Result<Vec<(usize, usize, Superfunction)>> {
    if l.dims() != (sig.even_dim(), sig.odd_dim()) {
        return Err(Error::DimensionMismatch(format!("{}|{} matrix vs signature {sig}", l.p, l.q)));
    }
    let g0 = standard_metric(l.pool(), sig);
    let n = l.size();
    let lp = l.parity();
    let mut out = Vec::new();
    for j in 0..n {
        for k in 0..n {
            let mut acc = Superfunction::zero(l.pool());
            for m in 0..n {
                let lmj = l.get(m, j);
                if !lmj.is_zero() {
                    let entry_parity = lp + l.slot_parity(m) + l.slot_parity(j);
                    let t = (g0.get(m, k) * lmj).negate_if(entry_parity.koszul(l.slot_parity(k)));
                    acc = &acc + &t;
                }
                let lmk = l.get(m, k);
                if !lmk.is_zero() {
                    let t = (g0.get(j, m) * lmk).negate_if(lp.koszul(l.slot_parity(j)));
                    acc = &acc + &t;
                }
            }
            if !acc.is_zero() {
                out.push((j, k, acc));
            }
        }
    }
    Ok(out)
}

/// Dimensions `(even, odd)` of the real orthosymplectic algebra, by solving its
/// defining linear constraints over ℚ.
pub fn osp_dimension(sig: Signature) -> (usize, usize) {
    let n = sig.dim();
    let p = sig.even_dim();
    let g0 = |i: usize, j: usize| -> i64 {
        if i < p {
            if i == j {
                sig.even_sign(i)
            } else {
                0
            }
        } else if j == i + 1 && (i - p) % 2 == 0 {
            -1
        } else if i == j + 1 && j >= p && (j - p) % 2 == 0 {
            1
        } else {
            0
        }
    };
    let count = |lp: Parity| -> usize {
        let slots: Vec<(usize, usize)> = (0..n)
            .flat_map(|m| (0..n).map(move |j| (m, j)))
            .filter(|&(m, j)| lp + slot_parity(p, m) + slot_parity(p, j) == Parity::Even)
            .collect();
        let col = |m: usize, j: usize| slots.iter().position(|&s| s == (m, j));
        let mut rows = Vec::new();
        for j in 0..n {
            for k in 0..n {
                let mut row = vec![0i64; slots.len()];
                for m in 0..n {
                    if let Some(c) = col(m, j) {
                        row[c] += g0(m, k);
                    }
                    if let Some(c) = col(m, k) {
                        let s = if lp.koszul(slot_parity(p, j)) { -1 } else { 1 };
                        row[c] += s * g0(j, m);
                    }
                }
                rows.push(row.into_iter().map(|v| BigRational::from_integer(BigInt::from(v))).collect());
            }
        }
        slots.len() - linear::rank(&rows, slots.len())
    };
    (count(Parity::Even), count(Parity::Odd))
}

/// Output of [`gram_schmidt_osp`]: column `k` of `frame` holds the left
/// coefficients of `e_k` in the original basis.
#[derive(Clone, Debug)]
pub struct OspBasis {
    pub frame: SuperMatrix,
    pub signature: Signature,
}

type Vector = Vec<Superfunction>;

fn scale_vec(f: &Superfunction, v: &[Superfunction]) -> Vector {
    v.iter().map(|e| f * e).collect()
}

fn sub_vec(a: &[Superfunction], b: &[Superfunction]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn add_vec(a: &[Superfunction], b: &[Superfunction]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Sign of the body of `f` at `point`.
fn body_sign(f: &Superfunction, point: &[BigRational]) -> Result<i64> {
    match f.body_at(point) {
        Some(v) if v.is_positive() => Ok(1),
        Some(v) if v.is_negative() => Ok(-1),
        _ => Err(MetricViolation::DegenerateAtSample.into()),
    }
}

/// Graded Gram-Schmidt over the scalar ring. `b` must be even and supersymmetric;
/// `sample` (default: the origin) decides the sign of each even pivot.
///
/// Even pivots are normalised by exact square roots, so a pivot such as `2`
/// fails with [`Error::NotASquare`]. Odd vectors are paired into `J_2` blocks
/// without square roots.
pub fn gram_schmidt_osp(b: &SuperMatrix, sample: Option<&[BigRational]>) -> Result<OspBasis> {
    if b.parity() != Parity::Even {
        return Err(MetricViolation::NotEven(0, 0).into());
    }
    let pool = b.pool().clone();
    let (p, q) = b.dims();
    if q % 2 == 1 {
        return Err(MetricViolation::OddDimension(q).into());
    }
    let origin = vec![BigRational::zero(); pool.num_even()];
    let point = sample.unwrap_or(&origin);
    let n = p + q;
    let unit = |i: usize| -> Vector {
        (0..n)
            .map(|k| if k == i { Superfunction::one(&pool) } else { Superfunction::zero(&pool) })
            .collect()
    };
    let mut even: Vec<Vector> = (0..p).map(unit).collect();
    let mut odd: Vec<Vector> = (p..n).map(unit).collect();
    let (ev, od) = (Parity::Even, Parity::Odd);

    let mut timelike = Vec::new();
    let mut spacelike = Vec::new();
    while !even.is_empty() {
        let pick = (0..even.len()).find(|&i| !b.bilinear(&even[i], ev, &even[i], ev).body().is_zero());
        let v = match pick {
            Some(i) => even.remove(i),
            None => {
                let u = even.remove(0);
                let w = (0..even.len())
                    .find(|&j| !b.bilinear(&u, ev, &even[j], ev).body().is_zero())
                    .ok_or(MetricViolation::Degenerate)?;
                add_vec(&u, &even[w])
            }
        };
        let norm = b.bilinear(&v, ev, &v, ev);
        let eps = body_sign(&norm, point)?;
        let root = norm.scale_int(eps).sqrt()?;
        let e = scale_vec(&root.invert()?, &v);
        for w in even.iter_mut() {
            let f = b.bilinear(&e, ev, w, ev).scale_int(eps);
            *w = sub_vec(w, &scale_vec(&f, &e));
        }
        for w in odd.iter_mut() {
            let f = b.bilinear(&e, ev, w, od).scale_int(eps);
            *w = sub_vec(w, &scale_vec(&f, &e));
        }
        if eps < 0 {
            timelike.push(e);
        } else {
            spacelike.push(e);
        }
    }

    let mut pairs = Vec::new();
    while !odd.is_empty() {
        let u = odd.remove(0);
        let w = (0..odd.len())
            .find(|&j| !b.bilinear(&u, od, &odd[j], od).body().is_zero())
            .ok_or(MetricViolation::Degenerate)?;
        let w = odd.remove(w);
        let c = b.bilinear(&u, od, &w, od);
        let e2 = scale_vec(&(-&c.invert()?), &w);
        let e1 = u;
        for x in odd.iter_mut() {
            let a1 = b.bilinear(&e2, od, x, od);
            let a2 = -&b.bilinear(&e1, od, x, od);
            *x = sub_vec(&sub_vec(x, &scale_vec(&a1, &e1)), &scale_vec(&a2, &e2));
        }
        pairs.push(e1);
        pairs.push(e2);
    }

    let signature = Signature::new(timelike.len(), spacelike.len(), q / 2);
    let cols: Vec<Vector> = timelike.into_iter().chain(spacelike).chain(pairs).collect();
    let rows = (0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
    let frame = SuperMatrix::new(p, q, Parity::Even, rows)?;
    Ok(OspBasis { frame, signature })
}
