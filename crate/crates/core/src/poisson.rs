//! Weil–Petersson Poisson bivector on X-charts, the 2-form on A-charts, their
//! tropical versions, and exact flip-invariance checks.
//!
//! Conventions: `{x^α, x^β} = ε^{αβ} x^α x^β` and
//! `ω(u, v) = Σ_{α,β} ε^{αβ} (u_α / a_α)(v_β / a_β)`. With these, pulling
//! the leafwise inverse of the bivector back along `p_map` gives `ω` with
//! factor 1.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::charts::{AChart, XChart};
use crate::semifield::{fmt_rat, rat_pow, PosRat};
use crate::surface::{EdgeId, EpsilonMatrix, Triangulation};
use crate::{Error, Result};

pub type RatMatrix = Vec<Vec<BigRational>>;

/// Laurent monomial `∏ x_e^{k_e}`.
pub type Monomial = BTreeMap<EdgeId, i64>;

fn zeros(r: usize, c: usize) -> RatMatrix {
    vec![vec![BigRational::zero(); c]; r]
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn mat_mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let (n, m, p) = (a.len(), b.len(), b.first().map_or(0, |r| r.len()));
    let mut out = zeros(n, p);
    for i in 0..n {
        for k in 0..m {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..p {
                out[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    out
}

pub fn transpose(a: &RatMatrix) -> RatMatrix {
    let (n, m) = (a.len(), a.first().map_or(0, |r| r.len()));
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

pub fn max_abs_diff(a: &RatMatrix, b: &RatMatrix) -> BigRational {
    let mut d = BigRational::zero();
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            let v = (x - y).abs();
            if v > d {
                d = v;
            }
        }
    }
    d
}

pub fn matrix_to_json(m: &RatMatrix) -> Value {
    json!(m.iter().map(|r| r.iter().map(fmt_rat).collect::<Vec<_>>()).collect::<Vec<_>>())
}

/// Skew coefficients indexed by `edges`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bivector {
    pub edges: Vec<EdgeId>,
    pub coeffs: RatMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    pub edges: Vec<EdgeId>,
    pub coeffs: RatMatrix,
}

fn eps_block(eps: &EpsilonMatrix, edges: &[EdgeId]) -> RatMatrix {
    edges.iter().map(|&a| edges.iter().map(|&b| q(eps.get(a, b) as i64)).collect()).collect()
}

impl Bivector {
    /// `P^{αβ} = ε^{αβ} x^α x^β` over the internal edges.
    pub fn x_type(c: &XChart<PosRat>) -> Self {
        let edges: Vec<EdgeId> = c.values().keys().copied().collect();
        let mut coeffs = eps_block(&c.tri().epsilon_matrix(), &edges);
        for (i, a) in edges.iter().enumerate() {
            for (j, b) in edges.iter().enumerate() {
                coeffs[i][j] = &coeffs[i][j] * c.get(*a) * c.get(*b);
            }
        }
        Bivector { edges, coeffs }
    }

    /// Constant `ε^{αβ}` in tropical coordinates.
    pub fn tropical(t: &Triangulation) -> Self {
        let edges = t.internal_edges();
        Bivector { coeffs: eps_block(&t.epsilon_matrix(), &edges), edges }
    }

    pub fn to_json(&self) -> Value {
        json!({"edges": self.edges, "coefficients": matrix_to_json(&self.coeffs)})
    }
}

impl TwoForm {
    /// `ω_{αβ} = ε^{αβ} / (a_α a_β)` over all edges.
    pub fn a_type(c: &AChart<PosRat>) -> Self {
        let edges: Vec<EdgeId> = (0..c.tri().n_edges()).collect();
        let mut coeffs = eps_block(&c.tri().epsilon_matrix(), &edges);
        for a in 0..edges.len() {
            for b in 0..edges.len() {
                coeffs[a][b] = &coeffs[a][b] / (c.get(a) * c.get(b));
            }
        }
        TwoForm { edges, coeffs }
    }

    pub fn tropical(t: &Triangulation) -> Self {
        let edges: Vec<EdgeId> = (0..t.n_edges()).collect();
        TwoForm { coeffs: eps_block(&t.epsilon_matrix(), &edges), edges }
    }

    pub fn to_json(&self) -> Value {
        json!({"edges": self.edges, "coefficients": matrix_to_json(&self.coeffs)})
    }
}

pub fn eval_monomial(c: &XChart<PosRat>, m: &Monomial) -> Result<BigRational> {
    let mut v = BigRational::one();
    for (&e, &k) in m {
        let x = c.values().get(&e).ok_or(Error::UnknownEdge(e))?;
        v *= rat_pow(x, k);
    }
    Ok(v)
}

/// `{f, g}` for monomials `f`, `g`, evaluated at `c`.
pub fn bracket(c: &XChart<PosRat>, f: &Monomial, g: &Monomial) -> Result<BigRational> {
    let eps = c.tri().epsilon_matrix();
    let mut s = 0i64;
    for (&a, &m) in f {
        for (&b, &n) in g {
            s += eps.get(a, b) as i64 * m * n;
        }
    }
    Ok(q(s) * eval_monomial(c, f)? * eval_monomial(c, g)?)
}

pub fn coordinate(e: EdgeId) -> Monomial {
    BTreeMap::from([(e, 1)])
}

/// Exponents of the hole invariant at `v`, over internal edges.
pub fn casimir_monomial(t: &Triangulation, v: usize) -> Monomial {
    t.internal_edges().into_iter().map(|e| (e, t.incidence(v, e) as i64)).filter(|&(_, k)| k != 0).collect()
}

/// Tangent vector generating the rescaling at `v`: `u_α = inc(v, α) · a_α`.
pub fn r_direction(c: &AChart<PosRat>, v: usize) -> Vec<BigRational> {
    (0..c.tri().n_edges()).map(|e| q(c.tri().incidence(v, e) as i64) * c.get(e)).collect()
}

pub fn evaluate_form(c: &AChart<PosRat>, u: &[BigRational], v: &[BigRational]) -> Result<BigRational> {
    let n = c.tri().n_edges();
    if u.len() != n || v.len() != n {
        return Err(Error::CountMismatch(format!("tangent vectors need {n} entries")));
    }
    let w = TwoForm::a_type(c);
    let mut s = BigRational::zero();
    for a in 0..n {
        for b in 0..n {
            if !w.coeffs[a][b].is_zero() {
                s += &w.coeffs[a][b] * &u[a] * &v[b];
            }
        }
    }
    Ok(s)
}

fn position(edges: &[EdgeId], e: EdgeId) -> usize {
    edges.iter().position(|&f| f == e).expect("edge present")
}

/// `J[i][j] = ∂x'_{new edges[i]} / ∂x_{edges[j]}` for the X-flip at `a`.
pub fn mutation_jacobian_x(c: &XChart<PosRat>, a: EdgeId) -> Result<RatMatrix> {
    let flip = c.tri().flip(a)?;
    let eps = c.tri().epsilon_matrix();
    let old: Vec<EdgeId> = c.values().keys().copied().collect();
    let mut new: Vec<EdgeId> = old.iter().map(|&e| flip.correspondence[e]).collect();
    new.sort();
    let n = old.len();
    let mut j = zeros(n, n);
    let xa = c.get(a);
    let ja = position(&old, a);
    for (jb, &b) in old.iter().enumerate() {
        let row = position(&new, flip.correspondence[b]);
        if b == a {
            j[row][ja] = -(xa * xa).recip();
            continue;
        }
        let e = eps.get(b, a) as i64;
        let xb = c.get(b);
        let one = BigRational::one();
        if e >= 0 {
            let base = &one + xa;
            j[row][jb] = rat_pow(&base, e);
            j[row][ja] = xb * q(e) * rat_pow(&base, e - 1);
        } else {
            let base = &one + xa.recip();
            j[row][jb] = rat_pow(&base, e);
            j[row][ja] = -(xb * q(e) * rat_pow(&base, e - 1)) / (xa * xa);
        }
    }
    Ok(j)
}

/// Jacobian of the A-flip at `a`, all edges, rows in new edge ids.
pub fn mutation_jacobian_a(c: &AChart<PosRat>, a: EdgeId) -> Result<RatMatrix> {
    let t = c.tri();
    let flip = t.flip(a)?;
    let eps = t.epsilon_matrix();
    let n = t.n_edges();
    let mut pos = BigRational::one();
    let mut neg = BigRational::one();
    for d in 0..n {
        let e = eps.get(a, d) as i64;
        if e > 0 {
            pos *= rat_pow(c.get(d), e);
        } else if e < 0 {
            neg *= rat_pow(c.get(d), -e);
        }
    }
    let aa = c.get(a);
    let mut j = zeros(n, n);
    for b in 0..n {
        let row = flip.correspondence[b];
        if b != a {
            j[row][b] = BigRational::one();
            continue;
        }
        j[row][a] = -(&pos + &neg) / (aa * aa);
        for d in 0..n {
            let e = eps.get(a, d) as i64;
            if d == a || e == 0 {
                continue;
            }
            let part = if e > 0 { &pos } else { &neg };
            j[row][d] += part * q(e.abs()) / (c.get(d) * aa);
        }
    }
    Ok(j)
}

/// Jacobian of the tropical X-flip at `a` on the half-space where
/// `𝗑_a` has sign `side` (±1).
pub fn mutation_jacobian_tropical(t: &Triangulation, a: EdgeId, side: i8) -> Result<RatMatrix> {
    let flip = t.flip(a)?;
    let eps = t.epsilon_matrix();
    let old = t.internal_edges();
    let mut new: Vec<EdgeId> = old.iter().map(|&e| flip.correspondence[e]).collect();
    new.sort();
    let n = old.len();
    let mut j = zeros(n, n);
    let ja = position(&old, a);
    for (jb, &b) in old.iter().enumerate() {
        let row = position(&new, flip.correspondence[b]);
        if b == a {
            j[row][ja] = q(-1);
            continue;
        }
        j[row][jb] = BigRational::one();
        // 𝗑_b + e·max(0, 𝗑_a) for e ≥ 0, 𝗑_b + e·max(0, -𝗑_a) otherwise
        let e = eps.get(b, a) as i64;
        let d = match (e >= 0, side > 0) {
            (true, true) => e,
            (false, false) => -e,
            _ => 0,
        };
        j[row][ja] += q(d);
    }
    Ok(j)
}

/// `max |J P Jᵀ - P'|` for the bivector pushed through the flip at `a`.
pub fn invariance_check_x(c: &XChart<PosRat>, a: EdgeId) -> Result<BigRational> {
    let j = mutation_jacobian_x(c, a)?;
    let p = Bivector::x_type(c);
    let pushed = mat_mul(&mat_mul(&j, &p.coeffs), &transpose(&j));
    let c2 = c.mutate(a)?;
    Ok(max_abs_diff(&pushed, &Bivector::x_type(&c2).coeffs))
}

/// `max |Jᵀ ω' J - ω|` for the 2-form pulled back through the flip at `a`.
pub fn invariance_check_a(c: &AChart<PosRat>, a: EdgeId) -> Result<BigRational> {
    let j = mutation_jacobian_a(c, a)?;
    let c2 = c.mutate(a)?;
    let w2 = TwoForm::a_type(&c2);
    let pulled = mat_mul(&mat_mul(&transpose(&j), &w2.coeffs), &j);
    Ok(max_abs_diff(&pulled, &TwoForm::a_type(c).coeffs))
}

/// Tropical bivector: both linearity domains, against `transform_epsilon`.
pub fn invariance_check_tropical(t: &Triangulation, a: EdgeId) -> Result<BigRational> {
    let p = Bivector::tropical(t);
    let p2 = Bivector::tropical(&t.flip(a)?.new);
    let mut worst = BigRational::zero();
    for side in [1, -1] {
        let j = mutation_jacobian_tropical(t, a, side)?;
        let d = max_abs_diff(&mat_mul(&mat_mul(&j, &p.coeffs), &transpose(&j)), &p2.coeffs);
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

/// Some solution of `m z = b`, if one exists.
pub fn solve(m: &RatMatrix, b: &[BigRational]) -> Option<Vec<BigRational>> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut aug: RatMatrix = m.iter().zip(b).map(|(r, x)| r.iter().cloned().chain([x.clone()]).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !aug[i][c].is_zero()) else { continue };
        aug.swap(r, p);
        let inv = aug[r][c].recip();
        for x in aug[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !aug[i][c].is_zero() {
                let f = aug[i][c].clone();
                for k in 0..=cols {
                    let v = &f * &aug[r][k];
                    aug[i][k] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if aug[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut z = vec![BigRational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        z[c] = aug[i][cols].clone();
    }
    Some(z)
}

/// `(ω(u, v), ω_X(dp u, dp v))` where `ω_X` is the leafwise inverse of the
/// bivector: `ω_X(P df, P dg) = dfᵀ P dg`. Requires no external edges.
pub fn p_map_compatibility(c: &AChart<PosRat>, u: &[BigRational], v: &[BigRational]) -> Result<(BigRational, BigRational)> {
    let t = c.tri();
    if !t.external_edges().is_empty() {
        return Err(Error::Unsupported("p_map compatibility is checked on closed surfaces".into()));
    }
    let lhs = evaluate_form(c, u, v)?;
    let x = c.p_map();
    let eps = t.epsilon_matrix();
    let edges: Vec<EdgeId> = x.values().keys().copied().collect();
    let n = t.n_edges();
    // dp[α][β] = -ε^{αβ} x^α / a_β
    let dp: RatMatrix =
        edges.iter().map(|&al| (0..n).map(|b| q(-(eps.get(al, b) as i64)) * x.get(al) / c.get(b)).collect()).collect();
    let push = |w: &[BigRational]| -> Vec<BigRational> { dp.iter().map(|r| r.iter().zip(w).map(|(a, b)| a * b).sum()).collect() };
    let (xi, eta) = (push(u), push(v));
    let p = Bivector::x_type(&x).coeffs;
    let df = solve(&p, &xi).ok_or_else(|| Error::DomainViolation("pushforward not tangent to the leaf".into()))?;
    let dg = solve(&p, &eta).ok_or_else(|| Error::DomainViolation("pushforward not tangent to the leaf".into()))?;
    let pdg: Vec<BigRational> = p.iter().map(|r| r.iter().zip(&dg).map(|(a, b)| a * b).sum()).collect();
    let rhs: BigRational = df.iter().zip(&pdg).map(|(a, b)| a * b).sum();
    Ok((lhs, rhs))
}
