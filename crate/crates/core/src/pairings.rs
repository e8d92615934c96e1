//! Additive, intersection and multiplicative pairings between Teichmüller
//! points and laminations, and symbolic traces.
//!
//! Lengths enter every additive value halved: a closed curve contributes
//! `½ℓ`, an arc contributes `log λ` where `λ` is its horocycle-truncated
//! exponential length. With this choice `log 𝕀(C·m)/C → ℐ(m)` and the
//! closed form `Σ 𝗑 log a` agree.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::charts::{integrality_predicates, AChart, VertexClass, XChart};
use crate::laminations::{a_coordinates, reconstruct_a, reconstruct_x, step_vertex, turn, CurvePath, NormalMulticurve};
use crate::laurent::LaurentPoly;
use crate::monodromy::{arc_path_a, build_rep_a, horocycle_distance, loop_monodromy_a, loop_monodromy_x, Mat2, PositiveValue};
use crate::semifield::{rat_to_f64, tropical_analogue_poly, PlFunction, PosFloat, Semifield, TropQ, TropZ};
use crate::surface::{Triangulation, VertexKind};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum PairingValue {
    /// ℐ or 𝖨.
    Real(f64),
    /// 𝕀 evaluated at a point.
    Positive(f64),
    /// 𝕀 as a function of the coordinates.
    Poly(LaurentPoly),
}

impl PairingValue {
    pub fn to_json(&self) -> Value {
        match self {
            PairingValue::Real(v) => json!({"kind": "additive", "value": v}),
            PairingValue::Positive(v) => json!({"kind": "multiplicative", "value": v}),
            PairingValue::Poly(p) => json!({"kind": "laurent", "terms": p.to_json()}),
        }
    }
}

fn lcm_of(vals: impl IntoIterator<Item = BigRational>) -> BigInt {
    vals.into_iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

fn to_tropz(c: &XChart<TropQ>, scale: &BigInt) -> Result<XChart<TropZ>> {
    let s = BigRational::from_integer(scale.clone());
    XChart::<TropZ>::new(c.tri().clone(), c.values().iter().map(|(&e, v)| (e, (v * &s).to_integer())).collect())
}

/// Half the signed length of a closed curve, or `log λ` of an arc, at an A point.
fn half_length_a<S: Semifield>(ma: &AChart<S>, c: &CurvePath) -> Result<f64>
where
    S::Elem: PositiveValue,
{
    if c.is_closed() {
        let m: Mat2<f64> = loop_monodromy_a(ma, c)?;
        Ok(half_length(m.trace()))
    } else {
        let g = build_rep_a::<S, f64>(ma)?;
        Ok(horocycle_distance(&g, &arc_path_a(ma.tri(), c)?)?.ln())
    }
}

fn half_length(tr: f64) -> f64 {
    let a = tr.abs();
    if a <= 2.0 {
        0.0
    } else {
        (a / 2.0).acosh()
    }
}

fn check_a0<S: Semifield>(ma: &AChart<S>) -> Result<()> {
    if !ma.in_a0() {
        return Err(Error::NotInA0("external edges must carry the identity".into()));
    }
    Ok(())
}

/// ℐ(𝗆ˣ, mᵃ). Uses `Σ 𝗑^α log a_α` when every coordinate is positive and
/// the curve decomposition otherwise.
pub fn additive_pairing<S: Semifield>(mx: &XChart<TropQ>, ma: &AChart<S>) -> Result<f64>
where
    S::Elem: PositiveValue,
{
    check_a0(ma)?;
    if mx.tri() != ma.tri() {
        return Err(Error::CountMismatch("charts on different triangulations".into()));
    }
    if mx.values().values().all(|v| v.is_positive()) {
        return Ok(additive_closed_form(mx, ma));
    }
    additive_by_curves(mx, ma)
}

pub fn additive_closed_form<S: Semifield>(mx: &XChart<TropQ>, ma: &AChart<S>) -> f64 {
    mx.values().iter().map(|(&e, x)| rat_to_f64(x) * S::to_f64(ma.get(e)).ln()).sum()
}

/// Weighted half lengths of the curves of an unbounded lamination.
pub fn additive_by_curves<S: Semifield>(mx: &XChart<TropQ>, ma: &AChart<S>) -> Result<f64>
where
    S::Elem: PositiveValue,
{
    let d = lcm_of(mx.values().values().cloned());
    let m = reconstruct_x(&to_tropz(mx, &d)?)?;
    let mut total = 0.0;
    for c in &m.components {
        total += rat_to_f64(&c.weight) * half_length_a(ma, c)?;
    }
    Ok(total / d.to_f64().unwrap_or(f64::INFINITY))
}

fn hole_of(t: &Triangulation, c: &CurvePath) -> Option<usize> {
    let first = c.steps.first()?;
    let v = step_vertex(t, first);
    let s0 = turn(first);
    let same = c.steps.iter().all(|s| turn(s) == s0 && step_vertex(t, s) == v);
    (same && c.is_closed() && t.vertices()[v].kind == VertexKind::Hole).then_some(v)
}

/// Solves `p(a) = x` for a positive A point, with the free logarithms set
/// from `free`.
pub fn a_lift(mx: &XChart<PosFloat>, free: &[f64]) -> Result<AChart<PosFloat>> {
    let t = mx.tri();
    let eps = t.epsilon_matrix();
    let n = t.n_edges();
    let rows: Vec<usize> = t.internal_edges();
    let mut m: Vec<Vec<f64>> = rows
        .iter()
        .map(|&a| {
            let mut r: Vec<f64> = (0..n).map(|b| -(eps.get(a, b) as f64)).collect();
            r.push(mx.get(a).ln());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..m.len()).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())) else { break };
        if m[p][col].abs() < 1e-12 {
            continue;
        }
        m.swap(row, p);
        let piv = m[row][col];
        for x in m[row].iter_mut() {
            *x /= piv;
        }
        for i in 0..m.len() {
            if i != row && m[i][col] != 0.0 {
                let f = m[i][col];
                for j in 0..=n {
                    m[i][j] -= f * m[row][j];
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if m[row..].iter().any(|r| r[n].abs() > 1e-9) {
        return Err(Error::Unsupported("the X point has no A lift".into()));
    }
    let mut logs = vec![0.0; n];
    let mut fi = 0;
    for (col, l) in logs.iter_mut().enumerate() {
        if !pivots.contains(&col) {
            *l = free.get(fi).copied().unwrap_or(0.0);
            fi += 1;
        }
    }
    for (r, &col) in pivots.iter().enumerate() {
        let mut v = m[r][n];
        for j in 0..n {
            if j != col && !pivots.contains(&j) {
                v -= m[r][j] * logs[j];
            }
        }
        logs[col] = v;
    }
    AChart::new(t.clone(), logs.iter().map(|l| l.exp()).collect(), false)
}

fn check_vanishing(t: &Triangulation, arcs: &[&CurvePath]) -> Result<()> {
    let mut w: BTreeMap<usize, BigRational> = BTreeMap::new();
    for c in arcs {
        for (s, side) in [(c.steps.first(), 1), (c.steps.last(), 2)] {
            if let Some(s) = s {
                let e = t.edge_at(s[0], s[side]);
                if !t.is_internal(e) {
                    *w.entry(e).or_insert_with(BigRational::zero) += &c.weight;
                }
            }
        }
    }
    match w.iter().find(|(_, v)| !v.is_zero()) {
        Some((e, v)) => Err(Error::VanishingPropertyViolated(format!("edge {e} carries weight {v}"))),
        None => Ok(()),
    }
}

fn arcs_half_length(ml: &NormalMulticurve, lift: &AChart<PosFloat>) -> Result<f64> {
    let g = build_rep_a::<PosFloat, f64>(lift)?;
    let mut total = 0.0;
    for c in ml.components.iter().filter(|c| !c.is_closed()) {
        total += rat_to_f64(&c.weight) * horocycle_distance(&g, &arc_path_a(lift.tri(), c)?)?.ln();
    }
    Ok(total)
}

/// ℐ(mˣ, 𝗆ᵃ) split into the closed part and the arc part, the latter
/// computed on two different A lifts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdditiveX {
    pub closed: f64,
    pub arcs: f64,
    pub arcs_second_lift: f64,
}

impl AdditiveX {
    pub fn value(&self) -> f64 {
        self.closed + self.arcs
    }
}

pub fn additive_pairing_x_detail(m_x: &XChart<crate::semifield::PosRat>, ms_a: &AChart<TropQ>) -> Result<AdditiveX> {
    let t = m_x.tri();
    if t != ms_a.tri() {
        return Err(Error::CountMismatch("charts on different triangulations".into()));
    }
    let ml = reconstruct_a(ms_a)?;
    let classes = m_x.classify_vertices();
    let mut closed = 0.0;
    for c in ml.components.iter().filter(|c| c.is_closed()) {
        let m: Mat2<f64> = loop_monodromy_x(m_x, c)?;
        let sign = match hole_of(t, c).map(|v| classes[v]) {
            Some(VertexClass::Hole(-1)) => -1.0,
            _ => 1.0,
        };
        closed += sign * rat_to_f64(&c.weight) * half_length(m.trace());
    }
    let arcs: Vec<&CurvePath> = ml.components.iter().filter(|c| !c.is_closed()).collect();
    if arcs.is_empty() {
        return Ok(AdditiveX { closed, arcs: 0.0, arcs_second_lift: 0.0 });
    }
    check_vanishing(t, &arcs)?;
    let fx = m_x.to_float();
    let first = a_lift(&fx, &[])?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let free: Vec<f64> = (0..t.n_edges()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let second = a_lift(&fx, &free)?;
    Ok(AdditiveX { closed, arcs: arcs_half_length(&ml, &first)?, arcs_second_lift: arcs_half_length(&ml, &second)? })
}

/// ℐ(mˣ, 𝗆ᵃ): `±½ℓ` for closed curves, negative around negatively oriented
/// holes, and horocycle-truncated lengths for arcs.
pub fn additive_pairing_x(m_x: &XChart<crate::semifield::PosRat>, ms_a: &AChart<TropQ>) -> Result<f64> {
    Ok(additive_pairing_x_detail(m_x, ms_a)?.value())
}

/// `|tr(Mᵏ)|` from `tr M`.
pub fn chebyshev_trace(tr: f64, k: u32) -> f64 {
    let (mut a, mut b) = (2.0, tr);
    if k == 0 {
        return 2.0;
    }
    for _ in 1..k {
        let c = tr * b - a;
        a = b;
        b = c;
    }
    b.abs()
}

fn integral_weight(c: &CurvePath) -> Result<u32> {
    if !c.weight.is_integer() {
        return Err(Error::NonIntegralLamination(format!("weight {}", c.weight)));
    }
    c.weight.to_integer().abs().to_u32().ok_or_else(|| Error::NonIntegralLamination("weight too large".into()))
}

/// 𝕀(𝗆ˣ, mᵃ) for an integral unbounded lamination.
pub fn multiplicative_pairing<S: Semifield>(mx: &XChart<TropQ>, ma: &AChart<S>) -> Result<f64>
where
    S::Elem: PositiveValue,
{
    check_a0(ma)?;
    if let Some(v) = mx.values().values().find(|v| !v.is_integer()) {
        return Err(Error::NonIntegralLamination(v.to_string()));
    }
    let m = reconstruct_x(&to_tropz(mx, &BigInt::one())?)?;
    let mut log_total = 0.0;
    for c in &m.components {
        let k = integral_weight(c)?;
        let sign = if c.weight.is_negative() { -1.0 } else { 1.0 };
        if c.is_closed() {
            let mm: Mat2<f64> = loop_monodromy_a(ma, c)?;
            log_total += sign * chebyshev_trace(mm.trace(), k).ln();
        } else {
            log_total += sign * k as f64 * half_length_a(ma, c)?;
        }
    }
    Ok(log_total.exp())
}

/// 𝕀(mˣ, 𝗆ᵃ) for an integral bounded lamination.
pub fn mult_pairing_x(m_x: &XChart<crate::semifield::PosRat>, ms_a: &AChart<TropQ>) -> Result<f64> {
    if !integrality_predicates(ms_a).is_integral {
        return Err(Error::NonIntegralLamination("coordinates fail the integrality test".into()));
    }
    let t = m_x.tri();
    let ml = reconstruct_a(ms_a)?;
    let classes = m_x.classify_vertices();
    let mut log_total = 0.0;
    for c in ml.components.iter().filter(|c| c.is_closed()) {
        let k = integral_weight(c)?;
        let sign = if c.weight.is_negative() { -1.0 } else { 1.0 };
        let m: Mat2<f64> = loop_monodromy_x(m_x, c)?;
        let tr = m.trace().abs();
        let v = match hole_of(t, c).map(|v| classes[v]) {
            Some(VertexClass::Hole(o)) => {
                let big = (tr + (tr * tr - 4.0).max(0.0).sqrt()) / 2.0;
                let ev = if o > 0 { big } else { 1.0 / big };
                ev.powi(k as i32)
            }
            _ => chebyshev_trace(tr, k),
        };
        log_total += sign * v.ln();
    }
    let d = additive_pairing_x_detail(m_x, ms_a)?;
    Ok((log_total + d.arcs).exp())
}

type PolyMat = [[LaurentPoly; 2]; 2];

fn poly_mat_mul(a: &PolyMat, b: &PolyMat) -> PolyMat {
    let e = |i: usize, j: usize| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// Trace of the `k`-th power of the loop monodromy in the normal form
/// `∏ E^± H(x)`, as a Laurent polynomial in `x^{1/2}` over the internal
/// edges (variable `i` is the `i`-th internal edge).
pub fn symbolic_trace(t: &Triangulation, curve: &CurvePath, k: u32) -> Result<LaurentPoly> {
    if !curve.is_closed() {
        return Err(Error::OpenCurve);
    }
    curve.validate(t)?;
    let c = curve.reduce();
    let internal = t.internal_edges();
    let n = internal.len();
    let pos: BTreeMap<usize, usize> = internal.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let zero = LaurentPoly::zero(n);
    let one = LaurentPoly::one(n);
    let mut m: PolyMat = [[one.clone(), zero.clone()], [zero.clone(), one.clone()]];
    for s in &c.steps {
        // J·I = -E⁻ and J·I⁻¹ = E⁺
        let [[a, b], [cc, d]] = m;
        m = if turn(s) > 0 { [[&a + &b, b], [&cc + &d, d]] } else { [[a.clone(), &a + &b], [cc.clone(), &cc + &d]] };
        let i = *pos.get(&t.edge_at(s[0], s[2])).ok_or(Error::ExternalEdge(t.edge_at(s[0], s[2])))?;
        let up = LaurentPoly::var_half(n, i, 1);
        let down = LaurentPoly::var_half(n, i, -1);
        m = [[&m[0][0] * &up, &m[0][1] * &down], [&m[1][0] * &up, &m[1][1] * &down]];
    }
    let mut p: PolyMat = [[one.clone(), zero.clone()], [zero, one]];
    for _ in 0..k {
        p = poly_mat_mul(&p, &m);
    }
    Ok(&p[0][0] + &p[1][1])
}

/// 𝕀 of a bounded lamination made of closed curves, as a Laurent polynomial.
pub fn lamination_trace(ms_a: &AChart<TropQ>) -> Result<LaurentPoly> {
    let t = ms_a.tri();
    let ml = reconstruct_a(ms_a)?;
    let mut acc = LaurentPoly::one(t.internal_edges().len());
    for c in &ml.components {
        if !c.is_closed() || c.weight.is_negative() {
            return Err(Error::Unsupported("symbolic traces of arcs".into()));
        }
        acc = &acc * &symbolic_trace(t, c, integral_weight(c)?)?;
    }
    Ok(acc)
}

pub fn tropical_of_trace(p: &LaurentPoly) -> Result<PlFunction> {
    tropical_analogue_poly(p)
}

/// Largest `|trop(𝕀_𝗆ᵃ)(𝗑) - 𝖨(𝗑, 𝗆ᵃ)|` over the given integral X charts.
pub fn compare_with_intersection(ms_a: &AChart<TropQ>, charts: &[XChart<TropZ>]) -> Result<BigRational> {
    let f = tropical_of_trace(&lamination_trace(ms_a)?)?;
    let ma = reconstruct_a(ms_a)?;
    let mut worst = BigRational::zero();
    for c in charts {
        let mx = reconstruct_x(c)?;
        let i = crate::laminations::intersection_number(&mx, &ma)?;
        let x: Vec<BigRational> = c.values().values().map(|v| BigRational::from_integer(v.clone())).collect();
        worst = worst.max((f.eval(&x) - i).abs());
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// Sign of `rhs - lhs`, zero within `1e-9`.
    pub direction: i8,
}

/// Both sides of `ℐ(m, 𝗆₁) + ℐ(m, 𝗆₂)` against `ℐ(m, 𝗆₁ + 𝗆₂)`.
pub fn convexity_probe(m_x: &XChart<crate::semifield::PosRat>, ma1: &AChart<TropQ>, ma2: &AChart<TropQ>) -> Result<ConvexityReport> {
    let sum: Vec<BigRational> = ma1.values().iter().zip(ma2.values()).map(|(a, b)| a + b).collect();
    let m12 = AChart::<TropQ>::new(ma1.tri().clone(), sum, false)?;
    let lhs = additive_pairing_x(m_x, ma1)? + additive_pairing_x(m_x, ma2)?;
    let rhs = additive_pairing_x(m_x, &m12)?;
    let d = rhs - lhs;
    let direction = if d.abs() <= 1e-9 { 0 } else if d > 0.0 { 1 } else { -1 };
    Ok(ConvexityReport { lhs, rhs, direction })
}

/// Whether the trace of `curve` has integral exponents, next to the
/// evenness of its A lamination.
pub fn evenness_check(t: &Triangulation, curve: &CurvePath, k: u32) -> Result<(bool, bool)> {
    let p = symbolic_trace(t, curve, k)?;
    let c = curve.with_weight(BigRational::from_integer(BigInt::from(k)));
    let even = integrality_predicates(&a_coordinates(t, &[c])?).is_even;
    Ok((p.has_integer_exponents(), even))
}

/// Doubled crossing numbers of `curve` repeated `k` times, over the internal edges.
pub fn expected_extremes(t: &Triangulation, curve: &CurvePath, k: u32) -> Result<Vec<i64>> {
    let c = curve.with_weight(BigRational::from_integer(BigInt::from(k)));
    let a = a_coordinates(t, &[c])?;
    let two = BigRational::from_integer(BigInt::from(2));
    Ok(t.internal_edges().iter().map(|&e| (a.get(e) * &two).to_integer().to_i64().unwrap_or(i64::MAX)).collect())
}

/// Value of a chart at the loop monodromy, for cross-checks against the
/// symbolic trace.
pub fn numeric_trace<S: Semifield>(c: &XChart<S>, curve: &CurvePath, k: u32) -> Result<f64>
where
    S::Elem: PositiveValue,
{
    let m: Mat2<f64> = loop_monodromy_x(c, curve)?;
    Ok(chebyshev_trace(m.trace(), k))
}

/// Every closed dual-graph word of length at most `max_len`, one per
/// starting port and turn sequence.
pub fn closed_words(t: &Triangulation, max_len: usize) -> Vec<CurvePath> {
    let mut out = Vec::new();
    for t0 in 0..t.n_triangles() {
        for in0 in 0..3 {
            if t.partner(t0, in0).is_none() {
                continue;
            }
            let mut stack: Vec<(Vec<[usize; 3]>, usize, usize)> = vec![(Vec::new(), t0, in0)];
            while let Some((w, tt, k)) = stack.pop() {
                if !w.is_empty() && (tt, k) == (t0, in0) {
                    out.push(CurvePath::closed(w.clone(), BigRational::one()));
                }
                if w.len() == max_len {
                    continue;
                }
                for out_side in [crate::surface::next3(k), crate::surface::prev3(k)] {
                    if let Some((u, j)) = t.partner(tt, out_side) {
                        let mut w2 = w.clone();
                        w2.push([tt, k, out_side]);
                        stack.push((w2, u, j));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminations::{torus_slope_chart, torus_slope_curve};
    use crate::monodromy::vertex_curve;
    use crate::semifield::{int, rat, PosRat};
    use crate::surface::SurfaceSig;

    fn torus() -> Triangulation {
        Triangulation::punctured_torus()
    }

    fn torus_x(v: [i64; 3]) -> XChart<TropQ> {
        XChart::from_rationals(&torus(), &v.map(int)).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    fn random_pos_x(t: &Triangulation, rng: &mut ChaCha8Rng) -> XChart<PosRat> {
        let v: Vec<BigRational> = t.internal_edges().iter().map(|_| rat(rng.gen_range(1..9), rng.gen_range(1..9))).collect();
        XChart::from_rationals(t, &v).unwrap()
    }

    #[test]
    fn slope_one_zero_trace() {
        let t = torus();
        let c = torus_slope_curve(1, 0).unwrap();
        let p = symbolic_trace(&t, &c.components[0], 1).unwrap();
        assert_eq!(p.to_string(), "1*x0^(1/2)*x2^(1/2) + 1*x0^(1/2)*x2^(-1/2) + 1*x0^(-1/2)*x2^(-1/2)");
        assert_eq!(p.eval_ones(), BigInt::from(3));
        assert!(matches!(symbolic_trace(&t, &CurvePath::open(vec![], crate::laminations::End::Boundary, crate::laminations::End::Boundary, int(1)), 1), Err(Error::OpenCurve)));
    }

    #[test]
    fn symbolic_matches_numeric() {
        let t = torus();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let words = closed_words(&t, 6);
        assert!(words.len() > 100);
        for w in words.iter().step_by(5) {
            let c = random_pos_x(&t, &mut rng);
            let xs: Vec<f64> = c.values().values().map(rat_to_f64).collect();
            for k in 1..3 {
                let p = symbolic_trace(&t, w, k).unwrap();
                assert!(close(p.eval_f64(&xs), numeric_trace(&c, w, k).unwrap(), 1e-9));
            }
        }
    }

    #[test]
    fn positivity_extremes_evenness() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let disc = Triangulation::disc_fan(7).unwrap();
        // the dual graph of a disc is a tree
        assert!(closed_words(&disc, 8).is_empty());
        let annulus = Triangulation::random(&SurfaceSig::new(0, vec![2, 1]), &mut rng, 6).unwrap();
        for (t, len) in [(torus(), 8), (annulus, 8)] {
            for w in closed_words(&t, len) {
                for k in 1..3 {
                    let p = symbolic_trace(&t, &w, k).unwrap();
                    assert!(p.all_coefficients_positive());
                    let hi = expected_extremes(&t, &w, k).unwrap();
                    let lo: Vec<i64> = hi.iter().map(|x| -x).collect();
                    assert_eq!(p.exponent_box(), Some((hi.clone(), lo.clone())));
                    assert_eq!(p.coefficient(&hi), BigInt::one());
                    assert_eq!(p.coefficient(&lo), BigInt::one());
                    let (integral, even) = evenness_check(&t, &w, k).unwrap();
                    assert_eq!(integral, even);
                }
            }
        }
    }

    #[test]
    fn closed_form_agrees_with_curves() {
        let t = torus();
        let ma = AChart::<PosRat>::from_rationals(&t, &[int(2), int(3), rat(5, 7)]).unwrap();
        for v in [[1, 1, 1], [1, 2, 3], [0, 1, 0], [2, 0, 1]] {
            let mx = torus_x(v);
            assert!(close(additive_closed_form(&mx, &ma), additive_by_curves(&mx, &ma).unwrap(), 1e-12));
        }
        let q = Triangulation::disc_fan(4).unwrap();
        let ie = q.internal_edges()[0];
        let ma = AChart::<PosRat>::new(q.clone(), (0..q.n_edges()).map(|e| if e == ie { int(3) } else { int(1) }).collect(), false).unwrap();
        let plus = XChart::<TropQ>::from_rationals(&q, &[int(1)]).unwrap();
        assert!(close(additive_pairing(&plus, &ma).unwrap(), 3f64.ln(), 1e-12));
        // the opposite lamination is the other diagonal, (1·1 + 1·1)/3
        let minus = XChart::<TropQ>::from_rationals(&q, &[int(-1)]).unwrap();
        assert!(close(additive_pairing(&minus, &ma).unwrap(), (2.0f64 / 3.0).ln(), 1e-12));
        let bad = AChart::<PosRat>::from_rationals(&q, &vec![int(2); q.n_edges()]).unwrap();
        assert!(matches!(additive_pairing(&plus, &bad), Err(Error::NotInA0(_))));
    }

    #[test]
    fn additive_basics() {
        let t = torus();
        let ma = AChart::<PosRat>::from_rationals(&t, &[int(2), int(3), rat(5, 7)]).unwrap();
        assert_eq!(additive_pairing(&torus_x([0, 0, 0]), &ma).unwrap(), 0.0);
        for v in [[1, -1, 0], [2, -1, -1], [1, 2, -1]] {
            let one = additive_pairing(&torus_x(v), &ma).unwrap();
            for u in [rat(1, 2), int(3)] {
                let scaled = torus_x(v).scale(&u).unwrap();
                assert!(close(additive_pairing(&scaled, &ma).unwrap(), rat_to_f64(&u) * one, 1e-9));
            }
        }
    }

    #[test]
    fn additive_x_values() {
        let t = torus();
        let ones = XChart::<PosRat>::ones(&t);
        let v = additive_pairing_x(&ones, &torus_slope_chart(1, 0)).unwrap();
        assert!(close(v, 0.9624236501192069, 1e-12));
        let two = torus_slope_chart(1, 0).scale(&int(2)).unwrap();
        assert!(close(additive_pairing_x(&ones, &two).unwrap(), 2.0 * v, 1e-12));
        let zero = AChart::<TropQ>::from_rationals(&t, &vec![int(0); 3]).unwrap();
        assert_eq!(additive_pairing_x(&ones, &zero).unwrap(), 0.0);
    }

    #[test]
    fn arcs_do_not_depend_on_the_lift() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for c in [5, 6, 7] {
            let t = Triangulation::random(&SurfaceSig::new(0, vec![c]), &mut rng, 10).unwrap();
            for _ in 0..10 {
                let vals: Vec<BigRational> = (0..t.n_edges()).map(|e| if t.is_internal(e) { int(rng.gen_range(0..4)) } else { int(0) }).collect();
                let ms = AChart::<TropQ>::new(t.clone(), vals, false).unwrap();
                let mx = random_pos_x(&t, &mut rng);
                let d = additive_pairing_x_detail(&mx, &ms).unwrap();
                assert!((d.arcs - d.arcs_second_lift).abs() < 1e-6, "{d:?}");
                if d.arcs.abs() > 1e-6 {
                    checked += 1;
                }
            }
        }
        assert!(checked > 10, "{checked}");
        // a single arc across the quadrilateral touches two boundary segments
        let q = Triangulation::disc_fan(4).unwrap();
        let vals: Vec<BigRational> = (0..q.n_edges()).map(|e| if q.is_internal(e) { rat(1, 2) } else { int(0) }).collect();
        let ms = AChart::<TropQ>::new(q.clone(), vals, false).unwrap();
        let ext = q.external_edges();
        let mut v2 = ms.values().to_vec();
        v2[ext[0]] = rat(1, 2);
        v2[ext[2]] = rat(1, 2);
        let ms2 = AChart::<TropQ>::new(q.clone(), v2, false).unwrap();
        let r = additive_pairing_x(&XChart::ones(&q), &ms2);
        assert!(matches!(r, Err(Error::VanishingPropertyViolated(_))));
    }

    #[test]
    fn symmetry_under_p() {
        let t = torus();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (p, q) in [(1, 0), (0, 1), (1, -1), (2, -1), (3, 2)] {
            let ms = torus_slope_chart(p, q);
            for _ in 0..4 {
                let vals: Vec<BigRational> = (0..3).map(|_| rat(rng.gen_range(1..9), rng.gen_range(1..9))).collect();
                let ma = AChart::<PosRat>::from_rationals(&t, &vals).unwrap();
                let lhs = additive_pairing_x(&ma.p_map(), &ms).unwrap();
                let rhs = additive_pairing(&ms.p_map(), &ma).unwrap();
                assert!(close(lhs, rhs, 1e-6), "{lhs} {rhs}");
            }
        }
    }

    #[test]
    fn tropical_trace_is_intersection() {
        let t = torus();
        let mut charts = Vec::new();
        for x in -3i64..=3 {
            for y in -3i64..=3 {
                charts.push(XChart::<TropZ>::new(t.clone(), [(0, x), (1, y), (2, -x - y)].into_iter().map(|(e, v)| (e, BigInt::from(v))).collect()).unwrap());
            }
        }
        for (p, q) in [(1, 0), (0, 1), (1, -1), (2, -1), (1, 2), (3, -2)] {
            assert_eq!(compare_with_intersection(&torus_slope_chart(p, q), &charts).unwrap(), BigRational::zero());
        }
        let f = tropical_of_trace(&LaurentPoly::one(3)).unwrap();
        assert_eq!(f.eval(&[int(4), int(-1), int(2)]), BigRational::zero());
        let g = tropical_of_trace(&lamination_trace(&torus_slope_chart(1, 0)).unwrap()).unwrap();
        let x = [int(2), int(-1), int(-1)];
        let x3: Vec<BigRational> = x.iter().map(|v| v * int(3)).collect();
        assert_eq!(g.eval(&x3), g.eval(&x) * int(3));
    }

    #[test]
    fn multiplicative_values() {
        let t = torus();
        let ma = AChart::<PosRat>::from_rationals(&t, &[int(2), int(3), rat(5, 7)]).unwrap();
        // a single edge gives its own coordinate
        for e in 0..3 {
            let mut v = [0; 3];
            v[e] = 1;
            assert!(close(multiplicative_pairing(&torus_x(v), &ma).unwrap(), rat_to_f64(&ma.values()[e]), 1e-12));
        }
        let mx = torus_x([1, -1, 0]);
        let m = reconstruct_x(&to_tropz(&mx, &BigInt::one()).unwrap()).unwrap();
        let tr = loop_monodromy_a::<PosRat, f64>(&ma, &m.components[0]).unwrap().trace().abs();
        assert!(close(multiplicative_pairing(&mx, &ma).unwrap(), tr, 1e-12));
        let m3: Mat2<f64> = loop_monodromy_a(&ma, &m.components[0]).unwrap();
        assert!(close(multiplicative_pairing(&mx.scale(&int(3)).unwrap(), &ma).unwrap(), m3.pow(3).trace().abs(), 1e-9));
        assert!(matches!(multiplicative_pairing(&torus_x([1, -1, 0]).scale(&rat(1, 2)).unwrap(), &ma), Err(Error::NonIntegralLamination(_))));
        assert_eq!(chebyshev_trace(3.0, 0), 2.0);
        assert_eq!(chebyshev_trace(3.0, 2), 7.0);
        assert_eq!(chebyshev_trace(3.0, 3), 18.0);
    }

    #[test]
    fn multiplicative_x_is_a_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let sig = SurfaceSig::new(0, vec![0, 0, 0, 0]);
        let mut multi = 0;
        for _ in 0..20 {
            let t = Triangulation::random(&sig, &mut rng, 8).unwrap();
            let vals: Vec<BigRational> = (0..t.n_edges()).map(|_| int(rng.gen_range(0..3))).collect();
            let ms = AChart::<TropQ>::new(t.clone(), vals, false).unwrap();
            if !integrality_predicates(&ms).is_integral {
                continue;
            }
            let mx = random_pos_x(&t, &mut rng);
            let whole = mult_pairing_x(&mx, &ms).unwrap();
            let comps = reconstruct_a(&ms).unwrap().components;
            if comps.len() > 1 {
                multi += 1;
            }
            let mut prod = 1.0;
            for c in &comps {
                // parallel copies are one component: 𝕀 is |tr Mᵏ|, not a power
                if c.weight.is_negative() {
                    let single = a_coordinates(&t, &[c.with_weight(int(1))]).unwrap();
                    prod /= mult_pairing_x(&mx, &single).unwrap().powi(c.weight.to_integer().abs().to_i32().unwrap());
                } else {
                    prod *= mult_pairing_x(&mx, &a_coordinates(&t, &[c.clone()]).unwrap()).unwrap();
                }
            }
            assert!(close(whole, prod, 1e-9), "{whole} {prod}");
        }
        assert!(multi > 0);
    }

    #[test]
    fn hole_curves_use_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let t = Triangulation::random(&SurfaceSig::new(0, vec![0, 0, 0]), &mut rng, 6).unwrap();
        let mx = random_pos_x(&t, &mut rng);
        for v in t.holes() {
            let c = vertex_curve(&t, v).unwrap();
            let ms = a_coordinates(&t, &[c]).unwrap();
            let r = rat_to_f64(&mx.hole_invariant(v).unwrap());
            let val = mult_pairing_x(&mx, &ms).unwrap();
            let expect = match mx.classify_vertices()[v] {
                VertexClass::Hole(1) => r.abs().ln().abs() / 2.0,
                VertexClass::Hole(_) => -r.abs().ln().abs() / 2.0,
                _ => 0.0,
            };
            assert!(close(val.ln(), expect, 1e-9), "{} {expect}", val.ln());
        }
    }

    #[test]
    fn limits_approach_the_additive_pairing() {
        let t = torus();
        let ma = AChart::<PosRat>::from_rationals(&t, &[int(2), int(3), rat(5, 7)]).unwrap();
        for v in [[1, -1, 0], [2, -1, -1], [1, 1, 1]] {
            let mx = torus_x(v);
            let target = additive_pairing(&mx, &ma).unwrap();
            let devs: Vec<f64> = [1, 2, 4, 8, 16]
                .iter()
                .map(|&c| (multiplicative_pairing(&mx.scale(&int(c)).unwrap(), &ma).unwrap().ln() / c as f64 - target).abs())
                .collect();
            assert!(devs.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{devs:?}");
        }
    }

    #[test]
    fn convexity_probe_cases() {
        let t = torus();
        let ones = XChart::<PosRat>::ones(&t);
        let a = torus_slope_chart(1, 0);
        let zero = AChart::<TropQ>::from_rationals(&t, &vec![int(0); 3]).unwrap();
        assert_eq!(convexity_probe(&ones, &a, &zero).unwrap().direction, 0);
        assert_eq!(convexity_probe(&ones, &a, &a).unwrap().direction, 0);
        let r = convexity_probe(&ones, &a, &torus_slope_chart(0, 1)).unwrap();
        // (1,0) + (0,1) is the (1,1) curve, of trace 6
        assert!(close(r.lhs, 2.0 * 0.9624236501192069, 1e-12));
        assert!(close(r.rhs, 3f64.acosh(), 1e-12));
        assert_eq!(r.direction, -1);
    }
}
