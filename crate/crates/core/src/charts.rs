//! Coordinate charts: semifield values on the edges of a marked triangulation.
//!
//! An X-chart carries a value on every internal edge, an A-chart on every
//! edge. One mutation engine serves all tags; under a tropical tag it is the
//! piecewise linear flip rule for laminations.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::semifield::{fmt_rat, parse_rat, PosFloat, PosRat, Semifield, SemifieldTag};
use crate::surface::{next3, EdgeId, Triangulation, VertexKind};

#[derive(Clone, Debug)]
pub struct XChart<S: Semifield> {
    tri: Triangulation,
    values: BTreeMap<EdgeId, S::Elem>,
}

impl<S: Semifield> PartialEq for XChart<S> {
    fn eq(&self, o: &Self) -> bool {
        self.tri == o.tri && self.values == o.values
    }
}

#[derive(Clone, Debug)]
pub struct AChart<S: Semifield> {
    tri: Triangulation,
    values: Vec<S::Elem>,
    restricted_to_a0: bool,
}

impl<S: Semifield> PartialEq for AChart<S> {
    fn eq(&self, o: &Self) -> bool {
        self.tri == o.tri && self.values == o.values
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexClass {
    Cilium,
    Puncture,
    Hole(i8),
}

fn check_positive<S: Semifield>(v: &S::Elem) -> Result<()> {
    if !S::TAG.is_tropical() && !(S::to_f64(v) > 0.0) {
        return Err(Error::DomainViolation(S::format(v)));
    }
    Ok(())
}

/// Order of an element relative to the multiplicative identity.
pub fn cmp_one<S: Semifield>(v: &S::Elem) -> Ordering {
    let one = if S::TAG.is_tropical() { BigRational::zero() } else { BigRational::one() };
    match S::to_rational(v) {
        Some(q) => q.cmp(&one),
        None => S::to_f64(v).partial_cmp(&crate::semifield::rat_to_f64(&one)).unwrap_or(Ordering::Equal),
    }
}

fn values_json<S: Semifield>(it: impl Iterator<Item = (EdgeId, S::Elem)>) -> Value {
    let m: serde_json::Map<String, Value> = it.map(|(e, v)| (e.to_string(), Value::String(S::format(&v)))).collect();
    Value::Object(m)
}

fn parse_chart_json<S: Semifield>(v: &Value, kind: &str) -> Result<(Triangulation, BTreeMap<EdgeId, S::Elem>)> {
    let tri = Triangulation::from_json(v.get("surface").ok_or_else(|| Error::Parse("missing surface".into()))?)?;
    let ty = v.get("type").and_then(|t| t.as_str()).unwrap_or(kind);
    if ty != kind {
        return Err(Error::Parse(format!("expected a {kind} chart, got {ty}")));
    }
    if let Some(tag) = v.get("semifield").and_then(|t| t.as_str()) {
        let tag: SemifieldTag = tag.parse()?;
        if tag != S::TAG {
            return Err(Error::Parse(format!("chart is over {}, expected {}", tag.name(), S::TAG.name())));
        }
    }
    let vals = v.get("values").and_then(|x| x.as_object()).ok_or_else(|| Error::Parse("missing values".into()))?;
    let mut out = BTreeMap::new();
    for (k, x) in vals {
        let e: EdgeId = k.parse().map_err(|_| Error::Parse(format!("bad edge id {k}")))?;
        let q = match x {
            Value::String(s) => parse_rat(s)?,
            Value::Number(n) => parse_rat(&n.to_string())?,
            _ => return Err(Error::Parse(format!("bad value for edge {k}"))),
        };
        out.insert(e, S::from_rational(&q)?);
    }
    Ok((tri, out))
}

impl<S: Semifield> XChart<S> {
    pub fn new(tri: Triangulation, values: BTreeMap<EdgeId, S::Elem>) -> Result<Self> {
        let internal = tri.internal_edges();
        if values.keys().cloned().collect::<Vec<_>>() != internal {
            return Err(Error::InvalidChart(format!("X-chart needs exactly the internal edges {internal:?}")));
        }
        for v in values.values() {
            check_positive::<S>(v)?;
        }
        Ok(XChart { tri, values })
    }

    pub fn from_fn(tri: &Triangulation, mut f: impl FnMut(EdgeId) -> S::Elem) -> Result<Self> {
        let values = tri.internal_edges().into_iter().map(|e| (e, f(e))).collect();
        XChart::new(tri.clone(), values)
    }

    /// Values listed in increasing internal-edge order.
    pub fn from_rationals(tri: &Triangulation, vals: &[BigRational]) -> Result<Self> {
        let internal = tri.internal_edges();
        if vals.len() != internal.len() {
            return Err(Error::InvalidChart(format!("{} values for {} internal edges", vals.len(), internal.len())));
        }
        let values = internal.into_iter().zip(vals).map(|(e, q)| Ok((e, S::from_rational(q)?))).collect::<Result<_>>()?;
        XChart::new(tri.clone(), values)
    }

    pub fn ones(tri: &Triangulation) -> Self {
        XChart::from_fn(tri, |_| S::one()).expect("identity chart")
    }

    pub fn tri(&self) -> &Triangulation {
        &self.tri
    }

    pub fn get(&self, e: EdgeId) -> &S::Elem {
        &self.values[&e]
    }

    pub fn values(&self) -> &BTreeMap<EdgeId, S::Elem> {
        &self.values
    }

    pub fn value_vec(&self) -> Vec<S::Elem> {
        self.values.values().cloned().collect()
    }

    pub fn mutate(&self, a: EdgeId) -> Result<Self> {
        let flip = self.tri.flip(a)?;
        let eps = self.tri.epsilon_matrix();
        let xa = &self.values[&a];
        let mut out = BTreeMap::new();
        for (&b, xb) in &self.values {
            let v = if b == a {
                S::inv(xa)
            } else {
                // exponent ε^{βα}, see the crate notes on orientation
                let e = eps.get(b, a) as i64;
                if e >= 0 {
                    S::mul(xb, &S::pow(&S::add(&S::one(), xa), e))
                } else {
                    S::mul(xb, &S::pow(&S::add(&S::one(), &S::inv(xa)), e))
                }
            };
            out.insert(flip.correspondence[b], v);
        }
        Ok(XChart { tri: flip.new, values: out })
    }

    /// Mutation along a word; returns the chart and the composed correspondence.
    pub fn mutate_word(&self, word: &[EdgeId]) -> Result<(Self, Vec<EdgeId>)> {
        let mut c = self.clone();
        let corr: Vec<EdgeId> = (0..self.tri.n_edges()).collect();
        for (step, &e) in word.iter().enumerate() {
            c = c.mutate(corr[e]).map_err(|err| Error::InapplicableWord { step, reason: err.to_string() })?;
        }
        Ok((c, corr))
    }

    /// `r^v`: product of the values at all edge ends incident to `v`.
    pub fn hole_invariant(&self, v: usize) -> Result<S::Elem> {
        if v >= self.tri.n_vertices() || self.tri.vertices()[v].kind != VertexKind::Hole {
            return Err(Error::NotAHoleVertex(v));
        }
        let mut r = S::one();
        for (&e, x) in &self.values {
            let k = self.tri.incidence(v, e) as i64;
            if k > 0 {
                r = S::mul(&r, &S::pow(x, k));
            }
        }
        Ok(r)
    }

    pub fn classify_vertices(&self) -> Vec<VertexClass> {
        (0..self.tri.n_vertices())
            .map(|v| match self.tri.vertices()[v].kind {
                VertexKind::Cilium => VertexClass::Cilium,
                VertexKind::Hole => match cmp_one::<S>(&self.hole_invariant(v).unwrap()) {
                    Ordering::Greater => VertexClass::Hole(1),
                    Ordering::Less => VertexClass::Hole(-1),
                    Ordering::Equal => VertexClass::Puncture,
                },
            })
            .collect()
    }

    pub fn scale(&self, u: &BigRational) -> Result<Self> {
        let values = self.values.iter().map(|(&e, v)| Ok((e, S::scale(v, u)?))).collect::<Result<_>>()?;
        Ok(XChart { tri: self.tri.clone(), values })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "surface": self.tri.to_json(),
            "type": "X",
            "semifield": S::TAG.name(),
            "values": values_json::<S>(self.values.iter().map(|(e, v)| (*e, v.clone()))),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let (tri, vals) = parse_chart_json::<S>(v, "X")?;
        XChart::new(tri, vals)
    }
}

impl<S: Semifield> AChart<S> {
    pub fn new(tri: Triangulation, values: Vec<S::Elem>, restricted_to_a0: bool) -> Result<Self> {
        if values.len() != tri.n_edges() {
            return Err(Error::InvalidChart(format!("A-chart needs {} values", tri.n_edges())));
        }
        for v in &values {
            check_positive::<S>(v)?;
        }
        let c = AChart { tri, values, restricted_to_a0 };
        if restricted_to_a0 && !c.in_a0() {
            return Err(Error::NotInA0("external edges must carry the identity".into()));
        }
        Ok(c)
    }

    pub fn from_fn(tri: &Triangulation, f: impl FnMut(EdgeId) -> S::Elem) -> Result<Self> {
        let values = (0..tri.n_edges()).map(f).collect();
        AChart::new(tri.clone(), values, false)
    }

    pub fn from_rationals(tri: &Triangulation, vals: &[BigRational]) -> Result<Self> {
        let values = vals.iter().map(S::from_rational).collect::<Result<Vec<_>>>()?;
        AChart::new(tri.clone(), values, false)
    }

    pub fn ones(tri: &Triangulation) -> Self {
        AChart::new(tri.clone(), vec![S::one(); tri.n_edges()], true).expect("identity chart")
    }

    pub fn tri(&self) -> &Triangulation {
        &self.tri
    }

    pub fn get(&self, e: EdgeId) -> &S::Elem {
        &self.values[e]
    }

    pub fn values(&self) -> &[S::Elem] {
        &self.values
    }

    pub fn restricted_to_a0(&self) -> bool {
        self.restricted_to_a0
    }

    pub fn in_a0(&self) -> bool {
        self.tri.external_edges().iter().all(|&e| S::is_one(&self.values[e]))
    }

    /// Marks the chart as a point of the subspace where external edges carry the identity.
    pub fn restrict_to_a0(mut self) -> Result<Self> {
        if !self.in_a0() {
            return Err(Error::NotInA0("external edges must carry the identity".into()));
        }
        self.restricted_to_a0 = true;
        Ok(self)
    }

    pub fn mutate(&self, a: EdgeId) -> Result<Self> {
        let flip = self.tri.flip(a)?;
        let eps = self.tri.epsilon_matrix();
        let mut pos = S::one();
        let mut neg = S::one();
        for d in 0..self.tri.n_edges() {
            let e = eps.get(a, d) as i64;
            if e > 0 {
                pos = S::mul(&pos, &S::pow(&self.values[d], e));
            } else if e < 0 {
                neg = S::mul(&neg, &S::pow(&self.values[d], -e));
            }
        }
        let mut values = vec![S::one(); self.values.len()];
        for b in 0..self.values.len() {
            let v = if b == a { S::div(&S::add(&pos, &neg), &self.values[a]) } else { self.values[b].clone() };
            values[flip.correspondence[b]] = v;
        }
        Ok(AChart { tri: flip.new, values, restricted_to_a0: self.restricted_to_a0 })
    }

    pub fn mutate_word(&self, word: &[EdgeId]) -> Result<(Self, Vec<EdgeId>)> {
        let mut c = self.clone();
        let corr: Vec<EdgeId> = (0..self.tri.n_edges()).collect();
        for (step, &e) in word.iter().enumerate() {
            c = c.mutate(corr[e]).map_err(|err| Error::InapplicableWord { step, reason: err.to_string() })?;
        }
        Ok((c, corr))
    }

    /// `x^α = ∏_β a_β^{-ε^{αβ}}`.
    pub fn p_map(&self) -> XChart<S> {
        let eps = self.tri.epsilon_matrix();
        let values = self
            .tri
            .internal_edges()
            .into_iter()
            .map(|a| {
                let mut x = S::one();
                for b in 0..self.tri.n_edges() {
                    let e = eps.get(a, b) as i64;
                    if e != 0 {
                        x = S::mul(&x, &S::pow(&self.values[b], -e));
                    }
                }
                (a, x)
            })
            .collect();
        XChart { tri: self.tri.clone(), values }
    }

    /// The action at a hole or cilium `v`: every incident edge end picks up a factor `t`.
    /// The flag reports whether the result is still in the A₀ subspace.
    pub fn r_action(&self, v: usize, t: &S::Elem) -> Result<(Self, bool)> {
        if v >= self.tri.n_vertices() {
            return Err(Error::NotAHoleVertex(v));
        }
        check_positive::<S>(t)?;
        let mut values = self.values.clone();
        for (e, x) in values.iter_mut().enumerate() {
            let k = self.tri.incidence(v, e) as i64;
            if k > 0 {
                *x = S::mul(x, &S::pow(t, k));
            }
        }
        let mut c = AChart { tri: self.tri.clone(), values, restricted_to_a0: false };
        let in_a0 = c.in_a0();
        c.restricted_to_a0 = self.restricted_to_a0 && in_a0;
        Ok((c, in_a0))
    }

    /// Area map at a hole (positive tags) or collar map (tropical tags).
    ///
    /// Tropical: the maximum over corners at `v` of `𝖺_α + 𝖺_β − 𝖺_δ`.
    /// Positive: half the sum over corners of `a_δ / (a_α a_β)`, the
    /// horocycle length, which makes `U²+V²+W² = UVW·A` hold on the torus.
    pub fn collar_or_area(&self, v: usize) -> Result<S::Elem> {
        if v >= self.tri.n_vertices() || self.tri.vertices()[v].kind != VertexKind::Hole {
            return Err(Error::NotAHoleVertex(v));
        }
        let mut acc: Option<S::Elem> = None;
        for &(t, k) in &self.tri.vertices()[v].corners {
            let al = self.values[self.tri.edge_at(t, k)].clone();
            let be = self.values[self.tri.edge_at(t, (k + 2) % 3)].clone();
            let de = self.values[self.tri.edge_at(t, next3(k))].clone();
            let term = if S::TAG.is_tropical() {
                S::div(&S::mul(&al, &be), &de)
            } else {
                S::div(&de, &S::mul(&al, &be))
            };
            acc = Some(match acc {
                None => term,
                Some(a) => S::add(&a, &term),
            });
        }
        let acc = acc.expect("a hole has corners");
        if S::TAG.is_tropical() {
            Ok(acc)
        } else {
            Ok(S::div(&acc, &S::constant(&BigRational::from_integer(2.into()))))
        }
    }

    pub fn scale(&self, u: &BigRational) -> Result<Self> {
        let values = self.values.iter().map(|v| S::scale(v, u)).collect::<Result<Vec<_>>>()?;
        Ok(AChart { tri: self.tri.clone(), values, restricted_to_a0: self.restricted_to_a0 })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "surface": self.tri.to_json(),
            "type": "A",
            "semifield": S::TAG.name(),
            "values": values_json::<S>(self.values.iter().cloned().enumerate()),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let (tri, vals) = parse_chart_json::<S>(v, "A")?;
        if vals.keys().cloned().collect::<Vec<_>>() != (0..tri.n_edges()).collect::<Vec<_>>() {
            return Err(Error::InvalidChart("A-chart needs a value on every edge".into()));
        }
        AChart::new(tri, vals.into_values().collect(), false)
    }
}

impl XChart<PosRat> {
    pub fn to_float(&self) -> XChart<PosFloat> {
        XChart {
            tri: self.tri.clone(),
            values: self.values.iter().map(|(&e, q)| (e, PosRat::to_f64(q))).collect(),
        }
    }
}

impl AChart<PosRat> {
    pub fn to_float(&self) -> AChart<PosFloat> {
        AChart {
            tri: self.tri.clone(),
            values: self.values.iter().map(PosRat::to_f64).collect(),
            restricted_to_a0: self.restricted_to_a0,
        }
    }
}

fn max0(q: &BigRational) -> BigRational {
    if q.is_positive_q() {
        q.clone()
    } else {
        BigRational::zero()
    }
}

trait PosQ {
    fn is_positive_q(&self) -> bool;
}

impl PosQ for BigRational {
    fn is_positive_q(&self) -> bool {
        *self > BigRational::zero()
    }
}

/// The lamination flip rule for X-coordinates written out with `max`.
pub fn xl_flip_literal(t: &Triangulation, x: &BTreeMap<EdgeId, BigRational>, a: EdgeId) -> Result<BTreeMap<EdgeId, BigRational>> {
    t.check_flippable(a)?;
    let eps = t.epsilon_matrix();
    let xa = &x[&a];
    Ok(x
        .iter()
        .map(|(&b, xb)| {
            let e = BigRational::from_integer(eps.get(b, a).into());
            let v = if b == a {
                -xa
            } else if eps.get(b, a) >= 0 {
                xb + e * max0(xa)
            } else {
                xb + e * max0(&-xa)
            };
            (b, v)
        })
        .collect())
}

/// The lamination flip rule for A-coordinates written out with `max`.
pub fn al_flip_literal(t: &Triangulation, a: &[BigRational], al: EdgeId) -> Result<Vec<BigRational>> {
    t.check_flippable(al)?;
    let eps = t.epsilon_matrix();
    let mut pos = BigRational::zero();
    let mut neg = BigRational::zero();
    for d in 0..a.len() {
        let e = BigRational::from_integer(eps.get(al, d).into());
        if eps.get(al, d) > 0 {
            pos += e * &a[d];
        } else if eps.get(al, d) < 0 {
            neg -= e * &a[d];
        }
    }
    let mut out = a.to_vec();
    out[al] = pos.max(neg) - &a[al];
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Integrality {
    pub is_integral: bool,
    pub is_even: bool,
}

/// Integral: coordinates in ½ℤ with an integral sum around every triangle.
/// Even: all coordinates are integers.
pub fn integrality_predicates(c: &AChart<crate::semifield::TropQ>) -> Integrality {
    let two = BigRational::from_integer(2.into());
    let half_integral = c.values().iter().all(|q| (q * &two).is_integer());
    let tri_ok = c.tri().triangles().iter().all(|t| {
        let s: BigRational = t.iter().map(|sr| c.values()[sr.edge].clone()).fold(BigRational::zero(), |a, b| a + b);
        s.is_integer()
    });
    let is_even = c.values().iter().all(|q| q.is_integer());
    Integrality { is_integral: half_integral && tri_ok, is_even }
}

/// Rational values of a chart as `p/q` strings, in edge order.
pub fn format_values<S: Semifield>(vals: impl IntoIterator<Item = S::Elem>) -> Vec<String> {
    vals.into_iter().map(|v| S::format(&v)).collect()
}

pub fn fmt_vec(v: &[BigRational]) -> String {
    v.iter().map(fmt_rat).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semifield::{int, rat, TropQ, TropZ};
    use crate::surface::SurfaceSig;
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Octagon with a central square 0-2-4-6 and diagonal 0-4: every side of
    /// the square is internal.
    fn square_in_octagon() -> (Triangulation, EdgeId, [EdgeId; 4]) {
        let t = Triangulation::polygon(8, &[[0, 1, 2], [2, 3, 4], [4, 5, 6], [6, 7, 0], [0, 2, 4], [0, 4, 6]]).unwrap();
        // diagonals sorted: (0,2),(0,4),(0,6),(2,4),(4,6)
        (t, 1, [0, 3, 4, 2])
    }

    #[test]
    fn square_x_mutation_at_ones() {
        let (t, d, sides) = square_in_octagon();
        let c = XChart::<PosRat>::ones(&t);
        let m = c.mutate(d).unwrap();
        assert_eq!(m.get(d), &int(1));
        let got: Vec<BigRational> = sides.iter().map(|&s| m.get(s).clone()).collect();
        // sides alternate between x(1+x0) and x(1+1/x0)^{-1}
        let mut sorted = got.clone();
        sorted.sort();
        assert_eq!(sorted, vec![rat(1, 2), rat(1, 2), int(2), int(2)]);
        assert_ne!(got[0], got[1]);
        assert_eq!(got[0], got[2]);
    }

    #[test]
    fn square_x_tropical_mutation() {
        let (t, d, sides) = square_in_octagon();
        let c = XChart::<TropQ>::from_fn(&t, |e| if e == d { int(2) } else { int(0) }).unwrap();
        let m = c.mutate(d).unwrap();
        assert_eq!(m.get(d), &int(-2));
        let mut got: Vec<BigRational> = sides.iter().map(|&s| m.get(s).clone()).collect();
        got.sort();
        assert_eq!(got, vec![int(0), int(0), int(2), int(2)]);
    }

    #[test]
    fn a_mutation_examples() {
        let sq = Triangulation::disc_fan(4).unwrap();
        let c = AChart::<PosRat>::ones(&sq);
        assert_eq!(c.mutate(0).unwrap().get(0), &int(2));
        let c = AChart::<TropZ>::ones(&sq);
        assert_eq!(c.mutate(0).unwrap().get(0), &BigInt::from(0));
        let torus = Triangulation::punctured_torus();
        let c = AChart::<PosRat>::ones(&torus);
        assert_eq!(c.mutate(0).unwrap().values(), &[int(2), int(1), int(1)]);
    }

    #[test]
    fn ptolemy_pairs_opposite_sides() {
        let sq = Triangulation::disc_fan(4).unwrap();
        // edges: 0 diagonal (0,2); 1..4 sides (0,1),(1,2),(2,3),(3,0)
        let c = AChart::<PosRat>::from_rationals(&sq, &[int(1), int(2), int(3), int(5), int(7)]).unwrap();
        assert_eq!(c.mutate(0).unwrap().get(0), &int(2 * 5 + 3 * 7));
    }

    #[test]
    fn p_map_examples() {
        let torus = Triangulation::punctured_torus();
        // edges 1 and 2 swapped relative to the labelling with ε row (0,2,-2)
        let a = AChart::<PosRat>::from_rationals(&torus, &[int(1), int(1), int(2)]).unwrap();
        assert_eq!(a.p_map().value_vec(), vec![rat(1, 4), int(4), int(1)]);
        let a = AChart::<TropZ>::from_rationals(&torus, &[int(0), int(0), int(1)]).unwrap();
        let v: Vec<BigInt> = a.p_map().value_vec();
        assert_eq!(v, vec![BigInt::from(-2), BigInt::from(2), BigInt::from(0)]);
        let d = Triangulation::disc_fan(6).unwrap();
        assert_eq!(AChart::<PosRat>::ones(&d).p_map(), XChart::<PosRat>::ones(&d));
    }

    #[test]
    fn hole_invariants_and_classes() {
        let torus = Triangulation::punctured_torus();
        let c = XChart::<PosRat>::ones(&torus);
        assert_eq!(c.hole_invariant(0).unwrap(), int(1));
        assert_eq!(c.classify_vertices(), vec![VertexClass::Puncture]);
        let c = XChart::<PosRat>::from_rationals(&torus, &[int(2), int(1), int(1)]).unwrap();
        assert_eq!(c.hole_invariant(0).unwrap(), int(4));
        assert_eq!(c.classify_vertices(), vec![VertexClass::Hole(1)]);
        let d = Triangulation::disc_fan(5).unwrap();
        assert!(XChart::<PosRat>::ones(&d).classify_vertices().iter().all(|v| *v == VertexClass::Cilium));
        assert!(matches!(XChart::<PosRat>::ones(&d).hole_invariant(0), Err(Error::NotAHoleVertex(0))));
    }

    #[test]
    fn tropical_hole_sum() {
        // a puncture inside a triangle: three edges to the corners, each incident once
        let sig = SurfaceSig::new(0, vec![3, 0]);
        let t = Triangulation::from_gluing(sig, 3, &[((0, 1), (1, 2)), ((1, 1), (2, 2)), ((2, 1), (0, 2))]).unwrap();
        let v = t.holes()[0];
        let inc: Vec<EdgeId> = t.internal_edges().into_iter().filter(|&e| t.incidence(v, e) > 0).collect();
        assert_eq!(inc.len(), 3);
        let vals = [int(1), int(2), int(-3)];
        let c = XChart::<TropQ>::from_fn(&t, |e| inc.iter().position(|&x| x == e).map_or(int(7), |i| vals[i].clone())).unwrap();
        assert_eq!(c.hole_invariant(v).unwrap(), int(0));
    }

    #[test]
    fn r_action_examples() {
        let torus = Triangulation::punctured_torus();
        let c = AChart::<PosRat>::ones(&torus);
        let (r, _) = c.r_action(0, &int(2)).unwrap();
        assert_eq!(r.values(), &[int(4), int(4), int(4)]);
        let (r, _) = c.r_action(0, &int(1)).unwrap();
        assert_eq!(r, c);
        let d = Triangulation::disc_fan(5).unwrap();
        let c = AChart::<PosRat>::ones(&d);
        assert!(c.r_action(0, &int(1)).unwrap().1);
        let (r, in_a0) = c.r_action(0, &int(3)).unwrap();
        assert!(!in_a0 && !r.restricted_to_a0());
    }

    #[test]
    fn area_and_collar() {
        let torus = Triangulation::punctured_torus();
        assert_eq!(AChart::<PosRat>::ones(&torus).collar_or_area(0).unwrap(), int(3));
        assert_eq!(AChart::<TropZ>::ones(&torus).collar_or_area(0).unwrap(), BigInt::from(0));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let v: Vec<BigRational> = (0..3).map(|_| rat(rng.gen_range(1..20), rng.gen_range(1..5))).collect();
            let c = AChart::<PosRat>::from_rationals(&torus, &v).unwrap();
            let a = c.collar_or_area(0).unwrap();
            assert_eq!(&v[0] * &v[0] + &v[1] * &v[1] + &v[2] * &v[2], &v[0] * &v[1] * &v[2] * a);
        }
        let d = Triangulation::disc_fan(4).unwrap();
        assert!(AChart::<PosRat>::ones(&d).collar_or_area(0).is_err());
    }

    #[test]
    fn scaling() {
        let d = Triangulation::disc_fan(6).unwrap();
        let c = XChart::<TropQ>::from_rationals(&d, &[int(1), int(-2), int(3)]).unwrap();
        assert_eq!(c.scale(&rat(1, 2)).unwrap().value_vec(), vec![rat(1, 2), int(-1), rat(3, 2)]);
        assert_eq!(c.scale(&int(1)).unwrap(), c);
        let sq = Triangulation::disc_fan(5).unwrap();
        let c = XChart::<PosRat>::from_rationals(&sq, &[int(2), int(3)]).unwrap();
        assert_eq!(c.scale(&int(2)).unwrap().value_vec(), vec![int(4), int(9)]);
        assert!(matches!(c.scale(&rat(1, 2)), Err(Error::NonIntegralPowerOnPositiveTag(_))));
    }

    #[test]
    fn integrality() {
        let t = Triangulation::from_gluing(SurfaceSig::new(0, vec![3]), 1, &[]).unwrap();
        let p = |v: [BigRational; 3]| integrality_predicates(&AChart::<TropQ>::from_rationals(&t, &v).unwrap());
        assert_eq!(p([rat(1, 2), rat(1, 2), int(1)]), Integrality { is_integral: true, is_even: false });
        assert!(!p([rat(1, 2), rat(1, 2), rat(1, 2)]).is_integral);
        assert_eq!(p([int(1), int(2), int(3)]), Integrality { is_integral: true, is_even: true });
    }

    #[test]
    fn json_round_trip() {
        let torus = Triangulation::punctured_torus();
        let c = XChart::<PosRat>::from_rationals(&torus, &[rat(1, 3), int(2), rat(5, 7)]).unwrap();
        assert_eq!(XChart::<PosRat>::from_json(&c.to_json()).unwrap(), c);
        let a = AChart::<TropQ>::from_rationals(&torus, &[rat(-1, 3), int(2), int(0)]).unwrap();
        assert_eq!(AChart::<TropQ>::from_json(&a.to_json()).unwrap(), a);
        assert!(XChart::<TropQ>::from_json(&c.to_json()).is_err());
    }

    #[test]
    fn involution_and_naturality_on_torus() {
        let torus = Triangulation::punctured_torus();
        let a = AChart::<PosRat>::from_rationals(&torus, &[int(3), rat(1, 2), int(7)]).unwrap();
        for e in 0..3 {
            assert_eq!(a.mutate(e).unwrap().mutate(e).unwrap(), a);
            assert_eq!(a.mutate(e).unwrap().p_map(), a.p_map().mutate(e).unwrap());
        }
    }
}
