//! PSL(2,R) monodromy from X- and A-charts.
//!
//! The X graph has one port per triangle side. Inside a triangle the ports are
//! joined by `I` edges pointing clockwise; a port and its partner across an
//! internal edge are joined by `B(x)`. The A graph has a hexagon per
//! triangle: two nodes on every side (one near each end), `D(a)` along the
//! side and `F(m)` across each corner.
//!
//! Products are taken left to right along the path.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::charts::{AChart, XChart};
use crate::laminations::{CurveKind, CurvePath, End};
use crate::semifield::{fmt_rat, rat_to_f64, Semifield};
use crate::surface::{next3, prev3, EdgeId, Triangulation, VertexKind};
use crate::{Error, Result};

pub trait Scalar: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_rat(q: &BigRational) -> Self;
    /// Square root of a positive rational.
    fn sqrt_rat(q: &BigRational) -> Self;
    fn from_f64(x: f64) -> Option<Self>;
    fn sqrt_f64(x: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;
    /// The value as a rational, when it is one.
    fn as_rational(&self) -> Option<BigRational>;

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rat(q: &BigRational) -> Self {
        rat_to_f64(q)
    }
    fn sqrt_rat(q: &BigRational) -> Self {
        rat_to_f64(q).sqrt()
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(x)
    }
    fn sqrt_f64(x: f64) -> Option<Self> {
        Some(x.sqrt())
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn as_rational(&self) -> Option<BigRational> {
        None
    }
}

/// Finite sums `Σ q_d √d` over squarefree `d`. Distinct square roots of
/// squarefree integers are linearly independent, so the representation is
/// canonical and `==` is exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactRatSqrt {
    terms: BTreeMap<BigInt, BigRational>,
}

/// Writes `n = f² s` with `s` squarefree. Trial division is cut off at 10⁶;
/// a leftover cofactor is kept whole unless it is a perfect square.
fn squarefree_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut n = n.clone();
    let mut f = BigInt::one();
    let mut s = BigInt::one();
    let mut d = BigInt::from(2);
    let limit = BigInt::from(1_000_000);
    while &d * &d <= n && d <= limit {
        let mut k = 0;
        while (&n % &d).is_zero() {
            n /= &d;
            k += 1;
        }
        for _ in 0..k / 2 {
            f *= &d;
        }
        if k % 2 == 1 {
            s *= &d;
        }
        d += 1;
    }
    let r = n.sqrt();
    if &r * &r == n {
        f *= r;
    } else {
        s *= n;
    }
    (f, s)
}

impl ExactRatSqrt {
    pub fn rational(q: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(BigInt::one(), q);
        }
        ExactRatSqrt { terms }
    }

    pub fn terms(&self) -> &BTreeMap<BigInt, BigRational> {
        &self.terms
    }

    fn push(&mut self, d: BigInt, q: BigRational) {
        let e = self.terms.entry(d.clone()).or_insert_with(BigRational::zero);
        *e += q;
        if e.is_zero() {
            self.terms.remove(&d);
        }
    }
}

impl fmt::Display for ExactRatSqrt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(d, q)| if d.is_one() { fmt_rat(q) } else { format!("{}*sqrt({})", fmt_rat(q), d) })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Scalar for ExactRatSqrt {
    fn zero() -> Self {
        ExactRatSqrt { terms: BTreeMap::new() }
    }
    fn one() -> Self {
        ExactRatSqrt::rational(BigRational::one())
    }
    fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (d, q) in &o.terms {
            r.push(d.clone(), q.clone());
        }
        r
    }
    fn mul(&self, o: &Self) -> Self {
        let mut r = ExactRatSqrt::zero();
        for (d1, q1) in &self.terms {
            for (d2, q2) in &o.terms {
                let (f, s) = squarefree_split(&(d1 * d2));
                r.push(s, q1 * q2 * BigRational::from_integer(f));
            }
        }
        r
    }
    fn neg(&self) -> Self {
        ExactRatSqrt { terms: self.terms.iter().map(|(d, q)| (d.clone(), -q)).collect() }
    }
    fn from_rat(q: &BigRational) -> Self {
        ExactRatSqrt::rational(q.clone())
    }
    fn sqrt_rat(q: &BigRational) -> Self {
        // √(n/d) = √(nd)/d
        let (f, s) = squarefree_split(&(q.numer() * q.denom()));
        let mut r = ExactRatSqrt::zero();
        r.push(s, BigRational::new(f, q.denom().clone()));
        r
    }
    fn from_f64(_: f64) -> Option<Self> {
        None
    }
    fn sqrt_f64(_: f64) -> Option<Self> {
        None
    }
    fn to_f64(&self) -> f64 {
        self.terms.iter().map(|(d, q)| rat_to_f64(q) * rat_to_f64(&BigRational::from_integer(d.clone())).sqrt()).sum()
    }
    fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&BigInt::one()).cloned(),
            _ => None,
        }
    }
}

/// Positive chart entries that can be lifted into a scalar ring.
pub trait PositiveValue {
    fn lift<K: Scalar>(&self) -> Result<K>;
    fn lift_sqrt<K: Scalar>(&self) -> Result<K>;
}

impl PositiveValue for BigRational {
    fn lift<K: Scalar>(&self) -> Result<K> {
        Ok(K::from_rat(self))
    }
    fn lift_sqrt<K: Scalar>(&self) -> Result<K> {
        if !self.is_positive() {
            return Err(Error::DomainViolation(fmt_rat(self)));
        }
        Ok(K::sqrt_rat(self))
    }
}

impl PositiveValue for f64 {
    fn lift<K: Scalar>(&self) -> Result<K> {
        K::from_f64(*self).ok_or_else(|| Error::Unsupported("float chart in an exact scalar ring".into()))
    }
    fn lift_sqrt<K: Scalar>(&self) -> Result<K> {
        if !(*self > 0.0) {
            return Err(Error::DomainViolation(self.to_string()));
        }
        K::sqrt_f64(*self).ok_or_else(|| Error::Unsupported("float chart in an exact scalar ring".into()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mat2<K> {
    pub m: [[K; 2]; 2],
}

impl<K: Scalar> Mat2<K> {
    pub fn new(a: K, b: K, c: K, d: K) -> Self {
        Mat2 { m: [[a, b], [c, d]] }
    }

    pub fn identity() -> Self {
        Mat2::new(K::one(), K::zero(), K::zero(), K::one())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let e = |i: usize, j: usize| self.m[i][0].mul(&o.m[0][j]).add(&self.m[i][1].mul(&o.m[1][j]));
        Mat2::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    /// Inverse of a determinant-one matrix.
    pub fn inv(&self) -> Self {
        let [[a, b], [c, d]] = &self.m;
        Mat2::new(d.clone(), b.neg(), c.neg(), a.clone())
    }

    pub fn neg(&self) -> Self {
        let [[a, b], [c, d]] = &self.m;
        Mat2::new(a.neg(), b.neg(), c.neg(), d.neg())
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Mat2::identity(), |acc, _| acc.mul(self))
    }

    pub fn trace(&self) -> K {
        self.m[0][0].add(&self.m[1][1])
    }

    pub fn det(&self) -> K {
        self.m[0][0].mul(&self.m[1][1]).sub(&self.m[0][1].mul(&self.m[1][0]))
    }

    pub fn upper_right(&self) -> &K {
        &self.m[0][1]
    }

    /// Equality in PSL(2): `self = ±o`.
    pub fn proj_eq(&self, o: &Self) -> bool {
        self == o || *self == o.neg()
    }

    pub fn to_f64(&self) -> Mat2<f64> {
        let [[a, b], [c, d]] = &self.m;
        Mat2::new(a.to_f64(), b.to_f64(), c.to_f64(), d.to_f64())
    }

    pub fn to_json(&self) -> Value
    where
        K: fmt::Display,
    {
        json!([[self.m[0][0].to_string(), self.m[0][1].to_string()], [self.m[1][0].to_string(), self.m[1][1].to_string()]])
    }
}

impl Mat2<f64> {
    pub fn approx_proj_eq(&self, o: &Self, tol: f64) -> bool {
        let close = |s: f64| (0..2).all(|i| (0..2).all(|j| (self.m[i][j] - s * o.m[i][j]).abs() <= tol));
        close(1.0) || close(-1.0)
    }
}

pub fn mat_i<K: Scalar>() -> Mat2<K> {
    Mat2::new(K::one(), K::one(), K::one().neg(), K::zero())
}

pub fn mat_j<K: Scalar>() -> Mat2<K> {
    Mat2::new(K::zero(), K::one(), K::one().neg(), K::zero())
}

/// `B(x)` from `√x`.
pub fn mat_b<K: Scalar>(sqrt_x: &K, inv_sqrt_x: &K) -> Mat2<K> {
    Mat2::new(K::zero(), sqrt_x.clone(), inv_sqrt_x.neg(), K::zero())
}

pub fn mat_d<K: Scalar>(a: &K, inv_a: &K) -> Mat2<K> {
    Mat2::new(K::zero(), a.clone(), inv_a.neg(), K::zero())
}

pub fn mat_f<K: Scalar>(m: &K) -> Mat2<K> {
    Mat2::new(K::one(), K::zero(), m.clone(), K::one())
}

pub fn mat_e_plus<K: Scalar>() -> Mat2<K> {
    Mat2::new(K::one(), K::one(), K::zero(), K::one())
}

pub fn mat_e_minus<K: Scalar>() -> Mat2<K> {
    Mat2::new(K::one(), K::zero(), K::one(), K::one())
}

pub fn mat_h<K: Scalar>(sqrt_x: &K, inv_sqrt_x: &K) -> Mat2<K> {
    Mat2::new(sqrt_x.clone(), K::zero(), K::zero(), inv_sqrt_x.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepKind {
    X,
    A,
}

/// Generator matrices attached to a triangulation.
#[derive(Clone, Debug)]
pub struct RepGraph<K> {
    kind: RepKind,
    tri: Triangulation,
    /// `B(x_e)` on internal edges (X) or `D(a_e)` on all edges (A).
    edge_mat: BTreeMap<EdgeId, Mat2<K>>,
    /// `F` parameter at each corner (A only).
    corner_m: Vec<[K; 3]>,
}

fn positive_chart<S: Semifield>() -> Result<()> {
    if S::TAG.is_tropical() {
        return Err(Error::Unsupported(format!("monodromy needs a positive chart, got {}", S::TAG.name())));
    }
    Ok(())
}

pub fn build_rep_x<S: Semifield, K: Scalar>(c: &XChart<S>) -> Result<RepGraph<K>>
where
    S::Elem: PositiveValue,
{
    positive_chart::<S>()?;
    let mut edge_mat = BTreeMap::new();
    for (&e, x) in c.values() {
        let r: K = x.lift_sqrt()?;
        let inv = inverse_sqrt::<S, K>(x)?;
        edge_mat.insert(e, mat_b(&r, &inv));
    }
    Ok(RepGraph { kind: RepKind::X, tri: c.tri().clone(), edge_mat, corner_m: Vec::new() })
}

fn inverse_sqrt<S: Semifield, K: Scalar>(x: &S::Elem) -> Result<K>
where
    S::Elem: PositiveValue,
{
    let inv = S::div(&S::one(), x);
    inv.lift_sqrt()
}

pub fn build_rep_a<S: Semifield, K: Scalar>(c: &AChart<S>) -> Result<RepGraph<K>>
where
    S::Elem: PositiveValue,
{
    positive_chart::<S>()?;
    let t = c.tri();
    let mut edge_mat = BTreeMap::new();
    for e in 0..t.n_edges() {
        let a = c.get(e);
        let inv = S::div(&S::one(), a);
        edge_mat.insert(e, mat_d(&a.lift()?, &inv.lift()?));
    }
    let mut corner_m = Vec::with_capacity(t.n_triangles());
    for tt in 0..t.n_triangles() {
        let mut ms: Vec<K> = Vec::with_capacity(3);
        for k in 0..3 {
            let opp = c.get(t.edge_at(tt, next3(k)));
            let den = S::mul(c.get(t.edge_at(tt, prev3(k))), c.get(t.edge_at(tt, k)));
            ms.push(S::div(opp, &den).lift()?);
        }
        corner_m.push([ms[0].clone(), ms[1].clone(), ms[2].clone()]);
    }
    Ok(RepGraph { kind: RepKind::A, tri: t.clone(), edge_mat, corner_m })
}

impl<K: Scalar> RepGraph<K> {
    pub fn kind(&self) -> RepKind {
        self.kind
    }

    pub fn tri(&self) -> &Triangulation {
        &self.tri
    }

    pub fn edge_matrix(&self, e: EdgeId) -> Option<&Mat2<K>> {
        self.edge_mat.get(&e)
    }

    /// `F` matrix at corner `k` of triangle `t`, traversed from side `k-1`
    /// to side `k`.
    pub fn corner_matrix(&self, t: usize, k: usize) -> Option<Mat2<K>> {
        self.corner_m.get(t).map(|ms| mat_f(&ms[k]))
    }
}

/// A node of a representation graph: the port on side `k` of triangle `t`,
/// and for the A graph the end of that side it sits near (0 at `w_k`, 1 at
/// `w_{k+1}`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Node {
    pub t: usize,
    pub k: usize,
    pub end: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    /// X graph: to the next port clockwise (+1) or counterclockwise (-1).
    Turn(i8),
    /// Across the side to the partner triangle (`B` on the X graph, free on A).
    Cross,
    /// A graph: along the side to its other end.
    Along,
    /// A graph: around the corner at the current end.
    Corner,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphPath {
    pub start: Node,
    pub moves: Vec<Move>,
}

impl GraphPath {
    pub fn to_json(&self) -> Value {
        let mv: Vec<Value> = self
            .moves
            .iter()
            .map(|m| match m {
                Move::Turn(s) => json!({"turn": s}),
                Move::Cross => json!("cross"),
                Move::Along => json!("along"),
                Move::Corner => json!("corner"),
            })
            .collect();
        json!({"start": [self.start.t, self.start.k, self.start.end], "moves": mv})
    }
}

pub fn path_monodromy<K: Scalar>(g: &RepGraph<K>, path: &GraphPath) -> Result<Mat2<K>> {
    let t = &g.tri;
    let mut cur = path.start;
    if cur.t >= t.n_triangles() || cur.k > 2 || cur.end > 1 {
        return Err(Error::DisconnectedPath(0));
    }
    let mut m = Mat2::identity();
    for (i, mv) in path.moves.iter().enumerate() {
        let bad = || Error::DisconnectedPath(i);
        let step = match (g.kind, mv) {
            (RepKind::X, Move::Turn(s)) if s.abs() == 1 => {
                let to = if *s > 0 { next3(cur.k) } else { prev3(cur.k) };
                cur.k = to;
                if *s > 0 {
                    mat_i()
                } else {
                    mat_i().inv()
                }
            }
            (_, Move::Cross) => {
                let (t2, k2) = t.partner(cur.t, cur.k).ok_or_else(bad)?;
                let e = t.edge_at(cur.t, cur.k);
                cur = Node { t: t2, k: k2, end: 1 - cur.end };
                match g.kind {
                    RepKind::X => g.edge_mat.get(&e).ok_or_else(bad)?.clone(),
                    RepKind::A => Mat2::identity(),
                }
            }
            (RepKind::A, Move::Along) => {
                let e = t.edge_at(cur.t, cur.k);
                cur.end = 1 - cur.end;
                g.edge_mat[&e].clone()
            }
            (RepKind::A, Move::Corner) => {
                if cur.end == 1 {
                    // from side k to side k+1: counterclockwise around the vertex
                    let c = next3(cur.k);
                    cur = Node { t: cur.t, k: c, end: 0 };
                    mat_f(&g.corner_m[cur.t][c].neg())
                } else {
                    let c = cur.k;
                    cur = Node { t: cur.t, k: prev3(c), end: 1 };
                    mat_f(&g.corner_m[cur.t][c])
                }
            }
            _ => return Err(bad()),
        };
        m = m.mul(&step);
    }
    Ok(m)
}

fn closed_steps(curve: &CurvePath) -> Result<&[[usize; 3]]> {
    if !matches!(curve.kind, CurveKind::Closed) || curve.steps.is_empty() {
        return Err(Error::OpenCurve);
    }
    Ok(&curve.steps)
}

/// X-graph path following a closed curve once, starting at the port where
/// the first step enters.
pub fn loop_path_x(t: &Triangulation, curve: &CurvePath) -> Result<GraphPath> {
    let steps = closed_steps(curve)?;
    curve.validate(t)?;
    let [t0, in0, _] = steps[0];
    let mut moves = Vec::with_capacity(2 * steps.len());
    for s in steps {
        moves.push(Move::Turn(if s[2] == next3(s[1]) { 1 } else { -1 }));
        moves.push(Move::Cross);
    }
    Ok(GraphPath { start: Node { t: t0, k: in0, end: 0 }, moves })
}

/// A-graph path following a closed curve once. The start node is chosen so
/// that the path closes up.
pub fn loop_path_a(t: &Triangulation, curve: &CurvePath) -> Result<GraphPath> {
    let steps = closed_steps(curve)?;
    curve.validate(t)?;
    // the end bit on arrival depends only on the last step
    let last = steps[steps.len() - 1];
    let arrive = if last[2] == next3(last[1]) { 1 } else { 0 };
    let [t0, in0, _] = steps[0];
    let start = Node { t: t0, k: in0, end: arrive };
    let mut end = arrive;
    let mut moves = Vec::with_capacity(3 * steps.len());
    for s in steps {
        let need = if s[2] == next3(s[1]) { 1 } else { 0 };
        if end != need {
            moves.push(Move::Along);
        }
        moves.push(Move::Corner);
        moves.push(Move::Cross);
        end = need;
    }
    Ok(GraphPath { start, moves })
}

/// End bit of the node where an arc leaving through an external side is
/// attached: the arc end slides counterclockwise along the boundary to the
/// first end of the side.
pub const BOUNDARY_END: u8 = 0;

fn arc_end_bit(e: End) -> u8 {
    match e {
        End::Boundary => BOUNDARY_END,
        // the spiral keeps turning around the near end of the crossed side
        End::Spiral { turn, .. } => {
            if turn > 0 {
                0
            } else {
                1
            }
        }
    }
}

/// A-graph path following an open curve from the vertex at its start to
/// the vertex at its end. Spirals are cut off at the vertex they wind
/// around, boundary ends are moved to a cilium.
pub fn arc_path_a(t: &Triangulation, curve: &CurvePath) -> Result<GraphPath> {
    let CurveKind::Open { start, end: stop } = curve.kind else {
        return Err(Error::InvalidCurve("expected an open curve".into()));
    };
    curve.validate(t)?;
    let steps = &curve.steps;
    let Some(&[t0, in0, _]) = steps.first() else {
        return Err(Error::InvalidCurve("empty arc".into()));
    };
    let first = Node { t: t0, k: in0, end: arc_end_bit(start) };
    let mut end = first.end;
    let mut moves = Vec::with_capacity(3 * steps.len() + 1);
    for (i, s) in steps.iter().enumerate() {
        let need = if s[2] == next3(s[1]) { 1 } else { 0 };
        if end != need {
            moves.push(Move::Along);
        }
        moves.push(Move::Corner);
        if i + 1 < steps.len() {
            moves.push(Move::Cross);
            end = need;
        } else if 1 - need != arc_end_bit(stop) {
            moves.push(Move::Along);
        }
    }
    Ok(GraphPath { start: first, moves })
}

/// The closed curve around a hole, one step per corner.
pub fn vertex_curve(t: &Triangulation, v: usize) -> Result<CurvePath> {
    let vx = t.vertices().get(v).ok_or(Error::NotAHoleVertex(v))?;
    if vx.kind != VertexKind::Hole {
        return Err(Error::NotAHoleVertex(v));
    }
    let steps = vx.corners.iter().map(|&(tt, k)| [tt, k, prev3(k)]).collect();
    Ok(CurvePath::closed(steps, BigRational::one()))
}

pub fn loop_monodromy_x<S: Semifield, K: Scalar>(c: &XChart<S>, curve: &CurvePath) -> Result<Mat2<K>>
where
    S::Elem: PositiveValue,
{
    let g = build_rep_x(c)?;
    path_monodromy(&g, &loop_path_x(c.tri(), curve)?)
}

pub fn loop_monodromy_a<S: Semifield, K: Scalar>(c: &AChart<S>, curve: &CurvePath) -> Result<Mat2<K>>
where
    S::Elem: PositiveValue,
{
    let g = build_rep_a(c)?;
    path_monodromy(&g, &loop_path_a(c.tri(), curve)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementClass {
    Hyperbolic,
    Parabolic,
    Elliptic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub class: ElementClass,
    pub length: Option<f64>,
}

pub const FLOAT_TOL: f64 = 1e-9;

pub fn classify_and_length<K: Scalar>(m: &Mat2<K>) -> Classification {
    let tr = m.trace();
    let class = match tr.mul(&tr).as_rational() {
        Some(q) => {
            let four = BigRational::from_integer(BigInt::from(4));
            match q.cmp(&four) {
                std::cmp::Ordering::Greater => ElementClass::Hyperbolic,
                std::cmp::Ordering::Equal => ElementClass::Parabolic,
                std::cmp::Ordering::Less => ElementClass::Elliptic,
            }
        }
        None => {
            let a = tr.to_f64().abs();
            if (a - 2.0).abs() <= FLOAT_TOL {
                ElementClass::Parabolic
            } else if a > 2.0 {
                ElementClass::Hyperbolic
            } else {
                ElementClass::Elliptic
            }
        }
    };
    let length = match class {
        ElementClass::Hyperbolic => Some(2.0 * (tr.to_f64().abs() / 2.0).acosh()),
        ElementClass::Parabolic => Some(0.0),
        ElementClass::Elliptic => None,
    };
    Classification { class, length }
}

/// Length of the geodesic around a hole, from the loop monodromy.
pub fn hole_loop_length<S: Semifield>(c: &XChart<S>, v: usize) -> Result<f64>
where
    S::Elem: PositiveValue,
{
    let curve = vertex_curve(c.tri(), v)?;
    let m: Mat2<f64> = loop_monodromy_x(c, &curve)?;
    Ok(classify_and_length(&m).length.unwrap_or(0.0))
}

/// `|upper right|` of the path product: the exponent of the signed distance
/// between the horocycles at the two ends.
pub fn horocycle_distance<K: Scalar>(g: &RepGraph<K>, path: &GraphPath) -> Result<f64> {
    if g.kind != RepKind::A {
        return Err(Error::Unsupported("horocycle distance needs an A graph".into()));
    }
    Ok(path_monodromy(g, path)?.upper_right().to_f64().abs())
}

/// Path along a single edge, starting near its first end.
pub fn edge_path(t: &Triangulation, e: EdgeId) -> Result<GraphPath> {
    let (tt, k) = t.location(e, 0).ok_or(Error::UnknownEdge(e))?;
    Ok(GraphPath { start: Node { t: tt, k, end: 0 }, moves: vec![Move::Along] })
}

/// Corner moves going once around the vertex at `node`, ending where they
/// started. Internal vertices only.
pub fn around_vertex(t: &Triangulation, node: Node) -> Result<Vec<Move>> {
    let mut moves = Vec::new();
    let mut cur = node;
    loop {
        moves.push(Move::Corner);
        cur = if cur.end == 1 {
            Node { t: cur.t, k: next3(cur.k), end: 0 }
        } else {
            Node { t: cur.t, k: prev3(cur.k), end: 1 }
        };
        let (t2, k2) = t.partner(cur.t, cur.k).ok_or(Error::DisconnectedPath(moves.len()))?;
        cur = Node { t: t2, k: k2, end: 1 - cur.end };
        moves.push(Move::Cross);
        if cur == node {
            return Ok(moves);
        }
        if moves.len() > 6 * t.n_triangles() + 2 {
            return Err(Error::DisconnectedPath(moves.len()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::XChart;
    use crate::laminations::{flip_curve, torus_slope_curve};
    use crate::semifield::{int, rat, PosFloat, PosRat};
    use crate::surface::SurfaceSig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Q = ExactRatSqrt;

    fn torus_loops() -> Vec<CurvePath> {
        [(1, 0), (0, 1), (1, -1), (2, -1), (1, 2), (3, -2)]
            .iter()
            .map(|&(p, q)| torus_slope_curve(p, q).unwrap().components[0].clone())
            .collect()
    }

    #[test]
    fn generator_identities() {
        let x = rat(3, 5);
        let b = mat_b::<Q>(&Q::sqrt_rat(&x), &Q::sqrt_rat(&(BigRational::one() / &x)));
        assert_eq!(b.mul(&b), Mat2::identity().neg());
        assert_eq!(mat_i::<Q>().pow(3), Mat2::identity().neg());
        assert!(mat_j::<Q>().mul(&mat_j()).proj_eq(&Mat2::identity()));
        assert_eq!(b.det(), Q::one());
        let i: Mat2<Q> = mat_i();
        assert_eq!(i.mul(&i.inv()), Mat2::identity());
    }

    #[test]
    fn exact_sqrt_arithmetic() {
        let a = Q::sqrt_rat(&int(12));
        assert_eq!(a.terms().get(&BigInt::from(3)), Some(&int(2)));
        assert_eq!(a.mul(&a).as_rational(), Some(int(12)));
        let b = Q::sqrt_rat(&rat(2, 9));
        assert_eq!(b.mul(&Q::sqrt_rat(&int(2))).as_rational(), Some(rat(2, 3)));
        assert!((Q::sqrt_rat(&int(7)).to_f64() - 7f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn torus_all_ones_traces() {
        let t = Triangulation::punctured_torus();
        let c = XChart::<PosRat>::ones(&t);
        for (l, want) in torus_loops().iter().zip([3, 3, 3, 6, 15, 15]) {
            let m: Mat2<Q> = loop_monodromy_x(&c, l).unwrap();
            assert_eq!(m.trace().as_rational().map(|q| q.abs()), Some(int(want)), "{:?}", l.steps);
        }
        let v = vertex_curve(&t, 0).unwrap();
        let m: Mat2<Q> = loop_monodromy_x(&c, &v).unwrap();
        assert_eq!(classify_and_length(&m).class, ElementClass::Parabolic);
    }

    #[test]
    fn single_triangle_has_no_b_edges() {
        let t = Triangulation::disc_fan(3).unwrap();
        let g: RepGraph<Q> = build_rep_x(&XChart::<PosRat>::ones(&t)).unwrap();
        assert!(g.edge_matrix(0).is_none());
        let p = GraphPath { start: Node { t: 0, k: 0, end: 0 }, moves: vec![Move::Turn(1); 3] };
        assert!(path_monodromy(&g, &p).unwrap().proj_eq(&Mat2::identity()));
        let p = GraphPath { start: Node { t: 0, k: 0, end: 0 }, moves: vec![Move::Cross] };
        assert_eq!(path_monodromy(&g, &p), Err(Error::DisconnectedPath(0)));
        assert_eq!(path_monodromy(&g, &GraphPath { start: p.start, moves: vec![] }).unwrap(), Mat2::identity());
    }

    #[test]
    fn hole_lengths() {
        let t = Triangulation::punctured_torus();
        let c = XChart::<PosRat>::from_rationals(&t, &[int(2), int(1), int(1)]).unwrap();
        assert!((hole_loop_length(&c, 0).unwrap() - 4f64.ln()).abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for sig in [SurfaceSig::new(1, vec![0]), SurfaceSig::new(0, vec![0, 0, 0, 0]), SurfaceSig::new(1, vec![0, 2])] {
            let t = Triangulation::random(&sig, &mut rng, 6).unwrap();
            let c = XChart::<PosFloat>::from_fn(&t, |_| rng.gen_range(0.2..5.0)).unwrap();
            for v in t.holes() {
                let r = c.hole_invariant(v).unwrap();
                let l = hole_loop_length(&c, v).unwrap();
                assert!((l - r.ln().abs()).abs() < 1e-9 * (1.0 + l), "{l} vs {r}");
            }
        }
        let d = Triangulation::disc_fan(5).unwrap();
        assert_eq!(hole_loop_length(&XChart::<PosRat>::ones(&d), 0), Err(Error::NotAHoleVertex(0)));
    }

    #[test]
    fn traces_invariant_under_flips() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = Triangulation::punctured_torus();
        for _ in 0..10 {
            let vals: Vec<BigRational> = (0..3).map(|_| rat(rng.gen_range(1..6i64).pow(2), rng.gen_range(1..5i64).pow(2))).collect();
            let c = XChart::<PosRat>::from_rationals(&t, &vals).unwrap();
            let e = rng.gen_range(0..3);
            let c2 = c.mutate(e).unwrap();
            for l in torus_loops() {
                let l2 = flip_curve(&t, &l, e).unwrap();
                let m1: Mat2<Q> = loop_monodromy_x(&c, &l).unwrap();
                let m2: Mat2<Q> = loop_monodromy_x(&c2, &l2).unwrap();
                assert_eq!(m1.trace().as_rational().map(|q| q.abs()), m2.trace().as_rational().map(|q| q.abs()));
            }
        }
    }

    #[test]
    fn a_and_x_traces_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = Triangulation::punctured_torus();
        for _ in 0..10 {
            let vals: Vec<BigRational> = (0..3).map(|_| rat(rng.gen_range(1..9), rng.gen_range(1..9))).collect();
            let a = AChart::<PosRat>::from_rationals(&t, &vals).unwrap();
            let x = a.p_map();
            for l in torus_loops() {
                let ma: Mat2<Q> = loop_monodromy_a(&a, &l).unwrap();
                let mx: Mat2<Q> = loop_monodromy_x(&x, &l).unwrap();
                assert_eq!(ma.trace().as_rational().unwrap().abs(), mx.trace().as_rational().unwrap().abs());
            }
        }
    }

    #[test]
    fn horocycles() {
        let t = Triangulation::punctured_torus();
        let a = AChart::<PosRat>::from_rationals(&t, &[int(2), rat(1, 3), int(5)]).unwrap();
        let g: RepGraph<Q> = build_rep_a(&a).unwrap();
        for e in 0..3 {
            let p = edge_path(&t, e).unwrap();
            assert!((horocycle_distance(&g, &p).unwrap() - rat_to_f64(a.get(e))).abs() < 1e-12);
            // going around the vertex first does not change the distance
            let mut q = p.clone();
            q.moves = around_vertex(&t, p.start).unwrap();
            q.moves.push(Move::Along);
            assert!((horocycle_distance(&g, &q).unwrap() - rat_to_f64(a.get(e))).abs() < 1e-12);
            let corner = path_monodromy(&g, &GraphPath { start: p.start, moves: around_vertex(&t, p.start).unwrap() }).unwrap();
            assert!(corner.m[0][1].as_rational().unwrap().is_zero());
        }
    }

    #[test]
    fn torus_arcs_give_markov_numbers() {
        let t = Triangulation::punctured_torus();
        let a = AChart::<PosRat>::ones(&t);
        let g: RepGraph<Q> = build_rep_a(&a).unwrap();
        for (l, want) in torus_loops().iter().zip([1.0, 1.0, 1.0, 2.0, 5.0, 5.0]) {
            let p = loop_path_a(&t, l).unwrap();
            assert!((horocycle_distance(&g, &p).unwrap() - want).abs() < 1e-12);
        }
    }
}
