//! Markov triples from the equiharmonic punctured torus.
//!
//! Faces of the Farey tessellation are labelled by `p/q ∈ QP¹`; the three
//! faces around the base triangle `{0, 1, ∞}` carry Markov number 1 and the
//! face created across an edge gets `3·M(L)·M(R) - M(opposite)`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::charts::{AChart, XChart};
use crate::laminations::torus_slope_curve;
use crate::monodromy::{build_rep_a, horocycle_distance, loop_path_a, ExactRatSqrt, RepGraph, Scalar};
use crate::semifield::{fmt_rat, PosRat};
use crate::surface::{triangulations_isomorphic, Triangulation};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MarkovTriple {
    pub x: BigInt,
    pub y: BigInt,
    pub z: BigInt,
}

pub fn is_markov(x: &BigInt, y: &BigInt, z: &BigInt) -> bool {
    x.is_positive() && y.is_positive() && z.is_positive() && x * x + y * y + z * z == BigInt::from(3) * x * y * z
}

impl MarkovTriple {
    pub fn new(x: BigInt, y: BigInt, z: BigInt) -> Result<Self> {
        if !is_markov(&x, &y, &z) {
            return Err(Error::NotMarkov(format!("({x},{y},{z})")));
        }
        Ok(MarkovTriple { x, y, z })
    }

    pub fn ones() -> Self {
        MarkovTriple { x: BigInt::one(), y: BigInt::one(), z: BigInt::one() }
    }

    pub fn from_u64(x: u64, y: u64, z: u64) -> Result<Self> {
        MarkovTriple::new(x.into(), y.into(), z.into())
    }

    pub fn is_valid(&self) -> bool {
        is_markov(&self.x, &self.y, &self.z)
    }

    pub fn sorted(&self) -> [BigInt; 3] {
        let mut v = [self.x.clone(), self.y.clone(), self.z.clone()];
        v.sort();
        v
    }

    pub fn max(&self) -> BigInt {
        self.sorted()[2].clone()
    }
}

/// The flip of the torus read on thirds of traces: with the triple read as
/// `(Z, X, Y)`, it becomes `(X, 3YZ - X, Z)`.
pub fn markov_step(t: &MarkovTriple) -> Result<MarkovTriple> {
    if !t.is_valid() {
        return Err(Error::NotMarkov(format!("({},{},{})", t.x, t.y, t.z)));
    }
    let (z, x, y) = (&t.x, &t.y, &t.z);
    MarkovTriple::new(x.clone(), BigInt::from(3) * y * z - x, z.clone())
}

pub fn cyclic_step(t: &MarkovTriple) -> Result<MarkovTriple> {
    MarkovTriple::new(t.y.clone(), t.z.clone(), t.x.clone())
}

/// Point of `QP¹`; `q = 0` is infinity. Stored with `q ≥ 0` and `gcd = 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slope {
    pub p: BigInt,
    pub q: BigInt,
}

impl Slope {
    pub fn new(p: BigInt, q: BigInt) -> Result<Self> {
        if p.is_zero() && q.is_zero() {
            return Err(Error::Parse("0/0 is not a slope".into()));
        }
        if !p.gcd(&q).is_one() {
            return Err(Error::Parse(format!("{p}/{q} is not reduced")));
        }
        if q.is_negative() || (q.is_zero() && p.is_negative()) {
            return Ok(Slope { p: -p, q: -q });
        }
        Ok(Slope { p, q })
    }

    pub fn from_i64(p: i64, q: i64) -> Result<Self> {
        Slope::new(p.into(), q.into())
    }

    pub fn infinity() -> Self {
        Slope { p: BigInt::one(), q: BigInt::zero() }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Slope { p: r.numer().clone(), q: r.denom().clone() }
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        if self.q.is_zero() {
            None
        } else {
            Some(BigRational::new(self.p.clone(), self.q.clone()))
        }
    }
}

impl std::fmt::Display for Slope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.q.is_zero() {
            write!(f, "inf")
        } else if self.q.is_one() {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}/{}", self.p, self.q)
        }
    }
}

// Farey vertices as integer vectors; infinity is (±1, 0) depending on which
// side of the real line the walk is on.
type V2 = (BigInt, BigInt);

fn vadd(a: &V2, b: &V2) -> V2 {
    (&a.0 + &b.0, &a.1 + &b.1)
}

/// `sign(a - b)` for `a = x/y`, `b = u/v` with nonnegative denominators, one
/// of which may be an infinity vector.
fn cmp_frac(a: &V2, b: &V2) -> std::cmp::Ordering {
    (&a.0 * &b.1).cmp(&(&b.0 * &a.1))
}

fn to_slope(v: &V2) -> Slope {
    Slope::new(v.0.clone(), v.1.clone()).expect("Farey vertices are primitive")
}

/// `M(p/q)` by walking down the Farey tessellation from the base triangle.
pub fn markov_of_slope(s: &Slope) -> BigInt {
    let one = BigInt::one();
    let zero = BigInt::zero();
    if s.q.is_zero() || (s.q.is_one() && (s.p.is_zero() || s.p.is_one())) {
        return one;
    }
    let target: V2 = (s.p.clone(), s.q.clone());
    let v0: V2 = (zero.clone(), one.clone());
    let v1: V2 = (one.clone(), one.clone());
    // interval (L, R) inside a base edge; both ends and the opposite vertex have M = 1
    let (mut l, mut r) = if cmp_frac(&target, &v0).is_lt() {
        ((-&one, zero.clone()), v0)
    } else if cmp_frac(&target, &v1).is_lt() {
        (v0, v1)
    } else {
        (v1, (one.clone(), zero))
    };
    let (mut ml, mut mr, mut mo) = (one.clone(), one.clone(), one.clone());
    loop {
        let n = vadd(&l, &r);
        let mn = BigInt::from(3) * &ml * &mr - &mo;
        match cmp_frac(&target, &n) {
            std::cmp::Ordering::Equal => return mn,
            std::cmp::Ordering::Less => {
                mo = mr;
                r = n;
                mr = mn;
            }
            std::cmp::Ordering::Greater => {
                mo = ml;
                l = n;
                ml = mn;
            }
        }
    }
}

pub fn markov_of_rational(p: &BigInt, q: &BigInt) -> Result<BigInt> {
    Ok(markov_of_slope(&Slope::new(p.clone(), q.clone())?))
}

/// The lamination coding of a simple curve on the torus by its crossing
/// numbers with the three edges: one of them is the sum of the other two.
pub fn slope_from_coding(n1: i64, n2: i64, n3: i64) -> Result<Slope> {
    if n1 < 0 || n2 < 0 || n3 < 0 {
        return Err(Error::InvalidCurve(format!("({n1},{n2},{n3})")));
    }
    if n3 == n1 + n2 {
        Slope::from_i64(-n2, n1)
    } else if n1 == n2 + n3 || n2 == n3 + n1 {
        Slope::from_i64(n2, n1)
    } else {
        Err(Error::InvalidCurve(format!("({n1},{n2},{n3}) has no entry equal to the sum of the others")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub slope: Slope,
    pub markov: BigInt,
    pub depth: usize,
}

#[derive(Clone, Debug)]
pub struct MarkovTree {
    pub faces: Vec<Face>,
    /// Farey triangles as indices into `faces`.
    pub triangles: Vec<[usize; 3]>,
}

struct Frame {
    l: V2,
    r: V2,
    il: usize,
    ir: usize,
    io: usize,
    depth: usize,
}

/// All Farey triangles within `depth` steps of the base triangle. The faces
/// created at step `d` have `depth = d`; the three base faces have depth 0.
pub fn markov_tree(depth: usize) -> MarkovTree {
    let one = BigInt::one();
    let zero = BigInt::zero();
    let mut faces = vec![
        Face { slope: Slope::from_i64(0, 1).unwrap(), markov: one.clone(), depth: 0 },
        Face { slope: Slope::from_i64(1, 1).unwrap(), markov: one.clone(), depth: 0 },
        Face { slope: Slope::infinity(), markov: one.clone(), depth: 0 },
    ];
    let mut triangles = vec![[0, 1, 2]];
    let mut stack = vec![
        Frame { l: (-&one, zero.clone()), r: (zero.clone(), one.clone()), il: 2, ir: 0, io: 1, depth: 1 },
        Frame { l: (zero.clone(), one.clone()), r: (one.clone(), one.clone()), il: 0, ir: 1, io: 2, depth: 1 },
        Frame { l: (one.clone(), one.clone()), r: (one.clone(), zero.clone()), il: 1, ir: 2, io: 0, depth: 1 },
    ];
    while let Some(f) = stack.pop() {
        if f.depth > depth {
            continue;
        }
        let n = vadd(&f.l, &f.r);
        let m = BigInt::from(3) * &faces[f.il].markov * &faces[f.ir].markov - &faces[f.io].markov;
        let id = faces.len();
        faces.push(Face { slope: to_slope(&n), markov: m, depth: f.depth });
        triangles.push([f.il, id, f.ir]);
        stack.push(Frame { l: n.clone(), r: f.r, il: id, ir: f.ir, io: f.il, depth: f.depth + 1 });
        stack.push(Frame { l: f.l, r: n, il: f.il, ir: id, io: f.ir, depth: f.depth + 1 });
    }
    MarkovTree { faces, triangles }
}

impl MarkovTree {
    pub fn triple(&self, t: usize) -> MarkovTriple {
        let [a, b, c] = self.triangles[t];
        MarkovTriple { x: self.faces[a].markov.clone(), y: self.faces[b].markov.clone(), z: self.faces[c].markov.clone() }
    }

    pub fn triples(&self) -> impl Iterator<Item = MarkovTriple> + '_ {
        (0..self.triangles.len()).map(|t| self.triple(t))
    }

    pub fn numbers(&self) -> BTreeSet<BigInt> {
        self.faces.iter().map(|f| f.markov.clone()).collect()
    }

    /// Faces sorted by slope, one line each.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<&Face> = self.faces.iter().collect();
        rows.sort_by(|a, b| slope_key(&a.slope).cmp(&slope_key(&b.slope)));
        let mut out = String::from("slope,markov,depth\n");
        for f in rows {
            out.push_str(&format!("{},{},{}\n", f.slope, f.markov, f.depth));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut rows: Vec<&Face> = self.faces.iter().collect();
        rows.sort_by(|a, b| slope_key(&a.slope).cmp(&slope_key(&b.slope)));
        let faces: Vec<Value> =
            rows.iter().map(|f| json!({"slope": f.slope.to_string(), "markov": f.markov.to_string(), "depth": f.depth})).collect();
        json!({"faces": faces})
    }

    /// Markov numbers attached to more faces than the six images of one
    /// face under the symmetries of `{0, 1, ∞}`. Reported, never asserted.
    pub fn duplicate_report(&self) -> Vec<(BigInt, usize)> {
        let mut count: BTreeMap<BigInt, BTreeSet<Slope>> = BTreeMap::new();
        for f in &self.faces {
            count.entry(f.markov.clone()).or_default().insert(f.slope.clone());
        }
        count.into_iter().filter(|(_, s)| s.len() > 6).map(|(m, s)| (m, s.len())).collect()
    }
}

// total order on QP¹ with infinity last
fn slope_key(s: &Slope) -> (bool, BigRational) {
    match s.to_rational() {
        Some(r) => (false, r),
        None => (true, BigRational::zero()),
    }
}

/// Walks the tree of unordered triples rooted at `(1,1,1)`: its child is
/// `(1,1,2)`, then `(1,2,5)`, and from there every `(a, b, c)` with `c`
/// largest has the children `(a, c, 3ac - b)` and `(b, c, 3bc - a)`.
/// Checks the Markov equation on every triple down to `depth` without
/// storing anything. Returns `(checked, failures)`.
pub fn verify_tree(depth: usize) -> (u64, u64) {
    let three = BigInt::from(3);
    let mut checked = 0u64;
    let mut bad = 0u64;
    let mut stack: Vec<([BigInt; 3], usize)> = vec![([1.into(), 1.into(), 1.into()], 0)];
    while let Some((t, d)) = stack.pop() {
        checked += 1;
        let [a, b, c] = &t;
        if !is_markov(a, b, c) {
            bad += 1;
        }
        if d == depth {
            continue;
        }
        match d {
            0 => stack.push(([1.into(), 1.into(), 2.into()], 1)),
            1 => stack.push(([1.into(), 2.into(), 5.into()], 2)),
            _ => {
                let n1 = &three * a * c - b;
                let n2 = &three * b * c - a;
                stack.push(([a.clone(), c.clone(), n1], d + 1));
                stack.push(([b.clone(), c.clone(), n2], d + 1));
            }
        }
    }
    (checked, bad)
}

/// Triples from the tree with largest entry at most `bound`, sorted.
pub fn tree_solutions(bound: u64) -> BTreeSet<[u64; 3]> {
    let b = BigInt::from(bound);
    let mut out = BTreeSet::new();
    let one = BigInt::one();
    if bound >= 1 {
        out.insert([1, 1, 1]);
    }
    let mut stack: Vec<(BigInt, BigInt, BigInt)> = vec![(one.clone(), one.clone(), one.clone()); 3];
    while let Some((l, r, o)) = stack.pop() {
        let n = BigInt::from(3) * &l * &r - &o;
        if n > b {
            continue;
        }
        let mut t = [l.to_u64().unwrap(), n.to_u64().unwrap(), r.to_u64().unwrap()];
        t.sort();
        out.insert(t);
        stack.push((n.clone(), r.clone(), l.clone()));
        stack.push((l, n, r));
    }
    out
}

/// All positive solutions of `X²+Y²+Z² = 3XYZ` with entries at most
/// `bound`, as sorted triples. Independent of the tree: for a sorted
/// solution `X ≤ Y ≤ Z`, `Z` is the larger root of the quadratic in `Z`, so
/// `XY ≤ 2Z/3`, which bounds the candidate pairs.
pub fn enumerate_solutions(bound: u64) -> BTreeSet<[u64; 3]> {
    let mut out = BTreeSet::new();
    let lim = 2 * bound / 3 + 1;
    let mut x = 1u64;
    while x * x <= lim {
        let mut y = x;
        while x * y <= lim {
            let (xb, yb) = (x as u128, y as u128);
            let s = 3 * xb * yb;
            let disc = s * s - 4 * (xb * xb + yb * yb);
            let r = disc.sqrt();
            if r * r == disc && (s + r) % 2 == 0 {
                for z in [(s - r) / 2, (s + r) / 2] {
                    if z >= 1 && z <= bound as u128 {
                        let mut t = [x, y, z as u64];
                        t.sort();
                        out.insert(t);
                    }
                }
            }
            y += 1;
        }
        x += 1;
    }
    out
}

/// `(1/3)(a^{1/2}b^{1/2} + a^{1/2}b^{-1/2} + a^{-1/2}b^{-1/2})`.
fn third_trace(a: &BigRational, b: &BigRational) -> ExactRatSqrt {
    let sa = ExactRatSqrt::sqrt_rat(a);
    let sb = ExactRatSqrt::sqrt_rat(b);
    let ia = ExactRatSqrt::sqrt_rat(&a.recip());
    let ib = ExactRatSqrt::sqrt_rat(&b.recip());
    let sum = sa.mul(&sb).add(&sa.mul(&ib)).add(&ia.mul(&ib));
    sum.mul(&ExactRatSqrt::rational(BigRational::new(1.into(), 3.into())))
}

/// Thirds of the traces of the three simple loops of the torus, as
/// `(X, Y, Z)`; `Z` belongs to the curve meeting the `x` and `y` edges.
/// On `Triangulation::punctured_torus` the arguments `x, y, z` are the
/// values on edges 1, 0, 2.
pub fn markov_from_x(x: &BigRational, y: &BigRational, z: &BigRational) -> Result<[ExactRatSqrt; 3]> {
    for v in [x, y, z] {
        if !v.is_positive() {
            return Err(Error::DomainViolation(fmt_rat(v)));
        }
    }
    Ok([third_trace(y, z), third_trace(z, x), third_trace(x, y)])
}

/// `markov_from_x` read off a chart on any triangulation of the punctured
/// torus, transported to `Triangulation::punctured_torus` first.
pub fn markov_from_chart(c: &XChart<PosRat>) -> Result<[ExactRatSqrt; 3]> {
    let std = Triangulation::punctured_torus();
    let iso = triangulations_isomorphic(c.tri(), &std)
        .ok_or_else(|| Error::Unsupported("Markov triples need the punctured torus".into()))?;
    let mut v = vec![BigRational::zero(); 3];
    for (e, &f) in iso.iter().enumerate() {
        v[f] = c.get(e).clone();
    }
    markov_from_x(&v[1], &v[0], &v[2])
}

/// `X²+Y²+Z²-3XYZ`, which equals `-(xyz - 2 + 1/(xyz))/9`.
pub fn markov_defect(t: &[ExactRatSqrt; 3]) -> ExactRatSqrt {
    let [x, y, z] = t;
    let three = ExactRatSqrt::rational(BigRational::from_integer(3.into()));
    x.mul(x).add(&y.mul(y)).add(&z.mul(z)).sub(&three.mul(x).mul(y).mul(z))
}

pub fn predicted_defect(x: &BigRational, y: &BigRational, z: &BigRational) -> BigRational {
    let p = x * y * z;
    -(&p - BigRational::from_integer(2.into()) + p.recip()) / BigRational::from_integer(9.into())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoratedTriple {
    pub u: BigRational,
    pub v: BigRational,
    pub w: BigRational,
    pub area: BigRational,
}

impl DecoratedTriple {
    /// The triple together with the area it determines.
    pub fn from_uvw(u: BigRational, v: BigRational, w: BigRational) -> Result<Self> {
        for s in [&u, &v, &w] {
            if !s.is_positive() {
                return Err(Error::DomainViolation(fmt_rat(s)));
            }
        }
        let area = (&u * &u + &v * &v + &w * &w) / (&u * &v * &w);
        Ok(DecoratedTriple { u, v, w, area })
    }

    pub fn new(u: BigRational, v: BigRational, w: BigRational, area: BigRational) -> Result<Self> {
        let t = DecoratedTriple::from_uvw(u, v, w)?;
        if t.area != area {
            return Err(Error::NotOnAreaLocus(format!("area {} but expected {}", fmt_rat(&area), fmt_rat(&t.area))));
        }
        Ok(t)
    }

    pub fn on_locus(&self) -> bool {
        &self.u * &self.u + &self.v * &self.v + &self.w * &self.w == &self.u * &self.v * &self.w * &self.area
    }
}

/// `(U,V,W) ↦ (W, (U²+W²)/V, U)`, checked against `(W, UWA-V, U)`.
pub fn decorated_step(t: &DecoratedTriple) -> Result<DecoratedTriple> {
    if !t.on_locus() {
        return Err(Error::NotOnAreaLocus(format!("({},{},{})", fmt_rat(&t.u), fmt_rat(&t.v), fmt_rat(&t.w))));
    }
    let ptolemy = (&t.u * &t.u + &t.w * &t.w) / &t.v;
    let linear = &t.u * &t.w * &t.area - &t.v;
    if ptolemy != linear {
        return Err(Error::NotOnAreaLocus("the two flip rules disagree".into()));
    }
    let n = DecoratedTriple { u: t.w.clone(), v: ptolemy, w: t.u.clone(), area: t.area.clone() };
    debug_assert!(n.on_locus());
    Ok(n)
}

/// `ψ(p/q) = arcosh(3M/2)/q`; the slope must be finite with `q > 0`.
pub fn psi(s: &Slope) -> Result<f64> {
    if s.q.is_zero() {
        return Err(Error::DomainViolation("psi at infinity".into()));
    }
    let m = markov_of_slope(s);
    let y = 1.5 * m.to_f64().unwrap_or(f64::INFINITY);
    let ac = if y.is_finite() { y.acosh() } else { (2.0f64).ln() + 1.5f64.ln() + m.bits() as f64 * 2f64.ln() };
    Ok(ac / s.q.to_f64().unwrap())
}

pub fn psi_probe(samples: &[Slope]) -> Result<Vec<(Slope, f64)>> {
    samples.iter().map(|s| Ok((s.clone(), psi(s)?))).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityReport {
    pub checked: usize,
    pub violations: usize,
    pub worst: f64,
}

/// For Farey neighbours `a/b < c/d` inside `[0, 1]`, compares `ψ` at the
/// mediant with the chord through the two endpoints. Reported only.
pub fn psi_convexity_report(tree: &MarkovTree, limit: usize) -> ConvexityReport {
    let mut checked = 0;
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for t in &tree.triangles[1..] {
        if checked >= limit {
            break;
        }
        let (l, n, r) = (&tree.faces[t[0]].slope, &tree.faces[t[1]].slope, &tree.faces[t[2]].slope);
        let in_unit = |s: &Slope| s.q.is_positive() && !s.p.is_negative() && s.p <= s.q;
        if !(in_unit(l) && in_unit(r)) {
            continue;
        }
        let f = |s: &Slope| s.to_rational().map(|r| crate::semifield::rat_to_f64(&r)).unwrap();
        let (xl, xn, xr) = (f(l), f(n), f(r));
        let (pl, pn, pr) = (psi(l).unwrap(), psi(n).unwrap(), psi(r).unwrap());
        let chord = pl + (pr - pl) * (xn - xl) / (xr - xl);
        let d = pn - chord;
        worst = worst.max(d);
        if d > 1e-9 {
            violations += 1;
        }
        checked += 1;
    }
    ConvexityReport { checked, violations, worst }
}

/// The exponent of the horocycle distance along the puncture-to-puncture
/// arc disjoint from the simple curve of torus slope `(p, q)`, at
/// `U = V = W = 1`.
pub fn dual_arc_exponential(p: i64, q: i64) -> Result<f64> {
    let t = Triangulation::punctured_torus();
    let a = AChart::<PosRat>::ones(&t);
    let g: RepGraph<ExactRatSqrt> = build_rep_a(&a)?;
    let m = torus_slope_curve(p, q)?;
    let curve = m.components.first().ok_or_else(|| Error::InvalidCurve(format!("slope ({p},{q})")))?;
    horocycle_distance(&g, &loop_path_a(&t, curve)?)
}

/// The coding slope of the torus curve `(p, q)`: crossing numbers
/// `(|p|, |q|, |p+q|)` with the three edges.
pub fn torus_curve_slope(p: i64, q: i64) -> Result<Slope> {
    slope_from_coding(p.abs(), q.abs(), (p + q).abs())
}

pub fn triple_to_json(t: &MarkovTriple) -> Value {
    json!([t.x.to_string(), t.y.to_string(), t.z.to_string()])
}
