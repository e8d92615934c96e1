//! Curve-level laminations: dual-path words, coordinates, reconstruction
//! and intersection numbers.
//!
//! A step `[t, in, out]` crosses triangle `t` from side `in` to side `out`.
//! Its turn is `+1` when `out = in + 1 (mod 3)` and `-1` otherwise. A curve
//! that keeps turning the same way circles one vertex; a change of turn at
//! a crossing is exactly a signed (Z-shaped) crossing.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::charts::{AChart, XChart};
use crate::error::{Error, Result};
use crate::semifield::{fmt_rat, parse_rat, TropQ, TropZ};
use crate::surface::{next3, prev3, EdgeId, Triangulation, VertexKind};

pub type Step = [usize; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum End {
    /// Endpoint on the external side crossed by the terminal step.
    Boundary,
    /// Infinite spiral into a hole. `turn` is the turn a traveller heading
    /// into the hole keeps making.
    Spiral { vertex: usize, turn: i8 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CurveKind {
    Closed,
    Open { start: End, end: End },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvePath {
    pub kind: CurveKind,
    pub steps: Vec<Step>,
    pub weight: BigRational,
}

pub fn turn(s: &Step) -> i8 {
    if s[2] == next3(s[1]) {
        1
    } else {
        -1
    }
}

/// Corner vertex the step turns around.
pub fn step_vertex(t: &Triangulation, s: &Step) -> usize {
    if turn(s) > 0 {
        t.corner_vertex(s[0], s[2])
    } else {
        t.corner_vertex(s[0], s[1])
    }
}

pub fn reverse_word(w: &[Step]) -> Vec<Step> {
    w.iter().rev().map(|s| [s[0], s[2], s[1]]).collect()
}

impl CurvePath {
    pub fn closed(steps: Vec<Step>, weight: BigRational) -> Self {
        CurvePath { kind: CurveKind::Closed, steps, weight }
    }

    pub fn open(steps: Vec<Step>, start: End, end: End, weight: BigRational) -> Self {
        CurvePath { kind: CurveKind::Open { start, end }, steps, weight }
    }

    pub fn is_closed(&self) -> bool {
        self.kind == CurveKind::Closed
    }

    pub fn is_contractible(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn has_spiral(&self) -> bool {
        matches!(self.kind, CurveKind::Open { start, end } if matches!(start, End::Spiral { .. }) || matches!(end, End::Spiral { .. }))
    }

    pub fn with_weight(&self, w: BigRational) -> Self {
        CurvePath { weight: w, ..self.clone() }
    }

    pub fn reversed(&self) -> Self {
        let kind = match self.kind {
            CurveKind::Closed => CurveKind::Closed,
            CurveKind::Open { start, end } => CurveKind::Open { start: end, end: start },
        };
        CurvePath { kind, steps: reverse_word(&self.steps), weight: self.weight.clone() }
    }

    /// Checks that the word is a path in the dual graph with the declared ends.
    pub fn validate(&self, t: &Triangulation) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidCurve(m));
        for s in &self.steps {
            if s[0] >= t.n_triangles() || s[1] > 2 || s[2] > 2 {
                return bad(format!("step {s:?} out of range"));
            }
        }
        let n = self.steps.len();
        let links = if self.is_closed() { n } else { n.saturating_sub(1) };
        for i in 0..links {
            let a = self.steps[i];
            let b = self.steps[(i + 1) % n];
            if t.partner(a[0], a[2]) != Some((b[0], b[1])) {
                return bad(format!("steps {i} and {} do not share an edge", (i + 1) % n));
            }
        }
        if let CurveKind::Open { start, end } = self.kind {
            if n == 0 {
                return Ok(());
            }
            let first = self.steps[0];
            let last = self.steps[n - 1];
            for (e, ext) in [(start, t.partner(first[0], first[1]).is_none()), (end, t.partner(last[0], last[2]).is_none())] {
                match e {
                    End::Boundary if !ext => return bad("boundary end on an internal side".into()),
                    End::Spiral { .. } if ext => return bad("spiral end on an external side".into()),
                    _ => {}
                }
            }
            if let End::Spiral { vertex, turn: tu } = end {
                if turn(&last) != tu || step_vertex(t, &last) != vertex {
                    return Err(Error::InconsistentSpiral(vertex));
                }
            }
            if let End::Spiral { vertex, turn: tu } = start {
                if -turn(&first) != tu || step_vertex(t, &first) != vertex {
                    return Err(Error::InconsistentSpiral(vertex));
                }
            }
        }
        Ok(())
    }

    /// Removes backtracks until none remain. A closed word may become empty,
    /// which marks a contractible curve.
    pub fn reduce(&self) -> CurvePath {
        let mut w = self.steps.clone();
        let closed = self.is_closed();
        loop {
            let n = w.len();
            let pos = (0..n).find(|&i| {
                let s = w[i];
                s[1] == s[2] && (closed || (i > 0 && i + 1 < n))
            });
            let Some(i) = pos else { break };
            if closed {
                if n <= 2 {
                    w.clear();
                    break;
                }
                let p = (i + n - 1) % n;
                let q = (i + 1) % n;
                let merged = [w[p][0], w[p][1], w[q][2]];
                let mut nw = Vec::with_capacity(n - 2);
                for k in 0..n {
                    if k == i || k == q {
                        continue;
                    }
                    nw.push(if k == p { merged } else { w[k] });
                }
                w = nw;
            } else {
                let merged = [w[i - 1][0], w[i - 1][1], w[i + 1][2]];
                w.splice(i - 1..i + 2, [merged]);
            }
        }
        if !closed && w.len() == 1 && w[0][1] == w[0][2] && matches!(self.kind, CurveKind::Open { start: End::Boundary, .. }) {
            w.clear();
        }
        CurvePath { kind: self.kind, steps: w, weight: self.weight.clone() }
    }

    /// Canonical representative: rotation and direction chosen minimal.
    fn canonical_key(&self) -> (CurveKind, Vec<Step>) {
        match self.kind {
            CurveKind::Closed => {
                let mut best: Option<Vec<Step>> = None;
                for w in [self.steps.clone(), reverse_word(&self.steps)] {
                    for r in 0..w.len().max(1) {
                        let mut c = w.clone();
                        c.rotate_left(r.min(w.len()));
                        if best.as_ref().map_or(true, |b| c < *b) {
                            best = Some(c);
                        }
                    }
                }
                (CurveKind::Closed, best.unwrap_or_default())
            }
            CurveKind::Open { .. } => {
                let r = self.reversed();
                let a = (self.kind, self.steps.clone());
                let b = (r.kind, r.steps);
                if b < a {
                    b
                } else {
                    a
                }
            }
        }
    }

    pub fn to_json(&self) -> Value {
        let end_json = |e: End| match e {
            End::Boundary => json!("boundary"),
            End::Spiral { vertex, turn } => json!({"spiral": vertex, "turn": turn}),
        };
        let mut v = json!({
            "kind": if self.is_closed() { "closed" } else { "open" },
            "steps": self.steps,
            "weight": fmt_rat(&self.weight),
        });
        if let CurveKind::Open { start, end } = self.kind {
            v["ends"] = json!([end_json(start), end_json(end)]);
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let perr = |m: &str| Error::Parse(m.to_string());
        let steps: Vec<Step> = serde_json::from_value(v.get("steps").cloned().ok_or_else(|| perr("missing steps"))?)
            .map_err(|e| Error::Parse(e.to_string()))?;
        let weight = match v.get("weight") {
            None => BigRational::one(),
            Some(Value::String(s)) => parse_rat(s)?,
            Some(Value::Number(n)) => parse_rat(&n.to_string())?,
            Some(_) => return Err(perr("bad weight")),
        };
        let parse_end = |e: &Value| -> Result<End> {
            if e.as_str() == Some("boundary") {
                return Ok(End::Boundary);
            }
            let vertex = e.get("spiral").and_then(Value::as_u64).ok_or_else(|| perr("bad end"))? as usize;
            let turn = e.get("turn").and_then(Value::as_i64).ok_or_else(|| perr("bad turn"))?;
            if turn != 1 && turn != -1 {
                return Err(perr("turn must be 1 or -1"));
            }
            Ok(End::Spiral { vertex, turn: turn as i8 })
        };
        let kind = match v.get("kind").and_then(Value::as_str) {
            Some("closed") => CurveKind::Closed,
            Some("open") => {
                let ends = v.get("ends").and_then(Value::as_array);
                match ends {
                    Some(a) if a.len() == 2 => CurveKind::Open { start: parse_end(&a[0])?, end: parse_end(&a[1])? },
                    None => CurveKind::Open { start: End::Boundary, end: End::Boundary },
                    _ => return Err(perr("ends must have two entries")),
                }
            }
            _ => return Err(perr("kind must be closed or open")),
        };
        Ok(CurvePath { kind, steps, weight })
    }
}

/// Sums the weights of equal curves and drops zero weights.
pub fn merge_curves(curves: Vec<CurvePath>) -> Vec<CurvePath> {
    let mut acc: BTreeMap<(CurveKind, Vec<Step>), BigRational> = BTreeMap::new();
    for c in curves {
        if c.is_contractible() {
            continue;
        }
        *acc.entry(c.canonical_key()).or_insert_with(BigRational::zero) += c.weight.clone();
    }
    acc.into_iter()
        .filter(|(_, w)| !w.is_zero())
        .map(|((kind, steps), weight)| CurvePath { kind, steps, weight })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaminationKind {
    A,
    X,
}

#[derive(Clone, Debug)]
pub struct NormalMulticurve {
    pub kind: LaminationKind,
    pub tri: Triangulation,
    /// Normalization `ã = u·𝖺 + v` of the integral system (A type).
    pub u: BigInt,
    pub v: BigInt,
    /// A type: marked points `2ã` per edge. X type: signed-crossing count `|𝗑|`.
    pub points: Vec<BigInt>,
    /// A type: arcs at corner `k` of each triangle (between sides `k-1` and `k`).
    pub corners: Vec<[BigInt; 3]>,
    pub components: Vec<CurvePath>,
    /// X type: orientation of every hole that curves spiral into.
    pub orientations: BTreeMap<usize, i8>,
}

impl NormalMulticurve {
    pub fn from_curves(kind: LaminationKind, tri: &Triangulation, components: Vec<CurvePath>) -> Self {
        NormalMulticurve {
            kind,
            tri: tri.clone(),
            u: BigInt::one(),
            v: BigInt::zero(),
            points: Vec::new(),
            corners: Vec::new(),
            components,
            orientations: BTreeMap::new(),
        }
    }

    /// Matching equations and triangle inequalities of the point system.
    pub fn check_normal_system(&self) -> bool {
        if self.kind != LaminationKind::A {
            return true;
        }
        let t = &self.tri;
        (0..t.n_triangles()).all(|i| {
            let m = &self.corners[i];
            let p: Vec<&BigInt> = (0..3).map(|k| &self.points[t.edge_at(i, k)]).collect();
            (0..3).all(|k| {
                !m[k].is_negative()
                    && *p[k] == &m[k] + &m[next3(k)]
                    && *p[k] <= p[next3(k)] + p[prev3(k)]
                    && (p[next3(k)] - p[prev3(k)]).abs() <= *p[k]
            })
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "type": match self.kind { LaminationKind::A => "A", LaminationKind::X => "X" },
            "u": self.u.to_string(),
            "v": self.v.to_string(),
            "points": self.points.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "corners": self.corners.iter().map(|c| c.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "components": self.components.iter().map(CurvePath::to_json).collect::<Vec<_>>(),
            "orientations": self.orientations.iter().map(|(v, o)| json!([v, o])).collect::<Vec<_>>(),
        })
    }
}

fn prepare(t: &Triangulation, curves: &[CurvePath]) -> Result<Vec<CurvePath>> {
    let mut out = Vec::with_capacity(curves.len());
    for c in curves {
        c.validate(t)?;
        out.push(c.reduce());
    }
    Ok(out)
}

/// Half the weighted number of crossings with each edge.
pub fn a_coordinates(t: &Triangulation, curves: &[CurvePath]) -> Result<AChart<TropQ>> {
    let mut vals = vec![BigRational::zero(); t.n_edges()];
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for c in prepare(t, curves)? {
        if c.has_spiral() {
            return Err(Error::InvalidCurve("spiralling curve has no bounded coordinates".into()));
        }
        let w = &c.weight * &half;
        for s in &c.steps {
            vals[t.edge_at(s[0], s[2])] += &w;
        }
        if let (false, Some(first)) = (c.is_closed(), c.steps.first()) {
            vals[t.edge_at(first[0], first[1])] += &w;
        }
    }
    AChart::new(t.clone(), vals, false)
}

/// Signed crossing counts. With `orientations` given, every spiral must
/// agree with the orientation of its hole; otherwise spirals only have to
/// agree with each other.
pub fn x_coordinates(t: &Triangulation, curves: &[CurvePath], orientations: Option<&BTreeMap<usize, i8>>) -> Result<XChart<TropQ>> {
    let mut vals: BTreeMap<EdgeId, BigRational> = t.internal_edges().into_iter().map(|e| (e, BigRational::zero())).collect();
    let mut seen: BTreeMap<usize, i8> = BTreeMap::new();
    for c in prepare(t, curves)? {
        if let CurveKind::Open { start, end } = c.kind {
            for e in [start, end] {
                if let End::Spiral { vertex, turn } = e {
                    if t.vertices().get(vertex).map(|v| v.kind) != Some(VertexKind::Hole) {
                        return Err(Error::InconsistentSpiral(vertex));
                    }
                    if let Some(o) = orientations {
                        if o.get(&vertex) != Some(&turn) {
                            return Err(Error::InconsistentSpiral(vertex));
                        }
                    }
                    if *seen.entry(vertex).or_insert(turn) != turn {
                        return Err(Error::InconsistentSpiral(vertex));
                    }
                }
            }
        }
        let n = c.steps.len();
        let links = if c.is_closed() { n } else { n.saturating_sub(1) };
        for i in 0..links {
            let a = c.steps[i];
            let b = c.steps[(i + 1) % n];
            let d = turn(&b) - turn(&a);
            if d != 0 {
                let e = t.edge_at(a[0], a[2]);
                *vals.get_mut(&e).expect("internal") += &c.weight * BigRational::from_integer(BigInt::from(d / 2));
            }
        }
    }
    XChart::new(t.clone(), vals)
}

fn lcm_denoms(vals: impl IntoIterator<Item = BigRational>) -> BigInt {
    vals.into_iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Rebuilds a bounded lamination from nonnegative tropical coordinates.
pub fn reconstruct_a(c: &AChart<TropQ>) -> Result<NormalMulticurve> {
    let t = c.tri();
    let a = c.values();
    if a.iter().any(|x| x.is_negative()) {
        return Err(Error::InvalidChart("bounded reconstruction needs nonnegative coordinates".into()));
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let tri_sum = |i: usize| (0..3).map(|k| a[t.edge_at(i, k)].clone()).fold(BigRational::zero(), |x, y| x + y);
    let u = lcm_denoms(a.iter().map(|x| x * &two).chain((0..t.n_triangles()).map(tri_sum)));
    let ur = BigRational::from_integer(u.clone());
    let base: Vec<BigInt> = a.iter().map(|x| (x * &two * &ur).to_integer()).collect();
    let corner = |pts: &[BigInt], i: usize, k: usize| -> BigInt {
        let p = |j: usize| &pts[t.edge_at(i, j)];
        (p(prev3(k)) + p(k) - p(next3(k))) / 2
    };
    let mut minc = BigInt::zero();
    for i in 0..t.n_triangles() {
        for k in 0..3 {
            minc = minc.min(corner(&base, i, k));
        }
    }
    let v = -minc;
    let points: Vec<BigInt> = base.iter().map(|p| p + &v * 2).collect();
    let corners: Vec<[BigInt; 3]> = (0..t.n_triangles()).map(|i| [0, 1, 2].map(|k| corner(&points, i, k))).collect();

    let np: Vec<usize> = points.iter().map(|p| p.to_usize().expect("point count fits")).collect();
    let mc: Vec<[usize; 3]> = corners.iter().map(|m| [0, 1, 2].map(|k| m[k].to_usize().expect("corner count fits"))).collect();
    let nside = |ti: usize, k: usize| np[t.edge_at(ti, k)];
    let canon = |ti: usize, k: usize, pos: usize| -> (usize, usize) {
        let sr = t.side(ti, k);
        if sr.side == 0 {
            (sr.edge, pos)
        } else {
            (sr.edge, np[sr.edge] - 1 - pos)
        }
    };
    let mut visited: Vec<Vec<bool>> = np.iter().map(|&n| vec![false; n]).collect();
    let weight = BigRational::new(BigInt::one(), u.clone());

    // Follows the strand entering (ti, k) at pos; returns the steps and
    // whether it came back to the starting point.
    let walk = |visited: &mut Vec<Vec<bool>>, ti: usize, k: usize, pos: usize, stop: (usize, usize)| -> (Vec<Step>, bool) {
        let (mut ti, mut k, mut pos) = (ti, k, pos);
        let mut steps = Vec::new();
        loop {
            let (out, opos) = if pos < mc[ti][k] {
                let o = prev3(k);
                (o, nside(ti, o) - 1 - pos)
            } else {
                let o = next3(k);
                (o, nside(ti, k) - 1 - pos)
            };
            steps.push([ti, k, out]);
            let key = canon(ti, out, opos);
            if key == stop {
                return (steps, true);
            }
            visited[key.0][key.1] = true;
            match t.partner(ti, out) {
                None => return (steps, false),
                Some((u2, j)) => {
                    ti = u2;
                    k = j;
                    pos = nside(ti, k) - 1 - opos;
                }
            }
        }
    };

    let mut comps = Vec::new();
    for e in 0..t.n_edges() {
        for q in 0..np[e] {
            if visited[e][q] {
                continue;
            }
            visited[e][q] = true;
            let (t0, k0) = t.location(e, 0).expect("edge has a first side");
            let (fwd, closed) = walk(&mut visited, t0, k0, q, (e, q));
            if closed {
                comps.push(CurvePath::closed(fwd, weight.clone()));
                continue;
            }
            let mut word = match t.location(e, 1) {
                Some((t1, k1)) => reverse_word(&walk(&mut visited, t1, k1, np[e] - 1 - q, (usize::MAX, 0)).0),
                None => Vec::new(),
            };
            word.extend(fwd);
            comps.push(CurvePath::open(word, End::Boundary, End::Boundary, weight.clone()));
        }
    }
    if !v.is_zero() {
        let pw = -BigRational::new(v.clone(), u.clone());
        for vx in t.vertices() {
            let steps: Vec<Step> = vx.corners.iter().map(|&(ti, k)| [ti, k, prev3(k)]).collect();
            comps.push(match vx.kind {
                VertexKind::Hole => CurvePath::closed(steps, pw.clone()),
                VertexKind::Cilium => CurvePath::open(steps, End::Boundary, End::Boundary, pw.clone()),
            });
        }
    }
    Ok(NormalMulticurve {
        kind: LaminationKind::A,
        tri: t.clone(),
        u,
        v,
        points,
        corners,
        components: merge_curves(comps),
        orientations: BTreeMap::new(),
    })
}

/// Drops trailing steps that keep turning the same way.
fn trim_spiral(mut w: Vec<Step>) -> Vec<Step> {
    while w.len() >= 2 && turn(&w[w.len() - 1]) == turn(&w[w.len() - 2]) {
        w.pop();
    }
    w
}

/// Rebuilds an unbounded lamination from integral tropical coordinates.
///
/// Each side carries strand slots at half-integer parameters; a slot `i > 0`
/// on side `k` joins `-i` on side `k + 1`, and across an edge `i` is glued to
/// `𝗑 - i`. Parameters are stored doubled so slots are odd integers.
pub fn reconstruct_x(c: &XChart<TropZ>) -> Result<NormalMulticurve> {
    let t = c.tri();
    let x2 = |e: EdgeId| -> i64 { 2 * c.get(e).to_i64().expect("coordinate fits in i64") };
    let internal = t.internal_edges();
    let total: i64 = internal.iter().map(|&e| x2(e).abs()).sum();
    let xmax: i64 = internal.iter().map(|&e| x2(e).abs()).max().unwrap_or(0);
    let bound = 3 * (xmax + 2 * total) + 2;

    let mut orientations = BTreeMap::new();
    for v in t.holes() {
        let r = c.hole_invariant(v)?;
        if r.is_positive() {
            orientations.insert(v, 1i8);
        } else if r.is_negative() {
            orientations.insert(v, -1i8);
        }
    }

    // Slot frame of side (ti, k) relative to the edge's first side.
    let canon = |ti: usize, k: usize, p: i64, q: i64| -> (usize, i64) {
        let sr = t.side(ti, k);
        if sr.side == 0 {
            (sr.edge, p)
        } else {
            (sr.edge, q)
        }
    };

    enum Stop {
        Closed,
        Boundary,
        Spiral(usize, i8),
    }
    let walk = |visited: &mut BTreeSet<(usize, i64)>, ti: usize, k: usize, i: i64, start: (usize, i64)| -> (Vec<Step>, Stop) {
        let (mut ti, mut k, mut i) = (ti, k, i);
        let mut steps = Vec::new();
        loop {
            let out = if i > 0 { next3(k) } else { prev3(k) };
            let p = -i;
            steps.push([ti, k, out]);
            let Some((u, j)) = t.partner(ti, out) else {
                return (steps, Stop::Boundary);
            };
            let q = x2(t.edge_at(ti, out)) - p;
            if p.signum() == q.signum() {
                let key = canon(ti, out, p, q);
                if key == start {
                    return (steps, Stop::Closed);
                }
                visited.insert(key);
            }
            if p.abs() > bound {
                let s = *steps.last().expect("nonempty");
                return (steps, Stop::Spiral(step_vertex(t, &s), turn(&s)));
            }
            ti = u;
            k = j;
            i = q;
        }
    };

    let mut comps = Vec::new();
    let mut visited: BTreeSet<(usize, i64)> = BTreeSet::new();
    let mut points = vec![BigInt::zero(); t.n_edges()];
    for &e in &internal {
        let xe = x2(e);
        points[e] = BigInt::from(xe.abs() / 2);
        let (lo, hi) = if xe > 0 { (1, xe - 1) } else { (xe + 1, -1) };
        let mut p = lo;
        while p <= hi {
            let key = (e, p);
            p += 2;
            if visited.contains(&key) {
                continue;
            }
            visited.insert(key);
            let (t0, k0) = t.location(e, 0).expect("first side");
            let (t1, k1) = t.location(e, 1).expect("second side");
            let q = xe - key.1;
            // forward: from the first side into the second triangle
            let (fwd, stop) = walk(&mut visited, t1, k1, q, key);
            if let Stop::Closed = stop {
                comps.push(CurvePath::closed(fwd, BigRational::one()));
                continue;
            }
            let (bwd, bstop) = walk(&mut visited, t0, k0, key.1, key);
            let (fwd, end) = match stop {
                Stop::Spiral(v, tu) => (trim_spiral(fwd), End::Spiral { vertex: v, turn: tu }),
                _ => (fwd, End::Boundary),
            };
            let (bwd, start) = match bstop {
                Stop::Spiral(v, tu) => (trim_spiral(bwd), End::Spiral { vertex: v, turn: tu }),
                _ => (bwd, End::Boundary),
            };
            let mut word = reverse_word(&bwd);
            word.extend(fwd);
            comps.push(CurvePath::open(word, start, end, BigRational::one()));
        }
    }
    Ok(NormalMulticurve {
        kind: LaminationKind::X,
        tri: t.clone(),
        u: BigInt::one(),
        v: BigInt::zero(),
        points,
        corners: Vec::new(),
        components: merge_curves(comps),
        orientations,
    })
}

/// Extends a spiral end by `n` further turns.
fn extend_end(t: &Triangulation, w: &mut Vec<Step>, n: usize) {
    for _ in 0..n {
        let s = *w.last().expect("nonempty");
        let (u, j) = t.partner(s[0], s[2]).expect("spiral continues across internal sides");
        let out = if turn(&s) > 0 { next3(j) } else { prev3(j) };
        w.push([u, j, out]);
    }
}

/// Re-expresses a curve in the triangulation obtained by flipping `alpha`.
pub fn flip_curve(t: &Triangulation, c: &CurvePath, alpha: EdgeId) -> Result<CurvePath> {
    t.check_flippable(alpha)?;
    c.validate(t)?;
    let c = c.reduce();
    let new = t.flip(alpha)?.new;
    let (t1, i) = t.location(alpha, 0).expect("internal");
    let (t2, j) = t.location(alpha, 1).expect("internal");
    let map_outer = |ti: usize, s: usize| -> (usize, usize) {
        if ti == t1 && s == next3(i) {
            (t2, 1)
        } else if ti == t1 && s == prev3(i) {
            (t1, 0)
        } else if ti == t2 && s == next3(j) {
            (t1, 1)
        } else {
            (t2, 0)
        }
    };
    let is_alpha = |ti: usize, s: usize| t.edge_at(ti, s) == alpha;

    // materialize spirals far enough to survive the flip
    let mut steps = c.steps.clone();
    let mut kind = c.kind;
    if let CurveKind::Open { start, end } = c.kind {
        let extra = 2 * t.n_triangles() * 3;
        // the word must not start or stop on the flipped edge
        let touches = |w: &[Step]| {
            let s = w[w.len() - 1];
            t.edge_at(s[0], s[2]) == alpha
        };
        if matches!(end, End::Spiral { .. }) {
            extend_end(t, &mut steps, extra);
            while touches(&steps) {
                extend_end(t, &mut steps, 1);
            }
        }
        if matches!(start, End::Spiral { .. }) {
            let mut r = reverse_word(&steps);
            extend_end(t, &mut r, extra);
            while touches(&r) {
                extend_end(t, &mut r, 1);
            }
            steps = reverse_word(&r);
        }
        kind = CurveKind::Open { start, end };
    }
    if steps.is_empty() {
        return Ok(c);
    }
    let closed = kind == CurveKind::Closed;
    if closed {
        // start right after a crossing of some edge other than alpha
        let n = steps.len();
        let r = (0..n).find(|&k| {
            let p = steps[(k + n - 1) % n];
            !is_alpha(p[0], p[2])
        });
        match r {
            Some(r) => steps.rotate_left(r),
            None => return Err(Error::InvalidCurve("closed word crossing only the flipped edge".into())),
        }
    }
    let in_quad = |ti: usize| ti == t1 || ti == t2;
    let mut out: Vec<Step> = Vec::new();
    let mut k = 0;
    while k < steps.len() {
        let s = steps[k];
        if !in_quad(s[0]) {
            out.push(s);
            k += 1;
            continue;
        }
        let entry = (s[0], s[1]);
        let mut last = s;
        if is_alpha(s[0], s[2]) && k + 1 < steps.len() {
            k += 1;
            last = steps[k];
        }
        k += 1;
        let (ta, sa) = map_outer(entry.0, entry.1);
        let (tb, sb) = map_outer(last[0], last[2]);
        if ta == tb {
            out.push([ta, sa, sb]);
        } else {
            out.push([ta, sa, 2]);
            out.push([tb, 2, sb]);
        }
    }
    let mut res = CurvePath { kind, steps: out, weight: c.weight.clone() }.reduce();
    if let CurveKind::Open { start, end } = kind {
        let mut w = res.steps.clone();
        let end = match end {
            End::Spiral { .. } => {
                w = trim_spiral(w);
                let s = *w.last().expect("nonempty");
                End::Spiral { vertex: step_vertex(&new, &s), turn: turn(&s) }
            }
            e => e,
        };
        let start = match start {
            End::Spiral { .. } => {
                let mut r = trim_spiral(reverse_word(&w));
                let s = *r.last().expect("nonempty");
                let e = End::Spiral { vertex: step_vertex(&new, &s), turn: turn(&s) };
                r = reverse_word(&r);
                w = r;
                e
            }
            e => e,
        };
        res = CurvePath { kind: CurveKind::Open { start, end }, steps: w, weight: res.weight };
    }
    Ok(res)
}

/// Number of transverse intersections of two closed reduced words, counted
/// through linked common segments.
pub fn word_crossings(a: &[Step], b: &[Step]) -> u64 {
    let m = a.len();
    let n = b.len();
    if m == 0 || n == 0 {
        return 0;
    }
    let mut total = 0;
    for bb in [b.to_vec(), reverse_word(b)] {
        for i in 0..m {
            for j in 0..n {
                if a[i][0] != bb[j][0] || a[i][1] != bb[j][1] {
                    continue;
                }
                let ip = (i + m - 1) % m;
                let jp = (j + n - 1) % n;
                if a[ip][1] == bb[jp][1] {
                    continue;
                }
                let sa = (a[ip][1] + 3 - a[ip][2]) % 3;
                let mut k = 0;
                while k <= m * n {
                    let x = a[(i + k) % m];
                    let y = bb[(j + k) % n];
                    if x[2] != y[2] {
                        let ea = (x[2] + 3 - x[1]) % 3;
                        if sa == ea {
                            total += 1;
                        }
                        break;
                    }
                    k += 1;
                }
            }
        }
    }
    total
}

/// Half the minimal number of intersection points, weighted.
pub fn intersection_number(m1: &NormalMulticurve, m2: &NormalMulticurve) -> Result<BigRational> {
    let mut acc = BigRational::zero();
    for c1 in &m1.components {
        for c2 in &m2.components {
            if !c1.is_closed() || !c2.is_closed() {
                return Err(Error::Unsupported("intersection numbers of open curves".into()));
            }
            let k = word_crossings(&c1.steps, &c2.steps);
            acc += &c1.weight * &c2.weight * BigRational::from_integer(BigInt::from(k));
        }
    }
    Ok(acc / BigRational::from_integer(BigInt::from(2)))
}

/// Punctured-torus slope curve `p/q` as an A-chart with crossing numbers
/// `(|p|, |q|, |p + q|)`.
pub fn torus_slope_chart(p: i64, q: i64) -> AChart<TropQ> {
    let t = Triangulation::punctured_torus();
    let n = [p.abs(), q.abs(), (p + q).abs()];
    let vals: Vec<BigRational> = n.iter().map(|&k| BigRational::new(BigInt::from(k), BigInt::from(2))).collect();
    AChart::new(t, vals, false).expect("three edges")
}

pub fn torus_slope_curve(p: i64, q: i64) -> Result<NormalMulticurve> {
    reconstruct_a(&torus_slope_chart(p, q))
}
