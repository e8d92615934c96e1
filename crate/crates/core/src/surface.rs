//! Ciliated surfaces, marked ideal triangulations, the ε-matrix and flips.
//!
//! A triangle is a triple of side references listed clockwise. Side `k` of a
//! triangle runs from its vertex `w_k` to `w_{k+1}`; corner `k` sits at `w_k`
//! between sides `k-1` and `k`. Gluing side `k` of one triangle to side `j` of
//! another identifies `w_k ~ w'_{j+1}` and `w_{k+1} ~ w'_j`, so every gluing is
//! orientation coherent by construction.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type EdgeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfaceSig {
    pub genus: u32,
    pub boundary: Vec<u32>,
}

impl SurfaceSig {
    /// The boundary multiset is kept sorted in decreasing order.
    pub fn new(genus: u32, mut boundary: Vec<u32>) -> Self {
        boundary.sort_unstable_by(|a, b| b.cmp(a));
        SurfaceSig { genus, boundary }
    }

    pub fn s(&self) -> usize {
        self.boundary.len()
    }

    pub fn c(&self) -> usize {
        self.boundary.iter().map(|&p| p as usize).sum()
    }

    pub fn h(&self) -> usize {
        self.boundary.iter().filter(|&&p| p == 0).count()
    }

    pub fn counts(&self) -> Result<Counts> {
        derive_counts(self)
    }
}

impl std::fmt::Display for SurfaceSig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "g={} P={:?}", self.genus, self.boundary)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub vertices: usize,
    pub edges: usize,
    pub external: usize,
    pub faces: usize,
    pub internal: usize,
}

pub fn derive_counts(sig: &SurfaceSig) -> Result<Counts> {
    let g = sig.genus as i64;
    let s = sig.s() as i64;
    let c = sig.c() as i64;
    let h = sig.h() as i64;
    let e = 6 * g - 6 + 3 * s + 2 * c;
    let n = 6 * g - 6 + 3 * s + c;
    let f = 4 * g - 4 + 2 * s + c;
    if f < 1 || n < 0 {
        return Err(Error::InadmissibleSignature(format!("{sig} has F={f}, n={n}")));
    }
    Ok(Counts {
        vertices: (h + c) as usize,
        edges: e as usize,
        external: c as usize,
        faces: f as usize,
        internal: n as usize,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SideRef {
    pub edge: EdgeId,
    pub side: u8,
}

impl SideRef {
    pub fn new(edge: EdgeId, side: u8) -> Self {
        SideRef { edge, side }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexKind {
    Hole,
    Cilium,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub kind: VertexKind,
    /// Corners `(triangle, k)` in clockwise order around the vertex. For a
    /// cilium the chain starts at the corner whose side `k` is external.
    pub corners: Vec<(usize, usize)>,
    pub component: usize,
}

#[inline]
pub(crate) fn next3(k: usize) -> usize {
    (k + 1) % 3
}

#[inline]
pub(crate) fn prev3(k: usize) -> usize {
    (k + 2) % 3
}

#[derive(Clone, Debug)]
struct Analysis {
    loc: Vec<[Option<(usize, usize)>; 2]>,
    corner_vertex: Vec<[usize; 3]>,
    vertices: Vec<Vertex>,
    sig: SurfaceSig,
}

fn analyze(triangles: &[[SideRef; 3]], n_edges: usize) -> Result<Analysis> {
    if triangles.is_empty() {
        return Err(Error::BadGluing("no triangles".into()));
    }
    let mut loc: Vec<[Option<(usize, usize)>; 2]> = vec![[None, None]; n_edges];
    for (t, tri) in triangles.iter().enumerate() {
        for (k, sr) in tri.iter().enumerate() {
            if sr.edge >= n_edges || sr.side > 1 {
                return Err(Error::BadGluing(format!("bad side reference {sr:?}")));
            }
            let slot = &mut loc[sr.edge][sr.side as usize];
            if slot.is_some() {
                return Err(Error::BadGluing(format!("side {sr:?} used twice")));
            }
            *slot = Some((t, k));
        }
    }
    for (e, l) in loc.iter().enumerate() {
        if l[0].is_none() {
            return Err(Error::BadGluing(format!("edge {e} has no first side")));
        }
    }
    let partner = |t: usize, k: usize| -> Option<(usize, usize)> {
        let sr = triangles[t][k];
        loc[sr.edge][1 - sr.side as usize]
    };

    // dual graph connectivity
    let mut seen = vec![false; triangles.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(t) = stack.pop() {
        for k in 0..3 {
            if let Some((u, _)) = partner(t, k) {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::BadGluing("triangles do not form a connected surface".into()));
    }

    let mut corner_vertex = vec![[usize::MAX; 3]; triangles.len()];
    let mut vertices: Vec<Vertex> = Vec::new();
    for t in 0..triangles.len() {
        for k in 0..3 {
            if corner_vertex[t][k] != usize::MAX {
                continue;
            }
            // walk counterclockwise to the start of the chain
            let (mut ct, mut ck) = (t, k);
            let mut is_cilium = false;
            loop {
                match partner(ct, ck) {
                    None => {
                        is_cilium = true;
                        break;
                    }
                    Some((u, j)) => {
                        let nxt = (u, next3(j));
                        if nxt == (t, k) {
                            break;
                        }
                        ct = nxt.0;
                        ck = nxt.1;
                    }
                }
            }
            let start = if is_cilium { (ct, ck) } else { (t, k) };
            let id = vertices.len();
            let mut corners = vec![];
            let (mut ct, mut ck) = start;
            loop {
                if corner_vertex[ct][ck] != usize::MAX {
                    return Err(Error::BadGluing("inconsistent vertex link".into()));
                }
                corner_vertex[ct][ck] = id;
                corners.push((ct, ck));
                match partner(ct, prev3(ck)) {
                    None => break,
                    Some((u, j)) => {
                        if (u, j) == start {
                            break;
                        }
                        ct = u;
                        ck = j;
                    }
                }
            }
            vertices.push(Vertex {
                kind: if is_cilium { VertexKind::Cilium } else { VertexKind::Hole },
                corners,
                component: usize::MAX,
            });
        }
    }

    // boundary components: holes alone, cilia grouped along external edges
    let nv = vertices.len();
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let z = p[y];
            p[y] = r;
            y = z;
        }
        r
    }
    for l in loc.iter() {
        if l[1].is_none() {
            let (t, k) = l[0].unwrap();
            let a = corner_vertex[t][k];
            let b = corner_vertex[t][next3(k)];
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            parent[ra] = rb;
        }
    }
    let mut comp_ids: BTreeMap<usize, usize> = BTreeMap::new();
    let mut comp_sizes: Vec<u32> = vec![];
    let mut comp_is_hole: Vec<bool> = vec![];
    for v in 0..nv {
        let r = find(&mut parent, v);
        let next_id = comp_ids.len();
        let cid = *comp_ids.entry(r).or_insert(next_id);
        if cid == comp_sizes.len() {
            comp_sizes.push(0);
            comp_is_hole.push(vertices[v].kind == VertexKind::Hole);
        }
        if vertices[v].kind == VertexKind::Cilium {
            comp_sizes[cid] += 1;
        }
        vertices[v].component = cid;
    }
    let b = comp_is_hole.iter().filter(|h| !**h).count() as i64;
    let v = nv as i64;
    let e = n_edges as i64;
    let f = triangles.len() as i64;
    let chi = v - e + f;
    let twice_g = 2 - b - chi;
    if twice_g < 0 || twice_g % 2 != 0 {
        return Err(Error::CountMismatch(format!("euler characteristic {chi} with {b} boundary circles")));
    }
    let sig = SurfaceSig::new((twice_g / 2) as u32, comp_sizes);
    Ok(Analysis { loc, corner_vertex, vertices, sig })
}

#[derive(Clone, Debug)]
pub struct Triangulation {
    sig: SurfaceSig,
    triangles: Vec<[SideRef; 3]>,
    n_edges: usize,
    loc: Vec<[Option<(usize, usize)>; 2]>,
    corner_vertex: Vec<[usize; 3]>,
    vertices: Vec<Vertex>,
}

/// Equality of marked triangulations: the identity on edge ids is an isomorphism.
impl PartialEq for Triangulation {
    fn eq(&self, other: &Self) -> bool {
        if self.sig != other.sig || self.n_edges != other.n_edges || self.triangles.len() != other.triangles.len() {
            return false;
        }
        if self.triangles == other.triangles {
            return true;
        }
        let e = self.edge_at(0, 0);
        let id: Vec<EdgeId> = (0..self.n_edges).collect();
        (0..2u8).filter_map(|s| other.location(e, s)).any(|(t, k)| {
            extend_isomorphism(self, other, t, k).map_or(false, |m| m == id)
        })
    }
}

impl Eq for Triangulation {}

#[derive(Serialize, Deserialize)]
struct TriangulationJson {
    genus: u32,
    boundary: Vec<u32>,
    triangles: Vec<[SideRef; 3]>,
    edges: usize,
}

impl Serialize for Triangulation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TriangulationJson {
            genus: self.sig.genus,
            boundary: self.sig.boundary.clone(),
            triangles: self.triangles.clone(),
            edges: self.n_edges,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Triangulation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = TriangulationJson::deserialize(d)?;
        Triangulation::new(SurfaceSig::new(j.genus, j.boundary), j.triangles, j.edges)
            .map_err(serde::de::Error::custom)
    }
}

impl Triangulation {
    /// Validates the side structure and checks every derived count against `sig`.
    pub fn new(sig: SurfaceSig, triangles: Vec<[SideRef; 3]>, n_edges: usize) -> Result<Self> {
        let sig = SurfaceSig::new(sig.genus, sig.boundary);
        let counts = derive_counts(&sig)?;
        let an = analyze(&triangles, n_edges)?;
        let external = an.loc.iter().filter(|l| l[1].is_none()).count();
        let got = Counts {
            vertices: an.vertices.len(),
            edges: n_edges,
            external,
            faces: triangles.len(),
            internal: n_edges - external,
        };
        if got != counts {
            return Err(Error::CountMismatch(format!("expected {counts:?}, derived {got:?}")));
        }
        if an.sig != sig {
            return Err(Error::CountMismatch(format!("expected {sig}, derived {}", an.sig)));
        }
        Ok(Triangulation {
            sig,
            triangles,
            n_edges,
            loc: an.loc,
            corner_vertex: an.corner_vertex,
            vertices: an.vertices,
        })
    }

    /// Builds a triangulation from explicit side gluings `((t, k), (t', k'))`.
    /// Glued pairs become edges `0..` in the given order, unglued sides follow.
    pub fn from_gluing(sig: SurfaceSig, n_triangles: usize, gluing: &[((usize, usize), (usize, usize))]) -> Result<Self> {
        let mut tris: Vec<[Option<SideRef>; 3]> = vec![[None; 3]; n_triangles];
        let mut next = 0;
        for &((t, k), (u, j)) in gluing {
            if t >= n_triangles || u >= n_triangles || k > 2 || j > 2 {
                return Err(Error::BadGluing(format!("side ({t},{k}) or ({u},{j}) out of range")));
            }
            if (t, k) == (u, j) || tris[t][k].is_some() || tris[u][j].is_some() {
                return Err(Error::BadGluing(format!("side ({t},{k}) or ({u},{j}) used twice")));
            }
            tris[t][k] = Some(SideRef::new(next, 0));
            tris[u][j] = Some(SideRef::new(next, 1));
            next += 1;
        }
        for tri in tris.iter_mut() {
            for s in tri.iter_mut() {
                if s.is_none() {
                    *s = Some(SideRef::new(next, 0));
                    next += 1;
                }
            }
        }
        let triangles = tris.into_iter().map(|t| [t[0].unwrap(), t[1].unwrap(), t[2].unwrap()]).collect();
        Triangulation::new(sig, triangles, next)
    }

    /// Triangulated convex polygon with `c` cilia labelled counterclockwise.
    /// Diagonals get ids `0..c-3` in lexicographic order, then boundary sides
    /// `(i, i+1)` follow in order of `i`.
    pub fn polygon(c: usize, tris: &[[usize; 3]]) -> Result<Self> {
        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let is_boundary = |a: usize, b: usize| {
            let (a, b) = key(a, b);
            b == a + 1 || (a == 0 && b == c - 1)
        };
        let mut diags: Vec<(usize, usize)> = vec![];
        for t in tris {
            for i in 0..3 {
                let (a, b) = key(t[i], t[(i + 1) % 3]);
                if !is_boundary(a, b) && !diags.contains(&(a, b)) {
                    diags.push((a, b));
                }
            }
        }
        diags.sort();
        let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (i, d) in diags.iter().enumerate() {
            ids.insert(*d, i);
        }
        for i in 0..c {
            ids.insert(key(i, (i + 1) % c), diags.len() + i);
        }
        let mut used: BTreeMap<usize, u8> = BTreeMap::new();
        let mut triangles = vec![];
        for t in tris {
            let mut v = *t;
            v.sort();
            // counterclockwise (v0,v1,v2) listed clockwise
            let cw = [v[0], v[2], v[1]];
            let mut tri = [SideRef::new(0, 0); 3];
            for k in 0..3 {
                let e = *ids
                    .get(&key(cw[k], cw[(k + 1) % 3]))
                    .ok_or_else(|| Error::BadGluing(format!("bad triangle {t:?}")))?;
                let slot = used.entry(e).or_insert(0);
                tri[k] = SideRef::new(e, *slot);
                *slot += 1;
            }
            triangles.push(tri);
        }
        Triangulation::new(SurfaceSig::new(0, vec![c as u32]), triangles, ids.len())
    }

    /// Fan triangulation of the disc with `c >= 3` cilia, all diagonals from cilium 0.
    pub fn disc_fan(c: usize) -> Result<Self> {
        let tris: Vec<[usize; 3]> = (1..c.saturating_sub(1)).map(|i| [0, i, i + 1]).collect();
        Triangulation::polygon(c, &tris)
    }

    /// The once-punctured torus: two triangles both reading `(0, 1, 2)` clockwise.
    pub fn punctured_torus() -> Self {
        let t1 = [SideRef::new(0, 0), SideRef::new(1, 0), SideRef::new(2, 0)];
        let t2 = [SideRef::new(0, 1), SideRef::new(1, 1), SideRef::new(2, 1)];
        Triangulation::new(SurfaceSig::new(1, vec![0]), vec![t1, t2], 3).expect("punctured torus")
    }

    /// Some triangulation of `sig`, deterministic.
    pub fn standard(sig: &SurfaceSig) -> Result<Self> {
        let sig = SurfaceSig::new(sig.genus, sig.boundary.clone());
        let counts = derive_counts(&sig)?;
        let raw = if sig.genus == 0 && counts.faces <= 4 && !(sig.s() == 1 || sig.boundary == [0, 0, 0]) {
            brute_force_base(&sig, counts)?
        } else {
            construct(&sig)?
        };
        Triangulation::new(sig, raw.0, raw.1)
    }

    /// `standard(sig)` followed by random flips that never create self-folded triangles.
    pub fn random<R: Rng>(sig: &SurfaceSig, rng: &mut R, flips: usize) -> Result<Self> {
        let mut t = Triangulation::standard(sig)?;
        let clean = !t.has_self_folded();
        for _ in 0..flips {
            let cands = t.flippable_edges();
            if let Some(&e) = cands.choose(rng) {
                let n = t.flip(e)?.new;
                if !clean || !n.has_self_folded() {
                    t = n;
                }
            }
        }
        Ok(t)
    }

    pub fn sig(&self) -> &SurfaceSig {
        &self.sig
    }

    pub fn triangles(&self) -> &[[SideRef; 3]] {
        &self.triangles
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn is_internal(&self, e: EdgeId) -> bool {
        e < self.n_edges && self.loc[e][1].is_some()
    }

    pub fn internal_edges(&self) -> Vec<EdgeId> {
        (0..self.n_edges).filter(|&e| self.is_internal(e)).collect()
    }

    pub fn external_edges(&self) -> Vec<EdgeId> {
        (0..self.n_edges).filter(|&e| !self.is_internal(e)).collect()
    }

    /// Position `(triangle, k)` of the given side of an edge.
    pub fn location(&self, e: EdgeId, side: u8) -> Option<(usize, usize)> {
        self.loc.get(e).and_then(|l| l[side as usize])
    }

    pub fn side(&self, t: usize, k: usize) -> SideRef {
        self.triangles[t][k]
    }

    pub fn edge_at(&self, t: usize, k: usize) -> EdgeId {
        self.triangles[t][k].edge
    }

    /// The side glued to side `k` of triangle `t`, if any.
    pub fn partner(&self, t: usize, k: usize) -> Option<(usize, usize)> {
        let sr = self.triangles[t][k];
        self.loc[sr.edge][1 - sr.side as usize]
    }

    pub fn corner_vertex(&self, t: usize, k: usize) -> usize {
        self.corner_vertex[t][k]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn holes(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.vertices[v].kind == VertexKind::Hole).collect()
    }

    /// Vertex at `end` (0 = start, 1 = finish) of an edge, read in the
    /// triangle holding side 0.
    pub fn edge_end_vertex(&self, e: EdgeId, end: usize) -> usize {
        let (t, k) = self.loc[e][0].unwrap();
        if end == 0 {
            self.corner_vertex[t][k]
        } else {
            self.corner_vertex[t][next3(k)]
        }
    }

    /// Number of ends of `e` at `v` (0, 1 or 2).
    pub fn incidence(&self, v: usize, e: EdgeId) -> usize {
        (0..2).filter(|&i| self.edge_end_vertex(e, i) == v).count()
    }

    /// Edge ends at `v`, counted with multiplicity, as a per-edge vector.
    pub fn incidence_vector(&self, v: usize) -> Vec<usize> {
        (0..self.n_edges).map(|e| self.incidence(v, e)).collect()
    }

    pub fn is_self_folded_edge(&self, e: EdgeId) -> bool {
        match (self.loc[e][0], self.loc[e][1]) {
            (Some((a, _)), Some((b, _))) => a == b,
            _ => false,
        }
    }

    pub fn has_self_folded(&self) -> bool {
        (0..self.n_edges).any(|e| self.is_self_folded_edge(e))
    }

    pub fn flippable_edges(&self) -> Vec<EdgeId> {
        (0..self.n_edges).filter(|&e| self.is_internal(e) && !self.is_self_folded_edge(e)).collect()
    }

    pub fn check_flippable(&self, e: EdgeId) -> Result<()> {
        if e >= self.n_edges {
            return Err(Error::UnknownEdge(e));
        }
        if !self.is_internal(e) {
            return Err(Error::ExternalEdge(e));
        }
        if self.is_self_folded_edge(e) {
            return Err(Error::SelfFoldedEdge(e));
        }
        Ok(())
    }

    pub fn epsilon_matrix(&self) -> EpsilonMatrix {
        let n = self.n_edges;
        let mut m = vec![vec![0i32; n]; n];
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k].edge;
                let b = tri[next3(k)].edge;
                // side b follows a clockwise, so a is counterclockwise from b
                m[b][a] += 1;
                m[a][b] -= 1;
            }
        }
        EpsilonMatrix(m)
    }

    pub fn flip(&self, e: EdgeId) -> Result<FlipResult> {
        self.check_flippable(e)?;
        let (t1, i) = self.loc[e][0].unwrap();
        let (t2, j) = self.loc[e][1].unwrap();
        let a = self.triangles[t1][next3(i)];
        let b = self.triangles[t1][prev3(i)];
        let c = self.triangles[t2][next3(j)];
        let d = self.triangles[t2][prev3(j)];
        let mut tris = self.triangles.clone();
        tris[t1] = [b, c, SideRef::new(e, 0)];
        tris[t2] = [d, a, SideRef::new(e, 1)];
        let new = Triangulation::new(self.sig.clone(), tris, self.n_edges)?;
        Ok(FlipResult { new, correspondence: (0..self.n_edges).collect() })
    }

    /// Applies a flip word left to right.
    pub fn apply_word(&self, word: &[EdgeId]) -> Result<Triangulation> {
        let mut t = self.clone();
        for (step, &e) in word.iter().enumerate() {
            t = t
                .flip(e)
                .map_err(|err| Error::InapplicableWord { step, reason: err.to_string() })?
                .new;
        }
        Ok(t)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: TriangulationJson = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        Triangulation::new(SurfaceSig::new(j.genus, j.boundary), j.triangles, j.edges)
    }
}

#[derive(Clone, Debug)]
pub struct FlipResult {
    pub new: Triangulation,
    /// `correspondence[old] = new`; edge ids survive a flip.
    pub correspondence: Vec<EdgeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonMatrix(pub Vec<Vec<i32>>);

impl EpsilonMatrix {
    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, a: EdgeId, b: EdgeId) -> i32 {
        self.0[a][b]
    }

    pub fn is_skew(&self) -> bool {
        let n = self.n();
        (0..n).all(|a| (0..n).all(|b| self.0[a][b] == -self.0[b][a]))
    }

    pub fn entries_bounded(&self) -> bool {
        self.0.iter().flatten().all(|x| x.abs() <= 2)
    }

    /// Matrix mutation in direction `g`.
    pub fn mutate(&self, g: EdgeId) -> EpsilonMatrix {
        let n = self.n();
        let e = &self.0;
        let mut out = vec![vec![0i32; n]; n];
        for a in 0..n {
            for b in 0..n {
                out[a][b] = if a == g || b == g {
                    -e[a][b]
                } else {
                    e[a][b] + (e[a][g] * e[g][b].abs() + e[a][g].abs() * e[g][b]) / 2
                };
            }
        }
        EpsilonMatrix(out)
    }
}

pub fn transform_epsilon(t: &Triangulation, eps: &EpsilonMatrix, g: EdgeId) -> Result<EpsilonMatrix> {
    t.check_flippable(g)?;
    Ok(eps.mutate(g))
}

/// Every orientation preserving isomorphism `t1 -> t2`, as edge maps.
pub fn all_isomorphisms(t1: &Triangulation, t2: &Triangulation) -> Vec<Vec<EdgeId>> {
    let mut out = vec![];
    if t1.n_triangles() != t2.n_triangles() || t1.n_edges() != t2.n_edges() {
        return out;
    }
    for target in 0..t2.n_triangles() {
        for rot in 0..3 {
            if let Some(m) = extend_isomorphism(t1, t2, target, rot) {
                out.push(m);
            }
        }
    }
    out
}

fn extend_isomorphism(t1: &Triangulation, t2: &Triangulation, target: usize, rot: usize) -> Option<Vec<EdgeId>> {
    let nt = t1.n_triangles();
    let mut map: Vec<Option<(usize, usize)>> = vec![None; nt];
    let mut used = vec![false; nt];
    let mut emap: Vec<Option<EdgeId>> = vec![None; t1.n_edges()];
    map[0] = Some((target, rot));
    used[target] = true;
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        let (img, r) = map[u].unwrap();
        for k in 0..3 {
            let k2 = (k + r) % 3;
            let e1 = t1.edge_at(u, k);
            let e2 = t2.edge_at(img, k2);
            match emap[e1] {
                Some(x) if x != e2 => return None,
                _ => emap[e1] = Some(e2),
            }
            match (t1.partner(u, k), t2.partner(img, k2)) {
                (None, None) => {}
                (Some((v, j)), Some((w, i))) => {
                    let want = (w, (i + 3 - j) % 3);
                    match map[v] {
                        Some(m) => {
                            if m != want {
                                return None;
                            }
                        }
                        None => {
                            if used[w] {
                                return None;
                            }
                            used[w] = true;
                            map[v] = Some(want);
                            stack.push(v);
                        }
                    }
                }
                _ => return None,
            }
        }
    }
    let emap: Vec<EdgeId> = emap.into_iter().collect::<Option<Vec<_>>>()?;
    let mut hit = vec![false; t2.n_edges()];
    for &e in &emap {
        if hit[e] {
            return None;
        }
        hit[e] = true;
    }
    Some(emap)
}

/// Some isomorphism, preferring the identity on edge ids.
pub fn triangulations_isomorphic(t1: &Triangulation, t2: &Triangulation) -> Option<Vec<EdgeId>> {
    let all = all_isomorphisms(t1, t2);
    let id: Vec<EdgeId> = (0..t1.n_edges()).collect();
    if all.contains(&id) {
        return Some(id);
    }
    all.into_iter().next()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationCheck {
    pub equal: bool,
    /// Edge bijection from the result of `w1` to the result of `w2`.
    pub witness: Option<Vec<EdgeId>>,
}

pub fn verify_relation(t: &Triangulation, w1: &[EdgeId], w2: &[EdgeId]) -> Result<RelationCheck> {
    let r1 = t.apply_word(w1)?;
    let r2 = t.apply_word(w2)?;
    let witness = triangulations_isomorphic(&r1, &r2);
    Ok(RelationCheck { equal: witness.is_some(), witness })
}

/// The five-flip word on a pentagon with diagonals `d1`, `d2` sharing a cilium.
pub fn pentagon_word(d1: EdgeId, d2: EdgeId) -> Vec<EdgeId> {
    vec![d1, d2, d1, d2, d1]
}

type Raw = (Vec<[SideRef; 3]>, usize);

fn raw_sig(raw: &Raw) -> Result<(SurfaceSig, Analysis)> {
    let an = analyze(&raw.0, raw.1)?;
    Ok((an.sig.clone(), an))
}

fn split_triangle(raw: &mut Raw, t: usize) {
    let [s0, s1, s2] = raw.0[t];
    let f = [raw.1, raw.1 + 1, raw.1 + 2];
    raw.1 += 3;
    // T_i = [s_i, f_{i+1}, f_i]; f_j has side 0 in T_j and side 1 in T_{j-1}
    raw.0[t] = [s0, SideRef::new(f[1], 1), SideRef::new(f[0], 0)];
    raw.0.push([s1, SideRef::new(f[2], 1), SideRef::new(f[1], 0)]);
    raw.0.push([s2, SideRef::new(f[0], 1), SideRef::new(f[2], 0)]);
}

fn attach_triangle(raw: &mut Raw, e: EdgeId) {
    let g = raw.1;
    raw.1 += 2;
    raw.0.push([SideRef::new(e, 1), SideRef::new(g, 0), SideRef::new(g + 1, 0)]);
}

/// Opens hole `v` into a boundary circle with one cilium; returns the new external edge.
fn cut_hole(raw: &mut Raw, v: usize) -> Result<EdgeId> {
    let an = analyze(&raw.0, raw.1)?;
    if an.vertices[v].kind != VertexKind::Hole {
        return Err(Error::NotAHoleVertex(v));
    }
    let (t, k) = an.vertices[v].corners[0];
    let e = raw.0[t][k].edge;
    let (t0, k0) = an.loc[e][0].unwrap();
    let (t1, k1) = an.loc[e][1].ok_or(Error::ExternalEdge(e))?;
    let p_is_v = an.corner_vertex[t0][k0] == v;
    let e2 = raw.1;
    let l = raw.1 + 1;
    raw.1 += 2;
    raw.0[t1][k1] = SideRef::new(e2, 0);
    let n = if p_is_v {
        [SideRef::new(e, 1), SideRef::new(l, 0), SideRef::new(e2, 1)]
    } else {
        [SideRef::new(e, 1), SideRef::new(e2, 1), SideRef::new(l, 0)]
    };
    raw.0.push(n);
    Ok(l)
}

fn construct(sig: &SurfaceSig) -> Result<Raw> {
    let g = sig.genus as usize;
    let s = sig.s();
    let mut raw: Raw;
    let mut holes_needed = s;
    if g >= 1 {
        let m = 4 * g;
        // polygon sides i: v_i -> v_{i+1} with word a1 b1 a1^-1 b1^-1 ...
        let mut side_edge = vec![(0usize, 0u8); m];
        for j in 0..g {
            side_edge[4 * j] = (2 * j, 0);
            side_edge[4 * j + 2] = (2 * j, 1);
            side_edge[4 * j + 1] = (2 * j + 1, 0);
            side_edge[4 * j + 3] = (2 * j + 1, 1);
        }
        let diag = |i: usize| 2 * g + i - 2;
        let mut tris = vec![];
        for i in 1..m - 1 {
            // counterclockwise (v0, v_i, v_{i+1}) listed clockwise
            let s_a = if i + 1 == m - 1 { SideRef::new(side_edge[m - 1].0, side_edge[m - 1].1) } else { SideRef::new(diag(i + 1), 0) };
            let s_b = SideRef::new(side_edge[i].0, side_edge[i].1);
            let s_c = if i == 1 { SideRef::new(side_edge[0].0, side_edge[0].1) } else { SideRef::new(diag(i), 1) };
            tris.push([s_a, s_b, s_c]);
        }
        raw = (tris, 2 * g + m - 3);
        holes_needed -= 1;
    } else if s == 1 {
        raw = (vec![[SideRef::new(0, 0), SideRef::new(1, 0), SideRef::new(2, 0)]], 3);
        for _ in 3..sig.boundary[0] {
            let e = raw.1 - 1;
            attach_triangle(&mut raw, e);
        }
        return Ok(raw);
    } else if s == 2 {
        let p = sig.boundary[0] as usize;
        let tris: Vec<[usize; 3]> = (1..p - 1).map(|i| [0, i, i + 1]).collect();
        let disc = Triangulation::polygon(p, &tris)?;
        raw = (disc.triangles.clone(), disc.n_edges);
        split_triangle(&mut raw, 0);
        if sig.boundary[1] > 0 {
            let (_, an) = raw_sig(&raw)?;
            let v = (0..an.vertices.len()).find(|&v| an.vertices[v].kind == VertexKind::Hole).unwrap();
            let mut l = cut_hole(&mut raw, v)?;
            for _ in 1..sig.boundary[1] {
                attach_triangle(&mut raw, l);
                l = raw.1 - 1;
            }
        }
        return Ok(raw);
    } else {
        raw = (
            vec![
                [SideRef::new(0, 0), SideRef::new(1, 0), SideRef::new(2, 0)],
                [SideRef::new(0, 1), SideRef::new(2, 1), SideRef::new(1, 1)],
            ],
            3,
        );
        holes_needed -= 3;
    }
    for _ in 0..holes_needed {
        let t = raw.0.len() - 1;
        split_triangle(&mut raw, t);
    }
    // open the holes that carry cilia, one per boundary component
    for &p in sig.boundary.iter().filter(|&&p| p > 0) {
        let (_, an) = raw_sig(&raw)?;
        let v = (0..an.vertices.len())
            .rev()
            .find(|&v| an.vertices[v].kind == VertexKind::Hole)
            .ok_or_else(|| Error::CountMismatch("ran out of holes".into()))?;
        let mut l = cut_hole(&mut raw, v)?;
        for _ in 1..p {
            attach_triangle(&mut raw, l);
            l = raw.1 - 1;
        }
    }
    Ok(raw)
}

/// Exhaustive search over gluings of `F` triangles; used for tiny signatures.
fn brute_force_base(sig: &SurfaceSig, counts: Counts) -> Result<Raw> {
    let nsides = 3 * counts.faces;
    let mut assign: Vec<Option<SideRef>> = vec![None; nsides];
    let mut best: Option<Raw> = None;
    fn rec(
        i: usize,
        assign: &mut Vec<Option<SideRef>>,
        next: usize,
        ext_left: usize,
        sig: &SurfaceSig,
        best: &mut Option<Raw>,
        found_clean: &mut bool,
    ) {
        if *found_clean {
            return;
        }
        let n = assign.len();
        if i == n {
            if ext_left != 0 {
                return;
            }
            let tris: Vec<[SideRef; 3]> =
                assign.chunks(3).map(|c| [c[0].unwrap(), c[1].unwrap(), c[2].unwrap()]).collect();
            if let Ok(an) = analyze(&tris, next) {
                if &an.sig == sig {
                    let clean = an.loc.iter().all(|l| match (l[0], l[1]) {
                        (Some((a, _)), Some((b, _))) => a != b,
                        _ => true,
                    });
                    if clean {
                        *found_clean = true;
                        *best = Some((tris, next));
                    } else if best.is_none() {
                        *best = Some((tris, next));
                    }
                }
            }
            return;
        }
        if assign[i].is_some() {
            rec(i + 1, assign, next, ext_left, sig, best, found_clean);
            return;
        }
        if ext_left > 0 {
            assign[i] = Some(SideRef::new(next, 0));
            rec(i + 1, assign, next + 1, ext_left - 1, sig, best, found_clean);
            assign[i] = None;
        }
        for j in i + 1..n {
            if assign[j].is_none() {
                assign[i] = Some(SideRef::new(next, 0));
                assign[j] = Some(SideRef::new(next, 1));
                rec(i + 1, assign, next + 1, ext_left, sig, best, found_clean);
                assign[i] = None;
                assign[j] = None;
            }
        }
    }
    let mut found_clean = false;
    rec(0, &mut assign, 0, counts.external, sig, &mut best, &mut found_clean);
    best.ok_or_else(|| Error::InadmissibleSignature(format!("no triangulation found for {sig}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts_match_known_cases() {
        let c = derive_counts(&SurfaceSig::new(0, vec![7])).unwrap();
        assert_eq!((c.edges, c.internal, c.faces, c.vertices), (11, 4, 5, 7));
        let c = derive_counts(&SurfaceSig::new(1, vec![0])).unwrap();
        assert_eq!((c.edges, c.internal, c.faces, c.vertices), (3, 3, 2, 1));
        let c = derive_counts(&SurfaceSig::new(0, vec![3])).unwrap();
        assert_eq!((c.edges, c.internal, c.faces, c.vertices), (3, 0, 1, 3));
        assert!(matches!(derive_counts(&SurfaceSig::new(0, vec![1])), Err(Error::InadmissibleSignature(_))));
    }

    #[test]
    fn torus_epsilon() {
        let t = Triangulation::punctured_torus();
        assert_eq!(t.epsilon_matrix().0, vec![vec![0, -2, 2], vec![2, 0, -2], vec![-2, 2, 0]]);
        assert_eq!(t.n_vertices(), 1);
        assert_eq!(t.incidence_vector(0), vec![2, 2, 2]);
    }

    #[test]
    fn single_triangle_epsilon() {
        let t = Triangulation::from_gluing(SurfaceSig::new(0, vec![3]), 1, &[]).unwrap();
        let e = t.epsilon_matrix();
        assert_eq!((e.get(1, 0), e.get(2, 1), e.get(0, 2)), (1, 1, 1));
    }

    #[test]
    fn gluing_errors() {
        let r = Triangulation::from_gluing(SurfaceSig::new(0, vec![3]), 1, &[((0, 0), (0, 0))]);
        assert!(matches!(r, Err(Error::BadGluing(_))));
        let r = Triangulation::from_gluing(SurfaceSig::new(0, vec![4]), 1, &[]);
        assert!(matches!(r, Err(Error::CountMismatch(_))));
    }

    #[test]
    fn torus_from_gluing() {
        let t = Triangulation::from_gluing(SurfaceSig::new(1, vec![0]), 2, &[((0, 0), (1, 0)), ((0, 1), (1, 1)), ((0, 2), (1, 2))])
            .unwrap();
        assert_eq!(t.n_edges(), 3);
    }

    #[test]
    fn heptagon_fan() {
        let t = Triangulation::disc_fan(7).unwrap();
        assert_eq!(t.n_triangles(), 5);
        assert_eq!(t.internal_edges().len(), 4);
        assert!(t.vertices().iter().all(|v| v.kind == VertexKind::Cilium));
    }

    #[test]
    fn square_flip_twice() {
        let t = Triangulation::disc_fan(4).unwrap();
        let f = t.flip(0).unwrap().new;
        assert_ne!(f, t);
        let ff = f.flip(0).unwrap().new;
        assert_eq!(triangulations_isomorphic(&ff, &t), Some((0..5).collect()));
        assert!(triangulations_isomorphic(&f, &t).is_some());
        assert!(matches!(t.flip(1), Err(Error::ExternalEdge(1))));
    }

    #[test]
    fn pentagon_swaps_diagonals() {
        let t = Triangulation::disc_fan(5).unwrap();
        let r = t.apply_word(&pentagon_word(0, 1)).unwrap();
        let iso = all_isomorphisms(&r, &t);
        assert!(iso.contains(&vec![1, 0, 2, 3, 4, 5, 6]));
    }

    #[test]
    fn fan_and_snake_differ() {
        let fan = Triangulation::disc_fan(7).unwrap();
        let snake = Triangulation::polygon(7, &[[0, 1, 2], [0, 2, 6], [2, 6, 3], [3, 6, 5], [3, 4, 5]]).unwrap();
        assert!(triangulations_isomorphic(&fan, &snake).is_none());
    }

    #[test]
    fn self_folded_rejected() {
        let t = Triangulation::standard(&SurfaceSig::new(0, vec![1, 0])).unwrap();
        let sf = (0..t.n_edges()).find(|&e| t.is_self_folded_edge(e)).unwrap();
        assert!(matches!(t.flip(sf), Err(Error::SelfFoldedEdge(_))));
    }

    #[test]
    fn standard_surfaces_build() {
        let sigs = [
            (0, vec![3]),
            (0, vec![5]),
            (0, vec![1, 0]),
            (0, vec![1, 1]),
            (0, vec![2, 0]),
            (0, vec![2, 2]),
            (0, vec![4, 0]),
            (0, vec![7, 3]),
            (0, vec![7, 0]),
            (0, vec![0, 0, 0]),
            (0, vec![2, 1, 0, 0]),
            (1, vec![0]),
            (1, vec![3]),
            (1, vec![0, 2]),
            (2, vec![0]),
            (2, vec![4, 1]),
        ];
        for (g, p) in sigs {
            let sig = SurfaceSig::new(g, p);
            let t = Triangulation::standard(&sig).unwrap();
            assert_eq!(t.sig(), &sig);
        }
    }

    #[test]
    fn json_round_trip() {
        let t = Triangulation::standard(&SurfaceSig::new(1, vec![2])).unwrap();
        let j = t.to_json();
        assert_eq!(Triangulation::from_json(&j).unwrap(), t);
    }

    #[test]
    fn random_flips_keep_epsilon_coherent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for sig in [SurfaceSig::new(1, vec![0]), SurfaceSig::new(0, vec![7, 3]), SurfaceSig::new(2, vec![1])] {
            let t = Triangulation::random(&sig, &mut rng, 20).unwrap();
            for e in t.flippable_edges() {
                let f = t.flip(e).unwrap().new;
                if f.has_self_folded() {
                    continue;
                }
                assert_eq!(transform_epsilon(&t, &t.epsilon_matrix(), e).unwrap(), f.epsilon_matrix());
            }
        }
    }

    #[test]
    fn disjoint_flips_commute() {
        // diagonals (0,2) and (3,5) share no triangle
        let z = Triangulation::polygon(6, &[[0, 1, 2], [0, 2, 3], [0, 3, 5], [3, 4, 5]]).unwrap();
        let r = verify_relation(&z, &[0, 2], &[2, 0]).unwrap();
        assert!(r.equal);
    }
}
