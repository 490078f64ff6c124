//! Triangulations of the benchmark domains, uniform refinement and
//! per-element geometry.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::FloatExt;
use crate::error::{Error, Result};
use crate::{sqrt, Point};

/// Boundary segment label. `0` marks interior edges.
pub type SegmentTag = u8;

/// The four benchmark domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// (0,1)^2 cut by the north-east diagonal.
    UnitSquare,
    /// Unit square with three interior-perturbed vertices; not uniform.
    PerturbedSquare,
    /// Isosceles triangle with a 120 degree apex at (1/2, sqrt3/2) and the
    /// opposite side on x1 = 1.
    EquilateralTriangle,
    /// (-1,1)^2 minus [0,1]x[-1,0]; three unit squares, NE diagonals.
    LShape,
}

impl Domain {
    pub const ALL: [Domain; 4] = [
        Domain::UnitSquare,
        Domain::PerturbedSquare,
        Domain::EquilateralTriangle,
        Domain::LShape,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Domain::UnitSquare => "unit-square",
            Domain::PerturbedSquare => "perturbed-square",
            Domain::EquilateralTriangle => "equilateral-triangle",
            Domain::LShape => "l-shape",
        }
    }

    /// Segment labels of the boundary.
    ///
    /// Squares: 1 south, 2 east, 3 north, 4 west. Triangle: 1 on
    /// x2 = sqrt3 x1, 2 on x2 = sqrt3 (1 - x1), 3 on x1 = 1. L-shape: 1..6
    /// counterclockwise starting at the bottom edge.
    pub fn segments(self) -> &'static [SegmentTag] {
        match self {
            Domain::UnitSquare | Domain::PerturbedSquare => &[1, 2, 3, 4],
            Domain::EquilateralTriangle => &[1, 2, 3],
            Domain::LShape => &[1, 2, 3, 4, 5, 6],
        }
    }

    /// Mesh size of level 1 (legs of the right triangles, or the side of the
    /// half-sized triangles).
    pub fn base_h(self) -> f64 {
        match self {
            Domain::EquilateralTriangle => 0.5,
            _ => 1.0,
        }
    }

    fn coarse(self) -> (Vec<Point>, Vec<[usize; 3]>) {
        match self {
            Domain::UnitSquare => (
                alloc::vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
                alloc::vec![[0, 1, 2], [0, 2, 3]],
            ),
            Domain::PerturbedSquare => (
                alloc::vec![
                    [0.0, 0.0],
                    [1.0, 0.0],
                    [1.0, 1.0],
                    [0.0, 1.0],
                    [0.0, 0.9],
                    [0.05, 0.0],
                    [0.9, 1.0]
                ],
                alloc::vec![[0, 5, 4], [4, 5, 6], [4, 6, 3], [5, 1, 6], [1, 2, 6]],
            ),
            Domain::EquilateralTriangle => {
                let s3 = sqrt(3.0);
                (
                    alloc::vec![[0.5, 0.5 * s3], [1.0, 0.0], [1.0, s3]],
                    alloc::vec![[0, 1, 2]],
                )
            }
            Domain::LShape => (
                alloc::vec![
                    [-1.0, -1.0],
                    [0.0, -1.0],
                    [-1.0, 0.0],
                    [0.0, 0.0],
                    [1.0, 0.0],
                    [-1.0, 1.0],
                    [0.0, 1.0],
                    [1.0, 1.0]
                ],
                alloc::vec![[0, 1, 3], [0, 3, 2], [2, 3, 6], [2, 6, 5], [3, 4, 7], [3, 7, 6]],
            ),
        }
    }

    /// Label of a coarse boundary edge, decided on its endpoints.
    fn coarse_tag(self, a: Point, b: Point) -> SegmentTag {
        let on = |f: &dyn Fn(Point) -> bool| f(a) && f(b);
        let eq = |x: f64, y: f64| (x - y).abs() < 1e-12;
        match self {
            Domain::UnitSquare | Domain::PerturbedSquare => {
                if on(&|p| eq(p[1], 0.0)) {
                    1
                } else if on(&|p| eq(p[0], 1.0)) {
                    2
                } else if on(&|p| eq(p[1], 1.0)) {
                    3
                } else {
                    4
                }
            }
            Domain::EquilateralTriangle => {
                let s3 = sqrt(3.0);
                if on(&|p| eq(p[0], 1.0)) {
                    3
                } else if on(&|p| eq(p[1], s3 * p[0])) {
                    1
                } else {
                    2
                }
            }
            Domain::LShape => {
                if on(&|p| eq(p[1], -1.0)) {
                    1
                } else if on(&|p| eq(p[0], 0.0) && p[1] <= 0.0) {
                    2
                } else if on(&|p| eq(p[1], 0.0) && p[0] >= 0.0) {
                    3
                } else if on(&|p| eq(p[0], 1.0)) {
                    4
                } else if on(&|p| eq(p[1], 1.0)) {
                    5
                } else {
                    6
                }
            }
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Domain::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::InvalidInput(alloc::format!("unknown domain `{s}`")))
    }
}

/// An edge with its adjacent triangles.
///
/// `k1` is the adjacent triangle with the larger label, `k2` the smaller
/// one (absent on the boundary). The edge normal points out of `k1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// Endpoints, `v[0] < v[1]`.
    pub v: [usize; 2],
    /// (triangle, local edge index) with the larger triangle label.
    pub k1: (usize, usize),
    pub k2: Option<(usize, usize)>,
    pub tag: SegmentTag,
}

impl Edge {
    #[inline]
    pub fn is_boundary(&self) -> bool {
        self.k2.is_none()
    }
}

/// Conforming triangulation with derived edges.
#[derive(Debug, Clone)]
pub struct Triangulation {
    domain: Option<Domain>,
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    tri_edges: Vec<[usize; 3]>,
    level: u32,
    parent: Vec<usize>,
}

/// Per-element quantities. Local edge `i` is opposite vertex `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub p: [Point; 3],
    pub area: f64,
    pub centroid: Point,
    pub lengths: [f64; 3],
    pub heights: [f64; 3],
    pub normals: [Point; 3],
    pub h_k: f64,
    pub a_k: f64,
    pub b_k: f64,
    /// Gradients of the barycentric coordinates.
    pub grad_bary: [Point; 3],
}

impl ElementGeometry {
    pub fn new(p: [Point; 3]) -> Option<Self> {
        let area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        if !(area2 > 0.0) || !area2.is_finite() {
            return None;
        }
        let area = 0.5 * area2;
        let centroid = [
            (p[0][0] + p[1][0] + p[2][0]) / 3.0,
            (p[0][1] + p[1][1] + p[2][1]) / 3.0,
        ];
        let mut lengths = [0.0; 3];
        let mut heights = [0.0; 3];
        let mut normals = [[0.0; 2]; 3];
        let mut grad_bary = [[0.0; 2]; 3];
        let mut h_k = 0.0;
        for i in 0..3 {
            let a = p[(i + 1) % 3];
            let b = p[(i + 2) % 3];
            let t = [b[0] - a[0], b[1] - a[1]];
            let l = sqrt(t[0] * t[0] + t[1] * t[1]);
            lengths[i] = l;
            heights[i] = area2 / l;
            normals[i] = [t[1] / l, -t[0] / l];
            grad_bary[i] = [-normals[i][0] / heights[i], -normals[i][1] / heights[i]];
            h_k += l * l;
        }
        let mut a_k = 0.0;
        let mut b_k = 0.0;
        for i in 0..3 {
            b_k += 2.0 * p[i][0] * p[i][1];
            for j in 0..3 {
                if i != j {
                    let dx = p[i][0] - p[j][0];
                    let dy = p[i][1] - p[j][1];
                    a_k += dx * dx - dy * dy;
                    b_k -= p[i][0] * p[j][1];
                }
            }
        }
        Some(Self { p, area, centroid, lengths, heights, normals, h_k, a_k, b_k, grad_bary })
    }

    /// Cartesian point of barycentric coordinates `b`.
    #[inline]
    pub fn point(&self, b: &[f64; 3]) -> Point {
        crate::quadrature::bary_point(&self.p, b)
    }

    /// Barycentric coordinates of `x`.
    pub fn bary(&self, x: Point) -> [f64; 3] {
        let mut b = [0.0; 3];
        for (i, bi) in b.iter_mut().enumerate() {
            *bi = 1.0 + self.grad_bary[i][0] * (x[0] - self.p[i][0]) + self.grad_bary[i][1] * (x[1] - self.p[i][1]);
        }
        b
    }

    /// Midpoint of local edge `i`.
    #[inline]
    pub fn midpoint(&self, i: usize) -> Point {
        let a = self.p[(i + 1) % 3];
        let b = self.p[(i + 2) % 3];
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }
}

impl Triangulation {
    /// Builds a mesh from raw data. Boundary edges are labelled by `tag`,
    /// which receives the two endpoint indices.
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        tag: impl Fn(usize, usize) -> SegmentTag,
    ) -> Result<Self> {
        let nv = vertices.len();
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidInput(alloc::format!("triangle {k} has bad vertex indices")));
            }
            let p = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
            if ElementGeometry::new(p).is_none() {
                return Err(Error::Geometry(k));
            }
        }
        // edges are numbered in lexicographic order of their vertex pairs
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for t in &triangles {
            for i in 0..3 {
                let (a, b) = (t[(i + 1) % 3], t[(i + 2) % 3]);
                index.insert((a.min(b), a.max(b)), 0);
            }
        }
        let mut adj: Vec<([usize; 2], Vec<(usize, usize)>)> = Vec::with_capacity(index.len());
        for (e, (key, slot)) in index.iter_mut().enumerate() {
            *slot = e;
            adj.push(([key.0, key.1], Vec::new()));
        }
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (k, t) in triangles.iter().enumerate() {
            let mut te = [0; 3];
            for (i, slot) in te.iter_mut().enumerate() {
                let (a, b) = (t[(i + 1) % 3], t[(i + 2) % 3]);
                let e = index[&(a.min(b), a.max(b))];
                adj[e].1.push((k, i));
                *slot = e;
            }
            tri_edges.push(te);
        }
        let mut edges = Vec::with_capacity(adj.len());
        for (e, (v, list)) in adj.into_iter().enumerate() {
            let edge = match list.as_slice() {
                [one] => Edge { v, k1: *one, k2: None, tag: tag(v[0], v[1]) },
                [x, y] => {
                    let (k1, k2) = if x.0 > y.0 { (*x, *y) } else { (*y, *x) };
                    Edge { v, k1, k2: Some(k2), tag: 0 }
                }
                _ => {
                    return Err(Error::InvalidInput(alloc::format!(
                        "edge {e} has {} adjacent triangles",
                        list.len()
                    )))
                }
            };
            if edge.is_boundary() && edge.tag == 0 {
                return Err(Error::InvalidInput(alloc::format!("boundary edge {e} has no segment label")));
            }
            edges.push(edge);
        }
        Ok(Self { domain: None, vertices, triangles, edges, tri_edges, level: 1, parent: Vec::new() })
    }

    /// Level-`level` mesh of a benchmark domain.
    pub fn build(domain: Domain, level: u32) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidInput("level must be at least 1".into()));
        }
        let (v, t) = domain.coarse();
        let pts = v.clone();
        let mut m = Self::from_parts(v, t, |a, b| domain.coarse_tag(pts[a], pts[b]))?;
        m.domain = Some(domain);
        if domain == Domain::EquilateralTriangle {
            // the coarse mesh is the four half-sized triangles
            m = m.refine();
            m.level = 1;
            m.parent.clear();
        }
        for _ in 1..level {
            m = m.refine();
        }
        Ok(m)
    }

    /// Uniform red refinement: every triangle splits into four through its
    /// edge midpoints. Midpoint of edge `e` gets vertex index `nv + e`.
    pub fn refine(&self) -> Self {
        // midpoints are numbered in order of first appearance, visiting the
        // edges ab, bc, ca of each triangle in turn
        let mut vertices = self.vertices.clone();
        vertices.reserve(self.edges.len());
        let mut mid = alloc::vec![usize::MAX; self.edges.len()];
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        let mut parent = Vec::with_capacity(4 * self.triangles.len());
        for (k, t) in self.triangles.iter().enumerate() {
            let te = self.tri_edges[k];
            let mut m = [0; 3];
            for (slot, local) in [(2, 2), (0, 0), (1, 1)] {
                let e = te[local];
                if mid[e] == usize::MAX {
                    let (a, b) = (self.vertices[self.edges[e].v[0]], self.vertices[self.edges[e].v[1]]);
                    mid[e] = vertices.len();
                    vertices.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
                }
                m[slot] = mid[e];
            }
            let (a, b, c) = (t[0], t[1], t[2]);
            let (bc, ca, ab) = (m[0], m[1], m[2]);
            triangles.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [bc, ca, ab]]);
            parent.extend_from_slice(&[k; 4]);
        }
        let mut tags: BTreeMap<(usize, usize), SegmentTag> = BTreeMap::new();
        for (e, edge) in self.edges.iter().enumerate() {
            if edge.is_boundary() {
                let m = mid[e];
                for v in edge.v {
                    tags.insert((v.min(m), v.max(m)), edge.tag);
                }
            }
        }
        let mut out = Self::from_parts(vertices, triangles, |a, b| tags.get(&(a, b)).copied().unwrap_or(0))
            .expect("refinement of a valid mesh is valid");
        out.domain = self.domain;
        out.level = self.level + 1;
        out.parent = parent;
        out
    }

    pub fn domain(&self) -> Option<Domain> {
        self.domain
    }
    pub fn level(&self) -> u32 {
        self.level
    }
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    /// Edge indices of triangle `k`; slot `i` is opposite vertex `i`.
    pub fn tri_edges(&self, k: usize) -> [usize; 3] {
        self.tri_edges[k]
    }
    /// Parent triangle of `k` in the previous level (none at level 1).
    pub fn parent(&self, k: usize) -> Option<usize> {
        self.parent.get(k).copied()
    }
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Mesh size assigned to this level.
    /// Nominal mesh size; the longest edge for meshes without a domain.
    pub fn h(&self) -> f64 {
        match self.domain {
            Some(d) => d.base_h() / f64::from(1u32 << (self.level - 1).min(30)),
            None => (0..self.edges.len()).map(|e| self.edge_length(e)).fold(0.0, f64::max),
        }
    }

    pub fn geometry(&self, k: usize) -> ElementGeometry {
        let t = self.triangles[k];
        ElementGeometry::new([self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]])
            .expect("triangles are validated on construction")
    }

    /// Checked variant of [`Self::geometry`].
    pub fn element_geometry(&self, k: usize) -> Result<ElementGeometry> {
        let t = self.triangles.get(k).ok_or(Error::Geometry(k))?;
        ElementGeometry::new([self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]).ok_or(Error::Geometry(k))
    }

    /// Segment tags appearing on the boundary.
    pub fn boundary_tags(&self) -> Vec<SegmentTag> {
        let mut t: Vec<SegmentTag> = self.edges.iter().filter(|e| e.is_boundary()).map(|e| e.tag).collect();
        t.sort_unstable();
        t.dedup();
        t
    }

    /// Bitmask of the segments touching each vertex (bit `s-1` for tag `s`).
    pub fn vertex_segment_masks(&self) -> Vec<u32> {
        let mut m = alloc::vec![0u32; self.vertices.len()];
        for e in self.edges.iter().filter(|e| e.is_boundary()) {
            for v in e.v {
                m[v] |= 1 << (e.tag - 1);
            }
        }
        m
    }

    /// True iff every pair of triangles sharing an edge forms a parallelogram.
    pub fn is_uniform(&self) -> bool {
        self.edges.iter().all(|e| {
            let Some((k2, i2)) = e.k2 else { return true };
            let (k1, i1) = e.k1;
            let a = self.vertices[e.v[0]];
            let b = self.vertices[e.v[1]];
            let o1 = self.vertices[self.triangles[k1][i1]];
            let o2 = self.vertices[self.triangles[k2][i2]];
            let r = [a[0] + b[0] - o1[0], a[1] + b[1] - o1[1]];
            let h = sqrt((a[0] - b[0]).sq() + (a[1] - b[1]).sq());
            sqrt((r[0] - o2[0]).sq() + (r[1] - o2[1]).sq()) <= 1e-9 * h
        })
    }

    /// Unit normal of edge `e`, pointing out of `k1`.
    pub fn edge_normal(&self, e: usize) -> Point {
        let (k, i) = self.edges[e].k1;
        self.geometry(k).normals[i]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let a = self.vertices[self.edges[e].v[0]];
        let b = self.vertices[self.edges[e].v[1]];
        sqrt((a[0] - b[0]).sq() + (a[1] - b[1]).sq())
    }

    /// +1 if the outward normal of local edge `i` of triangle `k` agrees
    /// with the global edge normal, -1 otherwise.
    #[inline]
    pub fn edge_sign(&self, k: usize, i: usize) -> f64 {
        let e = &self.edges[self.tri_edges[k][i]];
        if e.k1.0 == k {
            1.0
        } else {
            -1.0
        }
    }

    /// Triangles touching each vertex, in increasing order.
    pub fn vertex_patches(&self) -> Vec<Vec<usize>> {
        let mut p = alloc::vec![Vec::new(); self.vertices.len()];
        for (k, t) in self.triangles.iter().enumerate() {
            for &v in t {
                p[v].push(k);
            }
        }
        p
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|k| self.geometry(k).area).sum()
    }
}

/// Boundary condition kind per segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

/// Map from segment tags to boundary condition kinds.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BoundaryConditions {
    entries: Vec<(SegmentTag, BoundaryKind)>,
}

impl BoundaryConditions {
    pub fn new(entries: impl IntoIterator<Item = (SegmentTag, BoundaryKind)>) -> Self {
        Self { entries: entries.into_iter().collect() }
    }

    /// Homogeneous Dirichlet on every segment of `domain`.
    pub fn dirichlet(domain: Domain) -> Self {
        Self::new(domain.segments().iter().map(|&s| (s, BoundaryKind::Dirichlet)))
    }

    /// Dirichlet on `tags`, Neumann on every other segment of `domain`.
    pub fn mixed(domain: Domain, dirichlet_tags: &[SegmentTag]) -> Self {
        Self::new(domain.segments().iter().map(|&s| {
            let k = if dirichlet_tags.contains(&s) { BoundaryKind::Dirichlet } else { BoundaryKind::Neumann };
            (s, k)
        }))
    }

    pub fn kind(&self, tag: SegmentTag) -> Option<BoundaryKind> {
        self.entries.iter().find(|e| e.0 == tag).map(|e| e.1)
    }

    /// Errors if some boundary segment of `mesh` has no entry.
    pub fn validate(&self, mesh: &Triangulation) -> Result<()> {
        for t in mesh.boundary_tags() {
            if self.kind(t).is_none() {
                return Err(Error::Configuration(t));
            }
        }
        Ok(())
    }

    pub fn is_dirichlet(&self, tag: SegmentTag) -> bool {
        self.kind(tag) == Some(BoundaryKind::Dirichlet)
    }
}
