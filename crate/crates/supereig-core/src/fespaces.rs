//! DOF maps, local evaluation and canonical interpolation for CR, ECR, P1,
//! RT0 and P0.
//!
//! Local edge `i` of a triangle is opposite vertex `i`. CR and ECR DOFs are
//! edge means, ECR adds the element mean, RT0 DOFs are mean normal fluxes
//! along the global edge normal.

use alloc::vec::Vec;

use crate::FloatExt;
use crate::error::{Error, Result};
use crate::mesh::{BoundaryConditions, ElementGeometry, Triangulation};
use crate::quadrature::{edge_mean, integrate_tri};
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Cr,
    Ecr,
    P1,
    Rt0,
    P0,
}

impl ElementKind {
    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Cr => "cr",
            ElementKind::Ecr => "ecr",
            ElementKind::P1 => "p1",
            ElementKind::Rt0 => "rt0",
            ElementKind::P0 => "p0",
        }
    }

    /// Number of entities carrying a DOF.
    pub fn n_entities(self, mesh: &Triangulation) -> usize {
        match self {
            ElementKind::Cr | ElementKind::Rt0 => mesh.n_edges(),
            ElementKind::Ecr => mesh.n_edges() + mesh.n_triangles(),
            ElementKind::P1 => mesh.n_vertices(),
            ElementKind::P0 => mesh.n_triangles(),
        }
    }

    /// Entities of triangle `k`, local order.
    pub fn local_entities(self, mesh: &Triangulation, k: usize) -> ([usize; 4], usize) {
        let e = mesh.tri_edges(k);
        let t = mesh.triangles()[k];
        match self {
            ElementKind::Cr | ElementKind::Rt0 => ([e[0], e[1], e[2], 0], 3),
            ElementKind::Ecr => ([e[0], e[1], e[2], mesh.n_edges() + k], 4),
            ElementKind::P1 => ([t[0], t[1], t[2], 0], 3),
            ElementKind::P0 => ([k, 0, 0, 0], 1),
        }
    }
}

impl core::str::FromStr for ElementKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cr" => Ok(ElementKind::Cr),
            "ecr" => Ok(ElementKind::Ecr),
            "p1" => Ok(ElementKind::P1),
            "rt0" | "rt" => Ok(ElementKind::Rt0),
            "p0" => Ok(ElementKind::P0),
            _ => Err(Error::InvalidInput(alloc::format!("unknown element `{s}`"))),
        }
    }
}

const CONSTRAINED: usize = usize::MAX;

/// Numbering of the free DOFs of one element kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    kind: ElementKind,
    free_of_entity: Vec<usize>,
    entity_of_free: Vec<usize>,
}

impl DofMap {
    /// Dirichlet segments remove their entities (edges for CR/ECR, every
    /// vertex touching them for P1). For RT0 the essential condition sits on
    /// Neumann segments (zero normal flux).
    pub fn new(mesh: &Triangulation, kind: ElementKind, bc: &BoundaryConditions) -> Result<Self> {
        bc.validate(mesh)?;
        let n = kind.n_entities(mesh);
        let mut constrained = alloc::vec![false; n];
        for (e, edge) in mesh.edges().iter().enumerate() {
            if !edge.is_boundary() {
                continue;
            }
            let dir = bc.is_dirichlet(edge.tag);
            match kind {
                ElementKind::Cr | ElementKind::Ecr if dir => constrained[e] = true,
                ElementKind::P1 if dir => {
                    constrained[edge.v[0]] = true;
                    constrained[edge.v[1]] = true;
                }
                ElementKind::Rt0 if !dir => constrained[e] = true,
                _ => {}
            }
        }
        let mut free_of_entity = alloc::vec![CONSTRAINED; n];
        let mut entity_of_free = Vec::new();
        for (i, c) in constrained.into_iter().enumerate() {
            if !c {
                free_of_entity[i] = entity_of_free.len();
                entity_of_free.push(i);
            }
        }
        Ok(Self { kind, free_of_entity, entity_of_free })
    }

    /// Every entity free.
    pub fn unconstrained(mesh: &Triangulation, kind: ElementKind) -> Self {
        let n = kind.n_entities(mesh);
        Self { kind, free_of_entity: (0..n).collect(), entity_of_free: (0..n).collect() }
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }
    pub fn n_free(&self) -> usize {
        self.entity_of_free.len()
    }
    pub fn n_entities(&self) -> usize {
        self.free_of_entity.len()
    }
    pub fn n_constrained(&self) -> usize {
        self.n_entities() - self.n_free()
    }

    /// Free index of an entity, `None` if constrained.
    #[inline]
    pub fn free(&self, entity: usize) -> Option<usize> {
        let f = self.free_of_entity[entity];
        (f != CONSTRAINED).then_some(f)
    }

    pub fn entity(&self, free: usize) -> usize {
        self.entity_of_free[free]
    }

    /// Scatters free coefficients into an entity array (zeros elsewhere).
    pub fn expand(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut v = alloc::vec![0.0; self.n_entities()];
        for (f, &e) in self.entity_of_free.iter().enumerate() {
            v[e] = coeffs[f];
        }
        v
    }

    /// Gathers free coefficients from an entity array.
    pub fn restrict(&self, values: &[f64]) -> Vec<f64> {
        self.entity_of_free.iter().map(|&e| values[e]).collect()
    }
}

/// A finite element function stored by entity values (one per edge,
/// vertex or element as the kind dictates). Constrained entities of a
/// discrete solution hold zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FeFunction {
    pub kind: ElementKind,
    pub values: Vec<f64>,
}

/// Scalar value and gradient at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    pub value: f64,
    pub grad: Point,
}

/// Vector value and divergence at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxValue {
    pub value: Point,
    pub div: f64,
}

/// ECR bubble `2 - 36 |x - M|^2 / H_K`: zero edge means, unit element mean.
#[inline]
pub fn ecr_bubble(g: &ElementGeometry, x: Point) -> f64 {
    let d = [x[0] - g.centroid[0], x[1] - g.centroid[1]];
    2.0 - 36.0 / g.h_k * (d[0] * d[0] + d[1] * d[1])
}

#[inline]
pub fn ecr_bubble_grad(g: &ElementGeometry, x: Point) -> Point {
    let s = -72.0 / g.h_k;
    [s * (x[0] - g.centroid[0]), s * (x[1] - g.centroid[1])]
}

impl FeFunction {
    pub fn zeros(mesh: &Triangulation, kind: ElementKind) -> Self {
        Self { kind, values: alloc::vec![0.0; kind.n_entities(mesh)] }
    }

    pub fn from_free(dofs: &DofMap, coeffs: &[f64]) -> Self {
        Self { kind: dofs.kind(), values: dofs.expand(coeffs) }
    }

    /// Local coefficients on triangle `k`. RT0 fluxes come back already
    /// multiplied by the local orientation sign.
    #[inline]
    pub fn local(&self, mesh: &Triangulation, k: usize) -> [f64; 4] {
        let (ent, n) = self.kind.local_entities(mesh, k);
        let mut c = [0.0; 4];
        for i in 0..n {
            c[i] = self.values[ent[i]];
        }
        if self.kind == ElementKind::Rt0 {
            for (i, ci) in c.iter_mut().take(3).enumerate() {
                *ci *= mesh.edge_sign(k, i);
            }
        }
        c
    }

    /// Scalar evaluation with known geometry and barycentric coordinates.
    #[inline]
    pub fn scalar_local(&self, g: &ElementGeometry, c: &[f64; 4], b: &[f64; 3]) -> PointValue {
        match self.kind {
            ElementKind::Cr | ElementKind::Ecr => {
                let mut value = 0.0;
                let mut grad = [0.0; 2];
                for i in 0..3 {
                    value += c[i] * (1.0 - 2.0 * b[i]);
                    grad[0] -= 2.0 * c[i] * g.grad_bary[i][0];
                    grad[1] -= 2.0 * c[i] * g.grad_bary[i][1];
                }
                if self.kind == ElementKind::Ecr {
                    let x = g.point(b);
                    let w = c[3] - (c[0] + c[1] + c[2]) / 3.0;
                    let gb = ecr_bubble_grad(g, x);
                    value += w * ecr_bubble(g, x);
                    grad[0] += w * gb[0];
                    grad[1] += w * gb[1];
                }
                PointValue { value, grad }
            }
            ElementKind::P1 => {
                let mut value = 0.0;
                let mut grad = [0.0; 2];
                for i in 0..3 {
                    value += c[i] * b[i];
                    grad[0] += c[i] * g.grad_bary[i][0];
                    grad[1] += c[i] * g.grad_bary[i][1];
                }
                PointValue { value, grad }
            }
            ElementKind::P0 => PointValue { value: c[0], grad: [0.0; 2] },
            ElementKind::Rt0 => PointValue { value: f64::NAN, grad: [f64::NAN; 2] },
        }
    }

    /// RT0 evaluation with signed local coefficients from [`Self::local`].
    #[inline]
    pub fn flux_local(g: &ElementGeometry, c: &[f64; 4], x: Point) -> FluxValue {
        let mut value = [0.0; 2];
        let mut div = 0.0;
        for i in 0..3 {
            let s = c[i] / g.heights[i];
            value[0] += s * (x[0] - g.p[i][0]);
            value[1] += s * (x[1] - g.p[i][1]);
            div += 2.0 * s;
        }
        FluxValue { value, div }
    }

    fn locate(mesh: &Triangulation, k: usize, x: Point) -> Result<(ElementGeometry, [f64; 3])> {
        let g = mesh.element_geometry(k)?;
        let b = g.bary(x);
        if b.iter().any(|&v| v < -1e-10) {
            return Err(Error::OutsideElement(k));
        }
        Ok((g, b))
    }

    /// Value and gradient at `x` inside triangle `k` (scalar kinds).
    pub fn eval(&self, mesh: &Triangulation, k: usize, x: Point) -> Result<PointValue> {
        if self.kind == ElementKind::Rt0 {
            return Err(Error::UnsupportedKind(self.kind));
        }
        let (g, b) = Self::locate(mesh, k, x)?;
        Ok(self.scalar_local(&g, &self.local(mesh, k), &b))
    }

    /// Value and divergence at `x` inside triangle `k` (RT0 only).
    pub fn eval_flux(&self, mesh: &Triangulation, k: usize, x: Point) -> Result<FluxValue> {
        if self.kind != ElementKind::Rt0 {
            return Err(Error::UnsupportedKind(self.kind));
        }
        let (g, _) = Self::locate(mesh, k, x)?;
        Ok(Self::flux_local(&g, &self.local(mesh, k), x))
    }

    /// Broken gradient (scalar kinds) or value (RT0) at barycentric `b` of
    /// triangle `k`.
    pub fn vector_at(&self, mesh: &Triangulation, g: &ElementGeometry, k: usize, b: &[f64; 3]) -> Point {
        let c = self.local(mesh, k);
        if self.kind == ElementKind::Rt0 {
            Self::flux_local(g, &c, g.point(b)).value
        } else {
            self.scalar_local(g, &c, b).grad
        }
    }

    /// L2 norm of the function (scalar kinds) or of the field (RT0).
    pub fn l2_norm(&self, mesh: &Triangulation) -> f64 {
        let mut s = 0.0;
        for k in 0..mesh.n_triangles() {
            let g = mesh.geometry(k);
            let c = self.local(mesh, k);
            s += integrate_tri(&g.p, g.area, |x, b| {
                if self.kind == ElementKind::Rt0 {
                    let v = Self::flux_local(&g, &c, x).value;
                    v[0] * v[0] + v[1] * v[1]
                } else {
                    self.scalar_local(&g, &c, &b).value.sq()
                }
            });
        }
        crate::sqrt(s)
    }
}

/// Canonical interpolation of a scalar field into CR, ECR, P1 or P0.
pub fn interpolate(mesh: &Triangulation, kind: ElementKind, f: &dyn Fn(Point) -> f64) -> Result<FeFunction> {
    let mut u = FeFunction::zeros(mesh, kind);
    let verts = mesh.vertices();
    match kind {
        ElementKind::Cr | ElementKind::Ecr => {
            for (e, edge) in mesh.edges().iter().enumerate() {
                u.values[e] = edge_mean(verts[edge.v[0]], verts[edge.v[1]], f);
            }
            if kind == ElementKind::Ecr {
                let ne = mesh.n_edges();
                for k in 0..mesh.n_triangles() {
                    let g = mesh.geometry(k);
                    u.values[ne + k] = integrate_tri(&g.p, g.area, |x, _| f(x)) / g.area;
                }
            }
        }
        ElementKind::P1 => {
            for (v, p) in verts.iter().enumerate() {
                u.values[v] = f(*p);
            }
        }
        ElementKind::P0 => {
            for k in 0..mesh.n_triangles() {
                let g = mesh.geometry(k);
                u.values[k] = integrate_tri(&g.p, g.area, |x, _| f(x)) / g.area;
            }
        }
        ElementKind::Rt0 => return Err(Error::UnsupportedKind(kind)),
    }
    Ok(u)
}

/// Fortin interpolation of a vector field into RT0 (mean normal fluxes).
pub fn interpolate_flux(mesh: &Triangulation, f: &dyn Fn(Point) -> Point) -> FeFunction {
    let verts = mesh.vertices();
    let mut u = FeFunction::zeros(mesh, ElementKind::Rt0);
    for e in 0..mesh.n_edges() {
        let edge = mesh.edges()[e];
        let n = mesh.edge_normal(e);
        u.values[e] = edge_mean(verts[edge.v[0]], verts[edge.v[1]], |x| {
            let v = f(x);
            v[0] * n[0] + v[1] * n[1]
        });
    }
    u
}

/// Mean of `[v]` over interior edge `e` (value from `k1` minus value from
/// `k2`); zero for CR and ECR functions.
pub fn edge_jump_mean(u: &FeFunction, mesh: &Triangulation, e: usize) -> f64 {
    let edge = mesh.edges()[e];
    let Some(k2) = edge.k2 else { return 0.0 };
    let verts = mesh.vertices();
    let side = |k: usize| {
        let g = mesh.geometry(k);
        let c = u.local(mesh, k);
        edge_mean(verts[edge.v[0]], verts[edge.v[1]], |x| u.scalar_local(&g, &c, &g.bary(x)).value)
    };
    side(edge.k1.0) - side(k2.0)
}
