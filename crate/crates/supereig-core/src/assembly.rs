//! Stiffness, mass and load assembly; the RT0-P0 mixed system.
//!
//! Constrained (Dirichlet) DOFs are dropped, never penalized.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fespaces::{ecr_bubble, ecr_bubble_grad, DofMap, ElementKind};
use crate::mesh::{ElementGeometry, Triangulation};
use crate::quadrature::{integrate_tri, TRI7};
use crate::sparse::CsrMatrix;
use crate::Point;

/// Values and gradients of the local basis at barycentric `b`.
///
/// CR: `1 - 2 b_i`. ECR: `1 - 2 b_i - B/3` for the edges and the bubble
/// `B` for the element, so that each function has unit mean on its own
/// entity and zero mean on the others. P1: `b_i`. P0: 1.
pub fn local_basis(kind: ElementKind, g: &ElementGeometry, b: &[f64; 3]) -> ([f64; 4], [Point; 4], usize) {
    let mut v = [0.0; 4];
    let mut d = [[0.0; 2]; 4];
    match kind {
        ElementKind::Cr | ElementKind::Ecr => {
            for i in 0..3 {
                v[i] = 1.0 - 2.0 * b[i];
                d[i] = [-2.0 * g.grad_bary[i][0], -2.0 * g.grad_bary[i][1]];
            }
            if kind == ElementKind::Ecr {
                let x = g.point(b);
                let bb = ecr_bubble(g, x);
                let gb = ecr_bubble_grad(g, x);
                for i in 0..3 {
                    v[i] -= bb / 3.0;
                    d[i][0] -= gb[0] / 3.0;
                    d[i][1] -= gb[1] / 3.0;
                }
                v[3] = bb;
                d[3] = gb;
                return (v, d, 4);
            }
            (v, d, 3)
        }
        ElementKind::P1 => {
            for i in 0..3 {
                v[i] = b[i];
                d[i] = g.grad_bary[i];
            }
            (v, d, 3)
        }
        ElementKind::P0 => {
            v[0] = 1.0;
            (v, d, 1)
        }
        ElementKind::Rt0 => (v, d, 0),
    }
}

/// Element stiffness matrix.
pub fn local_stiffness(kind: ElementKind, g: &ElementGeometry) -> [[f64; 4]; 4] {
    let mut a = [[0.0; 4]; 4];
    match kind {
        ElementKind::Cr | ElementKind::P1 => {
            let s = if kind == ElementKind::Cr { 4.0 } else { 1.0 };
            for i in 0..3 {
                for j in 0..3 {
                    let gi = g.grad_bary[i];
                    let gj = g.grad_bary[j];
                    a[i][j] = s * (gi[0] * gj[0] + gi[1] * gj[1]) * g.area;
                }
            }
        }
        ElementKind::Ecr => {
            for n in &TRI7 {
                let (_, d, _) = local_basis(kind, g, &n.bary);
                for i in 0..4 {
                    for j in 0..4 {
                        a[i][j] += n.weight * g.area * (d[i][0] * d[j][0] + d[i][1] * d[j][1]);
                    }
                }
            }
        }
        _ => {}
    }
    a
}

/// Element mass matrix. CR is diagonal (the edge-midpoint rule is exact
/// for products of CR functions).
pub fn local_mass(kind: ElementKind, g: &ElementGeometry) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    match kind {
        ElementKind::Cr => {
            for (i, row) in m.iter_mut().enumerate().take(3) {
                row[i] = g.area / 3.0;
            }
        }
        ElementKind::P1 => {
            for (i, row) in m.iter_mut().enumerate().take(3) {
                for (j, v) in row.iter_mut().enumerate().take(3) {
                    *v = g.area / if i == j { 6.0 } else { 12.0 };
                }
            }
        }
        ElementKind::Ecr => {
            for n in &TRI7 {
                let (v, _, _) = local_basis(kind, g, &n.bary);
                for i in 0..4 {
                    for j in 0..4 {
                        m[i][j] += n.weight * g.area * v[i] * v[j];
                    }
                }
            }
        }
        ElementKind::P0 => m[0][0] = g.area,
        ElementKind::Rt0 => {}
    }
    m
}

fn assemble(mesh: &Triangulation, dofs: &DofMap, local: impl Fn(&ElementGeometry) -> [[f64; 4]; 4]) -> CsrMatrix {
    let kind = dofs.kind();
    let mut t = Vec::with_capacity(mesh.n_triangles() * 16);
    for k in 0..mesh.n_triangles() {
        let g = mesh.geometry(k);
        let a = local(&g);
        let (ent, n) = kind.local_entities(mesh, k);
        for i in 0..n {
            let Some(fi) = dofs.free(ent[i]) else { continue };
            for j in 0..n {
                let Some(fj) = dofs.free(ent[j]) else { continue };
                if a[i][j] != 0.0 || i == j {
                    t.push((fi, fj, a[i][j]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(dofs.n_free(), dofs.n_free(), t)
}

fn check_primal(dofs: &DofMap) -> Result<()> {
    match dofs.kind() {
        ElementKind::Cr | ElementKind::Ecr | ElementKind::P1 => Ok(()),
        k => Err(Error::UnsupportedKind(k)),
    }
}

/// `A_ij = sum_K int_K grad phi_i . grad phi_j` over free DOFs.
pub fn stiffness(mesh: &Triangulation, dofs: &DofMap) -> Result<CsrMatrix> {
    check_primal(dofs)?;
    let kind = dofs.kind();
    Ok(assemble(mesh, dofs, |g| local_stiffness(kind, g)))
}

/// `M_ij = int phi_i phi_j` over free DOFs.
pub fn mass(mesh: &Triangulation, dofs: &DofMap) -> Result<CsrMatrix> {
    check_primal(dofs)?;
    let kind = dofs.kind();
    Ok(assemble(mesh, dofs, |g| local_mass(kind, g)))
}

/// `F_i = int f phi_i` over free DOFs (CR, ECR, P1, P0).
pub fn load(mesh: &Triangulation, dofs: &DofMap, f: &dyn Fn(Point) -> f64) -> Result<Vec<f64>> {
    let kind = dofs.kind();
    if kind == ElementKind::Rt0 {
        return Err(Error::UnsupportedKind(kind));
    }
    let mut rhs = alloc::vec![0.0; dofs.n_free()];
    for k in 0..mesh.n_triangles() {
        let g = mesh.geometry(k);
        let (ent, n) = kind.local_entities(mesh, k);
        let mut loc = [0.0; 4];
        for q in &TRI7 {
            let fx = f(g.point(&q.bary));
            let (v, _, _) = local_basis(kind, &g, &q.bary);
            for i in 0..n {
                loc[i] += q.weight * g.area * fx * v[i];
            }
        }
        for i in 0..n {
            if let Some(fi) = dofs.free(ent[i]) {
                rhs[fi] += loc[i];
            }
        }
    }
    Ok(rhs)
}

/// Mixed RT0-P0 discretization of `-Laplace u = f`:
///
/// ```text
/// (sigma, tau) - (u, div tau) = 0
/// (div sigma, v)              = (f, v)
/// ```
///
/// so that `sigma` approximates `-grad u`. Passing `-f` yields a flux that
/// approximates `grad u` of the problem with load `f`.
#[derive(Debug, Clone)]
pub struct RtSystem {
    /// Free RT0 DOFs.
    pub dofs: DofMap,
    /// RT0 mass matrix.
    pub mass: CsrMatrix,
    /// `B[K][e] = int_K div psi_e`, triangles x free edges.
    pub div: CsrMatrix,
    /// `(f, 1_K)`.
    pub load: Vec<f64>,
}

impl RtSystem {
    pub fn assemble(mesh: &Triangulation, dofs: DofMap, f: &dyn Fn(Point) -> f64) -> Result<Self> {
        if dofs.kind() != ElementKind::Rt0 {
            return Err(Error::UnsupportedKind(dofs.kind()));
        }
        let nt = mesh.n_triangles();
        let mut tm = Vec::with_capacity(9 * nt);
        let mut tb = Vec::with_capacity(3 * nt);
        let mut load = alloc::vec![0.0; nt];
        for k in 0..nt {
            let g = mesh.geometry(k);
            let e = mesh.tri_edges(k);
            let s = [mesh.edge_sign(k, 0), mesh.edge_sign(k, 1), mesh.edge_sign(k, 2)];
            let mut loc = [[0.0; 3]; 3];
            for q in &TRI7 {
                let x = g.point(&q.bary);
                let psi: [Point; 3] = core::array::from_fn(|i| {
                    [s[i] * (x[0] - g.p[i][0]) / g.heights[i], s[i] * (x[1] - g.p[i][1]) / g.heights[i]]
                });
                for i in 0..3 {
                    for j in 0..3 {
                        loc[i][j] += q.weight * g.area * (psi[i][0] * psi[j][0] + psi[i][1] * psi[j][1]);
                    }
                }
            }
            for i in 0..3 {
                let Some(fi) = dofs.free(e[i]) else { continue };
                tb.push((k, fi, s[i] * g.lengths[i]));
                for j in 0..3 {
                    if let Some(fj) = dofs.free(e[j]) {
                        tm.push((fi, fj, loc[i][j]));
                    }
                }
            }
            load[k] = integrate_tri(&g.p, g.area, |x, _| f(x));
        }
        let n = dofs.n_free();
        Ok(Self {
            mass: CsrMatrix::from_triplets(n, n, tm),
            div: CsrMatrix::from_triplets(nt, n, tb),
            load,
            dofs,
        })
    }

    /// Symmetric block form `[M, -B^T; -B, 0]` with right-hand side
    /// `(0, -F)`, unknowns `(sigma, u)`.
    pub fn block(&self) -> (CsrMatrix, Vec<f64>) {
        let n = self.dofs.n_free();
        let nt = self.load.len();
        let mut t: Vec<_> = self.mass.iter().collect();
        for (k, e, v) in self.div.iter() {
            t.push((e, n + k, -v));
            t.push((n + k, e, -v));
        }
        let mut rhs = alloc::vec![0.0; n + nt];
        for (k, f) in self.load.iter().enumerate() {
            rhs[n + k] = -f;
        }
        (CsrMatrix::from_triplets(n + nt, n + nt, t), rhs)
    }
}
