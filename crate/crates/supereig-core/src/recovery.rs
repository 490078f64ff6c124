//! Gradient recovery: the edge-midpoint operator `K_h`, a polynomial
//! preserving nodal recovery for P1, and the conforming average-projection
//! of a CR eigenfunction.

use alloc::vec::Vec;

use crate::FloatExt;
use crate::assembly;
use crate::dense::least_squares;
use crate::error::{Error, Result};
use crate::fespaces::{DofMap, ElementKind, FeFunction};
use crate::mesh::{BoundaryConditions, Triangulation};
use crate::Point;

/// Elementwise constant 2x2 matrix, `h[c][d] = d/dx_d of component c`.
pub type Hessian = [[f64; 2]; 2];

/// A recovered gradient field that can be sampled inside each triangle.
pub trait RecoveredField {
    /// Value at barycentric `b` of triangle `k`.
    fn value(&self, mesh: &Triangulation, k: usize, b: &[f64; 3]) -> Point;
    /// Elementwise gradient of the field on triangle `k`.
    fn hessian(&self, mesh: &Triangulation, k: usize) -> Hessian;
    /// Whether the field was built on a mesh of this size.
    fn fits(&self, mesh: &Triangulation) -> bool;
}

/// Vector field whose two components are CR functions, given by their
/// values at the edge midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredGradient {
    pub values: Vec<Point>,
}

impl RecoveredGradient {
    pub fn component(&self, c: usize) -> FeFunction {
        FeFunction { kind: ElementKind::Cr, values: self.values.iter().map(|v| v[c]).collect() }
    }
}

impl RecoveredField for RecoveredGradient {
    fn fits(&self, mesh: &Triangulation) -> bool {
        self.values.len() == mesh.n_edges()
    }

    fn value(&self, mesh: &Triangulation, k: usize, b: &[f64; 3]) -> Point {
        let e = mesh.tri_edges(k);
        let mut out = [0.0; 2];
        for i in 0..3 {
            let w = 1.0 - 2.0 * b[i];
            out[0] += w * self.values[e[i]][0];
            out[1] += w * self.values[e[i]][1];
        }
        out
    }

    fn hessian(&self, mesh: &Triangulation, k: usize) -> Hessian {
        let g = mesh.geometry(k);
        let e = mesh.tri_edges(k);
        let mut h = [[0.0; 2]; 2];
        for i in 0..3 {
            for c in 0..2 {
                for d in 0..2 {
                    h[c][d] -= 2.0 * self.values[e[i]][c] * g.grad_bary[i][d];
                }
            }
        }
        h
    }
}

/// `K_h q` from the traces of a piecewise field: `trace(k, i)` is the
/// value of `q|_K` at the midpoint of local edge `i` of triangle `k`.
///
/// Interior midpoints take the mean of the two traces. A boundary midpoint
/// `m` of triangle `K` is extrapolated linearly, `2 v(m') - v(m'')`, where
/// `m'` is the midpoint of an interior edge `e'` of `K` and `m''` the
/// midpoint of the edge of the neighbour across `e'` that avoids the
/// boundary edge. Among the (at most two) choices of `e'`, those whose far
/// edge is interior come first, then the smaller edge index. When only a
/// boundary far edge exists its one-sided trace is used.
pub fn recover_kh(mesh: &Triangulation, trace: impl Fn(usize, usize) -> Point) -> Result<RecoveredGradient> {
    let edges = mesh.edges();
    let mut values = alloc::vec![[0.0; 2]; edges.len()];
    for (e, edge) in edges.iter().enumerate() {
        if let Some((k2, i2)) = edge.k2 {
            let a = trace(edge.k1.0, edge.k1.1);
            let b = trace(k2, i2);
            values[e] = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        }
    }
    for (e, edge) in edges.iter().enumerate() {
        if !edge.is_boundary() {
            continue;
        }
        let (k, ie) = edge.k1;
        let te = mesh.tri_edges(k);
        // (far edge on boundary, e' index, far edge, K', local index of e'' in K')
        let mut best: Option<(bool, usize, usize, usize, usize)> = None;
        for j in (0..3).filter(|&j| j != ie) {
            let ep = te[j];
            let Some(other) = (if edges[ep].k1.0 == k { edges[ep].k2 } else { Some(edges[ep].k1) }) else {
                continue;
            };
            let shared = mesh.triangles()[k][3 - ie - j];
            let kp = other.0;
            let lp = mesh.triangles()[kp].iter().position(|&v| v == shared).expect("shared vertex");
            let epp = mesh.tri_edges(kp)[lp];
            let cand = (edges[epp].is_boundary(), ep, epp, kp, lp);
            if best.map_or(true, |b| (cand.0, cand.1) < (b.0, b.1)) {
                best = Some(cand);
            }
        }
        let (far_boundary, ep, epp, kp, lp) = best.ok_or(Error::Recovery(e))?;
        let vpp = if far_boundary { trace(kp, lp) } else { values[epp] };
        values[e] = [2.0 * values[ep][0] - vpp[0], 2.0 * values[ep][1] - vpp[1]];
    }
    Ok(RecoveredGradient { values })
}

/// `K_h` applied to the broken gradient of a CR, ECR or P1 function, or to
/// an RT0 field.
pub fn recover_kh_of(mesh: &Triangulation, u: &FeFunction) -> Result<RecoveredGradient> {
    if u.kind == ElementKind::P0 {
        return Err(Error::UnsupportedKind(u.kind));
    }
    recover_kh(mesh, |k, i| {
        let g = mesh.geometry(k);
        let mut b = [0.5; 3];
        b[i] = 0.0;
        u.vector_at(mesh, &g, k, &b)
    })
}

/// Nodal (P1) gradient field.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalGradient {
    pub values: Vec<Point>,
    /// Vertices whose patch fit was rank deficient and fell back to
    /// averaging the adjacent element gradients.
    pub fallback: Vec<usize>,
}

impl RecoveredField for NodalGradient {
    fn fits(&self, mesh: &Triangulation) -> bool {
        self.values.len() == mesh.n_vertices()
    }

    fn value(&self, mesh: &Triangulation, k: usize, b: &[f64; 3]) -> Point {
        let t = mesh.triangles()[k];
        let mut out = [0.0; 2];
        for i in 0..3 {
            out[0] += b[i] * self.values[t[i]][0];
            out[1] += b[i] * self.values[t[i]][1];
        }
        out
    }

    fn hessian(&self, mesh: &Triangulation, k: usize) -> Hessian {
        let g = mesh.geometry(k);
        let t = mesh.triangles()[k];
        let mut h = [[0.0; 2]; 2];
        for i in 0..3 {
            for c in 0..2 {
                for d in 0..2 {
                    h[c][d] += self.values[t[i]][c] * g.grad_bary[i][d];
                }
            }
        }
        h
    }
}

/// Polynomial preserving recovery for a P1 function: at each vertex a
/// least-squares quadratic through the vertex values of the element patch
/// (two rings if one ring has fewer than six vertices), differentiated at
/// the vertex.
pub fn recover_ppr(mesh: &Triangulation, u: &FeFunction) -> Result<NodalGradient> {
    if u.kind != ElementKind::P1 {
        return Err(Error::UnsupportedKind(u.kind));
    }
    let patches = mesh.vertex_patches();
    let tris = mesh.triangles();
    let verts = mesh.vertices();
    let ring = |seed: &[usize]| -> Vec<usize> {
        let mut s: Vec<usize> = seed.iter().flat_map(|&v| patches[v].iter().flat_map(|&k| tris[k])).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let elem_grad = |k: usize| -> Point {
        let g = mesh.geometry(k);
        let t = tris[k];
        let mut d = [0.0; 2];
        for i in 0..3 {
            d[0] += u.values[t[i]] * g.grad_bary[i][0];
            d[1] += u.values[t[i]] * g.grad_bary[i][1];
        }
        d
    };
    let mut values = Vec::with_capacity(verts.len());
    let mut fallback = Vec::new();
    for v in 0..verts.len() {
        let mut pts = ring(&[v]);
        if pts.len() < 6 {
            pts = ring(&pts);
        }
        let x0 = verts[v];
        let hs = pts
            .iter()
            .map(|&p| (verts[p][0] - x0[0]).hyp(verts[p][1] - x0[1]))
            .fold(0.0, f64::max);
        let mut a = Vec::with_capacity(pts.len() * 6);
        let mut rhs = Vec::with_capacity(pts.len());
        for &p in &pts {
            let s = (verts[p][0] - x0[0]) / hs;
            let t = (verts[p][1] - x0[1]) / hs;
            a.extend_from_slice(&[1.0, s, t, s * s, s * t, t * t]);
            rhs.push(u.values[p]);
        }
        match least_squares(&a, pts.len(), 6, &rhs, 1e-10) {
            Some(c) => values.push([c[1] / hs, c[2] / hs]),
            None => {
                fallback.push(v);
                let mut g = [0.0; 2];
                for &k in &patches[v] {
                    let d = elem_grad(k);
                    g[0] += d[0];
                    g[1] += d[1];
                }
                let n = patches[v].len() as f64;
                values.push([g[0] / n, g[1] / n]);
            }
        }
    }
    Ok(NodalGradient { values, fallback })
}

/// Conforming projection of a CR (or ECR) eigenfunction and its Rayleigh
/// quotient.
#[derive(Debug, Clone)]
pub struct RayleighResult {
    pub u: FeFunction,
    pub lambda: f64,
}

/// Vertex values are the mean of the traces from all triangles sharing the
/// vertex, vertices on Dirichlet segments are zeroed, and the result is
/// normalized in L2.
pub fn project_p1star(mesh: &Triangulation, u: &FeFunction, bc: &BoundaryConditions) -> Result<RayleighResult> {
    if !matches!(u.kind, ElementKind::Cr | ElementKind::Ecr) {
        return Err(Error::UnsupportedKind(u.kind));
    }
    let nv = mesh.n_vertices();
    let mut sum = alloc::vec![0.0; nv];
    let mut cnt = alloc::vec![0usize; nv];
    for k in 0..mesh.n_triangles() {
        let g = mesh.geometry(k);
        let c = u.local(mesh, k);
        for (i, &v) in mesh.triangles()[k].iter().enumerate() {
            let mut b = [0.0; 3];
            b[i] = 1.0;
            sum[v] += u.scalar_local(&g, &c, &b).value;
            cnt[v] += 1;
        }
    }
    let vals: Vec<f64> = sum.iter().zip(&cnt).map(|(s, &c)| s / c as f64).collect();
    let dofs = DofMap::new(mesh, ElementKind::P1, bc)?;
    let mut x = dofs.restrict(&vals);
    let m = assembly::mass(mesh, &dofs)?;
    let a = assembly::stiffness(mesh, &dofs)?;
    let nrm = crate::sqrt(m.bilinear(&x, &x));
    if !(nrm > 0.0) {
        return Err(Error::ZeroFunction);
    }
    x.iter_mut().for_each(|v| *v /= nrm);
    let lambda = a.bilinear(&x, &x);
    Ok(RayleighResult { u: FeFunction::from_free(&dofs, &x), lambda })
}

/// `||q||` of a recovered field in L2.
pub fn field_l2_norm(mesh: &Triangulation, f: &dyn RecoveredField) -> f64 {
    let mut s = 0.0;
    for k in 0..mesh.n_triangles() {
        let g = mesh.geometry(k);
        s += crate::quadrature::integrate_tri(&g.p, g.area, |_, b| {
            let v = f.value(mesh, k, &b);
            v[0] * v[0] + v[1] * v[1]
        });
    }
    crate::sqrt(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespaces::interpolate;
    use crate::mesh::Domain;

    #[test]
    fn constants_preserved() {
        let m = Triangulation::build(Domain::LShape, 3).unwrap();
        let r = recover_kh(&m, |_, _| [1.5, -2.0]).unwrap();
        assert!(r.values.iter().all(|v| (v[0] - 1.5).abs() < 1e-14 && (v[1] + 2.0).abs() < 1e-14));
        for k in 0..m.n_triangles() {
            assert!(r.hessian(&m, k).iter().flatten().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn two_element_average() {
        let m = Triangulation::build(Domain::UnitSquare, 1).unwrap();
        let q = [[1.0, 0.0], [3.0, 0.0]];
        let r = recover_kh(&m, |k, _| q[k]).unwrap();
        let diag = m.edges().iter().position(|e| !e.is_boundary()).unwrap();
        assert_eq!(r.values[diag], [2.0, 0.0]);
    }

    #[test]
    fn affine_fields_reproduced_everywhere() {
        // the trace of an affine field; extrapolation along a line is exact
        for d in [Domain::UnitSquare, Domain::EquilateralTriangle, Domain::LShape] {
            let m = Triangulation::build(d, 3).unwrap();
            let f = |x: Point| [1.0 + 2.0 * x[0] - x[1], 0.5 * x[0] + 3.0 * x[1]];
            let r = recover_kh(&m, |k, i| f(m.geometry(k).midpoint(i))).unwrap();
            for (e, edge) in m.edges().iter().enumerate() {
                let a = m.vertices()[edge.v[0]];
                let b = m.vertices()[edge.v[1]];
                let v = f([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]);
                assert!((r.values[e][0] - v[0]).abs() < 1e-12 && (r.values[e][1] - v[1]).abs() < 1e-12, "{d}");
            }
        }
    }

    #[test]
    fn ppr_exact_for_linear_and_quadratic() {
        let m = Triangulation::build(Domain::UnitSquare, 3).unwrap();
        let lin = interpolate(&m, ElementKind::P1, &|x| 2.0 * x[0] - 0.5 * x[1]).unwrap();
        let r = recover_ppr(&m, &lin).unwrap();
        assert!(r.values.iter().all(|g| (g[0] - 2.0).abs() < 1e-11 && (g[1] + 0.5).abs() < 1e-11));
        let w = |x: Point| x[0] * x[0] - 3.0 * x[0] * x[1] + 0.5 * x[1] * x[1];
        let q = interpolate(&m, ElementKind::P1, &w).unwrap();
        let r = recover_ppr(&m, &q).unwrap();
        for (v, p) in m.vertices().iter().enumerate() {
            let ex = [2.0 * p[0] - 3.0 * p[1], -3.0 * p[0] + p[1]];
            assert!((r.values[v][0] - ex[0]).abs() < 1e-10 && (r.values[v][1] - ex[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn ppr_corner_fallback() {
        let m = Triangulation::build(Domain::UnitSquare, 1).unwrap();
        let u = interpolate(&m, ElementKind::P1, &|x| x[0]).unwrap();
        let r = recover_ppr(&m, &u).unwrap();
        assert_eq!(r.fallback.len(), 4);
        assert!(r.values.iter().all(|g| (g[0] - 1.0).abs() < 1e-14 && g[1].abs() < 1e-14));
    }

    #[test]
    fn p1star_of_continuous_function() {
        let m = Triangulation::build(Domain::UnitSquare, 3).unwrap();
        let bc = BoundaryConditions::dirichlet(Domain::UnitSquare);
        let f = |x: Point| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]);
        // the CR interpolant of a P1 function is continuous at vertices
        let p1 = interpolate(&m, ElementKind::P1, &f).unwrap();
        let cr = FeFunction {
            kind: ElementKind::Cr,
            values: m.edges().iter().map(|e| 0.5 * (p1.values[e.v[0]] + p1.values[e.v[1]])).collect(),
        };
        let r = project_p1star(&m, &cr, &bc).unwrap();
        let scale = r.u.values.iter().zip(&p1.values).find(|(_, b)| b.abs() > 1e-3).map(|(a, b)| a / b).unwrap();
        for (a, b) in r.u.values.iter().zip(&p1.values) {
            assert!((a - scale * b).abs() < 1e-13);
        }
        assert!((r.u.l2_norm(&m) - 1.0).abs() < 1e-12);
    }
}
