//! Defect measures shared by the property tests and the acceptance run.
//! Each returns a relative deviation; zero means the identity holds.

use supereig_core::estimators::{rt_expansion_norm, taylor_p, TaylorBasis, TaylorKind};
use supereig_core::fespaces::{interpolate, interpolate_flux};
use supereig_core::quadrature::{integrate_tri, TRI7};
use supereig_core::solver::{solve_rt_source, solve_source};
use supereig_core::{BoundaryConditions, DofMap, ElementKind, FeFunction, Triangulation};

use super::{diameter, locate, quad, quad_grad, quad_hess, single, Point};

/// Evaluation points: the quadrature nodes plus the vertices.
pub fn samples() -> Vec<[f64; 3]> {
    let mut s: Vec<[f64; 3]> = TRI7.iter().map(|n| n.bary).collect();
    s.extend([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    s
}

pub fn hess_scale(q: &[f64; 6]) -> f64 {
    q[..3].iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3)
}

/// Worst pointwise mismatch between the CR, ECR and RT interpolation
/// errors of a quadratic and their expansions, relative to
/// `|hess| diam^2` (scalars) or `|hess| diam` (fluxes). `None` for flat
/// triangles.
pub fn expansion_defect(p: [Point; 3], q: &[f64; 6]) -> Option<f64> {
    let mesh = single(p)?;
    let g = mesh.geometry(0);
    let basis = TaylorBasis::new(g);
    let h = quad_hess(q);
    let d = diameter(&g.p);
    let w = |x: Point| quad(q, x);
    let mut worst = 0.0f64;
    for (kind, tk) in [(ElementKind::Cr, TaylorKind::Cr), (ElementKind::Ecr, TaylorKind::Ecr)] {
        let pi = interpolate(&mesh, kind, &w).unwrap();
        let pk = taylor_p(tk, &h, &basis);
        for b in samples() {
            let x = g.point(&b);
            let err = w(x) - pi.eval(&mesh, 0, x).unwrap().value;
            worst = worst.max((err - pk.scalar(x, &b)).abs() / (hess_scale(q) * d * d));
        }
    }
    let pi = interpolate_flux(&mesh, &|x| quad_grad(q, x));
    let pk = taylor_p(TaylorKind::Rt, &h, &basis);
    for b in samples() {
        let x = g.point(&b);
        let v = pi.eval_flux(&mesh, 0, x).unwrap().value;
        let gw = quad_grad(q, x);
        let e = pk.vector(x);
        let dev = (gw[0] - v[0] - e[0]).hypot(gw[1] - v[1] - e[1]);
        worst = worst.max(dev / (hess_scale(q) * d));
    }
    Some(worst)
}

/// Deviation from `P(2h) = 4 sum P(h)` for the RT norm and the ECR
/// integral over one refinement of a triangle.
pub fn refinement_defect(p: [Point; 3], q: &[f64; 6]) -> Option<f64> {
    let mesh = single(p)?;
    let h = quad_hess(q);
    let fine = mesh.refine();
    let ecr_integral = |m: &Triangulation, k: usize| {
        let b = TaylorBasis::new(m.geometry(k));
        let pk = taylor_p(TaylorKind::Ecr, &h, &b);
        integrate_tri(&b.geom.p, b.geom.area, |x, bb| pk.scalar(x, &bb))
    };
    let rt = |m: &Triangulation, k: usize| rt_expansion_norm(&h, &TaylorBasis::new(m.geometry(k)));
    let (rt2h, rth): (f64, f64) = (rt(&mesh, 0), (0..4).map(|k| rt(&fine, k)).sum());
    let (e2h, eh): (f64, f64) = (ecr_integral(&mesh, 0), (0..4).map(|k| ecr_integral(&fine, k)).sum());
    let g = mesh.geometry(0);
    let scale = hess_scale(q) * g.area * diameter(&g.p).powi(2);
    let rt_scale = (hess_scale(q) * diameter(&g.p)).powi(2) * g.area;
    Some(((rt2h - 4.0 * rth).abs() / rt_scale).max((e2h - 4.0 * eh).abs() / scale))
}

/// A piecewise constant load, one value per triangle.
pub fn element_load(mesh: &Triangulation) -> Vec<f64> {
    (0..mesh.n_triangles()).map(|k| 1.0 + 0.5 * ((k as f64) * 0.7).sin()).collect()
}

/// Relative deviations for a piecewise constant load `g`:
/// `sigma_RT = grad u_ECR`, `sigma_RT = grad u_CR - g/2 (x - M)`, zero
/// element means of `sigma_RT - grad u_CR`, and the closed form of its
/// L2 norm.
pub struct MixedDefects {
    pub ecr_rt: f64,
    pub cr_rt: f64,
    pub mean: f64,
    pub norm: f64,
}

fn flux_scale(mesh: &Triangulation, f: &FeFunction) -> f64 {
    let mut m = 0.0f64;
    for k in 0..mesh.n_triangles() {
        let g = mesh.geometry(k);
        for q in &TRI7 {
            let v = f.eval_flux(mesh, k, g.point(&q.bary)).unwrap().value;
            m = m.max(v[0].hypot(v[1]));
        }
    }
    m
}

pub fn mixed_defects(mesh: &Triangulation, bc: &BoundaryConditions) -> MixedDefects {
    let gl = element_load(mesh);
    let load = |x: Point| gl[locate(mesh, x)];
    let neg = |x: Point| -load(x);
    let rt = solve_rt_source(mesh, bc, &neg).unwrap();
    assert!(rt.residual < 1e-10, "{}", rt.residual);
    let cr = solve_source(mesh, &DofMap::new(mesh, ElementKind::Cr, bc).unwrap(), &load).unwrap();
    let ecr = solve_source(mesh, &DofMap::new(mesh, ElementKind::Ecr, bc).unwrap(), &load).unwrap();
    let sigma = rt.sigma;
    let scale = flux_scale(mesh, &sigma);
    let mut out = MixedDefects { ecr_rt: 0.0, cr_rt: 0.0, mean: 0.0, norm: 0.0 };
    let (mut diff2, mut closed2) = (0.0, 0.0);
    for k in 0..mesh.n_triangles() {
        let g = mesh.geometry(k);
        let m = g.centroid;
        let gk = gl[k];
        let d = |x: Point| {
            let a = sigma.eval_flux(mesh, k, x).unwrap().value;
            let b = cr.eval(mesh, k, x).unwrap().grad;
            [a[0] - b[0], a[1] - b[1]]
        };
        for q in &TRI7 {
            let x = g.point(&q.bary);
            let a = sigma.eval_flux(mesh, k, x).unwrap().value;
            let b = ecr.eval(mesh, k, x).unwrap().grad;
            out.ecr_rt = out.ecr_rt.max((a[0] - b[0]).hypot(a[1] - b[1]) / scale);
            let v = d(x);
            let want = [-gk / 2.0 * (x[0] - m[0]), -gk / 2.0 * (x[1] - m[1])];
            out.cr_rt = out.cr_rt.max((v[0] - want[0]).hypot(v[1] - want[1]) / scale);
        }
        let mean = [0, 1].map(|c| integrate_tri(&g.p, g.area, |x, _| d(x)[c]));
        out.mean = out.mean.max(mean[0].hypot(mean[1]) / (scale * g.area));
        diff2 += integrate_tri(&g.p, g.area, |x, _| {
            let v = d(x);
            v[0] * v[0] + v[1] * v[1]
        });
        // lambda Pi0 u is the load itself here
        closed2 += g.h_k * gk * gk * g.area;
    }
    let closed = closed2.sqrt() / 12.0;
    out.norm = (diff2.sqrt() - closed).abs() / closed;
    out
}

/// Worst `|int_K div(tau - Pi_RT tau)| / |K|`.
pub fn fortin_defect(mesh: &Triangulation, tau: &dyn Fn(Point) -> Point, div: &dyn Fn(Point) -> f64) -> f64 {
    let pi = interpolate_flux(mesh, tau);
    let mut worst = 0.0f64;
    for k in 0..mesh.n_triangles() {
        let g = mesh.geometry(k);
        let exact = integrate_tri(&g.p, g.area, |x, _| div(x));
        let discrete = pi.eval_flux(mesh, k, g.centroid).unwrap().div * g.area;
        worst = worst.max((exact - discrete).abs() / g.area);
    }
    worst
}

/// Worst `int_K grad(w - Pi w) . grad v` over local basis functions `v`.
pub fn commuting_defect(mesh: &Triangulation, kind: ElementKind, w: &dyn Fn(Point) -> f64, gw: &dyn Fn(Point) -> Point) -> f64 {
    let pi = interpolate(mesh, kind, w).unwrap();
    let mut worst = 0.0f64;
    let n = if kind == ElementKind::Ecr { 4 } else { 3 };
    for k in 0..mesh.n_triangles() {
        let g = mesh.geometry(k);
        for j in 0..n {
            let mut c = [0.0; 4];
            c[j] = 1.0;
            let v = integrate_tri(&g.p, g.area, |x, b| {
                let e = gw(x);
                let p = pi.eval(mesh, k, x).unwrap().grad;
                let gv = pi.scalar_local(&g, &c, &b).grad;
                (e[0] - p[0]) * gv[0] + (e[1] - p[1]) * gv[1]
            });
            worst = worst.max(v.abs());
        }
    }
    worst
}

pub fn cubic(c: &[f64; 10], x: Point) -> f64 {
    let (s, t) = (x[0], x[1]);
    c[0] + c[1] * s + c[2] * t + c[3] * s * s + c[4] * s * t + c[5] * t * t + c[6] * s * s * s + c[7] * s * s * t
        + c[8] * s * t * t
        + c[9] * t * t * t
}

pub fn cubic_grad(c: &[f64; 10], x: Point) -> Point {
    let (s, t) = (x[0], x[1]);
    [
        c[1] + 2.0 * c[3] * s + c[4] * t + 3.0 * c[6] * s * s + 2.0 * c[7] * s * t + c[8] * t * t,
        c[2] + c[4] * s + 2.0 * c[5] * t + c[7] * s * s + 2.0 * c[8] * s * t + 3.0 * c[9] * t * t,
    ]
}

/// Largest deviation of `U^T M U` from the identity over the first `k`
/// eigenpairs, with the worst relative residual.
pub fn orthonormality(mesh: &Triangulation, kind: ElementKind, bc: &BoundaryConditions, k: usize) -> (f64, f64) {
    let eig = supereig_core::solver::laplace_eigen(mesh, kind, bc, k).unwrap();
    let m = supereig_core::assembly::mass(mesh, &eig.dofs).unwrap();
    let x: Vec<Vec<f64>> = eig.functions.iter().map(|f| eig.dofs.restrict(&f.values)).collect();
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m.bilinear(&x[i], &x[j]) - want).abs());
        }
    }
    (worst, eig.residuals.iter().fold(0.0f64, |a, &b| a.max(b)))
}
