//! Taylor expansions of the CR, ECR and RT0 interpolation errors for
//! quadratics, the asymptotically exact estimators built on them, and the
//! eigenvalue post-processing formulas.

use alloc::vec::Vec;

use crate::FloatExt;
use crate::error::{Error, Result};
use crate::fespaces::{ecr_bubble, ElementKind, FeFunction};
use crate::mesh::{ElementGeometry, Triangulation};
use crate::quadrature::{edge_mean, integrate_tri, TRI7};
use crate::recovery::{Hessian, RecoveredField};
use crate::Point;

/// Which interpolation error a Taylor term expands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaylorKind {
    Cr,
    Ecr,
    Rt,
}

/// Per-element data for the local expansion functions: the ECR and RT0
/// interpolants of the centered quadratics, and the RT0 Gram matrix.
#[derive(Debug, Clone)]
pub struct TaylorBasis {
    pub geom: ElementGeometry,
    ecr_edge: [[f64; 3]; 2],
    ecr_mean: [f64; 2],
    rt_flux: [[f64; 3]; 2],
    /// `c_rt[i][j]` is the L2 product of `(I - Pi_RT) phi_i` and `(I - Pi_RT) phi_j`.
    pub c_rt: [[f64; 2]; 2],
}

impl TaylorBasis {
    pub fn new(geom: ElementGeometry) -> Self {
        let mut b = TaylorBasis { geom, ecr_edge: [[0.0; 3]; 2], ecr_mean: [0.0; 2], rt_flux: [[0.0; 3]; 2], c_rt: [[0.0; 2]; 2] };
        let g = &b.geom;
        for a in 0..2 {
            for i in 0..3 {
                let (p, q) = (g.p[(i + 1) % 3], g.p[(i + 2) % 3]);
                b.ecr_edge[a][i] = edge_mean(p, q, |x| b.phi_ecr(a, x));
                let n = g.normals[i];
                b.rt_flux[a][i] = edge_mean(p, q, |x| {
                    let v = b.phi_rt(a, x);
                    v[0] * n[0] + v[1] * n[1]
                });
            }
            b.ecr_mean[a] = integrate_tri(&g.p, g.area, |x, _| b.phi_ecr(a, x)) / g.area;
        }
        let mut c = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in i..2 {
                c[i][j] = integrate_tri(&b.geom.p, b.geom.area, |x, _| {
                    let u = b.rt_residual(i, x);
                    let v = b.rt_residual(j, x);
                    u[0] * v[0] + u[1] * v[1]
                });
                c[j][i] = c[i][j];
            }
        }
        b.c_rt = c;
        b
    }

    /// The centered scalar quadratics; `a = 2` is the scaled radial one.
    pub fn phi_ecr(&self, a: usize, x: Point) -> f64 {
        let m = self.geom.centroid;
        let (s, t) = (x[0] - m[0], x[1] - m[1]);
        match a {
            0 => s * s - t * t,
            1 => s * t,
            _ => 2.0 - 36.0 / self.geom.h_k * (s * s + t * t),
        }
    }

    pub fn phi_rt(&self, a: usize, x: Point) -> Point {
        let m = self.geom.centroid;
        let (s, t) = (x[0] - m[0], x[1] - m[1]);
        if a == 0 {
            [s, -t]
        } else {
            [t, s]
        }
    }

    /// `(I - Pi_ECR) phi_a` at `x` with barycentric coordinates `b`, `a < 2`.
    pub fn ecr_residual(&self, a: usize, x: Point, b: &[f64; 3]) -> f64 {
        let em = &self.ecr_edge[a];
        let cr: f64 = (0..3).map(|i| em[i] * (1.0 - 2.0 * b[i])).sum();
        let bubble = self.ecr_mean[a] - (em[0] + em[1] + em[2]) / 3.0;
        self.phi_ecr(a, x) - cr - bubble * ecr_bubble(&self.geom, x)
    }

    /// `(I - Pi_RT) phi_a` at `x`.
    pub fn rt_residual(&self, a: usize, x: Point) -> Point {
        let g = &self.geom;
        let mut v = self.phi_rt(a, x);
        for i in 0..3 {
            let f = self.rt_flux[a][i] / g.heights[i];
            v[0] -= f * (x[0] - g.p[i][0]);
            v[1] -= f * (x[1] - g.p[i][1]);
        }
        v
    }
}

/// The expansion `P_K(hess)` as a combination of the basis functions.
#[derive(Debug, Clone, Copy)]
pub struct TaylorP<'a> {
    pub basis: &'a TaylorBasis,
    pub kind: TaylorKind,
    /// Coefficients of the two residual functions and (CR only) of `phi_3`.
    pub coef: [f64; 3],
}

/// Off-diagonal entry used for a possibly non-symmetric recovered Hessian.
fn mixed(h: &Hessian) -> f64 {
    0.5 * (h[0][1] + h[1][0])
}

pub fn taylor_p<'a>(kind: TaylorKind, hess: &Hessian, basis: &'a TaylorBasis) -> TaylorP<'a> {
    let (a, b, c) = (hess[0][0], mixed(hess), hess[1][1]);
    let g = &basis.geom;
    // a_k sums over ordered vertex pairs, twice the unordered sum the
    // expansion needs
    let ak = 0.5 * g.a_k;
    let coef = match kind {
        TaylorKind::Cr => [(a - c) / 4.0, b, -(ak + g.h_k) / 144.0 * a - (g.h_k - ak) / 144.0 * c - g.b_k / 36.0 * b],
        TaylorKind::Ecr => [(a - c) / 4.0, b, 0.0],
        TaylorKind::Rt => [(a - c) / 2.0, b, 0.0],
    };
    TaylorP { basis, kind, coef }
}

impl TaylorP<'_> {
    /// Scalar value (CR and ECR kinds).
    pub fn scalar(&self, x: Point, b: &[f64; 3]) -> f64 {
        debug_assert!(self.kind != TaylorKind::Rt);
        let t = self.basis;
        self.coef[0] * t.ecr_residual(0, x, b) + self.coef[1] * t.ecr_residual(1, x, b) + self.coef[2] * t.phi_ecr(2, x)
    }

    /// Vector value (RT kind).
    pub fn vector(&self, x: Point) -> Point {
        debug_assert!(self.kind == TaylorKind::Rt);
        let u = self.basis.rt_residual(0, x);
        let v = self.basis.rt_residual(1, x);
        [self.coef[0] * u[0] + self.coef[1] * v[0], self.coef[0] * u[1] + self.coef[1] * v[1]]
    }
}

/// `||P_K^RT(hess)||^2` in closed form from the Gram matrix.
pub fn rt_expansion_norm(hess: &Hessian, basis: &TaylorBasis) -> f64 {
    let (a, b, c) = (hess[0][0], mixed(hess), hess[1][1]);
    let m = &basis.c_rt;
    0.25 * m[0][0] * (a - c) * (a - c) + m[1][1] * b * b + m[0][1] * (a - c) * b
}

/// Value of the estimator and its two parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorReport {
    pub lambda_h: f64,
    pub f: f64,
    /// Signed gradient-mismatch contribution; negative for conforming
    /// eigenfunctions, whose Rayleigh quotient lies above the eigenvalue.
    pub term_gradient: f64,
    /// `-2 lambda_h sum_K (P_K(grad recovered), u_h)_K`, zero for conforming input.
    pub term_interp: f64,
    pub lambda_rea: f64,
}

/// `F` for the eigenpair `(lambda_h, u)` and a recovered gradient.
///
/// For CR and ECR eigenfunctions `F = ||R - grad_h u||^2 - 2 lambda_h
/// sum_K (P_K(grad_h R), u)_K` with the matching expansion. For a
/// conforming P1 eigenfunction `F = -||R - grad u||^2`.
pub fn estimator_f(mesh: &Triangulation, u: &FeFunction, lambda_h: f64, recovered: &dyn RecoveredField) -> Result<EstimatorReport> {
    let kind = match u.kind {
        ElementKind::Cr => Some(TaylorKind::Cr),
        ElementKind::Ecr => Some(TaylorKind::Ecr),
        ElementKind::P1 => None,
        k => return Err(Error::UnsupportedKind(k)),
    };
    if u.values.len() != u.kind.n_entities(mesh) || !recovered.fits(mesh) {
        return Err(Error::InvalidInput("function and mesh do not match".into()));
    }
    let mut grad = 0.0;
    let mut interp = 0.0;
    for k in 0..mesh.n_triangles() {
        let g = mesh.geometry(k);
        let c = u.local(mesh, k);
        let mut gk = 0.0;
        for q in TRI7.iter() {
            let r = recovered.value(mesh, k, &q.bary);
            let d = u.scalar_local(&g, &c, &q.bary).grad;
            gk += q.weight * ((r[0] - d[0]).sq() + (r[1] - d[1]).sq());
        }
        grad += gk * g.area;
        if let Some(tk) = kind {
            let hess = recovered.hessian(mesh, k);
            let basis = TaylorBasis::new(g);
            let p = taylor_p(tk, &hess, &basis);
            interp += integrate_tri(&basis.geom.p, basis.geom.area, |x, b| p.scalar(x, &b) * u.scalar_local(&basis.geom, &c, &b).value);
        }
    }
    let (term_gradient, term_interp) = match kind {
        Some(_) => (grad, -2.0 * lambda_h * interp),
        None => (-grad, 0.0),
    };
    let f = term_gradient + term_interp;
    Ok(EstimatorReport { lambda_h, f, term_gradient, term_interp, lambda_rea: recovering_eigenvalue(lambda_h, f) })
}

/// `lambda_h + F`.
pub fn recovering_eigenvalue(lambda_h: f64, f: f64) -> f64 {
    lambda_h + f
}

/// Estimator-weighted average of two approximations. Exact whenever
/// `lambda1 + f1 == lambda2 + f2`.
pub fn combining_eigenvalue(lambda1: f64, f1: f64, lambda2: f64, f2: f64) -> Result<f64> {
    let gap = f2 - f1;
    if !(gap.abs() > 1e-14 * f1.abs().max(f2.abs())) || gap == 0.0 {
        return Err(Error::DegenerateWeights);
    }
    Ok((f2 * lambda1 - f1 * lambda2) / gap)
}

/// Two-mesh extrapolation `(4 lambda_h - lambda_2h) / 3`.
pub fn extrapolate(lambda_h: f64, lambda_2h: f64) -> f64 {
    (4.0 * lambda_h - lambda_2h) / 3.0
}

/// `log2(|e_{k-1}| / |e_k|)` per level, `None` at the first level or when
/// either error is zero or not finite.
pub fn observed_orders(errors: &[f64]) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(errors.len());
    for (k, &e) in errors.iter().enumerate() {
        let o = if k == 0 {
            None
        } else {
            let (p, c) = (errors[k - 1].abs(), e.abs());
            if p > 0.0 && c > 0.0 && p.is_finite() && c.is_finite() {
                Some(libm::log2(p / c))
            } else {
                None
            }
        };
        out.push(o);
    }
    out
}
