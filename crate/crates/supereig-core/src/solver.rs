//! Generalized symmetric eigenproblems and source problems.

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{self, RtSystem};
use crate::dense;
use crate::error::{Error, Result};
use crate::fespaces::{DofMap, ElementKind, FeFunction};
use crate::mesh::{BoundaryConditions, Triangulation};
use crate::sparse::{axpy, dot, norm, Cholesky, CsrMatrix};
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Required relative residual `|A u - l M u| / |l M u|`.
    pub tol: f64,
    pub max_restarts: usize,
    /// Seed of the start block.
    pub seed: u64,
    /// Dimensions up to this use the dense solver.
    pub dense_below: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_restarts: 200, seed: 0x5eed_e16, dense_below: 200 }
    }
}

/// Smallest eigenpairs of `A x = l M x`, ascending, M-orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// Relative residuals.
    pub residuals: Vec<f64>,
}

impl EigenPairs {
    /// Index groups of eigenvalues within relative `rtol` of their
    /// neighbour.
    pub fn clusters(&self, rtol: f64) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (i, &v) in self.values.iter().enumerate() {
            match out.last_mut() {
                Some(c) if (v - self.values[*c.last().unwrap()]).abs() <= rtol * v.abs() => c.push(i),
                _ => out.push(alloc::vec![i]),
            }
        }
        out
    }
}

/// Largest-magnitude coefficient made positive; the first index wins ties.
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn solve_evp(a: &CsrMatrix, m: &CsrMatrix, k: usize) -> Result<EigenPairs> {
    solve_evp_with(a, m, k, &EigenOptions::default())
}

pub fn solve_evp_with(a: &CsrMatrix, m: &CsrMatrix, k: usize, opts: &EigenOptions) -> Result<EigenPairs> {
    let n = a.n_rows();
    if m.n_rows() != n {
        return Err(Error::Dimension { expected: n, got: m.n_rows() });
    }
    if k == 0 || k > n {
        return Err(Error::InvalidInput(alloc::format!("requested {k} eigenpairs of a {n}-dimensional problem")));
    }
    let mut out = if n <= opts.dense_below { dense_evp(a, m, k)? } else { krylov_evp(a, m, k, opts)? };
    for v in &mut out.vectors {
        fix_sign(v);
    }
    out.residuals = out.values.iter().zip(&out.vectors).map(|(&l, v)| residual(a, m, l, v)).collect();
    let worst = out.residuals.iter().copied().fold(0.0, f64::max);
    if !(worst <= opts.tol) {
        return Err(Error::NoConvergence(worst));
    }
    Ok(out)
}

fn residual(a: &CsrMatrix, m: &CsrMatrix, l: f64, v: &[f64]) -> f64 {
    let av = a.mul_vec(v);
    let mut mv = m.mul_vec(v);
    mv.iter_mut().for_each(|x| *x *= l);
    let d: Vec<f64> = av.iter().zip(&mv).map(|(x, y)| x - y).collect();
    norm(&d) / norm(&mv)
}

fn dense_evp(a: &CsrMatrix, m: &CsrMatrix, k: usize) -> Result<EigenPairs> {
    let n = a.n_rows();
    let (vals, x) = dense::generalized_eigen(&a.to_dense(), &m.to_dense(), n).ok_or(Error::NotPositiveDefinite(0))?;
    let vectors = (0..k).map(|c| (0..n).map(|r| x[r * n + c]).collect()).collect();
    Ok(EigenPairs { values: vals[..k].to_vec(), vectors, residuals: Vec::new() })
}

/// Block shift-invert Krylov with Rayleigh-Ritz on A and thick restart.
fn krylov_evp(a: &CsrMatrix, m: &CsrMatrix, k: usize, opts: &EigenOptions) -> Result<EigenPairs> {
    let n = a.n_rows();
    let (shifted, fac) = match Cholesky::new(a) {
        Ok(f) => (None, f),
        // singular stiffness (pure Neumann): shift by -1
        Err(Error::NotPositiveDefinite(_)) => {
            let s = a.add_scaled(1.0, m);
            let f = Cholesky::new(&s)?;
            (Some(s), f)
        }
        Err(e) => return Err(e),
    };
    let opm = shifted.as_ref().unwrap_or(a);
    // one refinement step keeps solve noise out of the Krylov basis
    let op = |rhs: &[f64]| -> Vec<f64> { refine(opm, &fac, rhs) };
    let b = (k + 2).max(4).min(n);
    let keep = (k + b).min(n);
    let cap = (keep + 4 * b).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0).collect()
    };
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(cap);
    let mut w: Vec<Vec<f64>> = Vec::with_capacity(cap); // M v
    let mut block: Vec<Vec<f64>> = (0..b).map(|_| random(&mut rng)).collect();
    let mut worst = f64::INFINITY;
    for _cycle in 0..opts.max_restarts {
        while v.len() < cap {
            let start = v.len();
            for mut x in block.drain(..) {
                if v.len() >= cap {
                    break;
                }
                let x0 = crate::sqrt(dot(&x, &m.mul_vec(&x)));
                for _ in 0..2 {
                    for (vj, wj) in v.iter().zip(&w) {
                        let c = dot(wj, &x);
                        axpy(-c, vj, &mut x);
                    }
                }
                let mx = m.mul_vec(&x);
                let nx = crate::sqrt(dot(&x, &mx));
                if !(nx > 1e-10 * x0) {
                    continue;
                }
                let s = 1.0 / nx;
                v.push(x.iter().map(|t| t * s).collect());
                w.push(mx.iter().map(|t| t * s).collect());
            }
            if v.len() == start {
                // Krylov space exhausted; continue with fresh directions
                block = (0..b).map(|_| random(&mut rng)).collect();
                continue;
            }
            block = w[start..].iter().map(|wi| op(wi)).collect();
        }
        // Rayleigh-Ritz on the generalized projected pencil, so that slight
        // loss of M-orthogonality in the basis does not limit the residual
        let p = v.len();
        let av: Vec<Vec<f64>> = v.iter().map(|x| a.mul_vec(x)).collect();
        let mut h = alloc::vec![0.0; p * p];
        let mut g = alloc::vec![0.0; p * p];
        for i in 0..p {
            for j in i..p {
                let s = 0.5 * (dot(&v[i], &av[j]) + dot(&v[j], &av[i]));
                h[i * p + j] = s;
                h[j * p + i] = s;
                let t = 0.5 * (dot(&v[i], &w[j]) + dot(&v[j], &w[i]));
                g[i * p + j] = t;
                g[j * p + i] = t;
            }
        }
        let (theta, y) = dense::generalized_eigen(&h, &g, p).ok_or(Error::NotPositiveDefinite(0))?;
        let combine = |basis: &[Vec<f64>], c: usize| -> Vec<f64> {
            let mut out = alloc::vec![0.0; n];
            for (j, bj) in basis.iter().enumerate() {
                axpy(y[j * p + c], bj, &mut out);
            }
            out
        };
        let nk = keep.min(p);
        let ritz: Vec<Vec<f64>> = (0..nk).map(|c| combine(&v, c)).collect();
        let mritz: Vec<Vec<f64>> = ritz.iter().map(|x| m.mul_vec(x)).collect();
        worst = 0.0;
        for c in 0..k {
            let au = combine(&av, c);
            let mu: Vec<f64> = mritz[c].iter().map(|t| t * theta[c]).collect();
            let d: Vec<f64> = au.iter().zip(&mu).map(|(x, y)| x - y).collect();
            worst = worst.max(norm(&d) / norm(&mu));
        }
        if worst <= 0.5 * opts.tol {
            return Ok(EigenPairs { values: theta[..k].to_vec(), vectors: ritz[..k].to_vec(), residuals: Vec::new() });
        }
        if worst <= crate::sqrt(opts.tol) {
            let (vals, vecs, res) = polish(a, m, &op, &ritz, k)?;
            if res <= 0.5 * opts.tol {
                return Ok(EigenPairs { values: vals, vectors: vecs, residuals: Vec::new() });
            }
            worst = worst.min(res);
        }
        block = mritz[..b.min(nk)].iter().map(|wi| op(wi)).collect();
        v = ritz;
        w = mritz;
    }
    Err(Error::NoConvergence(worst))
}

/// Two steps of subspace iteration on the kept Ritz vectors followed by a
/// small Rayleigh-Ritz. Removes the rounding noise the large projected
/// problem leaves in high-frequency directions.
fn polish(
    a: &CsrMatrix,
    m: &CsrMatrix,
    op: &dyn Fn(&[f64]) -> Vec<f64>,
    x: &[Vec<f64>],
    k: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
    let mut y: Vec<Vec<f64>> = x.to_vec();
    for _ in 0..2 {
        for v in &mut y {
            let mut z = op(&m.mul_vec(v));
            let s = 1.0 / crate::sqrt(m.bilinear(&z, &z));
            z.iter_mut().for_each(|t| *t *= s);
            *v = z;
        }
    }
    let p = y.len();
    let ay: Vec<Vec<f64>> = y.iter().map(|v| a.mul_vec(v)).collect();
    let my: Vec<Vec<f64>> = y.iter().map(|v| m.mul_vec(v)).collect();
    let mut h = alloc::vec![0.0; p * p];
    let mut g = alloc::vec![0.0; p * p];
    for i in 0..p {
        for j in i..p {
            let s = 0.5 * (dot(&y[i], &ay[j]) + dot(&y[j], &ay[i]));
            let t = 0.5 * (dot(&y[i], &my[j]) + dot(&y[j], &my[i]));
            h[i * p + j] = s;
            h[j * p + i] = s;
            g[i * p + j] = t;
            g[j * p + i] = t;
        }
    }
    let (theta, c) = dense::generalized_eigen(&h, &g, p).ok_or(Error::NotPositiveDefinite(0))?;
    let mut vecs = Vec::with_capacity(k);
    let mut worst = 0.0f64;
    for col in 0..k {
        let mut u = alloc::vec![0.0; a.n_rows()];
        for (j, yj) in y.iter().enumerate() {
            axpy(c[j * p + col], yj, &mut u);
        }
        worst = worst.max(residual(a, m, theta[col], &u));
        vecs.push(u);
    }
    Ok((theta[..k].to_vec(), vecs, worst))
}

/// Solves an SPD system, one step of iterative refinement included.
pub fn solve_spd(a: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let f = Cholesky::new(a)?;
    Ok(refine(a, &f, rhs))
}

fn refine(a: &CsrMatrix, f: &Cholesky, rhs: &[f64]) -> Vec<f64> {
    let mut x = f.solve(rhs);
    let ax = a.mul_vec(&x);
    let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
    let dx = f.solve(&r);
    axpy(1.0, &dx, &mut x);
    x
}

/// Discrete eigenpairs of the Laplacian with the requested element.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub dofs: DofMap,
    pub values: Vec<f64>,
    pub functions: Vec<FeFunction>,
    pub residuals: Vec<f64>,
}

/// `k` smallest eigenpairs of `a_h(u, v) = l (u, v)` for CR, ECR or P1.
pub fn laplace_eigen(mesh: &Triangulation, kind: ElementKind, bc: &BoundaryConditions, k: usize) -> Result<EigenResult> {
    let dofs = DofMap::new(mesh, kind, bc)?;
    let a = assembly::stiffness(mesh, &dofs)?;
    let m = assembly::mass(mesh, &dofs)?;
    let p = solve_evp(&a, &m, k)?;
    let functions = p.vectors.iter().map(|x| FeFunction::from_free(&dofs, x)).collect();
    Ok(EigenResult { dofs, values: p.values, functions, residuals: p.residuals })
}

/// Discrete solution of `-Laplace u = f` with homogeneous Dirichlet data on
/// the Dirichlet segments.
pub fn solve_source(mesh: &Triangulation, dofs: &DofMap, f: &dyn Fn(Point) -> f64) -> Result<FeFunction> {
    if dofs.n_free() == 0 {
        return Ok(FeFunction::zeros(mesh, dofs.kind()));
    }
    let a = assembly::stiffness(mesh, dofs)?;
    let rhs = assembly::load(mesh, dofs, f)?;
    let x = solve_spd(&a, &rhs)?;
    Ok(FeFunction::from_free(dofs, &x))
}

/// Mixed solution with its relative residual in the block system.
#[derive(Debug, Clone)]
pub struct RtSolution {
    /// Flux, approximating `-grad u`.
    pub sigma: FeFunction,
    /// Piecewise constant potential.
    pub u: FeFunction,
    pub residual: f64,
}

/// Solves the RT0-P0 system by conjugate gradients on the Schur complement
/// `B M^-1 B^T u = F`, with `M^-1` applied through a sparse Cholesky.
pub fn solve_rt_source(mesh: &Triangulation, bc: &BoundaryConditions, f: &dyn Fn(Point) -> f64) -> Result<RtSolution> {
    let dofs = DofMap::new(mesh, ElementKind::Rt0, bc)?;
    let sys = RtSystem::assemble(mesh, dofs, f)?;
    let mf = Cholesky::new(&sys.mass)?;
    let nt = sys.load.len();
    let schur = |u: &[f64]| sys.div.mul_vec(&mf.solve(&sys.div.mul_t_vec(u)));
    let rhs = &sys.load;
    let bn = norm(rhs);
    let mut u = alloc::vec![0.0; nt];
    if bn > 0.0 {
        let mut r = rhs.clone();
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        for _ in 0..(20 * nt + 100) {
            if crate::sqrt(rr) <= 1e-14 * bn {
                break;
            }
            let sp = schur(&p);
            let alpha = rr / dot(&p, &sp);
            axpy(alpha, &p, &mut u);
            axpy(-alpha, &sp, &mut r);
            let rr1 = dot(&r, &r);
            let beta = rr1 / rr;
            rr = rr1;
            for (pi, ri) in p.iter_mut().zip(&r) {
                *pi = ri + beta * *pi;
            }
        }
    }
    let sigma_free = mf.solve(&sys.div.mul_t_vec(&u));
    let (block, brhs) = sys.block();
    let mut x = sigma_free.clone();
    x.extend_from_slice(&u);
    let bx = block.mul_vec(&x);
    let res: Vec<f64> = bx.iter().zip(&brhs).map(|(p, q)| p - q).collect();
    let residual = if bn > 0.0 { norm(&res) / norm(&brhs) } else { norm(&res) };
    let sigma = FeFunction::from_free(&sys.dofs, &sigma_free);
    let u = FeFunction { kind: ElementKind::P0, values: u };
    Ok(RtSolution { sigma, u, residual })
}
