//! Benchmark configurations and the per-level post-processing pipeline.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::{combining_eigenvalue, estimator_f, extrapolate, EstimatorReport};
use crate::fespaces::{DofMap, ElementKind, FeFunction};
use crate::mesh::{BoundaryConditions, Domain, Triangulation};
use crate::recovery::{project_p1star, recover_kh_of, recover_ppr, RecoveredGradient};
use crate::solver::laplace_eigen;

/// Largest CR system solved by the experiment runner.
pub const DOF_LIMIT: usize = 300_000;

/// A reference eigenvalue. `exact` is false for values computed on the
/// finest mesh as a stand-in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub value: f64,
    pub exact: bool,
}

/// One of the four benchmark problems.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleSpec {
    pub id: u8,
    pub domain: Domain,
    pub bc: BoundaryConditions,
    /// Mesh `T_k` of the published tables is level `k + table_offset`.
    pub table_offset: u32,
}

/// 1: unit square, Dirichlet. 2: unit square, Neumann on `x1 = 1`.
/// 3: the equilateral-triangle example, Neumann on `x1 = 1`. 4: L-shape.
pub fn example(id: u8) -> Result<ExampleSpec> {
    let (domain, bc, table_offset) = match id {
        1 => (Domain::UnitSquare, BoundaryConditions::dirichlet(Domain::UnitSquare), 0),
        2 => (Domain::UnitSquare, BoundaryConditions::mixed(Domain::UnitSquare, &[1, 3, 4]), 0),
        3 => (Domain::EquilateralTriangle, BoundaryConditions::mixed(Domain::EquilateralTriangle, &[1, 2]), 1),
        4 => (Domain::LShape, BoundaryConditions::dirichlet(Domain::LShape), 1),
        _ => return Err(Error::InvalidInput(alloc::format!("unknown example {id}"))),
    };
    Ok(ExampleSpec { id, domain, bc, table_offset })
}

/// The `k` smallest values of `f(m, n)` over positive integers, ascending.
fn lattice(k: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let n = k + 1;
    let mut v: Vec<f64> = (1..=n).flat_map(|m| (1..=n).map(move |j| (m, j))).map(|(m, j)| f(m as f64, j as f64)).collect();
    v.sort_by(f64::total_cmp);
    v.truncate(k);
    v
}

/// Known eigenvalues of example `id`, by sorted index.
pub fn exact_eigenvalues(id: u8, k: usize) -> Vec<Option<f64>> {
    let pi2 = PI * PI;
    match id {
        1 => lattice(k, |m, n| (m * m + n * n) * pi2).into_iter().map(Some).collect(),
        2 => lattice(k, |m, n| ((m - 0.5) * (m - 0.5) + n * n) * pi2).into_iter().map(Some).collect(),
        3 => (0..k).map(|i| (i == 1).then_some(16.0 * pi2 / 3.0)).collect(),
        // the eighth eigenvalue of the L-shape is 5 pi^2 (a square mode)
        4 => (0..k).map(|i| match i {
            2 => Some(2.0 * pi2),
            7 => Some(5.0 * pi2),
            _ => None,
        })
        .collect(),
        _ => alloc::vec![None; k],
    }
}

/// Which post-processed eigenvalues to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PostSelection {
    pub rea: bool,
    pub cea: bool,
    pub exp: bool,
}

impl FromStr for PostSelection {
    type Err = Error;

    /// Comma-separated list of `rea`, `cea`, `exp`, or `all` / `none`.
    fn from_str(s: &str) -> Result<Self> {
        let mut p = PostSelection::default();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            match item.to_ascii_lowercase().as_str() {
                "rea" => p.rea = true,
                "cea" => p.cea = true,
                "exp" => p.exp = true,
                "all" => p = PostSelection { rea: true, cea: true, exp: true },
                "none" => {}
                _ => return Err(Error::InvalidInput(item.to_string())),
            }
        }
        Ok(p)
    }
}

/// Results for one eigenvalue on one level.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenRow {
    pub lambda_h: f64,
    pub residual: f64,
    pub estimator: Option<EstimatorReport>,
    pub lambda_p1star: Option<f64>,
    /// Estimator of the projected conforming eigenfunction.
    pub f_p1star: Option<f64>,
    pub lambda_cea: Option<f64>,
    pub lambda_exp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    pub level: u32,
    pub h: f64,
    pub n_dofs: usize,
    pub rows: Vec<EigenRow>,
    /// Vertices where the patch recovery fell back to averaging.
    pub ppr_fallback: usize,
    /// The discrete eigenfunctions, in row order.
    pub functions: Vec<FeFunction>,
    /// Edge-midpoint values of `K_h grad_h u_h` where they were computed.
    pub recovered: Vec<Option<RecoveredGradient>>,
}

/// Number of unknowns of `kind` on `domain` at `level`, without building
/// the mesh.
pub fn dof_estimate(domain: Domain, level: u32, kind: ElementKind) -> usize {
    let coarse = Triangulation::build(domain, 1).expect("coarse mesh");
    let f = 1usize << (2 * (level.max(1) - 1));
    let t = coarse.n_triangles() * f;
    let nb = coarse.edges().iter().filter(|e| e.is_boundary()).count() << (level.max(1) - 1);
    let e = (3 * t + nb) / 2;
    match kind {
        ElementKind::Cr | ElementKind::Rt0 => e,
        ElementKind::Ecr => e + t,
        ElementKind::P1 => e + 1 - t,
        ElementKind::P0 => t,
    }
}

/// Solve on one mesh and apply the selected post-processing. `previous`
/// holds the eigenvalues of the next coarser level for extrapolation.
pub fn run_level(
    mesh: &Triangulation,
    kind: ElementKind,
    bc: &BoundaryConditions,
    k: usize,
    post: PostSelection,
    previous: Option<&[f64]>,
) -> Result<LevelReport> {
    if !matches!(kind, ElementKind::Cr | ElementKind::Ecr | ElementKind::P1) {
        return Err(Error::UnsupportedKind(kind));
    }
    if post.cea && kind == ElementKind::P1 {
        return Err(Error::InvalidInput("cea needs a nonconforming eigenfunction".to_string()));
    }
    let eig = laplace_eigen(mesh, kind, bc, k)?;
    let mut rows = Vec::with_capacity(k);
    let mut recovered = Vec::with_capacity(k);
    let mut ppr_fallback = 0;
    for i in 0..k {
        let u = &eig.functions[i];
        let lambda_h = eig.values[i];
        let mut row = EigenRow {
            lambda_h,
            residual: eig.residuals[i],
            estimator: None,
            lambda_p1star: None,
            f_p1star: None,
            lambda_cea: None,
            lambda_exp: previous.and_then(|p| p.get(i)).map(|&l2| extrapolate(lambda_h, l2)),
        };
        let mut kh = None;
        if post.rea || post.cea {
            let report = if kind == ElementKind::P1 {
                let r = recover_ppr(mesh, u)?;
                ppr_fallback = r.fallback.len();
                estimator_f(mesh, u, lambda_h, &r)?
            } else {
                let r = recover_kh_of(mesh, u)?;
                let report = estimator_f(mesh, u, lambda_h, &r)?;
                if post.cea {
                    let star = project_p1star(mesh, u, bc)?;
                    let f2 = estimator_f(mesh, &star.u, star.lambda, &r)?.f;
                    row.lambda_p1star = Some(star.lambda);
                    row.f_p1star = Some(f2);
                    row.lambda_cea = combining_eigenvalue(lambda_h, report.f, star.lambda, f2).ok();
                }
                kh = Some(r);
                report
            };
            row.estimator = Some(report);
        }
        if !post.exp {
            row.lambda_exp = None;
        }
        rows.push(row);
        recovered.push(kh);
    }
    Ok(LevelReport {
        level: mesh.level(),
        h: mesh.h(),
        n_dofs: eig.dofs.n_free(),
        rows,
        ppr_fallback,
        functions: eig.functions,
        recovered,
    })
}

/// Outcome of a multi-level run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub levels: Vec<LevelReport>,
    /// First level skipped because it exceeded [`DOF_LIMIT`].
    pub truncated_at: Option<u32>,
}

/// Levels `first..=last` of a nested family, stopping before any level
/// whose CR system would exceed [`DOF_LIMIT`]. Leading levels with fewer
/// than `k` unknowns are skipped.
pub fn run_levels(
    domain: Domain,
    kind: ElementKind,
    bc: &BoundaryConditions,
    levels: core::ops::RangeInclusive<u32>,
    k: usize,
    post: PostSelection,
) -> Result<RunReport> {
    let (first, last) = (*levels.start(), *levels.end());
    if first == 0 || first > last {
        return Err(Error::InvalidInput("levels must satisfy 1 <= first <= last".to_string()));
    }
    let mut mesh = Triangulation::build(domain, first)?;
    let mut out = Vec::new();
    let mut truncated_at = None;
    let mut prev: Option<Vec<f64>> = None;
    for level in first..=last {
        if level > first {
            mesh = mesh.refine();
        }
        if dof_estimate(domain, level, ElementKind::Cr).max(dof_estimate(domain, level, kind)) > DOF_LIMIT {
            truncated_at = Some(level);
            break;
        }
        if out.is_empty() && DofMap::new(&mesh, kind, bc)?.n_free() < k {
            continue;
        }
        let rep = run_level(&mesh, kind, bc, k, post, prev.as_deref())?;
        prev = Some(rep.rows.iter().map(|r| r.lambda_h).collect());
        out.push(rep);
    }
    Ok(RunReport { levels: out, truncated_at })
}

/// References for the first `k` eigenvalues of an example: exact where
/// known, otherwise P1 on `level` (flagged inexact).
pub fn references(spec: &ExampleSpec, k: usize, level: u32) -> Result<Vec<Reference>> {
    let exact = exact_eigenvalues(spec.id, k);
    let mut out: Vec<Reference> = Vec::with_capacity(k);
    if exact.iter().all(Option::is_some) {
        return Ok(exact.into_iter().map(|v| Reference { value: v.unwrap(), exact: true }).collect());
    }
    let mesh = Triangulation::build(spec.domain, level)?;
    let p1 = laplace_eigen(&mesh, ElementKind::P1, &spec.bc, k)?;
    for (i, e) in exact.into_iter().enumerate() {
        out.push(match e {
            Some(v) => Reference { value: v, exact: true },
            None => Reference { value: p1.values[i], exact: false },
        });
    }
    Ok(out)
}
