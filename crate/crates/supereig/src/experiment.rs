//! Multi-level experiments: solve, post-process and tabulate.

use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use supereig_core::assembly::{mass, stiffness};
use supereig_core::estimators::observed_orders;
use supereig_core::pipeline::{self, ExampleSpec, LevelReport, PostSelection, RunReport};
use supereig_core::{BoundaryConditions, DofMap, Domain, ElementKind, Error, Triangulation};

use crate::error::{CliError, CliResult};
use crate::meshio::write_coo;
use crate::report::{
    ConvergenceRow, EigenOut, ElementRun, EstimatorOut, ExperimentReport, FieldOut, LevelOut, ReferenceOut, Table,
};

/// Where the problem comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// One of the benchmark examples 1 to 4.
    Example(u8),
    /// A benchmark domain with Dirichlet conditions except on the listed
    /// segments, which are Neumann.
    Custom { domain: Domain, neumann: Vec<u8> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: Source,
    pub elements: Vec<ElementKind>,
    pub levels: RangeInclusive<u32>,
    pub k: usize,
    pub post: PostSelection,
    /// Include eigenfunctions and recovered gradients in the report.
    pub fields: bool,
}

impl ExperimentConfig {
    /// The example description; custom sources get id 0 unless they
    /// coincide with a problem whose spectrum is known.
    pub fn spec(&self) -> CliResult<ExampleSpec> {
        match &self.source {
            Source::Example(id) => Ok(pipeline::example(*id)?),
            Source::Custom { domain, neumann } => {
                for t in neumann {
                    if !domain.segments().contains(t) {
                        return Err(Error::Configuration(*t).into());
                    }
                }
                let dirichlet: Vec<u8> = domain.segments().iter().copied().filter(|t| !neumann.contains(t)).collect();
                let square = matches!(domain, Domain::UnitSquare | Domain::PerturbedSquare);
                let id = match (square, neumann.as_slice()) {
                    (true, []) => 1,
                    (true, [2]) => 2,
                    _ => 0,
                };
                let bc = BoundaryConditions::mixed(*domain, &dirichlet);
                Ok(ExampleSpec { id, domain: *domain, bc, table_offset: 0 })
            }
        }
    }

    fn validate(&self) -> CliResult<()> {
        if self.k == 0 {
            return Err(CliError::Usage("k must be at least 1".into()));
        }
        if self.elements.is_empty() {
            return Err(CliError::Usage("no element kind selected".into()));
        }
        if let Some(e) = self.elements.iter().find(|e| !matches!(e, ElementKind::Cr | ElementKind::Ecr | ElementKind::P1)) {
            return Err(Error::UnsupportedKind(*e).into());
        }
        Ok(())
    }
}

fn post_names(p: PostSelection) -> Vec<&'static str> {
    [(p.rea, "rea"), (p.cea, "cea"), (p.exp, "exp")].into_iter().filter(|x| x.0).map(|x| x.1).collect()
}

fn mesh_label(level: u32, offset: u32) -> String {
    if level > offset {
        format!("T{}", level - offset)
    } else {
        format!("L{level}")
    }
}

/// `mesh` is given when fields are wanted.
fn level_out(rep: &LevelReport, mesh: Option<&Triangulation>, offset: u32) -> LevelOut {
    let eigen = rep
        .rows
        .iter()
        .enumerate()
        .map(|(index, r)| EigenOut {
            index,
            lambda_h: r.lambda_h,
            residual: r.residual,
            estimator: r.estimator.as_ref().map(|e| EstimatorOut {
                lambda_h: e.lambda_h,
                f: e.f,
                lambda_rea: e.lambda_rea,
                term_gradient: e.term_gradient,
                term_interp: e.term_interp,
            }),
            lambda_p1star: r.lambda_p1star,
            f_p1star: r.f_p1star,
            lambda_cea: r.lambda_cea,
            lambda_exp: r.lambda_exp,
        })
        .collect();
    let fields = mesh.map(|mesh| {
        rep.functions
            .iter()
            .zip(&rep.recovered)
            .enumerate()
            .map(|(index, (u, g))| FieldOut {
                index,
                kind: u.kind.name(),
                values: u.values.clone(),
                recovered: g.as_ref().map(|g| {
                    mesh.edges()
                        .iter()
                        .zip(&g.values)
                        .map(|(e, v)| {
                            let (a, b) = (mesh.vertices()[e.v[0]], mesh.vertices()[e.v[1]]);
                            [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, v[0], v[1]]
                        })
                        .collect()
                }),
            })
            .collect()
    });
    LevelOut {
        level: rep.level,
        mesh: mesh_label(rep.level, offset),
        h: rep.h,
        n_dofs: rep.n_dofs,
        ppr_fallback: rep.ppr_fallback,
        eigen,
        fields,
    }
}

/// Order between consecutive rows where both errors exist.
fn orders(errors: &[Option<f64>]) -> Vec<Option<f64>> {
    let mut out = vec![None; errors.len()];
    for i in 1..errors.len() {
        if let (Some(a), Some(b)) = (errors[i - 1], errors[i]) {
            out[i] = observed_orders(&[a, b])[1];
        }
    }
    out
}

fn tables(element: ElementKind, levels: &[LevelOut], refs: &[ReferenceOut]) -> Vec<Table> {
    refs.iter()
        .map(|r| {
            let err = |x: Option<f64>| match (x, r.value) {
                (Some(x), Some(l)) => Some(x - l),
                _ => None,
            };
            let rows_e: Vec<&EigenOut> = levels.iter().map(|l| &l.eigen[r.index]).collect();
            let e: Vec<Option<f64>> = rows_e.iter().map(|x| err(Some(x.lambda_h))).collect();
            let rea: Vec<Option<f64>> = rows_e.iter().map(|x| err(x.estimator.as_ref().map(|s| s.lambda_rea))).collect();
            let cea: Vec<Option<f64>> = rows_e.iter().map(|x| err(x.lambda_cea)).collect();
            let exp: Vec<Option<f64>> = rows_e.iter().map(|x| err(x.lambda_exp)).collect();
            let (oe, orea, ocea, oexp) = (orders(&e), orders(&rea), orders(&cea), orders(&exp));
            let rows = levels
                .iter()
                .enumerate()
                .map(|(i, l)| ConvergenceRow {
                    level: l.level,
                    mesh: l.mesh.clone(),
                    h: l.h,
                    n_dofs: l.n_dofs,
                    lambda_h: rows_e[i].lambda_h,
                    error: e[i],
                    order: oe[i],
                    error_rea: rea[i],
                    order_rea: orea[i],
                    error_cea: cea[i],
                    order_cea: ocea[i],
                    error_exp: exp[i],
                    order_exp: oexp[i],
                })
                .collect();
            Table { element: element.name(), index: r.index, reference: r.value, reference_exact: r.exact, rows }
        })
        .collect()
}

/// Runs every selected element over the level range. Levels too large
/// for the unknown limit end the run for that element with a truncation
/// marker. Eigenvalues without a known exact value are compared with P1
/// on the finest level reached.
pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    let runs: Vec<RunReport> = cfg
        .elements
        .iter()
        .map(|&kind| pipeline::run_levels(spec.domain, kind, &spec.bc, cfg.levels.clone(), cfg.k, cfg.post))
        .collect::<Result<_, _>>()?;

    let exact = pipeline::exact_eigenvalues(spec.id, cfg.k);
    let finest = runs.iter().flat_map(|r| r.levels.iter().map(|l| l.level)).max();
    let references: Vec<ReferenceOut> = match finest {
        Some(level) if exact.iter().any(Option::is_none) => pipeline::references(&spec, cfg.k, level)?
            .into_iter()
            .enumerate()
            .map(|(index, r)| ReferenceOut { index, value: Some(r.value), exact: r.exact })
            .collect(),
        _ => exact.iter().enumerate().map(|(index, v)| ReferenceOut { index, value: *v, exact: v.is_some() }).collect(),
    };

    let mut out = Vec::with_capacity(runs.len());
    for (&kind, run) in cfg.elements.iter().zip(&runs) {
        let mut levels = Vec::with_capacity(run.levels.len());
        let mut mesh: Option<Triangulation> = None;
        for rep in &run.levels {
            if cfg.fields {
                mesh = Some(match mesh.take() {
                    Some(mut m) if m.level() <= rep.level => {
                        while m.level() < rep.level {
                            m = m.refine();
                        }
                        m
                    }
                    _ => Triangulation::build(spec.domain, rep.level)?,
                });
            }
            levels.push(level_out(rep, mesh.as_ref(), spec.table_offset));
        }
        let tables = tables(kind, &levels, &references);
        out.push(ElementRun { element: kind.name(), truncated_at: run.truncated_at, levels, tables });
    }

    Ok(ExperimentReport {
        example: matches!(cfg.source, Source::Example(_)).then_some(spec.id),
        domain: spec.domain.name().to_owned(),
        k: cfg.k,
        post: post_names(cfg.post),
        levels_requested: [*cfg.levels.start(), *cfg.levels.end()],
        table_offset: spec.table_offset,
        references,
        runs: out,
    })
}

/// Writes stiffness and mass matrices of each element on `level` as
/// `<kind>_level<L>_{stiffness,mass}.coo`.
pub fn export_matrices(cfg: &ExperimentConfig, level: u32, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let spec = cfg.spec()?;
    let mesh = Triangulation::build(spec.domain, level)?;
    let mut files = Vec::new();
    for &kind in &cfg.elements {
        let dofs = DofMap::new(&mesh, kind, &spec.bc)?;
        for (name, a) in [("stiffness", stiffness(&mesh, &dofs)?), ("mass", mass(&mesh, &dofs)?)] {
            let p = dir.join(format!("{}_level{level}_{name}.coo", kind.name()));
            let f = std::io::BufWriter::new(std::fs::File::create(&p)?);
            write_coo(&a, f)?;
            files.push(p);
        }
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_skip_gaps() {
        let o = orders(&[None, Some(4.0), Some(1.0), None, Some(1.0)]);
        assert_eq!(o[0], None);
        assert_eq!(o[1], None);
        assert!((o[2].unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(o[3], None);
        assert_eq!(o[4], None);
    }

    #[test]
    fn custom_square_knows_its_spectrum() {
        let cfg = ExperimentConfig {
            source: Source::Custom { domain: Domain::PerturbedSquare, neumann: vec![] },
            elements: vec![ElementKind::Cr],
            levels: 2..=3,
            k: 1,
            post: PostSelection::default(),
            fields: false,
        };
        assert_eq!(cfg.spec().unwrap().id, 1);
        let bad = ExperimentConfig { source: Source::Custom { domain: Domain::UnitSquare, neumann: vec![7] }, ..cfg };
        assert!(bad.spec().is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(mesh_label(3, 1), "T2");
        assert_eq!(mesh_label(1, 1), "L1");
        assert_eq!(mesh_label(4, 0), "T4");
    }
}
