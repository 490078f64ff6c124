//! Mixed RT0 solutions against CR/ECR, plus Fortin, commuting and
//! continuity properties of the canonical interpolations.

mod common;

use common::checks::{commuting_defect, cubic, cubic_grad, fortin_defect, mixed_defects};
use common::{locate, meshes, Point};
use proptest::prelude::*;
use supereig_core::fespaces::{edge_jump_mean, interpolate, interpolate_flux};
use supereig_core::{BoundaryConditions, Domain, ElementKind, FeFunction, Triangulation};

fn problems() -> Vec<(Triangulation, BoundaryConditions)> {
    vec![
        (Triangulation::build(Domain::UnitSquare, 3).unwrap(), BoundaryConditions::dirichlet(Domain::UnitSquare)),
        (Triangulation::build(Domain::LShape, 3).unwrap(), BoundaryConditions::dirichlet(Domain::LShape)),
        (
            Triangulation::build(Domain::UnitSquare, 3).unwrap(),
            BoundaryConditions::mixed(Domain::UnitSquare, &[1, 3, 4]),
        ),
        (
            Triangulation::build(Domain::EquilateralTriangle, 3).unwrap(),
            BoundaryConditions::mixed(Domain::EquilateralTriangle, &[1, 2]),
        ),
    ]
}

#[test]
fn ecr_gradient_equals_rt_flux_for_piecewise_constant_loads() {
    for (mesh, bc) in problems() {
        let d = mixed_defects(&mesh, &bc);
        assert!(d.ecr_rt <= 1e-9, "{}", d.ecr_rt);
    }
}

#[test]
fn cr_and_rt_differ_by_the_local_linear_term() {
    for (mesh, bc) in problems() {
        let d = mixed_defects(&mesh, &bc);
        assert!(d.cr_rt <= 1e-9, "pointwise {}", d.cr_rt);
        assert!(d.mean <= 1e-9, "mean {}", d.mean);
        assert!(d.norm <= 1e-9, "norm {}", d.norm);
    }
}

fn smooth(x: Point) -> f64 {
    (1.3 * x[0]).sin() * (0.7 * x[1] + 0.2).cos() + x[0] * x[1] * x[1]
}

fn smooth_grad(x: Point) -> Point {
    [
        1.3 * (1.3 * x[0]).cos() * (0.7 * x[1] + 0.2).cos() + x[1] * x[1],
        -0.7 * (1.3 * x[0]).sin() * (0.7 * x[1] + 0.2).sin() + 2.0 * x[0] * x[1],
    ]
}

fn smooth_div(x: Point) -> f64 {
    // divergence of smooth_grad, i.e. the Laplacian of smooth
    -(1.3f64.powi(2) + 0.7f64.powi(2)) * (1.3 * x[0]).sin() * (0.7 * x[1] + 0.2).cos() + 2.0 * x[0]
}

#[test]
fn fortin_interpolation_preserves_element_divergence() {
    for mesh in meshes() {
        let d = fortin_defect(&mesh, &smooth_grad, &smooth_div);
        assert!(d <= 1e-7, "{d}");
    }
}

#[test]
fn commuting_property_for_smooth_functions() {
    for mesh in meshes() {
        for kind in [ElementKind::Cr, ElementKind::Ecr] {
            // only quadrature error remains; cubics are checked exactly below
            let d = commuting_defect(&mesh, kind, &smooth, &smooth_grad);
            assert!(d <= 1e-7, "{kind:?}: {d}");
        }
    }
}

fn random_function(mesh: &Triangulation, kind: ElementKind, seed: &[f64]) -> FeFunction {
    let n = kind.n_entities(mesh);
    FeFunction { kind, values: (0..n).map(|i| seed[i % seed.len()] * (1.0 + (i as f64).sin())).collect() }
}

proptest! {
    #![proptest_config(common::cases(24))]

    #[test]
    fn commuting_property_for_cubics(c in proptest::array::uniform10(-1.0..1.0f64)) {
        let mesh = Triangulation::build(Domain::LShape, 2).unwrap();
        for kind in [ElementKind::Cr, ElementKind::Ecr] {
            let d = commuting_defect(&mesh, kind, &|x| cubic(&c, x), &|x| cubic_grad(&c, x));
            prop_assert!(d <= 1e-13, "{:?}: {}", kind, d);
        }
    }

    #[test]
    fn interpolation_is_idempotent(seed in proptest::collection::vec(-1.0..1.0f64, 1..8)) {
        let mesh = Triangulation::build(Domain::PerturbedSquare, 2).unwrap();
        for kind in [ElementKind::Cr, ElementKind::Ecr, ElementKind::P1, ElementKind::P0] {
            let u = random_function(&mesh, kind, &seed);
            // points on an edge are evaluated from one side; edge means
            // agree on both sides, so the result is still exact
            let f = |x: Point| u.eval(&mesh, locate(&mesh, x), x).unwrap().value;
            let again = interpolate(&mesh, kind, &f).unwrap();
            for (a, b) in again.values.iter().zip(&u.values) {
                prop_assert!((a - b).abs() <= 1e-12 * 2.0, "{:?}", kind);
            }
        }
        let tau = random_function(&mesh, ElementKind::Rt0, &seed);
        let f = |x: Point| tau.eval_flux(&mesh, locate(&mesh, x), x).unwrap().value;
        let again = interpolate_flux(&mesh, &f);
        for (a, b) in again.values.iter().zip(&tau.values) {
            prop_assert!((a - b).abs() <= 1e-12 * 2.0);
        }
    }

    #[test]
    fn discrete_functions_are_weakly_continuous(seed in proptest::collection::vec(-1.0..1.0f64, 1..8)) {
        for mesh in [Triangulation::build(Domain::EquilateralTriangle, 3).unwrap(), Triangulation::build(Domain::LShape, 2).unwrap()] {
            for kind in [ElementKind::Cr, ElementKind::Ecr] {
                let u = random_function(&mesh, kind, &seed);
                for e in 0..mesh.n_edges() {
                    prop_assert!(edge_jump_mean(&u, &mesh, e).abs() <= 1e-12);
                }
            }
        }
    }
}
