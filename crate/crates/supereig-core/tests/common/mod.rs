#![allow(dead_code)]

pub mod checks;

use supereig_core::{Domain, Triangulation};

pub type Point = [f64; 2];

/// Counterclockwise one-element mesh from three points, or `None` when
/// the triangle is too flat for well-conditioned checks.
pub fn single(mut p: [Point; 3]) -> Option<Triangulation> {
    let cross = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
    if cross < 0.0 {
        p.swap(1, 2);
    }
    let l2 = |a: Point, b: Point| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
    let longest = l2(p[0], p[1]).max(l2(p[1], p[2])).max(l2(p[2], p[0]));
    if cross.abs() < 0.05 * longest {
        return None;
    }
    Triangulation::from_parts(p.to_vec(), vec![[0, 1, 2]], |_, _| 1).ok()
}

pub fn diameter(p: &[Point; 3]) -> f64 {
    let l = |a: Point, b: Point| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    l(p[0], p[1]).max(l(p[1], p[2])).max(l(p[2], p[0]))
}

/// Quadratic `q0 x^2 + q1 xy + q2 y^2 + q3 x + q4 y + q5`.
pub fn quad(q: &[f64; 6], x: Point) -> f64 {
    q[0] * x[0] * x[0] + q[1] * x[0] * x[1] + q[2] * x[1] * x[1] + q[3] * x[0] + q[4] * x[1] + q[5]
}

pub fn quad_grad(q: &[f64; 6], x: Point) -> Point {
    [2.0 * q[0] * x[0] + q[1] * x[1] + q[3], q[1] * x[0] + 2.0 * q[2] * x[1] + q[4]]
}

pub fn quad_hess(q: &[f64; 6]) -> [[f64; 2]; 2] {
    [[2.0 * q[0], q[1]], [q[1], 2.0 * q[2]]]
}

/// Triangle containing `x` (brute force; for small meshes).
pub fn locate(mesh: &Triangulation, x: Point) -> usize {
    (0..mesh.n_triangles())
        .find(|&k| mesh.geometry(k).bary(x).iter().all(|&b| b >= -1e-12))
        .expect("point inside the mesh")
}

pub fn meshes() -> Vec<Triangulation> {
    [Domain::UnitSquare, Domain::PerturbedSquare, Domain::EquilateralTriangle, Domain::LShape]
        .into_iter()
        .map(|d| Triangulation::build(d, 3).unwrap())
        .collect()
}

/// Proptest settings without on-disk failure persistence.
pub fn cases(n: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config { failure_persistence: None, ..proptest::test_runner::Config::with_cases(n) }
}
