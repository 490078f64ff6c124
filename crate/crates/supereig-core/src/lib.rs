//! Finite element kernels for the 2-D Laplace eigenvalue problem.
//!
//! Crouzeix-Raviart (CR), enriched CR (ECR), conforming P1 and the mixed
//! RT0/P0 pair on uniformly refined triangulations, plus the gradient
//! recovery and Taylor-expansion machinery behind the asymptotically exact
//! eigenvalue estimators, recovering/combining eigenvalues and two-mesh
//! extrapolation.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod assembly;
pub mod dense;
pub mod error;
pub mod estimators;
pub mod fespaces;
pub mod mesh;
pub mod ordering;
pub mod pipeline;
pub mod quadrature;
pub mod recovery;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
pub use fespaces::{DofMap, ElementKind, FeFunction};
pub use mesh::{BoundaryConditions, Domain, ElementGeometry, Triangulation};

/// A point or vector in the plane.
pub type Point = [f64; 2];

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub(crate) trait FloatExt {
    fn sq(self) -> f64;
    fn hyp(self, other: f64) -> f64;
}

impl FloatExt for f64 {
    #[inline]
    fn sq(self) -> f64 {
        self * self
    }
    #[inline]
    fn hyp(self, other: f64) -> f64 {
        libm::hypot(self, other)
    }
}
