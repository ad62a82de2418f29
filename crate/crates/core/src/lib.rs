//! Spectral solver and verification harness for the linear Hopf curvature
//! flow on rotationally symmetric, strictly convex spheres.
//!
//! A surface of revolution is encoded by its support function `r(θ)` on
//! `(0, π)`, with meridian and profile radii of curvature `r₁`, `r₂` and
//! astigmatism `s = r₂ − r₁`. The flow moves the surface with normal speed
//! `a·r₁ + b·r₂ + c` where `−a/b = 2n+3`. For non-integer `n ∈ (−1, 1)` the
//! quotient `s/sin^{n+2}θ` evolves by a singular Sturm–Liouville operator
//! whose eigenbasis `{sin^nθ} ∪ {P^{−n}_{n+m}(cosθ)}` diagonalises the flow;
//! this crate evaluates that basis, projects surfaces onto it, evolves the
//! coefficients exactly in time, and cross-checks the result against an
//! implicit finite-difference integration of the support-function PDE.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature and enable `libm` to build without the standard library.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("linhopf-core requires either the `std` or the `libm` feature");

extern crate alloc;

mod math;
mod numerics;
#[cfg(test)]
mod testsupport;

pub mod error;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod specfun;
pub mod sturm;

pub use error::{Error, Result};
