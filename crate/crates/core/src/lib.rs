//! Generalized Radon transforms over the level sets of a defining function
//! φ(x, θ) on a box domain, with weight w.
//!
//! The modules follow the pipeline from geometry to inversion:
//!
//! - [`geometry`]: domains, defining functions, weights, direction tables and
//!   the sampled Bolker checks.
//! - [`transform`]: grids, fields, sinograms, the smoothed-delta forward
//!   transform with its two adjoints, and the binary file formats.
//! - [`normal`]: the normal operator N = R*R, its principal symbol, the dense
//!   oracle and the oscillatory symbol probe.
//! - [`recon`]: Sobolev norms, the symbol preconditioner, CG on the normal
//!   equations, stability estimates and the perturbation sweep.
//! - [`microlocal`]: FBI decay scans and the conormal correlation probe.
//! - [`cli`]: the `gradon` command line.
//!
//! ```
//! use std::sync::Arc;
//! use gradon::geometry::{make_euclidean, ConstantWeight, Domain};
//! use gradon::phantom::Phantom;
//! use gradon::transform::{Grid, RadonTransform};
//!
//! let grid = Grid::new(Domain::new(2, 1.0)?, 32)?;
//! let op = RadonTransform::new(Arc::new(make_euclidean(2)?), Arc::new(ConstantWeight::unit(2)?), grid, 16)?;
//! let sinogram = op.forward(&Phantom::disk(0.5).render(&grid, 4)?)?;
//! assert_eq!(sinogram.layout().n_theta(), 16);
//! # Ok::<(), gradon::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod microlocal;
pub mod normal;
pub mod phantom;
pub mod recon;
pub mod transform;
pub mod window;

pub use error::{Error, Result};
