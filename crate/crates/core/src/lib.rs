//! Exactly solvable harmonic oscillator with position-dependent mass
//! `M(r) = (1 + alpha r^2)^-2`.
//!
//! The crate covers closed-form spectra and Jacobi-polynomial wavefunctions,
//! finite-difference realisations of the quadratic spectrum-generating algebra
//! in its three bases, the algebraic (ladder) construction of the eigenstates,
//! and an independent Sturm-Liouville eigensolver used as ground truth.
//!
//! ```
//! use pdmosc::{ModelParams, SectorLabel, spectrum};
//! let dp = ModelParams::new(3.0, 4.0, SectorLabel::Radial { d: 3, l: 0 })?.derive();
//! assert_eq!(spectrum::energy(&dp, 0), 15.0);
//! # Ok::<(), pdmosc::Error>(())
//! ```

pub mod error;
pub mod grid;
pub mod gridops;
pub mod ladder;
pub mod limit;
pub mod model;
pub mod oracle;
pub mod repalg;
pub mod report;
pub mod specfun;
pub mod spectrum;
pub mod tridiag;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{GridFunction, GridMap, RadialGrid};
pub use model::{derive_params, DerivedParams, ModelParams, Parity, SectorLabel};
pub use report::{Check, GridInfo, ResidualReport};
