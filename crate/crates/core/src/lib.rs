//! Continuous-time quantum walk search and state transfer on graphene
//! lattices: tori, armchair nanotubes and finite sheets.
//!
//! ```
//! use diracwalk::{lattice::{build_torus, Sublattice}, operators::Perturbation, dynamics};
//!
//! let lat = build_torus(6, 6).unwrap();
//! let marked = lat.site(0, 0, Sublattice::A).unwrap();
//! let pert = Perturbation::ThreeBond { marked };
//! let start = dynamics::optimal_start_state(&lat, &marked).unwrap();
//! let r = dynamics::run_search(&lat, &pert, 1.0, 10.0, 200, &start).unwrap();
//! assert!(r.peak_probability > 0.3);
//! ```

pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod operators;
pub mod reduced;
pub mod spectral;
pub mod svg;
pub mod theory;

pub use error::{Error, Result};

/// Complex scalar used throughout (faer's `c64`, i.e. `num_complex::Complex<f64>`).
pub type C64 = faer::c64;
