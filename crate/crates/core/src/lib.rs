//! Numerical engine for spinor hydrodynamics and frame-field geometry.
//!
//! The crate evolves two-component (Pauli) spinor fields on uniform periodic
//! grids, derives the hydrodynamic representation (density, velocity, spin)
//! and the orthonormal triad attached to the spinor, and verifies a family of
//! geometric identities numerically:
//!
//! * equivalence of the bilinear, Euler-angle, guidance (triad-gradient) and
//!   Serret–Frenet forms of the velocity field after a one-time sign/role
//!   calibration,
//! * transport of the triad along spin streamlines against the torsion of the
//!   flat Weitzenböck connection it induces,
//! * quantum hydrodynamic balance laws (continuity, momentum with quantum and
//!   spin-stress forces, spin transport),
//! * curvature/torsion identities of teleparallel tetrad fields on a 4D patch,
//!   including an Einstein-like tensor built from torsion alone.
//!
//! All derivative evaluations share one second-order central stencil
//! definition ([`calculus`]), so discrete identities degrade in lockstep and
//! convergence orders are measurable with [`calculus::convergence_order`].

pub mod calculus;
pub mod config;
pub mod constants;
pub mod convention;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod grid;
pub mod hydro;
pub mod interp;
pub mod observables;
pub mod report;
pub mod scenario;
pub mod snapshot;
pub mod streamline;
pub mod teleparallel;
pub mod threads;
pub mod triad;
pub mod verify;

pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use field::{MaskField, ScalarField, SpinorField, VectorField};
pub use grid::GridSpec;
