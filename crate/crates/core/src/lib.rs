//! Reactive settling of activated sludge in a secondary settling tank.
//!
//! The crate couples a one-dimensional settling–compression–dispersion
//! model for the solids with a modified ASM1 reaction network for six
//! particulate and seven soluble components. It provides
//!
//! * the tank geometry and its layered discretization ([`geometry`]),
//! * the constitutive functions for hindered settling, compression and
//!   dispersion ([`constitutive`]),
//! * the biokinetic model ([`asm1`]),
//! * an explicit finite-volume solver for the continuous tank and for batch
//!   columns ([`solver`]),
//! * removal of the initial induction period from batch settling curves
//!   ([`induction`]),
//! * Nelder–Mead calibration of the settling and dispersion parameters
//!   ([`calibration`]),
//! * configuration and data file handling ([`io`]).

pub mod asm1;
pub mod calibration;
pub mod constitutive;
pub mod error;
pub mod geometry;
pub mod induction;
pub mod io;
pub mod quadrature;
pub mod scenario;
pub mod solver;

pub use asm1::{Asm1Params, Particulates, Solubles};
pub use constitutive::{DispersionParams, SettlingModel, SettlingParams};
pub use error::{Error, Result};
pub use geometry::{build_grid, Grid, TankConfig};
pub use scenario::Scenario;
pub use solver::{SimulationState, Simulator, SolverOptions};
