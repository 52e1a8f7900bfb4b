//! Equilibria of point charges on constrained planar configuration spaces.
//!
//! Two spaces are supported: planar polygons of perimeter 1 with charged
//! vertices, and triples of charges confined to three concentric circles.
//! The crate finds critical points of the pair energy, classifies them by
//! Morse index, traces pitchfork bifurcations across the charge simplex and
//! solves the inverse problem of recovering stabilizing charges.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod config;
pub mod error;
pub mod inverse;
pub mod morse;
pub mod potential;
pub mod solver;
pub mod suite;

pub use config::{
    AlignedLabel, ChargeVector, Configuration, Point, PolygonConfig, Space, SymmetryKey,
    TorusConfig, TorusLabel,
};
pub use error::{Error, Result};
pub use potential::{EnergyReport, PotentialSpec};
pub use solver::{CriticalPoint, SolveSettings};
pub use morse::MorseSummary;
pub use bifurcation::{BifurcationCurve, BranchDiagram, ChargePath, ControlPoint};
pub use inverse::InverseResult;
