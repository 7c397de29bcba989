//! Ratio cuts of nearly rectangular planar domains.
//!
//! The crate evaluates and minimizes the 1-Laplacian ratio cut
//! `length(Γ) / (|S| · |Ω∖S|)` over circular-arc cuts of a parabolic
//! trapezoid, carries the quadratic expansion of that functional in the
//! domain parameters, iterates the cut on curvilinear quadrilaterals and
//! partitions point-cloud graphs with the nonlinear inverse power method.

pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod graphlap;
pub mod numdiff;
pub mod perturbation;
pub mod ratiocut;
pub mod svg;
pub mod sweep;

pub use error::{Error, Result};
pub use geometry::{ArcGeometry, BoundaryCurve, CutParams, DomainParams, Param, Point};
pub use ratiocut::{OptimizeOptions, OptimizeReport, RatioCutBreakdown};
