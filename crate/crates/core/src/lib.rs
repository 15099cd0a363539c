//! Exact-rational toolkit for convex cones under lattice group actions.
//!
//! The crate is organised bottom-up:
//!
//! * [`num`]: exact rational vectors and matrices;
//! * [`cone`]: rational polyhedral cones with canonical dual descriptions;
//! * [`action`]: unimodular integer matrix groups, bounded orbit balls and
//!   stabilizers;
//! * [`tiling`]: tiled cones `Γ·Π`, point reduction, fundamental domains,
//!   face descent and chamber gluing, all reported as certificates;
//! * [`chambers`]: markings, chamber cones, chamber systems and the
//!   certificate pipelines built on top of them;
//! * [`scenario`] and [`cli`]: scenario files, commands and reports.

pub mod action;
pub mod chambers;
pub mod cli;
pub mod cone;
pub mod num;
pub mod scenario;
pub mod tiling;

pub use action::{ActionGroup, GroupElement};
pub use cone::{Face, PolyCone};
pub use num::{QMatrix, QVector, Q};
