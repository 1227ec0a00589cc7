//! Kähler–Einstein metrics given by potentials on model domains, with numerical
//! verification of gradient-length identities, holomorphic vector fields built
//! from constant-length potentials, and the radially reduced Cheng–Yau problem.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod chengyau;
pub mod domains;
pub mod error;
pub mod hermgeo;
pub mod jets;
pub mod potentials;
pub mod series;
pub mod vfield;

pub use domains::{DomainKind, DomainModel, InvariantsRecord};
pub use error::{Error, Result};
pub use hermgeo::{MetricFrame, Route};
pub use jets::{ComplexPoint, FdSteps, Jet};
pub use potentials::{ConstantLengthCertificate, PotentialField};
