//! Whole-body centre-of-mass estimation for a seated wheelchair user from
//! rigid marker clusters, checked against the centre of pressure measured
//! under the wheels.

// `!(x > tol)` guards are written that way so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anthropometry;
pub mod body;
pub mod cluster;
pub mod error;
pub mod forceplate;
pub mod geometry;
pub mod io;
pub mod landmarks;
pub mod pipeline;
pub mod synth;
pub mod validation;

pub use error::{Error, Result};
pub use geometry::{Point3, RigidTransform};
