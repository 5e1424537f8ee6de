//! Exact rational computations with Sullivan models: cohomology, models of
//! sphere and disk mapping spaces, inductively built shriek maps, and the
//! brane coproduct vanishing check.

pub mod algebra;
pub mod cache;
pub mod cdga;
pub mod commands;
pub mod duality;
pub mod error;
pub mod homology;
pub mod linalg;
pub mod mapping;
pub mod model;
pub mod report;
pub mod shriek;
pub mod string_ops;

pub use error::{Error, Result};
