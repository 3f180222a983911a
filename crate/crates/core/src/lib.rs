//! Content-based defect prediction for Java code bases.
//!
//! A release (source tree plus per-file defect counts) is turned into term,
//! topic, type and package feature matrices. Features are scored against
//! defect counts, reduced with PCA and fed to a linear regression, and the
//! pipeline is evaluated by repeated random 90/10 cross-validation.

pub mod codefeat;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod featsel;
pub mod java;
pub mod matrix;
pub mod predict;
pub mod textfeat;
pub mod topicfeat;

pub use error::{Error, Result};
pub use matrix::{FeatureKind, FeatureMatrix};
