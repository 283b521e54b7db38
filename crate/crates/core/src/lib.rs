//! Resolvent calculus for monotone-operator splitting in `R^n`.

pub mod cli;
pub mod closed_form;
pub mod error;
pub mod harness;
pub mod iterate;
pub mod linalg;
pub mod operator;
pub mod sampling;
pub mod splitting;

pub use error::{Error, Result};
pub use linalg::{Matrix, Point, SubspaceBasis};
pub use operator::{AacParams, Operator, PerturbationParams, PointMap};
pub use splitting::{DouglasRachford, DrsForm, Order, RbrForm, SplitPair, TForm};
pub use closed_form::{ASign, ClosedFormId, ModelInstance};
pub use harness::{EqualityReport, SuiteConfig, SuiteId, SuiteReport, Verdict};
pub use iterate::{iterate, IterationTrace};
