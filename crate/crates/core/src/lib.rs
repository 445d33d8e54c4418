//! Exact sofic microstate counting for finite measured equivalence relations.

pub mod closedform;
pub mod error;
pub mod freeprod;
pub mod microstates;
pub mod pperm;
pub mod presentation;
pub mod rational;
pub mod relation;
pub mod rng;

pub use error::{Error, Result};
pub use pperm::{Carrier, PartialBijection};
pub use presentation::Presentation;
pub use rational::Rational;
pub use relation::{build_relation, FinRelation, GeneratorSet, SigmaBall};
