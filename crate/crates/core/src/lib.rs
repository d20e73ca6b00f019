//! Speaker identification with first- and second-order, left-to-right and
//! circular hidden Markov models, layered with a suprasegmental (prosodic)
//! model and a weighted fusion of the two log-likelihoods.

pub mod error;
pub mod features;

pub use error::{Error, Result};
pub mod hmm;
pub mod suprasegmental;
pub mod speaker;
pub mod corpus;
pub mod eval;
pub mod config;
pub mod experiment;
