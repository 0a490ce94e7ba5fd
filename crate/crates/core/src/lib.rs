//! Exact-arithmetic checking of strong, weak and expected-delay-summing weak
//! bisimulations for Markov automata, plus a timed-LTS engine.

pub mod bisim;
pub mod composition;
pub mod corpus;
pub mod distributions;
pub mod format;
pub mod lp;
pub mod model;
pub mod rational;
pub mod timed;
pub mod trees;

pub use distributions::Subdistr;
pub use rational::Rational;
