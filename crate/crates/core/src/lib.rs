//! Information diagrams for entropy-like functions of finite variable
//! families.
//!
//! The central object is a family of `n` variables together with a
//! group-valued function on joint variables and a conditioning action,
//! abstracted as a [`backend::Backend`]. Whatever the backend — Shannon
//! entropy, relative entropy, cross entropy of a finite probability system,
//! or an exact finite algebraic model — the inclusion-exclusion recursion
//! turns it into a signed measure on the `2^n - 1` atoms of a Venn-style
//! diagram, and the usual dependency-structure questions become questions
//! about which atoms vanish:
//!
//! * conditional and mutual independence ([`diagram`]),
//! * total correlation, dual total correlation, O- and S-information
//!   ([`diagram`]),
//! * Markov random fields and Markov chains ([`graph`]).
//!
//! [`prob`] provides finite probability systems with entropy and divergence
//! functionals; [`algebra`] provides exact finite models, including the
//! smallest model showing that total-correlation-based independence tests
//! fail in groups with torsion.

pub mod algebra;
pub mod backend;
pub mod diagram;
pub mod error;
pub mod graph;
pub mod prob;
pub mod subset;

pub use backend::{Backend, Tolerance};
pub use diagram::{ConditionalPartition, Diagram, Evaluator, IndependenceReport};
pub use error::Error;
pub use subset::{enumerate_atoms, region, Atom, VarSubset, MAX_VARS};
