//! Computational workbench for clones of operations, transformation monoids
//! and countable homogeneous structures.
//!
//! The crate is organised bottom-up:
//!
//! * [`fnspace`]: carriers, finitary operations, composition and window agreement.
//! * [`monoid`]: transformation monoids, permutation groups, weak directedness,
//!   centres and injective endomorphisms fixing a subgroup.
//! * [`clone`]: arity-bounded clone fragments, homomorphism enumeration and
//!   lifting of conjugations from the unary part to every arity.
//! * [`topology`]: the uniformity of pointwise convergence at finite windows.
//! * [`structures`]: finite and lazy relational structures, including the
//!   rationals as a dense linear order and the Rado graph.
//! * [`backforth`]: on-demand automorphisms and embeddings of the catalog
//!   structures.
//! * [`extend`]: extending a continuous group homomorphism to the monoid of a
//!   dense group through interpolants.
//! * [`cli`]: reproducible batch experiments and reports.

pub mod backforth;
pub mod cli;
pub mod clone;
mod error;
pub mod extend;
pub mod fnspace;
pub mod json;
pub mod monoid;
pub mod structures;
pub mod topology;

pub use error::{Error, Result};
pub use fnspace::{Bijection, Carrier, Elem, FinOp, Rational, Window};
