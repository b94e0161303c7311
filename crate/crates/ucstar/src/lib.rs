//! A symbolic and numeric workbench for C*-algebra presentations.
//!
//! Presentations are generating triples: generators with norm relations
//! (`||x|| <= eta`) and strong-operator-topology relations (nets of terms
//! required to converge to zero strongly). The crate provides
//!
//! - exact arithmetic in the free *-algebra over a generator set ([`term`]),
//! - the presentation data model with the Cuntz and Exel-Laca built-ins
//!   ([`presentation`]),
//! - relation-driven term rewriting, gauge grading and the symbolic
//!   conditional expectation ([`rewrite`]),
//! - inclusion-exclusion combinatorics of commuting projections
//!   ([`lattice`]),
//! - finite-dimensional sparse representations with norm, SOT and
//!   orthogonality check protocols ([`matrep`]),
//! - truncated Fock, path-space and ultragraph model builders with the
//!   finite-dimensional span witness ([`models`]).
//!
//! Truncated models cannot satisfy every relation globally; checks restricted
//! to a model's interior subspace report `interior-pass`, and reports always
//! record the truncation parameters and interior fraction.

pub mod coeff;
pub mod error;
pub mod lattice;
pub mod matrep;
pub mod models;
pub mod presentation;
pub mod rewrite;
pub mod sparse;
pub mod syntax;
pub mod term;

pub use coeff::Coefficient;
pub use error::{
    LatticeError, MatrepError, ModelError, ParseError, PresentationError, RewriteError,
};
pub use matrep::{
    check_norm, check_orthogonal_ranges, check_sot, direct_sum, operator_norm,
    operator_span_rank, CheckMode, CheckReport, Representation, Verdict,
};
pub use models::{
    enumerate_paths, fock_rep, pathspace_rep, ultragraph_rep, witness_span, FockArity,
    PathSource, UltraMonomial, Ultragraph, ZeroOneMatrix,
};
pub use presentation::{
    cuntz_infinity_triple, cuntz_infinity_triple_with_letters, cuntz_triple, exel_laca_triple,
    sample_net, GeneratingTriple, IndexScheme, NetIndex, NormRelation, SotNet,
};
pub use rewrite::{
    check_identity, degree, el_rules_rowfinite, expectation, is_fixed, normalize, RuleSet,
};
pub use sparse::SparseOperator;
pub use syntax::TermParser;
pub use term::{Generator, GeneratorKind, Letter, Term, Word};
