//! Error types for the workbench, one enum per subsystem.

use thiserror::Error;

/// Errors from parsing term text or presentation-adjacent file formats.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("parse error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown generator `{name}` at byte {position}")]
    UnknownGenerator { position: usize, name: String },
}

/// Errors raised while building or sampling presentations.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PresentationError {
    #[error("Cuntz presentations need at least 2 isometries, got {0}")]
    CuntzArity(usize),
    #[error("matrix row {row} is identically zero")]
    ZeroRow { row: usize },
    #[error("relation `{relation}` references undeclared generator `{name}`")]
    UndeclaredGenerator { relation: String, name: String },
    #[error("term uses the unit but the presentation declares no unit generator")]
    NoUnit,
    #[error("schedule is not ascending at position {0}")]
    ScheduleNotAscending(usize),
    #[error("index {index} lies outside the materialized scheme (size {size})")]
    IndexOutsideScheme { index: String, size: usize },
    #[error("index kind does not match the net's scheme")]
    SchemeMismatch,
    #[error("negative bound for relation `{0}`")]
    NegativeBound(String),
}

/// Errors from the rewriting engine.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RewriteError {
    #[error("rule `{pattern}` -> `{replacement}` does not decrease the termination measure")]
    NonTerminating { pattern: String, replacement: String },
    #[error("empty pattern in rewrite rule")]
    EmptyPattern,
    #[error("step budget {budget} exceeded while normalizing; stuck on `{term}`")]
    BudgetExceeded { budget: usize, term: String },
    #[error("matrix is a truncated view; row-finiteness cannot be decided")]
    TruncatedMatrix,
}

/// Errors from projection-lattice combinatorics.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum LatticeError {
    #[error("atom index set must be nonempty")]
    EmptyAtomIndex,
    #[error("projection count {0} exceeds the cap of {1} (2^n - 1 atoms)")]
    TooManyProjections(usize, usize),
    #[error("index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("input {index} is not a projection: {reason}")]
    NotAProjection { index: usize, reason: String },
    #[error("projections {0} and {1} do not commute (residual {2:.3e})")]
    NonCommuting(usize, usize, f64),
    #[error("dimension mismatch: input {index} has dim {got}, expected {expected}")]
    DimensionMismatch { index: usize, got: usize, expected: usize },
    #[error("A(∅,Y,·) support is unknown for a truncated matrix; refusing to guess")]
    SupportUnknown,
    #[error("matrix index {0} out of range 1..={1}")]
    MatrixIndexOutOfRange(usize, usize),
}

/// Errors from sparse operators and representation checks.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum MatrepError {
    #[error("entry ({row},{col}) outside operator dimension {dim}")]
    EntryOutOfRange { row: usize, col: usize, dim: usize },
    #[error("duplicate entry at ({0},{1})")]
    DuplicateEntry(usize, usize),
    #[error("operator dimensions differ: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("no operator assigned to generator `{0}`")]
    UnassignedGenerator(String),
    #[error("power iteration did not converge within {0} iterations")]
    NormNonConvergence(usize),
    #[error("SOT net `{0}` has no boundedness certificate; refusing the check")]
    MissingCertificate(String),
    #[error("generator sets differ; direct sum undefined")]
    GeneratorSetMismatch,
    #[error("generator `{gen}`: s·s* is not a projection within {tol:.1e} (residual {residual:.3e})")]
    NotARangeProjection { gen: String, tol: f64, residual: f64 },
    #[error("malformed operator file: {0}")]
    BadOperatorFile(String),
    #[error("presentation error: {0}")]
    Presentation(#[from] PresentationError),
}

/// Errors from model builders.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("truncation depth {got} too small; need at least {need}")]
    DepthTooSmall { got: usize, need: usize },
    #[error("arity {got} too small; need at least {need}")]
    ArityTooSmall { got: usize, need: usize },
    #[error("witness construction needs {0} base projections; cap is 20")]
    TooManyWitnessProjections(usize),
    #[error("monomial path is not range-compatible at step {step}")]
    IncompatiblePath { step: usize },
    #[error("matrix row {row} is identically zero")]
    ZeroRow { row: usize },
    #[error("matrix entries must be 0 or 1 (row {row}, col {col})")]
    NotZeroOne { row: usize, col: usize },
    #[error("matrix is not square: {rows} rows but row {row} has {cols} entries")]
    NotSquare { rows: usize, row: usize, cols: usize },
    #[error("ultragraph edge `{edge}` has empty range")]
    EmptyRange { edge: String },
    #[error("ultragraph vertex `{vertex}` neither emits an edge nor lies in any range")]
    IsolatedVertex { vertex: String },
    #[error("ultragraph has no edges; the path basis is empty")]
    NoEdges,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("malformed {what} file: {detail}")]
    BadFile { what: String, detail: String },
    #[error("witness closure budget {budget} exceeded ({generated} monomials generated; |F|={f}, N={n}, |P|={p})")]
    WitnessBudget {
        budget: usize,
        generated: usize,
        f: usize,
        n: usize,
        p: usize,
    },
    #[error("path length must be at least 1")]
    ZeroLengthPaths,
    #[error("name `{0}` is not a valid identifier ([a-zA-Z][a-zA-Z0-9]*)")]
    BadName(String),
    #[error("presentation error: {0}")]
    Presentation(#[from] PresentationError),
}
