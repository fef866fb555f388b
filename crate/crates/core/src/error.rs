use thiserror::Error;

/// Error taxonomy for construction and verification failures.
///
/// Construction errors carry enough context to identify the offending input;
/// check failures inside suites are reported through report types instead,
/// so that a suite can keep running after a failed sub-check.
#[derive(Debug, Error)]
pub enum Error {
    /// A point or tangent vector violates a factor constraint
    /// (negative half-line coordinate, non-unit sphere coordinate, ...).
    #[error("constraint violation: {0}")]
    Constraint(String),

    /// Dimension or block-structure mismatch between operands.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A map failed the tame-submersion test.
    #[error("tameness failure: {0}")]
    Tameness(String),

    /// Numerical rank of a kernel or frame is inconsistent across samples.
    #[error("rank inconsistency: {0}")]
    Rank(String),

    /// Two arrows fed to a multiplication are not composable.
    #[error("arrows not composable: {0}")]
    NotComposable(String),

    /// A construction needs optional data its input does not carry
    /// (exponential data, a canonical frame, a fiber chart, ...).
    #[error("missing capability: {0}")]
    Capability(String),

    /// The requested input lies outside the classes this implementation
    /// supports.
    #[error("unsupported input: {0}")]
    Unsupported(String),

    /// A candidate action fails to act by groupoid automorphisms.
    #[error("invalid action: {0}")]
    Action(String),

    /// The gluing hypothesis failed on a sampled witness.
    #[error("gluing hypothesis violated: {0}")]
    GlueHypothesis(String),

    /// A degenerate rescaling function (zero on a set with interior).
    #[error("degenerate rescaling: {0}")]
    Degeneracy(String),

    /// A sampler could not produce a valid sample (empty fiber, predicate
    /// never satisfied within the retry budget).
    #[error("sampling failure: {0}")]
    Sampling(String),

    /// Scenario parsing or IO failure.
    #[error("scenario error: {0}")]
    Scenario(String),
}
