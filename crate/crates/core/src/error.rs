//! Error type shared by all modules.

/// Failure modes of the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested fourth cumulant cannot be realized by any distribution
    /// with the given variance.
    #[error(
        "fourth cumulant {kappa4} is below the feasibility bound {bound} for variance {variance}"
    )]
    InfeasibleCumulant {
        kappa4: f64,
        bound: f64,
        variance: f64,
    },

    /// A Stieltjes-transform evaluation point is not safely outside the
    /// spectral support.
    #[error("evaluation point {x} is within {margin} of the support edge {edge}")]
    OutOfDomain { x: f64, edge: f64, margin: f64 },

    /// The eigensolver failed to reach its off-diagonal tolerance.
    #[error("eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {off_norm})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    /// An operation that needs at least one element received none.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// The 1/N fit cannot be performed on the given abscissae.
    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),

    /// No closed form is available for this trace power.
    #[error("no closed form for trace power {p} {context}")]
    UnsupportedPower { p: u32, context: &'static str },

    /// The brute-force walk enumeration would exceed its budget.
    #[error("enumeration of {cost} closed walks exceeds the budget of {budget}")]
    EnumerationBudget { cost: u128, budget: u128 },

    /// Series division by a series with zero constant term.
    #[error("series reciprocal requires a nonzero constant term")]
    ZeroConstantTerm,

    /// Writing an output file failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
