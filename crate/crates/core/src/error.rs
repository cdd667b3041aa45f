use thiserror::Error;

use crate::gld::FitReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used to pick CLI exit codes and HTTP statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments or configuration.
    Usage,
    /// Input data that fails validation.
    Validation,
    /// Valid input on which an estimator cannot produce a result.
    Estimation,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 2,
            ErrorKind::Validation => 3,
            ErrorKind::Estimation => 4,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            ErrorKind::Usage => "usage",
            ErrorKind::Validation => "validation",
            ErrorKind::Estimation => "estimation",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: no bins")]
    EmptyInput,

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("row {row}: {message}")]
    InvalidBin { row: usize, message: String },

    #[error("gap between bins at row {row}: previous bin ends at {previous_upper}, this bin starts at {lower}")]
    NonContiguous {
        row: usize,
        previous_upper: f64,
        lower: f64,
    },

    #[error("empty sample: all bin frequencies are zero")]
    EmptySample,

    #[error("probability {0} is outside the open interval (0, 1)")]
    InvalidProbability(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("method requires bin means")]
    MissingMeans,

    #[error("bin {index} has zero width")]
    ZeroWidthBin { index: usize },

    #[error(
        "bin {index} [{lower}, {upper}): mean {mean} lies outside the middle third [{third_lower}, {third_upper}], \
         so the linear density would be negative"
    )]
    NegativeDensity {
        index: usize,
        lower: f64,
        upper: f64,
        mean: f64,
        third_lower: f64,
        third_upper: f64,
    },

    #[error("exponential tail scale {0} is not positive (last-bin mean must exceed its lower edge)")]
    InvalidTail(f64),

    #[error("frequency polygon requires equal bin widths; bin {index} has width {width}, expected {expected}")]
    UnequalWidths {
        index: usize,
        width: f64,
        expected: f64,
    },

    #[error("segment {segment}: no root of the quadratic CDF lies inside the segment (p = {p})")]
    NoRoot { segment: usize, p: f64 },

    #[error("segment {segment}: negative discriminant {discriminant} (density corrupted)")]
    NegativeDiscriminant { segment: usize, discriminant: f64 },

    #[error("density estimate at the quantile is not positive ({0})")]
    NonPositiveDensity(f64),

    #[error("invalid GLD parameters: {0}")]
    InvalidGld(String),

    #[error("degenerate input for GLD fit: {0}")]
    DegenerateFit(String),

    #[error("GLD fit did not converge (best residual {:e} after {} iterations)", .0.residual, .0.iterations)]
    FitNotConverged(Box<FitReport>),

    #[error("quantile levels differ between groups ({0} vs {1})")]
    MismatchedProbability(f64, f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("{path}: {message}")]
    Config { path: String, message: String },

    #[error("all {0} replications failed; last error: {1}")]
    AllReplicationsFailed(usize, String),

    /// An error from one group of a two-group comparison.
    #[error("group {group}: {source}")]
    InGroup { group: &'static str, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            InGroup { source, .. } => source.kind(),
            InvalidProbability(_) | InvalidArgument(_) | Config { .. } | InvalidDistribution(_) => ErrorKind::Usage,
            EmptyInput
            | Parse { .. }
            | InvalidBin { .. }
            | NonContiguous { .. }
            | EmptySample
            | MissingMeans
            | ZeroWidthBin { .. }
            | UnequalWidths { .. }
            | Io(_) => ErrorKind::Validation,
            NegativeDensity { .. }
            | InvalidTail(_)
            | NoRoot { .. }
            | NegativeDiscriminant { .. }
            | NonPositiveDensity(_)
            | InvalidGld(_)
            | DegenerateFit(_)
            | FitNotConverged(_)
            | MismatchedProbability(..)
            | AllReplicationsFailed(..) => ErrorKind::Estimation,
        }
    }

    /// Stable machine-readable identifier for the failure.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            EmptyInput => "empty_input",
            Parse { .. } => "parse_error",
            InvalidBin { .. } => "invalid_bin",
            NonContiguous { .. } => "non_contiguous",
            EmptySample => "empty_sample",
            InvalidProbability(_) => "invalid_probability",
            InvalidArgument(_) => "invalid_argument",
            MissingMeans => "missing_means",
            ZeroWidthBin { .. } => "zero_width_bin",
            NegativeDensity { .. } => "negative_density",
            InvalidTail(_) => "invalid_tail",
            UnequalWidths { .. } => "unequal_widths",
            NoRoot { .. } => "no_root",
            NegativeDiscriminant { .. } => "negative_discriminant",
            NonPositiveDensity(_) => "non_positive_density",
            InvalidGld(_) => "invalid_gld",
            DegenerateFit(_) => "degenerate_fit",
            FitNotConverged(_) => "fit_not_converged",
            MismatchedProbability(..) => "mismatched_probability",
            InvalidDistribution(_) => "invalid_distribution",
            Config { .. } => "invalid_config",
            AllReplicationsFailed(..) => "all_replications_failed",
            InGroup { source, .. } => source.code(),
            Io(_) => "io_error",
        }
    }

    /// Location of the offending input, when one is known (`row 3`, `bins[2]`, a config key path).
    pub fn location(&self) -> Option<String> {
        match self {
            Error::Parse { row, .. } | Error::InvalidBin { row, .. } | Error::NonContiguous { row, .. } => {
                Some(format!("row {row}"))
            }
            Error::NegativeDensity { index, .. } | Error::ZeroWidthBin { index } | Error::UnequalWidths { index, .. } => {
                Some(format!("bins[{index}]"))
            }
            Error::Config { path, .. } => Some(path.clone()),
            Error::InGroup { group, source } => Some(match source.location() {
                Some(loc) => format!("{group}: {loc}"),
                None => group.to_string(),
            }),
            _ => None,
        }
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}
