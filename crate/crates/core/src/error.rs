use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented range.
    InvalidParameter(&'static str),
    /// An integer quantity does not fit in 128 bits.
    Overflow(&'static str),
    /// A message index outside `1..=M_T`.
    IndexOutOfRange { index: u128, max: u128 },
    /// The tone sequence is not a permutation of `0..L`.
    InvalidPermutation,
    /// A phase digit is not below the PSK order.
    PhaseOutOfRange { position: usize, digit: usize, order: usize },
    /// No grid point survives the main-lobe exclusion.
    EmptyGrid,
    /// The Fisher information matrix is not positive definite for these inputs.
    SingularFim { determinant: f64 },
    /// The channel model cannot be used for the requested operation.
    UnsupportedModel(&'static str),
    /// Adaptive quadrature ran out of its evaluation budget.
    Quadrature { evaluations: usize, estimate: f64, error_estimate: f64 },
    /// Exhaustive enumeration was requested over too many waveforms.
    EnumerationTooLarge { size: u128, limit: u128 },
    /// A matrix had the wrong shape.
    Shape { rows: usize, cols: usize },
    /// The two receivers disagreed on a trial run in `both` mode.
    ReceiverMismatch {
        snr_db: f64,
        trial: u64,
        transmitted: u128,
        efficient: u128,
        exhaustive: u128,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::Overflow(what) => write!(f, "{what} does not fit in 128 bits"),
            Error::IndexOutOfRange { index, max } => {
                write!(f, "index {index} outside 1..={max}")
            }
            Error::InvalidPermutation => f.write_str("tone sequence is not a permutation"),
            Error::PhaseOutOfRange { position, digit, order } => write!(
                f,
                "phase digit {digit} at subpulse {position} is not below the PSK order {order}"
            ),
            Error::EmptyGrid => f.write_str("no grid points outside the main-lobe exclusion"),
            Error::SingularFim { determinant } => write!(
                f,
                "Fisher information is not positive definite (determinant {determinant:e}); \
                 increase the bandwidth B or shorten the waveform"
            ),
            Error::UnsupportedModel(why) => write!(f, "unsupported channel model: {why}"),
            Error::Quadrature { evaluations, estimate, error_estimate } => write!(
                f,
                "quadrature did not converge after {evaluations} evaluations \
                 (estimate {estimate:e}, error {error_estimate:e})"
            ),
            Error::EnumerationTooLarge { size, limit } => write!(
                f,
                "enumerating {size} waveforms exceeds the limit of {limit}; \
                 use the assignment receiver or aggregated bounds"
            ),
            Error::Shape { rows, cols } => write!(f, "expected a square matrix, got {rows}x{cols}"),
            Error::ReceiverMismatch { snr_db, trial, transmitted, efficient, exhaustive } => write!(
                f,
                "receivers disagree at {snr_db} dB, trial {trial}: sent {transmitted}, \
                 assignment receiver {efficient}, exhaustive receiver {exhaustive}"
            ),
        }
    }
}

impl core::error::Error for Error {}
