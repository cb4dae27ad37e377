use thiserror::Error;

/// Errors raised by the simulator, model, growth and training layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),

    #[error("index error: qubit {index} out of range for {n_qubits}-qubit state")]
    Index { index: usize, n_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("layout error: {0}")]
    Layout(String),

    #[error("shape error: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("model has no feature-map gates; spectrum is empty")]
    EmptySpectrum,

    #[error("spectrum too large to enumerate ({0} frequencies)")]
    SpectrumTooLarge(usize),

    #[error("aliasing: {grid_points} grid points cannot resolve frequency {max_frequency} (need at least {required})")]
    Aliasing {
        grid_points: usize,
        max_frequency: f64,
        required: usize,
    },

    #[error("frequency scale {0} on the analysed input dimension is not an integer")]
    NonIntegerFrequency(f64),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("growth saturated: {0}")]
    Saturated(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("epoch {epoch}: {source}")]
    AtEpoch {
        epoch: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid choice {value:?}; expected one of: {choices}")]
    Choice { value: String, choices: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_epoch(self, epoch: usize) -> Self {
        Error::AtEpoch {
            epoch,
            source: Box::new(self),
        }
    }
}
