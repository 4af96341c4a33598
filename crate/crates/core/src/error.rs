use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A malformed NLCB/NLVL file. `offset` is the byte position where decoding failed.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    /// A structurally invalid value (dimension mismatch, broken invariant).
    #[error("invalid {what}: {message}")]
    Invalid { what: &'static str, message: String },

    #[error("no peak found{} within gate [{start}, {end})", at_pixel(*.pixel))]
    NoPeak {
        /// (row, col) when the histogram came from a cube.
        pixel: Option<(usize, usize)>,
        start: usize,
        end: usize,
    },

    #[error("path of target point {index} at ({x:.4}, {y:.4}, {z:.4}) m reaches bin {bin:.1}, beyond the histogram span of {bins} bins")]
    PathOutOfSpan {
        index: usize,
        x: f64,
        y: f64,
        z: f64,
        bin: f64,
        bins: usize,
    },

    #[error("all {0} pixels are flagged bad; nothing to interpolate from")]
    AllPixelsBad(usize),

    #[error("cube is not aligned: {0}")]
    NotAligned(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn at_pixel(pixel: Option<(usize, usize)>) -> String {
    match pixel {
        Some((row, col)) => format!(" in pixel (row {row}, col {col})"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(what: &'static str, msg: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            message: msg.into(),
        }
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }

    /// Attach pixel coordinates to a [`Error::NoPeak`]; other errors pass through.
    pub(crate) fn at(self, row: usize, col: usize) -> Self {
        match self {
            Error::NoPeak { start, end, .. } => Error::NoPeak {
                pixel: Some((row, col)),
                start,
                end,
            },
            other => other,
        }
    }
}
