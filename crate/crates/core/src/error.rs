use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("arity mismatch: expected {expected} bits, got {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("{what} is {value}, above the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        value: u64,
        cap: u64,
    },

    #[error("probability computation is intractable: {0}")]
    Intractable(String),

    #[error("invalid {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("construction check failed: {0}")]
    Construction(String),

    #[error("instance kind mismatch: cannot pair {source_kind} with {reduced_kind}")]
    KindMismatch {
        source_kind: String,
        reduced_kind: String,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    pub(crate) fn cap(what: &'static str, value: impl TryInto<u64>, cap: impl TryInto<u64>) -> Self {
        Error::CapExceeded {
            what,
            value: value.try_into().unwrap_or(u64::MAX),
            cap: cap.try_into().unwrap_or(u64::MAX),
        }
    }

    /// Short machine-readable reason code.
    pub fn reason(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax",
            Error::ArityMismatch { .. } => "arity_mismatch",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::Intractable(_) => "intractable",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::Construction(_) => "construction_failure",
            Error::KindMismatch { .. } => "kind_mismatch",
        }
    }

    /// True for refusals caused by a size limit rather than by bad input.
    pub fn is_cap_refusal(&self) -> bool {
        matches!(self, Error::CapExceeded { .. } | Error::Intractable(_))
    }
}
