use std::path::PathBuf;

/// Everything that can go wrong inside the engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input document. `line` is 1-based when known.
    #[error("{what}: parse error{}{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default(), if path.is_empty() { String::new() } else { format!(" (field `{path}`)") })]
    Parse {
        what: &'static str,
        line: Option<usize>,
        path: String,
        message: String,
    },

    #[error("invalid {entity} {id}: {message}")]
    Invariant { entity: &'static str, id: i64, message: String },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    Dimension { what: &'static str, expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("duplicate {entity} id {id}")]
    DuplicateId { entity: &'static str, id: i64 },

    #[error("patch {patch_id} has no usable observation")]
    NoObservation { patch_id: u32 },

    #[error("no valid depth around pixel ({u}, {v})")]
    NoDepth { u: f64, v: f64 },

    #[error("form-factor row {row} sums to {sum} (> 1 + 1e-3)")]
    RowSum { row: usize, sum: f64 },

    #[error("radiosity solve did not converge: residual {residual:e}{}", luminaire.map(|l| format!(" (luminaire {l})")).unwrap_or_default())]
    NonConvergence { residual: f64, luminaire: Option<u32> },

    #[error("infeasible: occupant {occupant} drops {drop:.3} lux (budget {budget} lux)")]
    Infeasible { occupant: u32, drop: f64, budget: f64 },

    #[error("unknown {entity} id {id}")]
    UnknownId { entity: &'static str, id: u32 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(what: &'static str, line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Parse {
            what,
            line,
            path: String::new(),
            message: message.into(),
        }
    }

    pub(crate) fn invariant(entity: &'static str, id: impl Into<i64>, message: impl Into<String>) -> Self {
        Error::Invariant {
            entity,
            id: id.into(),
            message: message.into(),
        }
    }

    /// Broad failure class, used by front ends to pick an exit status.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } | Error::Invariant { .. } | Error::DuplicateId { .. } | Error::UnknownId { .. } | Error::Io { .. } => {
                ErrorKind::Input
            }
            Error::Infeasible { .. } => ErrorKind::Infeasible,
            Error::InvalidArgument(_) | Error::Dimension { .. } => ErrorKind::Usage,
            Error::Empty(_) | Error::NoObservation { .. } | Error::NoDepth { .. } | Error::RowSum { .. } | Error::NonConvergence { .. } => {
                ErrorKind::Numeric
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Input,
    Numeric,
    Infeasible,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
