use std::fmt;

/// Coarse failure category, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numeric,
}

#[derive(Debug)]
pub enum Error {
    Io {
        path: String,
        source: std::io::Error,
    },
    Csv {
        line: u64,
        message: String,
    },
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    ParseCell {
        row: usize,
        column: String,
        text: String,
    },
    EmptyDataset,
    UnobservedColumn {
        column: String,
    },
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    TooFewRows {
        needed: usize,
        found: usize,
    },
    UnknownColumn(String),
    InvalidInput(String),
    InvalidConfig(String),
    Schema {
        field: String,
        message: String,
    },
    Divergence {
        epoch: usize,
    },
    NonFiniteFitness {
        genome: Vec<f64>,
    },
    NothingToImpute {
        row: usize,
    },
    UndefinedRatio,
    /// A pipeline stage failed; `stage` names it.
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage {
            stage,
            source: Box::new(e),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidConfig(_) | Error::Schema { .. } => ErrorClass::Config,
            Error::Divergence { .. } | Error::NonFiniteFitness { .. } => ErrorClass::Numeric,
            Error::Stage { source, .. } => source.class(),
            _ => ErrorClass::Data,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io { path, source } => write!(f, "{path}: {source}"),
            Error::Csv { line, message } => write!(f, "csv error at line {line}: {message}"),
            Error::RaggedRow {
                row,
                expected,
                found,
            } => write!(f, "row {row}: expected {expected} fields, found {found}"),
            Error::ParseCell { row, column, text } => {
                write!(f, "row {row}, column {column:?}: cannot parse {text:?} as a number")
            }
            Error::EmptyDataset => write!(f, "empty dataset"),
            Error::UnobservedColumn { column } => {
                write!(f, "column {column:?} has no observed cells")
            }
            Error::ShapeMismatch {
                context,
                expected,
                found,
            } => write!(f, "{context}: expected {expected}, found {found}"),
            Error::TooFewRows { needed, found } => {
                write!(f, "need at least {needed} rows, found {found}")
            }
            Error::UnknownColumn(name) => write!(f, "unknown column {name:?}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            Error::Schema { field, message } => write!(f, "schema error in `{field}`: {message}"),
            Error::Divergence { epoch } => write!(f, "training diverged at epoch {epoch}"),
            Error::NonFiniteFitness { genome } => {
                write!(f, "non-finite fitness for genome {genome:?}")
            }
            Error::NothingToImpute { row } => write!(f, "row {row} is fully observed"),
            Error::UndefinedRatio => {
                write!(f, "invalid process: rational and irrational power are both zero")
            }
            Error::Stage { stage, source } => write!(f, "[{stage}] {source}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            Error::Stage { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
