use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::translate::ProviderError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line count mismatch {source_lines} vs {target_lines} ({} / {})", source_path.display(), target_path.display())]
    LineCountMismatch {
        source_path: PathBuf,
        target_path: PathBuf,
        source_lines: usize,
        target_lines: usize,
    },

    #[error("invalid UTF-8 in {} at byte offset {offset}", path.display())]
    InvalidUtf8 { path: PathBuf, offset: u64 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("cannot chunk empty sentence")]
    EmptySentence,

    #[error("chunk {chunk} has no hypotheses")]
    EmptyHypotheses { chunk: usize },

    #[error("no reference alignments")]
    NoReferenceAlignments,

    #[error("empty evaluation")]
    EmptyEvaluation,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Provider(#[from] ProviderError),

    #[error("stage {stage} failed at pair {pair_id}: {source}")]
    Stage {
        stage: &'static str,
        pair_id: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Whether this error originates from the translation provider, looking
    /// through stage context.
    pub fn is_provider_error(&self) -> bool {
        match self {
            Error::Provider(_) => true,
            Error::Stage { source, .. } => source.is_provider_error(),
            _ => false,
        }
    }
}
