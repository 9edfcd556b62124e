use std::io;
use std::path::PathBuf;

use chrono::NaiveDate;

use crate::formats::RejectedRow;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] lppl_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{context}: {source}")]
    Csv {
        context: String,
        #[source]
        source: csv::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{0}: file is empty")]
    EmptyFile(String),

    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: String, column: String },

    #[error("{file}: every data row was rejected ({} rows)", rejected.len())]
    AllRowsRejected {
        file: String,
        rejected: Vec<RejectedRow>,
    },

    #[error("{file}: duplicate dates {}", join_dates(dates))]
    DuplicateDates { file: String, dates: Vec<NaiveDate> },

    #[error("{file}, row {row}: {reason}")]
    BadRow {
        file: String,
        row: u64,
        reason: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("no prior fit or extrapolation results in {0}")]
    NoPriorResults(PathBuf),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn join_dates(dates: &[NaiveDate]) -> String {
    dates
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    pub(crate) fn csv(context: impl Into<String>) -> impl FnOnce(csv::Error) -> Error {
        let context = context.into();
        move |source| Error::Csv { context, source }
    }

    pub(crate) fn json(context: impl Into<String>) -> impl FnOnce(serde_json::Error) -> Error {
        let context = context.into();
        move |source| Error::Json { context, source }
    }
}
