use std::io;
use std::path::{Path, PathBuf};

use crate::checkpoint::CheckpointError;

/// Exit status for usage errors (bad flags, missing arguments).
pub const EXIT_USAGE: i32 = 1;
/// Exit status for everything else: unreadable, malformed or unusable data.
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: gramweave_core::Error,
    },
    #[error(transparent)]
    Core(#[from] gramweave_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Stream(#[from] io::Error),
    #[error("{what}, line {line}: {msg}")]
    Format { what: &'static str, line: usize, msg: String },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("fetch failed: {0}")]
    Fetch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn exit_code(&self) -> i32 {
        EXIT_DATA
    }

    pub(crate) fn io(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
        move |source| Error::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn format(what: &'static str, line: usize, msg: impl Into<String>) -> Error {
        Error::Format { what, line, msg: msg.into() }
    }
}

/// Attach a pipeline stage name to core errors.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for gramweave_core::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| Error::Stage { stage, source })
    }
}
