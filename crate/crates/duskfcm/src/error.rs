use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dataset root {0} has no images/ directory")]
    MissingImagesDir(PathBuf),
    #[error("dataset root {0} contains no images")]
    EmptyDataset(PathBuf),
    #[error("two files share the sample id {0:?}")]
    DuplicateId(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("benchmark needs at least two methods, got {0}")]
    BadMethodList(usize),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Image { path: PathBuf, source: image::ImageError },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Core(#[from] duskfcm_core::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    /// Process exit status for a run that stopped on this error.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Exit status for a finished run: 0 all good, 1 when some samples failed.
pub fn exit_code_for(failed: usize) -> i32 {
    if failed == 0 {
        0
    } else {
        1
    }
}
