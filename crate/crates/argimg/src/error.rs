use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{}:{line}: duplicate topic id {id}", path.display())]
    DuplicateTopic { path: PathBuf, line: usize, id: u32 },
    #[error("document {id}: missing page-text.txt")]
    MissingPageText { id: String },
    #[error("document {id}: no image.png or image.pgm")]
    MissingImage { id: String },
    #[error("{}: {message}", path.display())]
    Image { path: PathBuf, message: String },
    #[error("{}: not an index file ({message})", path.display())]
    IndexFormat { path: PathBuf, message: String },
    #[error("inference service: {0}")]
    Remote(String),
    #[error(transparent)]
    Core(#[from] argimg_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
