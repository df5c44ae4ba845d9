use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("topic {topic_id}: query is empty after preprocessing")]
    EmptyQuery { topic_id: u32 },
    #[error("cannot build an index over an empty corpus")]
    EmptyCorpus,
    #[error("nearest-neighbour index is empty")]
    EmptyIndex,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("image {width}x{height} is too small (minimum side {min})")]
    ImageTooSmall { width: usize, height: usize, min: usize },
    #[error("image has wrong dimensions: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    WrongDimensions {
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },
    #[error("stance scorer failed: {0}")]
    Scorer(String),
    #[error("image generator failed: {0}")]
    Generator(String),
    #[error("document source: {0}")]
    Source(String),
    #[error("invalid run: {0}")]
    InvalidRun(String),
    #[error("item (topic {topic_id}, image {image_id}) has {found} annotations, expected {expected}")]
    RaterCount {
        topic_id: u32,
        image_id: String,
        found: usize,
        expected: usize,
    },
    #[error("kappa undefined: expected agreement is 1 but observed agreement is not")]
    UndefinedKappa,
    #[error("t-test needs at least 2 paired samples, got {0}")]
    SampleTooSmall(usize),
    #[error("paired samples differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
}
