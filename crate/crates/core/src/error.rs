use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Every failure the core algorithms can report.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Width or height is zero, or the buffer length does not match.
    BadDimensions { width: usize, height: usize, len: usize },
    DimensionMismatch { expected: (usize, usize), found: (usize, usize) },
    BadLevelCount(usize),
    BadBinCount(usize),
    /// A quantized value is outside `[0, levels)`.
    LevelOutOfRange { value: u16, levels: usize },
    /// The displacement leaves no valid pixel pair inside the image.
    OffsetTooLarge { dx: i32, dy: i32 },
    NoOffsets,
    BadWindow(usize),
    WindowLargerThanImage { window: usize, width: usize, height: usize },
    EmptyList,
    UnequalLengths,
    SingleClassLabels,
    TooFewPoints { points: usize, required: usize },
    NotAnImageGrid { rows: usize, width: usize, height: usize },
    InvalidConfig(&'static str),
    UnknownFeature(alloc::string::String),
    EmptyClusters,
    EmptySeeds,
    NoPositives,
    NoPredictedPositives,
    NoNegatives,
    UndefinedF1,
    BothMasksEmpty,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BadDimensions { width, height, len } => {
                write!(f, "invalid image dimensions {width}x{height} for buffer of length {len}")
            }
            Error::DimensionMismatch { expected, found } => write!(
                f,
                "dimension mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::BadLevelCount(l) => write!(f, "gray level count {l} outside [2, 256]"),
            Error::BadBinCount(b) => write!(f, "bin count {b} does not divide 256"),
            Error::LevelOutOfRange { value, levels } => {
                write!(f, "quantized value {value} not below level count {levels}")
            }
            Error::OffsetTooLarge { dx, dy } => {
                write!(f, "offset ({dx}, {dy}) leaves no pixel pair inside the image")
            }
            Error::NoOffsets => f.write_str("GLCM configuration has no offsets"),
            Error::BadWindow(w) => write!(f, "window side {w} is not a valid odd size"),
            Error::WindowLargerThanImage { window, width, height } => {
                write!(f, "window {window} larger than image {width}x{height}")
            }
            Error::EmptyList => f.write_str("empty input list"),
            Error::UnequalLengths => f.write_str("input vectors have unequal lengths"),
            Error::SingleClassLabels => f.write_str("labels contain a single class"),
            Error::TooFewPoints { points, required } => {
                write!(f, "{points} points, at least {required} required")
            }
            Error::NotAnImageGrid { rows, width, height } => {
                write!(f, "{rows} feature rows do not form a {width}x{height} grid")
            }
            Error::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            Error::UnknownFeature(name) => write!(f, "unknown feature column {name:?}"),
            Error::EmptyClusters => f.write_str("no cluster has any assigned pixel"),
            Error::EmptySeeds => f.write_str("no seed pixels"),
            Error::NoPositives => f.write_str("ground truth has no positive pixels"),
            Error::NoPredictedPositives => f.write_str("prediction has no positive pixels"),
            Error::NoNegatives => f.write_str("ground truth has no negative pixels"),
            Error::UndefinedF1 => f.write_str("precision and recall are both zero"),
            Error::BothMasksEmpty => f.write_str("both masks are empty"),
        }
    }
}

impl core::error::Error for Error {}
