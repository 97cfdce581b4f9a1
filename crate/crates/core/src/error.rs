use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("bad override `{0}`: expected key=value")]
    Override(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("unknown sweep parameter `{0}`")]
    UnknownParam(String),
    #[error("bad grid `{0}`: expected START:STEP:END with STEP > 0")]
    Grid(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("bessel_j0 argument {0} outside validity range |x| <= 50")]
    BesselDomain(f64),
    #[error("doppler coefficient {0} outside (0, 1)")]
    DopplerRange(f64),
    #[error("no calibration index k <= {n} reaches confidence for beta={beta}, varsigma={varsigma}")]
    NoValidIndex { n: usize, beta: f64, varsigma: f64 },
    #[error("empty input")]
    EmptyInput,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
