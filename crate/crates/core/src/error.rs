use thiserror::Error;

/// Failures while constructing or validating ziggurat tables.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("i_max must be a power of two in [2, 4096], got {0}")]
    InvalidImax(usize),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("density is not a valid monotone density: {0}")]
    InvalidDensity(String),
    #[error("root finding did not converge: {0}")]
    NonConvergence(String),
    #[error("quadrature on [{lo}, {hi}] has error estimate {estimate:e} above tolerance {tol:e}")]
    QuadratureFailure {
        lo: f64,
        hi: f64,
        estimate: f64,
        tol: f64,
    },
    #[error("chord dips below the density in overhang box {slot} (gap {gap:e})")]
    CurvatureViolation { slot: usize, gap: f64 },
}

/// Failures while building an alias table.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AliasError {
    #[error("alias table needs at least one positive weight")]
    EmptyWeights,
    #[error("weight {index} is negative or not finite: {value}")]
    InvalidWeight { index: usize, value: f64 },
}

/// Errors from reading a serialized table file.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic header")]
    BadMagic,
    #[error("unsupported schema version {0}")]
    UnsupportedVersion(u32),
    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("malformed table file: {0}")]
    Malformed(String),
    #[error("invalid hexadecimal float `{0}`")]
    HexFloat(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SourceError {
    #[error("cannot take {0} index bits from a word, at most 12 are free")]
    BitBudgetExceeded(u32),
    #[error("ZIGFAST_SEED is not a decimal u64: `{0}`")]
    BadSeedVariable(String),
}

/// The tables cannot drive a sampler.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("tables have no full layer (L_max = 0); a sampler needs at least one")]
    NoLayers,
    #[error("expected {expected} tables, got {found}")]
    WrongDistribution {
        expected: &'static str,
        found: &'static str,
    },
    #[error(transparent)]
    Alias(#[from] AliasError),
    #[error(transparent)]
    Table(#[from] TableError),
}
