use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown catalog model `{0}`")]
    UnknownModel(String),
    #[error("field `{0}` is not 2π-periodic but the state space is the circle")]
    NonPeriodicOnCircle(String),
    #[error("correlation rho = {0} lies outside [-1, 1]")]
    RhoOutOfRange(f64),
    #[error("cannot combine a polynomial with a trigonometric field")]
    MixedFieldKinds,
    #[error("operation needs a one-dimensional model, got dimension {0}")]
    NotOneDimensional(usize),
    #[error("invalid model input: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FkmcError {
    #[error("all {0} paths blew up; reduce the step size")]
    AllBlownUp(usize),
    #[error("invalid Monte Carlo input: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("weight {weight} fails the tail test at p = {p}: L_pV/V does not tend to -infinity ({detail})")]
    InadmissibleWeight { weight: String, p: f64, detail: String },
    #[error("power iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("principal eigenvector changed sign at node {0}; the assembled operator is not Metzler")]
    SignChange(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no admissible weight parameter in the {family} family at p = {p}")]
    NoAdmissibleParameter { family: String, p: f64 },
    #[error("lower bound is implemented for the pitchfork catalog family only, got `{0}`")]
    UnsupportedModel(String),
    #[error("growth checks need polynomial line fields: {0}")]
    NonPolynomial(String),
    #[error("invalid bounds input: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("stationary density is not normalizable: {0}")]
    NotNormalizable(String),
    #[error("stencil is not symmetric about zero: {0}")]
    AsymmetricStencil(String),
    #[error("Lambda samples are not convex: violation {violation:e} at p = {p}")]
    NonConvex { p: f64, violation: f64 },
    #[error("invalid analysis input: {0}")]
    Invalid(String),
}

/// Crate-level error used by the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fkmc(#[from] FkmcError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
