use num_complex::Complex64;
use thiserror::Error;

/// Everything that can go wrong in the core crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("potential {0} cannot be evaluated at complex radius")]
    UnsupportedEvaluation(&'static str),

    #[error("potential has no exponential decay constant")]
    NoExponentialDecay,

    #[error("singular argument: {0}")]
    SingularArgument(&'static str),

    #[error("logarithmic singularity at k = 0")]
    LogSingularity,

    #[error("invalid contour rotation theta = {0} (|theta| must stay below pi/2)")]
    InvalidRotation(f64),

    #[error("contour inadequate: component {component} reached {magnitude:e} at |r| = {r}")]
    ContourInadequate {
        r: f64,
        component: usize,
        magnitude: f64,
    },

    #[error("step size underflow at |r| = {r}")]
    StepSizeUnderflow { r: f64 },

    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),

    #[error("energy {energy} lies outside the analyticity domain for theta = {theta}")]
    OutOfDomain { energy: Complex64, theta: f64 },

    #[error("f_in vanishes at E = {0}: S-matrix pole")]
    SpectralPoint(Complex64),

    #[error("f_out is exponentially subdominant on this contour and cannot be recovered")]
    SubdominantOutgoing,

    #[error("alpha_0 = 0: bound state or virtual state exactly at the expansion point")]
    ZeroEnergyPole,

    #[error("beta_0 = 0: no low-energy scattering, scattering length is infinite")]
    NoLowEnergyScattering,

    #[error("b-tilde vanishes: effective-range function has a pole")]
    EffectiveRangePole,

    #[error("fit is ill-conditioned (condition number {condition:e})")]
    IllConditionedFit { condition: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
