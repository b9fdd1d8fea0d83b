use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid covers only {coverage:.3} sigma on one side of the pulse center, need at least 6")]
    GridTooNarrow { coverage: f64 },

    #[error("direction-dependent decay rates need phi = -pi/2, got phi = {phi}")]
    UnsupportedPhase { phi: f64 },

    #[error("single-site Green's function is singular at omega = {omega}")]
    SingularInput { omega: f64 },

    #[error("transfer matrix ill-conditioned at site {site}, omega = {omega}: |t_L| = {t_l_abs:e}")]
    IllConditionedTransfer { site: usize, omega: f64, t_l_abs: f64 },

    #[error("amplitudes are sampled on different frequency grids")]
    GridMismatch,

    #[error("input amplitude at the grid edge is {ratio:e} of its peak, the energy window is too small")]
    EnergyWindowTooSmall { ratio: f64 },

    #[error("ensemble value #{index} is not positive: {value}")]
    NonPositiveValue { index: usize, value: f64 },

    #[error("lattice wavepacket reached the boundary (edge amplitude {amplitude:e})")]
    BoundaryContamination { amplitude: f64 },

    #[error("lattice evolution lost unitarity: |norm - 1| = {deviation:e}")]
    NormDrift { deviation: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Short machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::GridTooNarrow { .. } => "grid_too_narrow",
            Error::UnsupportedPhase { .. } => "unsupported_phase",
            Error::SingularInput { .. } => "singular_input",
            Error::IllConditionedTransfer { .. } => "ill_conditioned_transfer",
            Error::GridMismatch => "grid_mismatch",
            Error::EnergyWindowTooSmall { .. } => "energy_window_too_small",
            Error::NonPositiveValue { .. } => "non_positive_value",
            Error::BoundaryContamination { .. } => "boundary_contamination",
            Error::NormDrift { .. } => "norm_drift",
        }
    }
}
