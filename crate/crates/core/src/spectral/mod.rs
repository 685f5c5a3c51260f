//! Spectral analysis of reversible kernels on finite state spaces.

pub mod analysis;
pub mod kernel;
pub mod prob;
pub mod reversible;

pub use analysis::{
    asymptotic_variance, asymptotic_variances, dirichlet_form, dirichlet_ratio_extrema, rayleigh_quotient, spectral_decomposition,
    spectral_jensen_check, spectral_summary, SpectralDecomposition, SpectralSummary, NULL_MASS, PSD_TOL,
};
pub use kernel::{stationary_distribution, t_step, StochasticKernel};
pub use prob::{FunctionVec, ProbVec};
pub use reversible::{check_reversibility, ReversiblePair, REVERSIBILITY_TOL};
