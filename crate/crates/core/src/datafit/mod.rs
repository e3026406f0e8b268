//! Monthly labor data: derived series, correlation, and the Fourier vacancy fit.

mod correlation;
mod fourier;
mod series;
mod synth;

pub use correlation::{pearson_correlation, CorrelationResult};
pub use fourier::{
    fit_fourier3, fit_fourier3_with, projected_sse, FitOptions, FitResult, COEFFICIENT_NAMES, FOURIER3_START_W,
};
pub use series::{derive_employed, rate_of_change, MonthlySeries};
pub use synth::{generate_synthetic_dataset, SYNTHETIC_NOISE_SD};
