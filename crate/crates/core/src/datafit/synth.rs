use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::series::MonthlySeries;
use crate::error::{Error, Result};
use crate::model::LaborState;
use crate::vacancy::VacancyFunction;

/// Standard deviation of the vacancy noise. Puts R² of a Fourier fit near 0.8.
pub const SYNTHETIC_NOISE_SD: f64 = 2000.0;

const U_MIN: f64 = 3.0e5;
const U_MAX: f64 = 7.0e5;

/// Deterministic stand-in for the monthly IEFP series.
///
/// Vacancies follow the fitted Fourier curve plus Gaussian noise. Unemployment
/// starts at the January 2004 count and follows a smoothed random walk kept in
/// `[3e5, 7e5]` by reflection. The labor force drifts slowly around its
/// January 2004 size; the rate column is `U / (labor force)`.
pub fn generate_synthetic_dataset(seed: u64, n: usize) -> Result<MonthlySeries> {
    if n < 2 {
        return Err(Error::invalid("need at least two months"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vacancy_noise = Normal::new(0.0, SYNTHETIC_NOISE_SD).expect("valid sd");
    let walk = Normal::new(0.0, 6000.0).expect("valid sd");
    let force_walk = Normal::new(0.0, 4000.0).expect("valid sd");
    let curve = VacancyFunction::PORTUGAL;
    let start = LaborState::PORTUGAL_2004;

    let mut t = Vec::with_capacity(n);
    let mut unemployed = Vec::with_capacity(n);
    let mut rate = Vec::with_capacity(n);
    let mut vacancies = Vec::with_capacity(n);

    let mut u = start.unemployed;
    let mut force = start.labor_force();
    let mut drift = 0.0;
    for k in 0..n {
        let month = (k + 1) as f64;
        if k > 0 {
            drift = 0.8 * drift + walk.sample(&mut rng);
            u += drift;
            if u < U_MIN {
                u = 2.0 * U_MIN - u;
                drift = drift.abs();
            } else if u > U_MAX {
                u = 2.0 * U_MAX - u;
                drift = -drift.abs();
            }
            u = u.clamp(U_MIN, U_MAX);
            force += force_walk.sample(&mut rng);
            force = force.clamp(6.6e6, 7.4e6);
        }
        let d = (curve.eval(month) + vacancy_noise.sample(&mut rng)).max(0.0);
        // Small jitter keeps the rate column from being an exact ratio.
        let jitter: f64 = if k == 0 { 0.0 } else { rng.random_range(-1e-5..1e-5) };
        t.push(month);
        unemployed.push(libm::round(u));
        rate.push(libm::round(u) / force + jitter);
        vacancies.push(libm::round(d));
    }
    MonthlySeries::new(t, unemployed, rate, vacancies)
}
