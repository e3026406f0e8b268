use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Monthly observations. `t` is the month index starting at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlySeries {
    pub t: Vec<f64>,
    pub unemployed: Vec<f64>,
    /// Unemployment rate as a fraction in (0, 1).
    pub rate: Vec<f64>,
    /// Vacancies.
    pub vacancies: Vec<f64>,
}

impl MonthlySeries {
    pub fn new(t: Vec<f64>, unemployed: Vec<f64>, rate: Vec<f64>, vacancies: Vec<f64>) -> Result<Self> {
        let n = t.len();
        if unemployed.len() != n || rate.len() != n || vacancies.len() != n {
            return Err(Error::invalid("series columns differ in length"));
        }
        let s = MonthlySeries {
            t,
            unemployed,
            rate,
            vacancies,
        };
        for i in 0..n {
            let row = [s.t[i], s.unemployed[i], s.rate[i], s.vacancies[i]];
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::DataValidation {
                    row: i + 1,
                    message: "missing or non-finite value".into(),
                });
            }
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn employed(&self) -> Result<Vec<f64>> {
        derive_employed(&self.unemployed, &self.rate)
    }

    /// Month-on-month relative change of unemployment.
    pub fn unemployment_change(&self) -> Result<Vec<f64>> {
        rate_of_change(&self.unemployed)
    }

    /// Month-on-month relative change of employment.
    pub fn employment_change(&self) -> Result<Vec<f64>> {
        rate_of_change(&self.employed()?)
    }
}

/// Employed head count implied by unemployed count and rate:
/// `E = U (1 - UR) / UR`.
pub fn derive_employed(unemployed: &[f64], rate: &[f64]) -> Result<Vec<f64>> {
    if unemployed.len() != rate.len() {
        return Err(Error::invalid("unemployed and rate differ in length"));
    }
    unemployed
        .iter()
        .zip(rate)
        .enumerate()
        .map(|(i, (&u, &ur))| {
            if !(ur > 0.0 && ur < 1.0) {
                return Err(Error::DataValidation {
                    row: i + 1,
                    message: alloc::format!("unemployment rate {ur} outside (0, 1)"),
                });
            }
            Ok(u * (1.0 - ur) / ur)
        })
        .collect()
}

/// `(x_t - x_{t-1}) / x_{t-1}` for `t >= 2`.
pub fn rate_of_change(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Err(Error::invalid("need at least two observations"));
    }
    x.windows(2)
        .enumerate()
        .map(|(i, w)| {
            if w[0] == 0.0 {
                return Err(Error::DataValidation {
                    row: i + 1,
                    message: "zero value as rate-of-change denominator".into(),
                });
            }
            Ok((w[1] - w[0]) / w[0])
        })
        .collect()
}
