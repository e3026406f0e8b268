use crate::error::{Error, Result};

/// Third-degree Fourier series
/// `a0 + sum_k (a_k cos(k w t) + b_k sin(k w t))`, `k = 1..=3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacancyFunction {
    pub a0: f64,
    /// Cosine amplitudes `a1, a2, a3`.
    pub cos: [f64; 3],
    /// Sine amplitudes `b1, b2, b3`.
    pub sin: [f64; 3],
    /// Angular frequency, 1/month.
    pub w: f64,
}

impl VacancyFunction {
    /// Fit of the IEFP vacancy series, January 2004 to June 2016.
    pub const PORTUGAL: VacancyFunction = VacancyFunction {
        a0: 1.478e4,
        cos: [-1262.0, 328.2, -1992.0],
        sin: [-2006.0, -4700.0, 2.399],
        w: 0.04009,
    };

    pub fn new(a0: f64, cos: [f64; 3], sin: [f64; 3], w: f64) -> Result<Self> {
        let f = VacancyFunction { a0, cos, sin, w };
        f.validate()?;
        Ok(f)
    }

    pub fn constant(a0: f64) -> Self {
        VacancyFunction {
            a0,
            cos: [0.0; 3],
            sin: [0.0; 3],
            w: 1.0,
        }
    }

    /// Builds from the fitting-tool ordering `[a0, a1, b1, a2, b2, a3, b3, w]`.
    pub fn from_coefficients(c: [f64; 8]) -> Result<Self> {
        Self::new(c[0], [c[1], c[3], c[5]], [c[2], c[4], c[6]], c[7])
    }

    /// Coefficients in `[a0, a1, b1, a2, b2, a3, b3, w]` order.
    pub fn coefficients(&self) -> [f64; 8] {
        [
            self.a0,
            self.cos[0],
            self.sin[0],
            self.cos[1],
            self.sin[1],
            self.cos[2],
            self.sin[2],
            self.w,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if !self.coefficients().iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("vacancy coefficients must be finite"));
        }
        if self.w <= 0.0 {
            return Err(Error::invalid("vacancy frequency w must be positive"));
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let mut v = self.a0;
        for k in 0..3 {
            let x = (k + 1) as f64 * self.w * t;
            v += self.cos[k] * libm::cos(x) + self.sin[k] * libm::sin(x);
        }
        v
    }

    /// Time derivative of the series.
    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        let mut d = 0.0;
        for k in 0..3 {
            let kw = (k + 1) as f64 * self.w;
            let x = kw * t;
            d += kw * (self.sin[k] * libm::cos(x) - self.cos[k] * libm::sin(x));
        }
        d
    }
}

/// Evaluates the series at `t`, rejecting non-finite time.
pub fn eval_vacancies(f: &VacancyFunction, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::invalid("t is not finite"));
    }
    Ok(f.eval(t))
}
