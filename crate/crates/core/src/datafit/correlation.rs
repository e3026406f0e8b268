use crate::error::{Error, Result};
use crate::special::student_t_two_tailed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub r: f64,
    pub t_stat: f64,
    /// Two-tailed p-value under the null of zero correlation.
    pub p_value: f64,
    pub n: usize,
}

/// Sample Pearson correlation with a Student-t significance test on `n - 2`
/// degrees of freedom.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::invalid("series differ in length"));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::invalid("need at least three pairs"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite value in series"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    // sqrt of the product keeps r symmetric in (x, y) bit for bit.
    let r = (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0);
    let dof = nf - 2.0;
    let one_minus = 1.0 - r * r;
    let t_stat = if one_minus <= 0.0 {
        f64::INFINITY.copysign(r)
    } else {
        r * libm::sqrt(dof / one_minus)
    };
    let p_value = student_t_two_tailed(t_stat, dof)?.clamp(0.0, 1.0);
    Ok(CorrelationResult { r, t_stat, p_value, n })
}
