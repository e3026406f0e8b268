//! Regularized incomplete beta function and the Student-t distribution.

use crate::error::{Error, Result};

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Continued fraction for `I_x(a, b)` by the modified Lentz method.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 10_000;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)` for `a, b > 0`, `0 <= x <= 1`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid("incomplete beta needs a, b > 0 and x in [0, 1]"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * libm::log(x) + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    // The continued fraction converges fast for x < (a+1)/(a+b+2); use the
    // symmetry I_x(a,b) = 1 - I_{1-x}(b,a) on the other side.
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_cf(a, b, x) / a)
    } else {
        Ok(1.0 - front * beta_cf(b, a, 1.0 - x) / b)
    }
}

/// Two-tailed tail mass `P(|T| >= |t|)` of Student's t with `dof` degrees of freedom.
pub fn student_t_two_tailed(t: f64, dof: f64) -> Result<f64> {
    if !(dof > 0.0) || t.is_nan() {
        return Err(Error::invalid("need dof > 0 and a number t"));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let x = dof / (dof + t * t);
    regularized_incomplete_beta(0.5 * dof, 0.5, x)
}

/// CDF of Student's t.
pub fn student_t_cdf(t: f64, dof: f64) -> Result<f64> {
    let tail = 0.5 * student_t_two_tailed(t, dof)?;
    Ok(if t >= 0.0 { 1.0 - tail } else { tail })
}

/// Quantile of Student's t by bisection on the CDF.
pub fn student_t_quantile(p: f64, dof: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("quantile probability must be in (0, 1)"));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (-1.0, 1.0);
    while student_t_cdf(lo, dof)? > p {
        lo *= 2.0;
    }
    while student_t_cdf(hi, dof)? < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if student_t_cdf(mid, dof)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * mid.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_closed_forms() {
        // I_x(1, 1) = x; I_x(a, 1) = x^a; I_x(1, b) = 1 - (1-x)^b
        for &x in &[0.01, 0.3, 0.5, 0.77, 0.999] {
            assert!((regularized_incomplete_beta(1.0, 1.0, x).unwrap() - x).abs() < 1e-14);
            assert!((regularized_incomplete_beta(2.5, 1.0, x).unwrap() - libm::pow(x, 2.5)).abs() < 1e-13);
            let want = 1.0 - libm::pow(1.0 - x, 3.0);
            assert!((regularized_incomplete_beta(1.0, 3.0, x).unwrap() - want).abs() < 1e-13);
        }
        assert!(regularized_incomplete_beta(0.0, 1.0, 0.5).is_err());
        assert!(regularized_incomplete_beta(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn cauchy_case() {
        // dof = 1 is Cauchy: CDF = 1/2 + atan(t)/pi
        for &t in &[-7.0, -1.0, 0.0, 0.3, 2.0, 40.0] {
            let want = 0.5 + libm::atan(t) / core::f64::consts::PI;
            assert!((student_t_cdf(t, 1.0).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn known_quantiles() {
        // t_{0.975} table values
        assert!((student_t_quantile(0.975, 1.0).unwrap() - 12.706204736).abs() < 1e-6);
        assert!((student_t_quantile(0.975, 10.0).unwrap() - 2.228138852).abs() < 1e-8);
        assert!((student_t_quantile(0.975, 142.0).unwrap() - 1.976810994).abs() < 1e-6);
        assert!((student_t_quantile(0.025, 10.0).unwrap() + 2.228138852).abs() < 1e-8);
    }

    #[test]
    fn infinite_t_has_no_tail() {
        assert_eq!(student_t_two_tailed(f64::INFINITY, 5.0).unwrap(), 0.0);
        assert_eq!(student_t_two_tailed(0.0, 5.0).unwrap(), 1.0);
    }
}
