//! Equilibrium, attracting region and local stability of the two-compartment
//! model at a fixed vacancy level.

use crate::error::{Error, Result};
use crate::model::{LaborState, ModelParams};

/// Outcome of the total-population bound `(lambda + omega) / alpha_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionBound {
    /// `alpha_m > 0`: trajectories end up with `U + E <= bound`.
    Bounded(f64),
    /// `alpha_m < 0`: the quotient is negative and bounds nothing. The raw
    /// value is kept for reporting.
    NonInformative(f64),
    /// `alpha_m == 0`.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleRegion {
    pub alpha_m: f64,
    pub bound: RegionBound,
}

impl FeasibleRegion {
    pub fn is_informative(&self) -> bool {
        matches!(self.bound, RegionBound::Bounded(_))
    }
}

pub fn feasible_region_bound(p: &ModelParams) -> Result<FeasibleRegion> {
    p.validate()?;
    let alpha_m = (p.alpha1 - p.rho).min(p.alpha2 + p.delta);
    let inflow = p.lambda + p.omega;
    let bound = if alpha_m > 0.0 {
        RegionBound::Bounded(inflow / alpha_m)
    } else if alpha_m < 0.0 {
        RegionBound::NonInformative(inflow / alpha_m)
    } else {
        RegionBound::Degenerate
    };
    Ok(FeasibleRegion { alpha_m, bound })
}

/// Determinant of the linear equilibrium system; equals `a2` of the
/// characteristic polynomial.
pub fn equilibrium_denominator(p: &ModelParams, v: f64) -> f64 {
    (p.alpha1 - p.rho) * p.gamma + (p.alpha2 + p.delta) * p.kappa * v + p.alpha1 * (p.alpha2 + p.delta)
}

/// The unique equilibrium at constant vacancy level `v`.
pub fn equilibrium(p: &ModelParams, v: f64) -> Result<LaborState> {
    p.validate()?;
    if !v.is_finite() {
        return Err(Error::invalid("v is not finite"));
    }
    let d = equilibrium_denominator(p, v);
    if d.abs() < 1e-15 {
        return Err(Error::SingularEquilibrium { denominator: d });
    }
    let u = (p.lambda * (p.delta + p.alpha2) + (p.omega + p.lambda) * p.gamma) / d;
    let e = (p.alpha1 * p.omega + p.lambda * p.rho + p.kappa * (p.omega + p.lambda) * v) / d;
    Ok(LaborState::new(u, e))
}

/// Coefficients `(a1, a2)` of `lambda^2 + a1 lambda + a2`.
pub fn characteristic_coefficients(p: &ModelParams, v: f64) -> (f64, f64) {
    let a1 = v * p.kappa + p.alpha1 + p.alpha2 + p.delta + p.gamma;
    let a2 =
        v * p.alpha2 * p.kappa + v * p.delta * p.kappa + p.alpha1 * p.alpha2 + p.alpha1 * p.delta + p.alpha1 * p.gamma
            - p.gamma * p.rho;
    (a1, a2)
}

/// Linearization of the model at any state; independent of the state since
/// the only nonlinearity is through the exogenous vacancy level.
pub fn variational_matrix(p: &ModelParams, v: f64) -> [[f64; 2]; 2] {
    [
        [-p.kappa * v - p.alpha1, p.gamma],
        [p.kappa * v + p.rho, -p.alpha2 - p.gamma - p.delta],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

/// Eigenvalues of a 2x2 matrix from its trace and determinant.
pub fn eigenvalues_2x2(m: [[f64; 2]; 2]) -> [Eigenvalue; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let sq = libm::sqrt(disc);
        // Larger-magnitude root directly, the other from the product to avoid cancellation.
        let big = if tr >= 0.0 { 0.5 * (tr + sq) } else { 0.5 * (tr - sq) };
        let small = if big == 0.0 { 0.0 } else { det / big };
        [Eigenvalue { re: big, im: 0.0 }, Eigenvalue { re: small, im: 0.0 }]
    } else {
        let im = 0.5 * libm::sqrt(-disc);
        [Eigenvalue { re: 0.5 * tr, im }, Eigenvalue { re: 0.5 * tr, im: -im }]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub a1_coeff: f64,
    pub a2_coeff: f64,
    pub eigenvalues: [Eigenvalue; 2],
    /// Routh–Hurwitz verdict: `a1 > 0 && a2 > 0`.
    pub is_stable: bool,
}

impl StabilityReport {
    /// Verdict read off the eigenvalues alone.
    pub fn eigen_stable(&self) -> bool {
        self.eigenvalues.iter().all(|l| l.re < 0.0)
    }

    /// Smallest `|Re|` over both eigenvalues; verdicts may disagree only when
    /// this is at rounding level.
    pub fn margin(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| l.re.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn stability_analysis(p: &ModelParams, v: f64) -> StabilityReport {
    let (a1, a2) = characteristic_coefficients(p, v);
    let eigenvalues = eigenvalues_2x2(variational_matrix(p, v));
    StabilityReport {
        a1_coeff: a1,
        a2_coeff: a2,
        eigenvalues,
        is_stable: a1 > 0.0 && a2 > 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rhs_new_model;
    use approx::assert_relative_eq;

    const P: ModelParams = ModelParams::PORTUGAL;

    /// Solves `[[-(kv+a1), g], [kv+rho, -(a2+g+d)]] x = [-L, -w]` by Gaussian
    /// elimination with partial pivoting.
    fn linear_oracle(p: &ModelParams, v: f64) -> (f64, f64) {
        let mut m = [
            [-(p.kappa * v + p.alpha1), p.gamma, -p.lambda],
            [p.kappa * v + p.rho, -(p.alpha2 + p.gamma + p.delta), -p.omega],
        ];
        if m[1][0].abs() > m[0][0].abs() {
            m.swap(0, 1);
        }
        let f = m[1][0] / m[0][0];
        for c in 0..3 {
            m[1][c] -= f * m[0][c];
        }
        let e = m[1][2] / m[1][1];
        let u = (m[0][2] - m[0][1] * e) / m[0][0];
        (u, e)
    }

    #[test]
    fn region_for_portugal_is_non_informative() {
        let r = feasible_region_bound(&P).unwrap();
        assert_relative_eq!(r.alpha_m, 0.04 - 0.7161, max_relative = 1e-12);
        assert!(matches!(r.bound, RegionBound::NonInformative(b) if b < 0.0));
        assert!(!r.is_informative());
    }

    #[test]
    fn region_without_devaluation() {
        let r = feasible_region_bound(&ModelParams { rho: 0.0, ..P }).unwrap();
        assert_eq!(r.alpha_m, 0.04);
        match r.bound {
            RegionBound::Bounded(b) => assert_relative_eq!(b, 4.5e6, max_relative = 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn region_degenerate_at_boundary() {
        let r = feasible_region_bound(&ModelParams {
            alpha1: 0.5,
            rho: 0.5,
            ..P
        })
        .unwrap();
        assert_eq!(r.alpha_m, 0.0);
        assert_eq!(r.bound, RegionBound::Degenerate);
    }

    #[test]
    fn equilibrium_matches_linear_system() {
        for v in [0.0, 4848.0, 9625.0, 14780.0] {
            let eq = equilibrium(&P, v).unwrap();
            let (u, e) = linear_oracle(&P, v);
            assert_relative_eq!(eq.unemployed, u, max_relative = 1e-9);
            assert_relative_eq!(eq.employed, e, max_relative = 1e-9);
            let r = rhs_new_model(&P, eq, v).unwrap();
            let norm = libm::hypot(r.unemployed, r.employed);
            assert!(norm <= 1e-8 * (P.lambda + P.omega), "v={v} residual {norm}");
        }
        let eq = equilibrium(&P, 14780.0).unwrap();
        assert!((eq.unemployed / 5.52e5 - 1.0).abs() < 5e-3);
        assert!((eq.employed / 5.53e6 - 1.0).abs() < 5e-3);
    }

    #[test]
    fn equilibrium_decoupled_case() {
        let p = ModelParams {
            gamma: 0.0,
            rho: 0.0,
            ..P
        };
        let eq = equilibrium(&p, 7000.0).unwrap();
        assert_relative_eq!(
            eq.unemployed,
            p.lambda / (p.kappa * 7000.0 + p.alpha1),
            max_relative = 1e-14
        );
    }

    #[test]
    fn equilibrium_singular() {
        let p = ModelParams {
            kappa: 0.0,
            alpha1: 0.0,
            alpha2: 0.0,
            delta: 0.0,
            gamma: 0.0,
            ..P
        };
        assert!(matches!(equilibrium(&p, 100.0), Err(Error::SingularEquilibrium { .. })));
    }

    #[test]
    fn portugal_coefficients() {
        // a2 is affine in v: recover slope and intercept from two evaluations.
        let (_, a2_0) = characteristic_coefficients(&P, 0.0);
        let (_, a2_1) = characteristic_coefficients(&P, 1.0);
        assert!((a2_1 - a2_0 - 0.00000090).abs() < 1e-9);
        assert!((a2_0 - 0.0033239).abs() < 1e-9);

        let (a1, a2) = characteristic_coefficients(&P, 10000.0);
        assert_relative_eq!(a1, 0.231, max_relative = 1e-12);
        assert_relative_eq!(a2, 0.0123239, max_relative = 1e-9);

        let zero = ModelParams {
            lambda: 0.0,
            kappa: 0.0,
            alpha1: 0.0,
            alpha2: 0.0,
            gamma: 0.0,
            omega: 0.0,
            delta: 0.0,
            rho: 0.0,
        };
        assert_eq!(characteristic_coefficients(&zero, 123.0), (0.0, 0.0));
    }

    #[test]
    fn portugal_is_stable() {
        for v in [0.0, 1.0, 4848.0, 14780.0, 1e6] {
            let r = stability_analysis(&P, v);
            assert!(r.is_stable);
            assert!(r.eigen_stable());
        }
        let r = stability_analysis(&P, 0.0);
        assert_relative_eq!(r.a1_coeff, 0.141, max_relative = 1e-12);
        // quadratic formula oracle
        let disc = 0.141f64 * 0.141 - 4.0 * r.a2_coeff;
        let roots = [(-0.141 + disc.sqrt()) / 2.0, (-0.141 - disc.sqrt()) / 2.0];
        let mut got = [r.eigenvalues[0].re, r.eigenvalues[1].re];
        got.sort_by(f64::total_cmp);
        assert_relative_eq!(got[0], roots[1], max_relative = 1e-9);
        assert_relative_eq!(got[1], roots[0], max_relative = 1e-9);
    }

    #[test]
    fn saddle_is_unstable() {
        let p = ModelParams {
            lambda: 0.0,
            kappa: 0.0,
            alpha1: 0.0,
            alpha2: 0.0,
            gamma: 1.0,
            omega: 0.0,
            delta: 0.0,
            rho: 1.0,
        };
        let r = stability_analysis(&p, 0.0);
        assert_eq!(r.a2_coeff, -1.0);
        assert!(!r.is_stable);
        assert!(!r.eigen_stable());
        // [[0,1],[1,-1]] has eigenvalues (-1 ± sqrt 5)/2
        let mut re = [r.eigenvalues[0].re, r.eigenvalues[1].re];
        re.sort_by(f64::total_cmp);
        assert_relative_eq!(re[1], (-1.0 + 5f64.sqrt()) / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn complex_pair() {
        let ev = eigenvalues_2x2([[0.0, 1.0], [-4.0, -0.2]]);
        assert_relative_eq!(ev[0].re, -0.1);
        assert_relative_eq!(ev[0].im, (4.0f64 - 0.01).sqrt(), max_relative = 1e-12);
        assert_eq!(ev[1].im, -ev[0].im);
    }
}
