//! Labor-market compartment models.
//!
//! Two systems live here. The baseline three-compartment model (unemployed,
//! employed, vacancies) and the two-compartment model where vacancies are an
//! exogenous function of time and hiring additionally responds to wage
//! devaluation through `rho`. The latter also has a controlled variant with
//! an internship flow `u1` and an incentive multiplier `u2` on matching.

use crate::error::{Error, Result};
use crate::vacancy::VacancyFunction;

/// Rates and inflows of the two-compartment model. Units are persons and months.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Inflow of unemployed, persons/month.
    pub lambda: f64,
    /// Matching rate, 1/(vacancy·month).
    pub kappa: f64,
    /// Exit rate of unemployed (migration, death).
    pub alpha1: f64,
    /// Exit rate of employed (retirement, death).
    pub alpha2: f64,
    /// Firing rate.
    pub gamma: f64,
    /// Inflow of employed, persons/month.
    pub omega: f64,
    /// Vacancy-funding attrition acting on employment.
    pub delta: f64,
    /// Hiring driven by wage devaluation.
    pub rho: f64,
}

impl ModelParams {
    /// Values fitted to Portugal, January 2004 to June 2016.
    pub const PORTUGAL: ModelParams = ModelParams {
        lambda: 90000.0,
        kappa: 0.000009,
        alpha1: 0.04,
        alpha2: 0.05,
        gamma: 0.001,
        omega: 90000.0,
        delta: 0.05,
        rho: 0.7161,
    };

    /// Dynamics as written in the ACADO listing: employed inflow 50000 and a
    /// 0.06 attrition coefficient in place of `delta`.
    pub const APPENDIX_ACADO: ModelParams = ModelParams {
        omega: 50000.0,
        delta: 0.06,
        ..ModelParams::PORTUGAL
    };

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("lambda", self.lambda),
            ("kappa", self.kappa),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("gamma", self.gamma),
            ("omega", self.omega),
            ("delta", self.delta),
            ("rho", self.rho),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::invalid(alloc::format!("{name} is not finite")));
            }
            if value < 0.0 {
                return Err(Error::invalid(alloc::format!("{name} = {value} is negative")));
            }
        }
        Ok(())
    }

    /// Controlled right-hand side without input validation.
    ///
    /// With `u1 = u2 = 0` this evaluates exactly the uncontrolled expression:
    /// `x * (1 + 0)` and `x - 0` are exact in IEEE arithmetic.
    #[inline]
    pub fn derivative(&self, u: f64, e: f64, v: f64, u1: f64, u2: f64) -> [f64; 2] {
        let matching = self.kappa * u * v * (1.0 + u2);
        let du = self.lambda - matching - self.alpha1 * u + self.gamma * e - u1;
        let de = self.omega + matching - self.alpha2 * e - self.gamma * e - self.delta * e + self.rho * u + u1;
        [du, de]
    }

    /// Partial derivatives of [`Self::derivative`] with respect to
    /// `(U, E, u1, u2)`, row per output component.
    #[inline]
    pub fn derivative_jacobian(&self, u: f64, v: f64, u2: f64) -> [[f64; 4]; 2] {
        let kv = self.kappa * v;
        let m_u = kv * (1.0 + u2);
        let m_u2 = kv * u;
        let e_out = self.alpha2 + self.gamma + self.delta;
        [
            [-m_u - self.alpha1, self.gamma, -1.0, -m_u2],
            [m_u + self.rho, -e_out, 1.0, m_u2],
        ]
    }
}

/// Rates of the baseline model with endogenous vacancies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineParams {
    pub lambda: f64,
    pub kappa: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub gamma: f64,
    /// Vacancy creation proportional to unemployment.
    pub phi: f64,
    /// Vacancy diminution for lack of funds.
    pub delta: f64,
}

impl BaselineParams {
    pub const MUNOLI_GANI: BaselineParams = BaselineParams {
        lambda: 5000.0,
        kappa: 0.000009,
        alpha1: 0.04,
        alpha2: 0.05,
        gamma: 0.001,
        phi: 0.007,
        delta: 0.05,
    };

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("lambda", self.lambda),
            ("kappa", self.kappa),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("gamma", self.gamma),
            ("phi", self.phi),
            ("delta", self.delta),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::invalid(alloc::format!(
                    "{name} = {value} must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn derivative(&self, u: f64, e: f64, v: f64) -> [f64; 3] {
        let matching = self.kappa * u * v;
        [
            self.lambda - matching - self.alpha1 * u + self.gamma * e,
            matching - self.alpha2 * e - self.gamma * e,
            self.alpha2 * e + self.gamma * e - self.delta * v + self.phi * u,
        ]
    }
}

/// Unemployed and employed head counts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LaborState {
    pub unemployed: f64,
    pub employed: f64,
}

impl LaborState {
    pub const fn new(unemployed: f64, employed: f64) -> Self {
        LaborState { unemployed, employed }
    }

    /// Portugal, January 2004.
    pub const PORTUGAL_2004: LaborState = LaborState::new(464450.0, 6450694.0);

    pub fn labor_force(&self) -> f64 {
        self.unemployed + self.employed
    }

    pub fn unemployment_rate(&self) -> f64 {
        self.unemployed / self.labor_force()
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.unemployed, self.employed]
    }

    pub fn from_array(a: [f64; 2]) -> Self {
        LaborState::new(a[0], a[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BaselineState {
    pub unemployed: f64,
    pub employed: f64,
    pub vacancies: f64,
}

impl BaselineState {
    pub const fn new(unemployed: f64, employed: f64, vacancies: f64) -> Self {
        BaselineState {
            unemployed,
            employed,
            vacancies,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.unemployed, self.employed, self.vacancies]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        BaselineState::new(a[0], a[1], a[2])
    }
}

/// January 2004 vacancies as quoted in the data description.
pub const V0_TEXT: f64 = 4848.0;
/// January 2004 vacancies used as the default start of the baseline model.
pub const V0_CODE: f64 = 9625.0;

/// Exogenous vacancy input of the two-compartment model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Vacancy {
    Constant(f64),
    Fourier(VacancyFunction),
}

impl Vacancy {
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Vacancy::Constant(v) => *v,
            Vacancy::Fourier(f) => f.eval(t),
        }
    }
}

fn check_finite(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !v.is_finite() {
            return Err(Error::invalid(alloc::format!("{name} is not finite")));
        }
    }
    Ok(())
}

/// Right-hand side of the two-compartment model at vacancy level `v`.
pub fn rhs_new_model(p: &ModelParams, s: LaborState, v: f64) -> Result<LaborState> {
    rhs_controlled(p, s, v, 0.0, 0.0)
}

/// Right-hand side with internship flow `u1` and matching incentive `u2`.
pub fn rhs_controlled(p: &ModelParams, s: LaborState, v: f64, u1: f64, u2: f64) -> Result<LaborState> {
    p.validate()?;
    check_finite(&[("U", s.unemployed), ("E", s.employed), ("v", v), ("u1", u1), ("u2", u2)])?;
    Ok(LaborState::from_array(p.derivative(
        s.unemployed,
        s.employed,
        v,
        u1,
        u2,
    )))
}

pub fn rhs_baseline(p: &BaselineParams, s: BaselineState) -> Result<BaselineState> {
    p.validate()?;
    check_finite(&[("U", s.unemployed), ("E", s.employed), ("V", s.vacancies)])?;
    Ok(BaselineState::from_array(p.derivative(
        s.unemployed,
        s.employed,
        s.vacancies,
    )))
}
