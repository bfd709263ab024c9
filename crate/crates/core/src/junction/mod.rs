//! Semiconductor junctions in the depletion approximation.
//!
//! Inside the space-charge region `ρ = q·N(x)` and the field vanishes at
//! both edges, so the region voltage reduces to the bare charge moment:
//!
//! ```text
//! ∫_{x₁}^{x₂} x·q·N(x)/ε dx = V_bi − V_applied,     ∫_{x₁}^{x₂} N dx = 0
//! ```
//!
//! Two equations for the two depletion edges. Forward bias is positive;
//! reverse bias is passed as a negative `V_applied`.

mod capacitance;
mod depletion;
mod profile;

pub use capacitance::{capacitance, cv_sweep, Capacitance, CvCurve, CvPoint, PointStatus, DEFAULT_DV};
pub use depletion::{builtin_voltage, solve_depletion, DepletionSolution, BIAS_MARGIN};
pub use profile::{DopingProfile, DopingTable};

use thiserror::Error;

use crate::charge_moment::{ChargeDensity, ChargeError};
use crate::constants::EPS_0;
use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JunctionError {
    #[error("invalid doping profile: {0}")]
    InvalidProfile(String),
    #[error("invalid junction parameters: {0}")]
    InvalidSpec(String),
    #[error("x = {x} lies outside the profile domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("doping profile has no sign change")]
    NoSignChange,
    #[error("depletion edges have the wrong polarity: N(x1) = {n1}, N(x2) = {n2}")]
    WrongEdgePolarity { n1: f64, n2: f64 },
    #[error("applied bias {v_applied} V is not below the built-in voltage {v_bi} V minus the 1 mV margin")]
    BiasExceedsBuiltIn { v_applied: f64, v_bi: f64 },
    #[error("depletion region reaches the surface")]
    SurfaceReached {
        /// Bias at which the p-side edge touches the surface, when known.
        limit_estimate: Option<f64>,
    },
    #[error("depletion region runs off the {side} end of the doping table")]
    ProfileEdgeReached { side: &'static str },
    #[error("solver failed to converge: {0}")]
    ConvergenceFailure(String),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error(transparent)]
    Charge(#[from] ChargeError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

impl JunctionError {
    /// Stable machine-readable name.
    pub fn code(&self) -> &'static str {
        match self {
            Self::InvalidProfile(_) => "InvalidProfile",
            Self::InvalidSpec(_) => "InvalidSpec",
            Self::OutOfDomain { .. } => "OutOfDomain",
            Self::NoSignChange => "NoSignChange",
            Self::WrongEdgePolarity { .. } => "WrongEdgePolarity",
            Self::BiasExceedsBuiltIn { .. } => "BiasExceedsBuiltIn",
            Self::SurfaceReached { .. } => "SurfaceReached",
            Self::ProfileEdgeReached { .. } => "ProfileEdgeReached",
            Self::InvalidSweep(_) => "InvalidSweep",
            Self::ConvergenceFailure(_) | Self::Charge(_) | Self::Numerics(_) => "ConvergenceFailure",
        }
    }

    /// Physically meaningful failures, as opposed to bad input.
    pub fn is_physical(&self) -> bool {
        matches!(
            self,
            Self::BiasExceedsBuiltIn { .. }
                | Self::SurfaceReached { .. }
                | Self::ProfileEdgeReached { .. }
                | Self::WrongEdgePolarity { .. }
                | Self::ConvergenceFailure(_)
                | Self::Charge(_)
                | Self::Numerics(_)
        )
    }
}

/// A doping profile with the material and thermal parameters of the
/// junction. Immutable; cheap to clone.
#[derive(Debug, Clone)]
pub struct JunctionSpec {
    profile: DopingProfile,
    eps_r: f64,
    temperature: f64,
    n_i: f64,
    v_bi_override: Option<f64>,
    density: ChargeDensity,
    junction: f64,
}

impl JunctionSpec {
    pub fn new(
        profile: DopingProfile,
        eps_r: f64,
        temperature: f64,
        n_i: f64,
        v_bi_override: Option<f64>,
    ) -> Result<Self, JunctionError> {
        profile.validate()?;
        let check = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(JunctionError::InvalidSpec(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        check("relative permittivity", eps_r)?;
        check("temperature", temperature)?;
        check("intrinsic concentration", n_i)?;
        if let Some(v) = v_bi_override {
            check("built-in voltage override", v)?;
        }
        let density = profile.charge_density()?;
        let junction = profile.metallurgical_junction()?;
        Ok(Self {
            profile,
            eps_r,
            temperature,
            n_i,
            v_bi_override,
            density,
            junction,
        })
    }

    /// Same junction with the built-in voltage pinned.
    pub fn with_v_bi_override(&self, v_bi: Option<f64>) -> Result<Self, JunctionError> {
        if let Some(v) = v_bi {
            if !(v > 0.0 && v.is_finite()) {
                return Err(JunctionError::InvalidSpec(format!(
                    "built-in voltage override must be positive, got {v}"
                )));
            }
        }
        Ok(Self {
            v_bi_override: v_bi,
            ..self.clone()
        })
    }

    pub fn profile(&self) -> &DopingProfile {
        &self.profile
    }

    pub fn eps_r(&self) -> f64 {
        self.eps_r
    }

    /// Absolute permittivity ε = ε_r·ε₀ (F/m).
    pub fn permittivity(&self) -> f64 {
        self.eps_r * EPS_0
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn n_i(&self) -> f64 {
        self.n_i
    }

    pub fn v_bi_override(&self) -> Option<f64> {
        self.v_bi_override
    }

    /// Space charge q·N(x) of the fully depleted profile.
    pub fn charge_density(&self) -> &ChargeDensity {
        &self.density
    }

    pub fn metallurgical_junction(&self) -> f64 {
        self.junction
    }

    pub fn net_doping(&self, x: f64) -> Result<f64, JunctionError> {
        self.profile.net_doping(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        let p = DopingProfile::abrupt(1e22, 1e22, 0.0).unwrap();
        assert!(JunctionSpec::new(p.clone(), 11.7, 300.0, 1.5e16, None).is_ok());
        assert!(JunctionSpec::new(p.clone(), 0.0, 300.0, 1.5e16, None).is_err());
        assert!(JunctionSpec::new(p.clone(), 11.7, -1.0, 1.5e16, None).is_err());
        assert!(JunctionSpec::new(p.clone(), 11.7, 300.0, 0.0, None).is_err());
        assert!(JunctionSpec::new(p, 11.7, 300.0, 1.5e16, Some(-0.1)).is_err());
    }

    #[test]
    fn error_codes() {
        let e = JunctionError::BiasExceedsBuiltIn {
            v_applied: 1.0,
            v_bi: 0.7,
        };
        assert_eq!(e.code(), "BiasExceedsBuiltIn");
        assert!(e.is_physical());
        assert!(!JunctionError::InvalidSpec("x".into()).is_physical());
    }
}
