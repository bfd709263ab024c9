//! Electrostatics of a one-dimensional charged region.
//!
//! Sign conventions: `dE/dx = ρ/ε`, `E = -du/dx`, and the region voltage is
//! `V = u(x₂) - u(x₁)`. Integrating `d(xE) - E dx = xρ/ε dx` over `[x₁, x₂]`
//! gives
//!
//! ```text
//! V = ∫ xρ/ε dx + x₁E₁ - x₂E₂
//! ```
//!
//! [`ChargeRegion::scr_voltage`] evaluates the right-hand side (a single
//! integral), while [`ChargeRegion::potential_drop_direct`] integrates
//! Gauss's law twice. The two share no code path.

mod density;

pub use density::{ChargeDensity, ChargeDensityBuilder, ScalarFn};

use thiserror::Error;

use crate::numerics::{try_integrate_pieces, Interval, NumericsError, Tolerance};

/// Relative bound of the Gauss-law boundary check.
pub const BOUNDARY_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChargeError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("invalid support [{lo}, {hi}]")]
    InvalidSupport { lo: f64, hi: f64 },
    #[error("breakpoint {0} is not finite")]
    InvalidBreakpoint(f64),
    #[error("invalid piece definition: {0}")]
    InvalidPieces(&'static str),
    #[error("charge density is not finite at x = {x}")]
    NonFiniteDensity { x: f64 },
    #[error("closed-form {which} antiderivative disagrees with quadrature on [{lo}, {hi}]: {closed_form} vs {quadrature}")]
    AntiderivativeMismatch {
        which: &'static str,
        lo: f64,
        hi: f64,
        closed_form: f64,
        quadrature: f64,
    },
    #[error("antiderivative self-check needs a finite window for an unbounded support")]
    MissingCheckWindow,
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("boundary fields violate Gauss's law: residual {residual} exceeds {bound}")]
    InconsistentBoundaryFields { residual: f64, bound: f64 },
    #[error("field profile needs at least 2 samples, got {0}")]
    InvalidSampleCount(usize),
}

/// Outcome of the Gauss-law check `E₂ - E₁ = (1/ε)∫ρ dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCheck {
    /// `E₂ - E₁ - Q/ε` (V/m).
    pub residual: f64,
    pub bound: f64,
}

impl BoundaryCheck {
    pub fn passed(&self) -> bool {
        self.residual.abs() <= self.bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    /// Position (m).
    pub x: f64,
    /// Charge density (C/m³).
    pub rho: f64,
    /// Electric field (V/m).
    pub e: f64,
    /// Potential relative to `u(x₁) = 0` (V).
    pub u: f64,
}

/// Sampled field and potential across a region, `u(x₁) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile {
    samples: Vec<FieldSample>,
}

impl FieldProfile {
    pub fn samples(&self) -> &[FieldSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> &FieldSample {
        self.samples.last().expect("profiles hold at least two samples")
    }
}

/// A charge density on `[x₁, x₂]` with constant permittivity and the fields
/// at both ends.
#[derive(Debug, Clone)]
pub struct ChargeRegion {
    rho: ChargeDensity,
    epsilon: f64,
    x1: f64,
    x2: f64,
    e1: f64,
    e2: f64,
    tol: Tolerance,
}

fn default_tolerance() -> Tolerance {
    Tolerance::new(0.0, 1e-13, 4000).expect("valid constant tolerance")
}

impl ChargeRegion {
    pub fn new(
        rho: ChargeDensity,
        epsilon: f64,
        x1: f64,
        x2: f64,
        e1: f64,
        e2: f64,
    ) -> Result<Self, ChargeError> {
        if !(x1.is_finite() && x2.is_finite() && x1 < x2) {
            return Err(ChargeError::InvalidRegion(format!(
                "need finite x1 < x2, got [{x1}, {x2}]"
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(ChargeError::InvalidRegion(format!(
                "permittivity must be positive, got {epsilon}"
            )));
        }
        if !(e1.is_finite() && e2.is_finite()) {
            return Err(ChargeError::InvalidRegion(
                "boundary fields must be finite".into(),
            ));
        }
        if !rho.covers(x1, x2) {
            let (lo, hi) = rho.support();
            return Err(ChargeError::InvalidRegion(format!(
                "[{x1}, {x2}] lies outside the density support [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            rho,
            epsilon,
            x1,
            x2,
            e1,
            e2,
            tol: default_tolerance(),
        })
    }

    /// Region whose `E₂` is fixed by Gauss's law from `E₁` and the enclosed
    /// charge.
    pub fn with_consistent_field(
        rho: ChargeDensity,
        epsilon: f64,
        x1: f64,
        x2: f64,
        e1: f64,
    ) -> Result<Self, ChargeError> {
        let mut region = Self::new(rho, epsilon, x1, x2, e1, e1)?;
        region.e2 = e1 + region.net_charge()? / epsilon;
        Ok(region)
    }

    pub fn with_tolerance(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    pub fn density(&self) -> &ChargeDensity {
        &self.rho
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn x2(&self) -> f64 {
        self.x2
    }

    pub fn e1(&self) -> f64 {
        self.e1
    }

    pub fn e2(&self) -> f64 {
        self.e2
    }

    /// Same region moved by `shift` along x, boundary fields unchanged.
    pub fn translated(&self, shift: f64) -> Result<Self, ChargeError> {
        Ok(Self::new(
            self.rho.translated(shift),
            self.epsilon,
            self.x1 + shift,
            self.x2 + shift,
            self.e1,
            self.e2,
        )?
        .with_tolerance(self.tol))
    }

    /// Region with ρ and both boundary fields multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Result<Self, ChargeError> {
        Ok(Self::new(
            self.rho.scaled(alpha),
            self.epsilon,
            self.x1,
            self.x2,
            alpha * self.e1,
            alpha * self.e2,
        )?
        .with_tolerance(self.tol))
    }

    /// Enclosed areal charge `∫ρ dx` (C/m²).
    pub fn net_charge(&self) -> Result<f64, ChargeError> {
        self.rho.charge(self.x1, self.x2, self.tol)
    }

    pub fn check_boundary_consistency(&self) -> Result<BoundaryCheck, ChargeError> {
        let jump = self.net_charge()? / self.epsilon;
        let residual = self.e2 - self.e1 - jump;
        let bound = BOUNDARY_REL_TOL * self.e1.abs().max(self.e2.abs()).max(jump.abs()).max(1.0);
        Ok(BoundaryCheck { residual, bound })
    }

    /// `E(x) = E₁ + (1/ε)∫_{x₁}^{x} ρ dt`.
    pub fn field_at(&self, x: f64) -> Result<f64, ChargeError> {
        Ok(self.e1 + self.rho.charge(self.x1, x, self.tol)? / self.epsilon)
    }

    /// `n` evenly spaced samples of ρ, E and u from x₁ to x₂.
    pub fn field_profile(&self, n: usize) -> Result<FieldProfile, ChargeError> {
        if n < 2 {
            return Err(ChargeError::InvalidSampleCount(n));
        }
        let step = (self.x2 - self.x1) / (n - 1) as f64;
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.x2
                } else {
                    self.x1 + step * i as f64
                }
            })
            .collect();

        let mut samples = Vec::with_capacity(n);
        let (mut e, mut u) = (self.e1, 0.0);
        samples.push(FieldSample {
            x: xs[0],
            rho: self.rho.eval(xs[0]),
            e,
            u,
        });
        for w in xs.windows(2) {
            let (a, b) = (w[0], w[1]);
            let e_left = e;
            let field = |x: f64| -> Result<f64, ChargeError> {
                Ok(e_left + self.rho.charge(a, x, self.tol)? / self.epsilon)
            };
            let span = try_integrate_pieces(field, Interval::new(a, b)?, self.rho.breakpoints(), self.tol)?;
            u -= span.value;
            e = self.field_at(b)?;
            samples.push(FieldSample {
                x: b,
                rho: self.rho.eval(b),
                e,
                u,
            });
        }
        Ok(FieldProfile { samples })
    }

    /// `u(x₂) - u(x₁)` by double integration of Gauss's law, using
    /// quadrature only (never the closed-form antiderivatives).
    pub fn potential_drop_direct(&self) -> Result<f64, ChargeError> {
        let inner_tol = Tolerance::new(0.0, 1e-14, self.tol.max_iterations())?;
        let field = |x: f64| -> Result<f64, ChargeError> {
            let enclosed = if x > self.x1 {
                self.rho.quadrature_charge(self.x1, x, inner_tol)?
            } else {
                0.0
            };
            Ok(self.e1 + enclosed / self.epsilon)
        };
        let q = try_integrate_pieces(
            field,
            Interval::new(self.x1, self.x2)?,
            self.rho.breakpoints(),
            self.tol,
        )?;
        Ok(-q.value)
    }

    /// First charge moment `∫ xρ/ε dx` over the region (V).
    pub fn charge_moment_integral(&self) -> Result<f64, ChargeError> {
        Ok(self.rho.moment(self.x1, self.x2, self.tol)? / self.epsilon)
    }

    /// Region voltage `u(x₂) - u(x₁) = ∫xρ/ε dx + x₁E₁ - x₂E₂`.
    ///
    /// With zero field at both ends, or zero field at one end and the origin
    /// at the other, the boundary term vanishes and the voltage is the bare
    /// moment.
    pub fn scr_voltage(&self) -> Result<f64, ChargeError> {
        let check = self.check_boundary_consistency()?;
        if !check.passed() {
            return Err(ChargeError::InconsistentBoundaryFields {
                residual: check.residual,
                bound: check.bound,
            });
        }
        Ok(self.charge_moment_integral()? + self.x1 * self.e1 - self.x2 * self.e2)
    }
}
