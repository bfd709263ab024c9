//! Numerical kernel used by the electrostatics and junction modules.
//!
//! Every routine here is a pure function of its arguments. Each kernel comes
//! in two flavours: a plain one taking an infallible callback and a `try_`
//! one whose callback may fail, so nested solves can propagate their own
//! errors through an outer integration or root search.

mod erf;
mod fixed_point;
mod quadrature;
mod root;

pub use erf::{erf, erf_difference, erfc};
pub use fixed_point::{fixed_point, try_fixed_point};
pub use quadrature::{integrate, integrate_pieces, try_integrate, try_integrate_pieces, Quadrature};
pub use root::{find_root, try_find_root};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid interval [{lo}, {hi}]: bounds must be finite with lo < hi")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(&'static str),
    #[error("adaptive quadrature exceeded {limit} subdivisions (estimate {estimate}, error {error})")]
    SubdivisionLimitExceeded { limit: usize, estimate: f64, error: f64 },
    #[error("callback returned a non-finite value at x = {x}")]
    NonFiniteEvaluation { x: f64 },
    #[error("no sign change across [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("iteration limit of {limit} reached (last iterate {last})")]
    IterationLimitExceeded { limit: usize, last: f64 },
    #[error("damping must lie in (0, 1], got {0}")]
    InvalidDamping(f64),
}

/// A closed, finite integration or search range with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, NumericsError> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(NumericsError::InvalidInterval { lo, hi })
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Convergence controls shared by all kernels.
///
/// Quadrature stops when the estimated error is below
/// `max(abs_tol, rel_tol * |Q|)`; root finding stops when the bracket is
/// narrower than `max(abs_tol, rel_tol * |x|)`; fixed-point iteration stops
/// when `|x - g(x)| <= max(abs_tol, rel_tol * |x|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    abs_tol: f64,
    rel_tol: f64,
    max_iterations: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iterations: usize) -> Result<Self, NumericsError> {
        if !(abs_tol >= 0.0 && abs_tol.is_finite()) {
            return Err(NumericsError::InvalidTolerance("abs_tol must be finite and >= 0"));
        }
        if !(rel_tol >= 0.0 && rel_tol.is_finite()) {
            return Err(NumericsError::InvalidTolerance("rel_tol must be finite and >= 0"));
        }
        if abs_tol == 0.0 && rel_tol == 0.0 {
            return Err(NumericsError::InvalidTolerance(
                "abs_tol and rel_tol are both zero",
            ));
        }
        if max_iterations == 0 {
            return Err(NumericsError::InvalidTolerance(
                "iteration limit must be positive",
            ));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_iterations,
        })
    }

    /// Quadrature defaults for an integrand whose integral has magnitude
    /// around `scale`: `abs = 1e-12 * scale`, `rel = 1e-10`.
    pub fn quadrature(scale: f64) -> Self {
        Self {
            abs_tol: 1e-12 * scale.abs(),
            rel_tol: 1e-10,
            max_iterations: 2000,
        }
    }

    /// Bracket-width defaults for root finding: relative `1e-12`.
    pub fn root() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_iterations: 200,
        }
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub(crate) fn threshold(&self, magnitude: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * magnitude.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::quadrature(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_width_interval_rejected() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        let iv = Interval::new(-1.0, 3.0).unwrap();
        assert_eq!(iv.width(), 4.0);
        assert_eq!(iv.midpoint(), 1.0);
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(0.0, 0.0, 10).is_err());
        assert!(Tolerance::new(-1.0, 1e-3, 10).is_err());
        assert!(Tolerance::new(1e-3, f64::NAN, 10).is_err());
        assert!(Tolerance::new(1e-3, 0.0, 0).is_err());
        assert!(Tolerance::new(0.0, 1e-9, 1).is_ok());
    }
}
