use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ChargeError;
use crate::numerics::{erf_difference, integrate_pieces, Interval, Tolerance};

/// Shared scalar callback.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Closed-form definite integral `(a, b) ↦ ∫ₐᵇ …`.
pub type DefiniteFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

const SELF_CHECK_INTERVALS: usize = 100;
const SELF_CHECK_REL: f64 = 1e-9;
const SELF_CHECK_SEED: u64 = 0x0a17_1de5;
const FINITENESS_SAMPLES: usize = 257;

fn from_antiderivative(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> DefiniteFn {
    Arc::new(move |a, b| f(b) - f(a))
}

/// Charge density ρ(x) in C/m³ on a declared support.
///
/// Discontinuities must be listed as breakpoints so quadrature can split
/// there. Optional closed forms of `∫ρ dx` and `∫xρ dx` are used in place of
/// quadrature when present. They are supplied as antiderivatives `A₀`, `A₁`,
/// or directly as definite integrals where differencing an antiderivative
/// would cancel, and are cross-checked against quadrature when the density
/// is built.
#[derive(Clone)]
pub struct ChargeDensity {
    rho: ScalarFn,
    support: (f64, f64),
    breakpoints: Vec<f64>,
    charge_closed: Option<DefiniteFn>,
    moment_closed: Option<DefiniteFn>,
}

impl fmt::Debug for ChargeDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChargeDensity")
            .field("support", &self.support)
            .field("breakpoints", &self.breakpoints)
            .field("closed_charge", &self.charge_closed.is_some())
            .field("closed_moment", &self.moment_closed.is_some())
            .finish()
    }
}

pub struct ChargeDensityBuilder {
    rho: ScalarFn,
    support: (f64, f64),
    breakpoints: Vec<f64>,
    charge_closed: Option<DefiniteFn>,
    moment_closed: Option<DefiniteFn>,
    self_check: bool,
    check_window: Option<Interval>,
}

impl ChargeDensityBuilder {
    /// Restricts the support (default: the whole real line).
    pub fn support(mut self, lo: f64, hi: f64) -> Self {
        self.support = (lo, hi);
        self
    }

    pub fn breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(points);
        self
    }

    /// `A₀` with `A₀' = ρ`.
    pub fn charge_antiderivative(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.charge_closed = Some(from_antiderivative(f));
        self
    }

    /// `A₁` with `A₁' = xρ`.
    pub fn moment_antiderivative(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.moment_closed = Some(from_antiderivative(f));
        self
    }

    /// Closed form of `∫ₐᵇ ρ dx` as a function of `(a, b)`.
    pub fn charge_integral(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.charge_closed = Some(Arc::new(f));
        self
    }

    /// Closed form of `∫ₐᵇ xρ dx` as a function of `(a, b)`.
    pub fn moment_integral(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.moment_closed = Some(Arc::new(f));
        self
    }

    /// Window sampled by the construction checks when the support is
    /// unbounded.
    pub fn check_window(mut self, window: Interval) -> Self {
        self.check_window = Some(window);
        self
    }

    /// Skips the closed-form cross-check.
    pub fn skip_self_check(mut self) -> Self {
        self.self_check = false;
        self
    }

    pub fn build(self) -> Result<ChargeDensity, ChargeError> {
        let (lo, hi) = self.support;
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(ChargeError::InvalidSupport { lo, hi });
        }
        let mut breakpoints = self.breakpoints;
        if let Some(&b) = breakpoints.iter().find(|b| !b.is_finite()) {
            return Err(ChargeError::InvalidBreakpoint(b));
        }
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();

        let density = ChargeDensity {
            rho: self.rho,
            support: self.support,
            breakpoints,
            charge_closed: self.charge_closed,
            moment_closed: self.moment_closed,
        };

        let window = self.check_window.or_else(|| Interval::new(lo, hi).ok());
        if let Some(w) = window {
            density.check_finite(w)?;
        }
        if self.self_check && (density.has_closed_charge() || density.has_closed_moment()) {
            let w = window.ok_or(ChargeError::MissingCheckWindow)?;
            density.check_closed_forms(w)?;
        }
        Ok(density)
    }
}

impl ChargeDensity {
    pub fn builder(rho: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ChargeDensityBuilder {
        ChargeDensityBuilder {
            rho: Arc::new(rho),
            support: (f64::NEG_INFINITY, f64::INFINITY),
            breakpoints: Vec::new(),
            charge_closed: None,
            moment_closed: None,
            self_check: true,
            check_window: None,
        }
    }

    fn unbounded(
        rho: ScalarFn,
        breakpoints: Vec<f64>,
        charge_closed: DefiniteFn,
        moment_closed: DefiniteFn,
    ) -> Self {
        ChargeDensity {
            rho,
            support: (f64::NEG_INFINITY, f64::INFINITY),
            breakpoints,
            charge_closed: Some(charge_closed),
            moment_closed: Some(moment_closed),
        }
    }

    /// ρ = 0 everywhere.
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(value: f64) -> Self {
        Self::unbounded(
            Arc::new(move |_| value),
            Vec::new(),
            Arc::new(move |a, b| value * (b - a)),
            Arc::new(move |a, b| 0.5 * value * (b - a) * (b + a)),
        )
    }

    /// Piecewise-constant density: `values[i]` on `[edges[i], edges[i+1])`,
    /// zero outside `[edges[0], edges[last]]`.
    pub fn piecewise_constant(edges: &[f64], values: &[f64]) -> Result<Self, ChargeError> {
        if edges.len() != values.len() + 1 || values.is_empty() {
            return Err(ChargeError::InvalidPieces("need one more edge than values"));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) || edges.iter().any(|e| !e.is_finite()) {
            return Err(ChargeError::InvalidPieces(
                "edges must be finite and strictly increasing",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ChargeError::InvalidPieces("values must be finite"));
        }
        let edges: Arc<[f64]> = edges.into();
        let values: Arc<[f64]> = values.into();

        // running ∫ρ and ∫xρ at each edge
        let mut cum0 = vec![0.0; edges.len()];
        let mut cum1 = vec![0.0; edges.len()];
        for i in 0..values.len() {
            let (a, b) = (edges[i], edges[i + 1]);
            cum0[i + 1] = cum0[i] + values[i] * (b - a);
            cum1[i + 1] = cum1[i] + 0.5 * values[i] * (b - a) * (b + a);
        }
        let cum0: Arc<[f64]> = cum0.into();
        let cum1: Arc<[f64]> = cum1.into();

        let piece = {
            let edges = edges.clone();
            move |x: f64| -> Option<usize> {
                if x < edges[0] || x >= edges[edges.len() - 1] {
                    None
                } else {
                    Some(edges.partition_point(|&e| e <= x) - 1)
                }
            }
        };

        let rho = {
            let (piece, values) = (piece.clone(), values.clone());
            move |x: f64| piece(x).map_or(0.0, |i| values[i])
        };
        let a0 = {
            let (piece, edges, values, cum) = (piece.clone(), edges.clone(), values.clone(), cum0);
            move |x: f64| match piece(x) {
                Some(i) => cum[i] + values[i] * (x - edges[i]),
                None if x < edges[0] => 0.0,
                None => cum[cum.len() - 1],
            }
        };
        let a1 = {
            let (edges, values, cum) = (edges.clone(), values, cum1);
            move |x: f64| match piece(x) {
                Some(i) => cum[i] + 0.5 * values[i] * (x - edges[i]) * (x + edges[i]),
                None if x < edges[0] => 0.0,
                None => cum[cum.len() - 1],
            }
        };

        Ok(Self::unbounded(
            Arc::new(rho),
            edges.to_vec(),
            from_antiderivative(a0),
            from_antiderivative(a1),
        ))
    }

    /// `ρ(x) = Σ cₖ tᵏ` with `t = (x - center)/half_width`.
    pub fn polynomial(center: f64, half_width: f64, coeffs: &[f64]) -> Result<Self, ChargeError> {
        if !(half_width > 0.0 && half_width.is_finite()) || !center.is_finite() {
            return Err(ChargeError::InvalidPieces(
                "polynomial needs finite center and positive scale",
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(ChargeError::InvalidPieces("coefficients must be finite"));
        }
        let c: Arc<[f64]> = coeffs.into();
        let h = half_width;
        let horner = |c: &[f64], t: f64| c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck);
        let rho = {
            let c = c.clone();
            move |x: f64| horner(&c, (x - center) / h)
        };
        // ∫ρ dx = h Σ cₖ tᵏ⁺¹/(k+1)
        let i0: Vec<f64> = std::iter::once(0.0)
            .chain(c.iter().enumerate().map(|(k, ck)| h * ck / (k + 1) as f64))
            .collect();
        // ∫xρ dx = h Σ cₖ (center tᵏ⁺¹/(k+1) + h tᵏ⁺²/(k+2))
        let mut i1 = vec![0.0; c.len() + 2];
        for (k, ck) in c.iter().enumerate() {
            i1[k + 1] += h * ck * center / (k + 1) as f64;
            i1[k + 2] += h * h * ck / (k + 2) as f64;
        }
        Ok(Self::unbounded(
            Arc::new(rho),
            Vec::new(),
            from_antiderivative(move |x| horner(&i0, (x - center) / h)),
            from_antiderivative(move |x| horner(&i1, (x - center) / h)),
        ))
    }

    /// `ρ(x) = amplitude · exp(-((x - center)/width)²)`.
    pub fn gaussian(amplitude: f64, center: f64, width: f64) -> Result<Self, ChargeError> {
        if !(width > 0.0 && width.is_finite()) || !center.is_finite() || !amplitude.is_finite() {
            return Err(ChargeError::InvalidPieces(
                "gaussian needs finite parameters and width > 0",
            ));
        }
        let k0 = amplitude * width * 0.5 * std::f64::consts::PI.sqrt();
        let k1 = 0.5 * amplitude * width * width;
        let t = move |x: f64| (x - center) / width;
        let charge = move |a: f64, b: f64| k0 * erf_difference(t(a), t(b));
        Ok(Self::unbounded(
            Arc::new(move |x| amplitude * (-t(x) * t(x)).exp()),
            Vec::new(),
            Arc::new(charge),
            // ∫xρ = ∫(x - c)ρ + c∫ρ
            Arc::new(move |a, b| {
                let (ta, tb) = (t(a), t(b));
                k1 * ((-ta * ta).exp() - (-tb * tb).exp()) + center * charge(a, b)
            }),
        ))
    }

    /// Pointwise sum. Closed forms survive only if both operands carry them.
    pub fn sum(&self, other: &ChargeDensity) -> Result<Self, ChargeError> {
        let support = (
            self.support.0.max(other.support.0),
            self.support.1.min(other.support.1),
        );
        if !(support.0 < support.1) {
            return Err(ChargeError::InvalidSupport {
                lo: support.0,
                hi: support.1,
            });
        }
        let (f, g) = (self.rho.clone(), other.rho.clone());
        let combine = |a: &Option<DefiniteFn>, b: &Option<DefiniteFn>| -> Option<DefiniteFn> {
            match (a, b) {
                (Some(a), Some(b)) => {
                    let (a, b) = (a.clone(), b.clone());
                    Some(Arc::new(move |lo, hi| a(lo, hi) + b(lo, hi)))
                }
                _ => None,
            }
        };
        let mut breakpoints = self.breakpoints.clone();
        breakpoints.extend_from_slice(&other.breakpoints);
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Ok(ChargeDensity {
            rho: Arc::new(move |x| f(x) + g(x)),
            support,
            breakpoints,
            charge_closed: combine(&self.charge_closed, &other.charge_closed),
            moment_closed: combine(&self.moment_closed, &other.moment_closed),
        })
    }

    /// `α·ρ(x)`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let f = self.rho.clone();
        let scale = |a: &Option<DefiniteFn>| -> Option<DefiniteFn> {
            a.clone()
                .map(|a| Arc::new(move |lo, hi| alpha * a(lo, hi)) as DefiniteFn)
        };
        ChargeDensity {
            rho: Arc::new(move |x| alpha * f(x)),
            support: self.support,
            breakpoints: self.breakpoints.clone(),
            charge_closed: scale(&self.charge_closed),
            moment_closed: scale(&self.moment_closed),
        }
    }

    /// `ρ(x - shift)`: the same charge moved by `shift`.
    pub fn translated(&self, shift: f64) -> Self {
        let f = self.rho.clone();
        let charge = self
            .charge_closed
            .clone()
            .map(|c| Arc::new(move |a: f64, b: f64| c(a - shift, b - shift)) as DefiniteFn);
        let moment = match (&self.charge_closed, &self.moment_closed) {
            (Some(c), Some(m)) => {
                let (c, m) = (c.clone(), m.clone());
                Some(
                    Arc::new(move |a: f64, b: f64| m(a - shift, b - shift) + shift * c(a - shift, b - shift))
                        as DefiniteFn,
                )
            }
            _ => None,
        };
        ChargeDensity {
            rho: Arc::new(move |x| f(x - shift)),
            support: (self.support.0 + shift, self.support.1 + shift),
            breakpoints: self.breakpoints.iter().map(|b| b + shift).collect(),
            charge_closed: charge,
            moment_closed: moment,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.rho)(x)
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn has_closed_charge(&self) -> bool {
        self.charge_closed.is_some()
    }

    pub fn has_closed_moment(&self) -> bool {
        self.moment_closed.is_some()
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.support.0 <= lo && hi <= self.support.1
    }

    /// `∫ₐᵇ ρ dx` by quadrature only; `a > b` flips the sign.
    pub fn quadrature_charge(&self, a: f64, b: f64, tol: Tolerance) -> Result<f64, ChargeError> {
        self.quadrature_of(|x| self.eval(x), a, b, tol)
    }

    /// `∫ₐᵇ xρ dx` by quadrature only.
    pub fn quadrature_moment(&self, a: f64, b: f64, tol: Tolerance) -> Result<f64, ChargeError> {
        self.quadrature_of(|x| x * self.eval(x), a, b, tol)
    }

    /// `∫ₐᵇ ρ dx`, closed form when available.
    pub fn charge(&self, a: f64, b: f64, tol: Tolerance) -> Result<f64, ChargeError> {
        match &self.charge_closed {
            Some(c) => Ok(c(a, b)),
            None => self.quadrature_charge(a, b, tol),
        }
    }

    /// `∫ₐᵇ xρ dx`, closed form when available.
    pub fn moment(&self, a: f64, b: f64, tol: Tolerance) -> Result<f64, ChargeError> {
        match &self.moment_closed {
            Some(m) => Ok(m(a, b)),
            None => self.quadrature_moment(a, b, tol),
        }
    }

    fn quadrature_of(
        &self,
        f: impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        tol: Tolerance,
    ) -> Result<f64, ChargeError> {
        if a == b {
            return Ok(0.0);
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let q = integrate_pieces(f, Interval::new(lo, hi)?, &self.breakpoints, tol)?;
        Ok(sign * q.value)
    }

    fn check_finite(&self, window: Interval) -> Result<(), ChargeError> {
        let step = window.width() / (FINITENESS_SAMPLES - 1) as f64;
        let grid = (0..FINITENESS_SAMPLES).map(|i| window.lo() + step * i as f64);
        let inside = self.breakpoints.iter().copied().filter(|&b| window.contains(b));
        for x in grid.chain(inside) {
            if !self.eval(x).is_finite() {
                return Err(ChargeError::NonFiniteDensity { x });
            }
        }
        Ok(())
    }

    /// Compares the closed forms against quadrature on 100 pseudo-random
    /// subintervals of `window` (fixed seed).
    pub fn check_closed_forms(&self, window: Interval) -> Result<(), ChargeError> {
        let tol = Tolerance::new(0.0, 1e-12, 4000)?;
        let mut rng = ChaCha8Rng::seed_from_u64(SELF_CHECK_SEED);
        for _ in 0..SELF_CHECK_INTERVALS {
            let u: f64 = rng.gen_range(window.lo()..window.hi());
            let v: f64 = rng.gen_range(window.lo()..window.hi());
            let (a, b) = (u.min(v), u.max(v));
            if a == b {
                continue;
            }
            if let Some(c) = &self.charge_closed {
                let quad = self.quadrature_charge(a, b, tol)?;
                let scale = self.quadrature_of(|x| self.eval(x).abs(), a, b, tol)?;
                compare("charge", a, b, c(a, b), quad, scale)?;
            }
            if let Some(m) = &self.moment_closed {
                let quad = self.quadrature_moment(a, b, tol)?;
                let scale = self.quadrature_of(|x| (x * self.eval(x)).abs(), a, b, tol)?;
                compare("moment", a, b, m(a, b), quad, scale)?;
            }
        }
        Ok(())
    }
}

fn compare(
    which: &'static str,
    lo: f64,
    hi: f64,
    closed_form: f64,
    quadrature: f64,
    scale: f64,
) -> Result<(), ChargeError> {
    if (closed_form - quadrature).abs() <= SELF_CHECK_REL * quadrature.abs().max(scale) {
        Ok(())
    } else {
        Err(ChargeError::AntiderivativeMismatch {
            which,
            lo,
            hi,
            closed_form,
            quadrature,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::new(0.0, 1e-13, 4000).unwrap()
    }

    #[test]
    fn wrong_antiderivative_rejected() {
        let err = ChargeDensity::builder(|x| x)
            .support(0.0, 2.0)
            .charge_antiderivative(|x| x * x) // should be x²/2
            .build()
            .unwrap_err();
        assert!(matches!(
            err,
            ChargeError::AntiderivativeMismatch { which: "charge", .. }
        ));

        // the flag turns the check off
        let d = ChargeDensity::builder(|x| x)
            .support(0.0, 2.0)
            .charge_antiderivative(|x| x * x)
            .skip_self_check()
            .build()
            .unwrap();
        assert_eq!(d.charge(0.0, 1.0, tol()).unwrap(), 1.0);
    }

    #[test]
    fn correct_antiderivatives_accepted() {
        let d = ChargeDensity::builder(|x: f64| x.sin())
            .support(-1.0, 4.0)
            .charge_antiderivative(|x| -x.cos())
            .moment_antiderivative(|x| x.sin() - x * x.cos())
            .build()
            .unwrap();
        let q = d.moment(0.0, 1.0, tol()).unwrap();
        assert!((q - (1f64.sin() - 1f64.cos())).abs() < 1e-15);
    }

    #[test]
    fn unbounded_support_needs_window_for_check() {
        let err = ChargeDensity::builder(|_| 1.0)
            .charge_antiderivative(|x| x)
            .build()
            .unwrap_err();
        assert!(matches!(err, ChargeError::MissingCheckWindow));
        let ok = ChargeDensity::builder(|_| 1.0)
            .charge_antiderivative(|x| x)
            .check_window(Interval::new(-3.0, 3.0).unwrap())
            .build();
        assert!(ok.is_ok());
    }

    #[test]
    fn non_finite_density_rejected() {
        let err = ChargeDensity::builder(|x: f64| 1.0 / x)
            .support(-1.0, 1.0)
            .build()
            .unwrap_err();
        assert!(matches!(err, ChargeError::NonFiniteDensity { .. }));
    }

    #[test]
    fn closed_forms_agree_with_quadrature() {
        let window = Interval::new(-4.0, 6.0).unwrap();
        let densities = [
            ChargeDensity::polynomial(0.7, 1.3, &[0.2, -1.0, 0.5, 0.3, -0.1, 0.05, 0.01]).unwrap(),
            ChargeDensity::gaussian(-2.0, 1.1, 0.4).unwrap(),
            ChargeDensity::piecewise_constant(&[-1.0, 0.0, 0.5, 2.0], &[-1.0, 2.0, 0.5]).unwrap(),
            ChargeDensity::constant(3.0),
        ];
        for d in densities {
            d.check_closed_forms(window).unwrap();
            let shifted = d.translated(2.5);
            shifted.check_closed_forms(window).unwrap();
            d.sum(&shifted).unwrap().check_closed_forms(window).unwrap();
            d.scaled(-3.0).check_closed_forms(window).unwrap();
        }
    }

    #[test]
    fn piecewise_values() {
        let d = ChargeDensity::piecewise_constant(&[-1.0, 0.0, 1.0], &[-1.0, 1.0]).unwrap();
        assert_eq!(d.eval(-0.5), -1.0);
        assert_eq!(d.eval(0.0), 1.0);
        assert_eq!(d.eval(1.0), 0.0);
        assert_eq!(d.eval(-2.0), 0.0);
        assert_eq!(d.charge(-1.0, 1.0, tol()).unwrap(), 0.0);
        assert_eq!(d.moment(-1.0, 1.0, tol()).unwrap(), 1.0);
        assert_eq!(d.charge(-5.0, 5.0, tol()).unwrap(), 0.0);
        assert!(ChargeDensity::piecewise_constant(&[0.0, 0.0], &[1.0]).is_err());
        assert!(ChargeDensity::piecewise_constant(&[0.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let d = ChargeDensity::builder(|x| x * x).build().unwrap();
        let fwd = d.charge(0.0, 2.0, tol()).unwrap();
        let back = d.charge(2.0, 0.0, tol()).unwrap();
        assert_eq!(fwd, -back);
        assert!((fwd - 8.0 / 3.0).abs() < 1e-14);
    }
}
