use super::{DopingProfile, JunctionError, JunctionSpec};
use crate::charge_moment::{ChargeDensity, ChargeRegion};
use crate::constants::thermal_voltage;
use crate::numerics::{try_find_root, try_fixed_point, Interval, NumericsError, Tolerance};

/// Forward bias must stay this far (V) below the built-in voltage.
pub const BIAS_MARGIN: f64 = 1e-3;

const SEED_OFFSET: f64 = 1e-8;
const MAX_DOUBLINGS: usize = 60;
const VBI_DAMPING: f64 = 0.5;
const VBI_TOL: f64 = 1e-9;
const VBI_ITERATIONS: usize = 100;
const RESIDUAL_REL: f64 = 1e-9;

/// Edges of the space-charge region at one bias, with the residuals of the
/// two defining equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepletionSolution {
    /// p-side edge (m).
    pub x1: f64,
    /// n-side edge (m).
    pub x2: f64,
    pub width: f64,
    pub x_j: f64,
    pub v_applied: f64,
    /// Built-in voltage actually used (V).
    pub v_bi: f64,
    /// `∫ qN dx` over the region (C/m²).
    pub residual_neutrality: f64,
    /// `∫ xqN/ε dx - (V_bi - V_applied)` (V).
    pub residual_moment: f64,
    /// Field magnitude at the metallurgical junction (V/m).
    pub e_peak: f64,
    /// Areal charge on the n side, `q∫_{x_j}^{x₂} N dx` (C/m²).
    pub charge_area: f64,
    /// Largest `|N|` inside the region (m⁻³).
    pub max_doping: f64,
}

impl DepletionSolution {
    pub fn neutrality_bound(&self) -> f64 {
        RESIDUAL_REL * crate::constants::Q * self.max_doping * self.width
    }

    pub fn moment_bound(&self) -> f64 {
        RESIDUAL_REL * (self.v_bi - self.v_applied)
    }

    pub fn residuals_within_bounds(&self) -> bool {
        self.residual_neutrality.abs() <= self.neutrality_bound()
            && self.residual_moment.abs() <= self.moment_bound()
    }

    /// The solved region with zero field at `x₁`. The field at `x₂` follows
    /// from Gauss's law and is the neutrality residual over ε.
    pub fn region(&self, spec: &JunctionSpec) -> Result<ChargeRegion, JunctionError> {
        Ok(ChargeRegion::with_consistent_field(
            spec.charge_density().clone(),
            spec.permittivity(),
            self.x1,
            self.x2,
            0.0,
        )?)
    }
}

/// `(kT/q)·ln(|N(x₁)|·N(x₂)/n_i²)`, or the override when the spec has one.
pub fn builtin_voltage(spec: &JunctionSpec, x1: f64, x2: f64) -> Result<f64, JunctionError> {
    match spec.v_bi_override() {
        Some(v) => Ok(v),
        None => edge_builtin(spec, x1, x2),
    }
}

fn edge_builtin(spec: &JunctionSpec, x1: f64, x2: f64) -> Result<f64, JunctionError> {
    let n1 = spec.net_doping(x1)?;
    let n2 = spec.net_doping(x2)?;
    if !(n1 < 0.0 && n2 > 0.0) {
        return Err(JunctionError::WrongEdgePolarity { n1, n2 });
    }
    let ln_ni = spec.n_i().ln();
    Ok(thermal_voltage(spec.temperature()) * ((-n1).ln() + n2.ln() - 2.0 * ln_ni))
}

fn check_bias(v_applied: f64, v_bi: f64) -> Result<(), JunctionError> {
    if v_applied < v_bi - BIAS_MARGIN {
        Ok(())
    } else {
        Err(JunctionError::BiasExceedsBuiltIn { v_applied, v_bi })
    }
}

/// Solves for the depletion edges at `v_applied` (forward positive).
///
/// Unless the spec overrides it, V_bi is evaluated at the solved edges and
/// iterated to self-consistency.
pub fn solve_depletion(spec: &JunctionSpec, v_applied: f64) -> Result<DepletionSolution, JunctionError> {
    if !v_applied.is_finite() {
        return Err(JunctionError::InvalidSpec(format!(
            "bias must be finite, got {v_applied}"
        )));
    }
    let solver = EdgeSolver::new(spec);

    let (v_bi, (x1, x2)) = match spec.v_bi_override() {
        Some(v_bi) => {
            check_bias(v_applied, v_bi)?;
            (v_bi, solver.edges(v_bi, v_applied)?)
        }
        None => {
            let guess = 1.0_f64.max(v_applied + 0.1);
            let (s1, s2) = solver.edges(guess, v_applied)?;
            let seed = edge_builtin(spec, s1, s2)?;
            let mut last = None;
            let map = |v_bi: f64| -> Result<f64, JunctionError> {
                check_bias(v_applied, v_bi)?;
                let edges = solver.edges(v_bi, v_applied)?;
                last = Some((v_bi, edges));
                edge_builtin(spec, edges.0, edges.1)
            };
            let tol = Tolerance::new(VBI_TOL, 0.0, VBI_ITERATIONS)?;
            let v_bi = try_fixed_point(map, seed, VBI_DAMPING, tol).map_err(|e| match e {
                JunctionError::Numerics(NumericsError::IterationLimitExceeded { limit, last }) => {
                    JunctionError::ConvergenceFailure(format!(
                        "built-in voltage did not settle within {limit} iterations (last {last} V)"
                    ))
                }
                other => other,
            })?;
            match last {
                Some((v, edges)) if v == v_bi => (v_bi, edges),
                _ => (v_bi, solver.edges(v_bi, v_applied)?),
            }
        }
    };
    check_bias(v_applied, v_bi)?;
    solver.finish(x1, x2, v_bi, v_applied)
}

struct EdgeSolver<'a> {
    spec: &'a JunctionSpec,
    rho: &'a ChargeDensity,
    xj: f64,
    eps: f64,
    p_limit: f64,
    n_limit: f64,
    tol: Tolerance,
}

impl<'a> EdgeSolver<'a> {
    fn new(spec: &'a JunctionSpec) -> Self {
        let (p_limit, n_limit) = spec.profile().domain();
        Self {
            spec,
            rho: spec.charge_density(),
            xj: spec.metallurgical_junction(),
            eps: spec.permittivity(),
            p_limit,
            n_limit,
            tol: Tolerance::new(0.0, 1e-13, 4000).expect("valid constant tolerance"),
        }
    }

    fn charge(&self, a: f64, b: f64) -> Result<f64, JunctionError> {
        Ok(self.rho.charge(a, b, self.tol)?)
    }

    // Moment about the junction; equal to the plain moment once neutral.
    fn voltage(&self, x1: f64, x2: f64) -> Result<f64, JunctionError> {
        let m = self.rho.moment(x1, x2, self.tol)?;
        let c = self.charge(x1, x2)?;
        Ok((m - self.xj * c) / self.eps)
    }

    fn lower_edge_error(&self, limit_estimate: Option<f64>) -> JunctionError {
        match self.spec.profile() {
            DopingProfile::Tabulated(_) => JunctionError::ProfileEdgeReached { side: "lower" },
            _ => JunctionError::SurfaceReached { limit_estimate },
        }
    }

    /// p-side edge neutralizing the charge on `[x_j, x2]`.
    fn inner(&self, x2: f64, hint: &mut f64) -> Result<f64, JunctionError> {
        if x2 <= self.xj {
            return Ok(self.xj);
        }
        let positive = self.charge(self.xj, x2)?;
        let g = |x1: f64| self.charge(x1, x2);
        let mut d = *hint;
        let mut lo;
        let mut doublings = 0;
        loop {
            lo = (self.xj - d).max(self.p_limit);
            let g_lo = g(lo)?;
            if g_lo <= 0.0 {
                break;
            }
            if lo == self.p_limit {
                if g_lo <= 1e-12 * positive {
                    *hint = self.xj - lo;
                    return Ok(lo);
                }
                return Err(self.lower_edge_error(None));
            }
            doublings += 1;
            if doublings > MAX_DOUBLINGS {
                return Err(JunctionError::ConvergenceFailure(
                    "p-side edge bracket did not close".into(),
                ));
            }
            d *= 2.0;
        }
        let tol = Tolerance::new(1e-14 * (self.xj - lo), 1e-15, 400)?;
        let x1 = try_find_root(g, Interval::new(lo, self.xj)?, tol)?;
        *hint = (self.xj - x1).max(f64::MIN_POSITIVE);
        Ok(x1)
    }

    // Abrupt-equivalent n-side extent using the doping just beside x_j.
    fn seed(&self, v_total: f64) -> f64 {
        let left = (self.xj - SEED_OFFSET).max(0.5 * (self.xj + self.p_limit.max(self.xj - 1.0)));
        let right = (self.xj + SEED_OFFSET).min(0.5 * (self.xj + self.n_limit.min(self.xj + 1.0)));
        let n1 = self.spec.net_doping(left).map(f64::abs).unwrap_or(0.0);
        let n2 = self.spec.net_doping(right).unwrap_or(0.0);
        let q = crate::constants::Q;
        if n1 > 0.0 && n2 > 0.0 {
            let w = (2.0 * self.eps * v_total * (n1 + n2) / (q * n1 * n2)).sqrt();
            let s = w * n1 / (n1 + n2);
            if s.is_finite() && s > 0.0 {
                return s;
            }
        }
        1e-7
    }

    /// n-side position at which the p-side edge reaches the lower domain
    /// limit, if the profile allows it.
    fn cap(&self) -> Result<Option<f64>, JunctionError> {
        if !self.p_limit.is_finite() {
            return Ok(None);
        }
        let p = self.p_limit;
        let c = |x2: f64| self.charge(p, x2);
        let mut hi = self.xj + (self.xj - p).max(f64::MIN_POSITIVE);
        for _ in 0..=MAX_DOUBLINGS {
            if hi >= self.n_limit {
                if c(self.n_limit)? < 0.0 {
                    return Ok(None);
                }
                hi = self.n_limit;
                break;
            }
            if c(hi)? >= 0.0 {
                break;
            }
            hi = self.xj + 2.0 * (hi - self.xj);
        }
        let tol = Tolerance::new(1e-14 * (hi - self.xj), 1e-15, 400)?;
        Ok(Some(try_find_root(c, Interval::new(self.xj, hi)?, tol)?))
    }

    fn edges(&self, v_bi: f64, v_applied: f64) -> Result<(f64, f64), JunctionError> {
        let v_total = v_bi - v_applied;
        let mut hi_max = self.n_limit;
        let mut hi_max_is_cap = false;
        if let Some(cap) = self.cap()? {
            let v_cap = self.voltage(self.p_limit, cap)?;
            if v_cap < v_total {
                return Err(self.lower_edge_error(Some(v_bi - v_cap)));
            }
            if cap < hi_max {
                hi_max = cap;
                hi_max_is_cap = true;
            }
        }

        let mut hint = self.seed(v_total);
        let mut h = |x2: f64| -> Result<f64, JunctionError> {
            if x2 <= self.xj {
                return Ok(-v_total);
            }
            let x1 = self.inner(x2, &mut hint)?;
            Ok(self.voltage(x1, x2)? - v_total)
        };

        let mut hi = self.xj + self.seed(v_total);
        let mut doublings = 0;
        loop {
            if hi >= hi_max {
                hi = hi_max;
                if h(hi)? < 0.0 {
                    return Err(if hi_max_is_cap {
                        self.lower_edge_error(None)
                    } else {
                        JunctionError::ProfileEdgeReached { side: "upper" }
                    });
                }
                break;
            }
            if h(hi)? >= 0.0 {
                break;
            }
            doublings += 1;
            if doublings > MAX_DOUBLINGS {
                return Err(JunctionError::ConvergenceFailure(
                    "n-side edge bracket did not close".into(),
                ));
            }
            hi = self.xj + 2.0 * (hi - self.xj);
        }

        let tol = Tolerance::new(1e-14 * (hi - self.xj), 1e-15, 400)?;
        let x2 = try_find_root(&mut h, Interval::new(self.xj, hi)?, tol)?;
        let mut hint = self.seed(v_total);
        let x1 = self.inner(x2, &mut hint)?;
        if !(x1 < self.xj && self.xj < x2) {
            return Err(JunctionError::ConvergenceFailure(format!(
                "degenerate depletion region [{x1}, {x2}] around x_j = {}",
                self.xj
            )));
        }
        Ok((x1, x2))
    }

    fn finish(
        &self,
        x1: f64,
        x2: f64,
        v_bi: f64,
        v_applied: f64,
    ) -> Result<DepletionSolution, JunctionError> {
        let residual_neutrality = self.charge(x1, x2)?;
        let residual_moment = self.rho.moment(x1, x2, self.tol)? / self.eps - (v_bi - v_applied);
        let inside = self
            .rho
            .breakpoints()
            .iter()
            .copied()
            .filter(|&b| b > x1 && b < x2);
        let mut max_doping: f64 = 0.0;
        for x in [x1, x2].into_iter().chain(inside) {
            max_doping = max_doping.max(self.spec.net_doping(x)?.abs());
        }
        let e_peak = (self.charge(x1, self.xj)? / self.eps).abs();
        Ok(DepletionSolution {
            x1,
            x2,
            width: x2 - x1,
            x_j: self.xj,
            v_applied,
            v_bi,
            residual_neutrality,
            residual_moment,
            e_peak,
            charge_area: self.charge(self.xj, x2)?,
            max_doping,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{EPS_0, Q};

    const EPS_R: f64 = 11.7;

    fn abrupt_spec(na: f64, nd: f64, v_bi: Option<f64>) -> JunctionSpec {
        let p = DopingProfile::abrupt(na, nd, 0.0).unwrap();
        JunctionSpec::new(p, EPS_R, 300.0, 1.5e16, v_bi).unwrap()
    }

    #[test]
    fn builtin_voltage_examples() {
        let spec = abrupt_spec(1e22, 1e22, None);
        let v = builtin_voltage(&spec, -1e-7, 1e-7).unwrap();
        // 0.025851999786435535 * ln(1e44 / 2.25e32)
        assert!((v - 0.693_352_984_211_541_9).abs() < 1e-12);
        let fixed = spec.with_v_bi_override(Some(0.7)).unwrap();
        assert_eq!(builtin_voltage(&fixed, -1e-7, 1e-7).unwrap(), 0.7);
        let intrinsic = JunctionSpec::new(spec.profile().clone(), EPS_R, 300.0, 1e22, None).unwrap();
        assert!(builtin_voltage(&intrinsic, -1e-7, 1e-7).unwrap().abs() < 1e-15);
        assert!(matches!(
            builtin_voltage(&spec, 1e-7, 2e-7),
            Err(JunctionError::WrongEdgePolarity { .. })
        ));
    }

    #[test]
    fn symmetric_abrupt_width() {
        let spec = abrupt_spec(1e22, 1e22, Some(0.6934));
        let s = solve_depletion(&spec, 0.0).unwrap();
        // sqrt(2 ε V_bi (N_A + N_D) / (q N_A N_D))
        assert!((s.width / 4.234_810_812_542_093e-7 - 1.0).abs() < 1e-10);
        assert!((s.x1 + s.width / 2.0).abs() < 1e-12 * s.width);
        assert!((s.x2 - s.width / 2.0).abs() < 1e-12 * s.width);
        assert!(s.residuals_within_bounds());
        // peak field 2 V_bi / W for a symmetric step
        assert!((s.e_peak / (2.0 * 0.6934 / s.width) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_abrupt_edges() {
        let (na, nd) = (1e24, 1e20);
        let spec = abrupt_spec(na, nd, None);
        let s = solve_depletion(&spec, -3.0).unwrap();
        assert!(((-s.x1) * na / (s.x2 * nd) - 1.0).abs() < 1e-9);
        let eps = EPS_R * EPS_0;
        let w = (2.0 * eps * (s.v_bi + 3.0) * (na + nd) / (Q * na * nd)).sqrt();
        assert!((s.width / w - 1.0).abs() < 1e-9);
        assert!(s.residuals_within_bounds());
    }

    #[test]
    fn linear_grade_width() {
        let a = 1e28;
        let p = DopingProfile::linear_grade(a, 2e-7).unwrap();
        let spec = JunctionSpec::new(p, EPS_R, 300.0, 1.5e16, Some(0.7)).unwrap();
        let s = solve_depletion(&spec, -2.0).unwrap();
        let w = (12.0 * EPS_R * EPS_0 * 2.7 / (Q * a)).cbrt();
        assert!((s.width / w - 1.0).abs() < 1e-9);
        assert!((s.x1 + s.x2 - 4e-7).abs() < 1e-9 * s.width);
    }

    #[test]
    fn self_consistent_builtin_matches_edges() {
        let p = DopingProfile::linear_grade(1e28, 0.0).unwrap();
        let spec = JunctionSpec::new(p, EPS_R, 300.0, 1.5e16, None).unwrap();
        let s = solve_depletion(&spec, -1.0).unwrap();
        let at_edges = builtin_voltage(&spec, s.x1, s.x2).unwrap();
        assert!((s.v_bi - at_edges).abs() < 2e-9);
        assert!(s.residuals_within_bounds());
    }

    #[test]
    fn forward_bias_beyond_builtin_rejected() {
        let spec = abrupt_spec(1e22, 1e22, None);
        let err = solve_depletion(&spec, 0.95).unwrap_err();
        assert!(matches!(err, JunctionError::BiasExceedsBuiltIn { .. }), "{err:?}");
        let fixed = abrupt_spec(1e22, 1e22, Some(0.7));
        assert!(solve_depletion(&fixed, 0.6995).is_err());
        assert!(solve_depletion(&fixed, 0.69).is_ok());
    }

    #[test]
    fn shallow_gaussian_reaches_surface() {
        let p = DopingProfile::gaussian(1e23, 1e-7, 1e22).unwrap();
        let spec = JunctionSpec::new(p, EPS_R, 300.0, 1.5e16, None).unwrap();
        match solve_depletion(&spec, -20.0) {
            Err(JunctionError::SurfaceReached {
                limit_estimate: Some(v),
            }) => {
                assert!(v > -20.0 && v < 0.0, "limit {v}");
                // just above the limit the solve succeeds and the edge is near the surface
                let s = solve_depletion(&spec, v + 0.05).unwrap();
                assert!(s.x1 >= 0.0 && s.x1 < 0.2 * s.x_j);
            }
            other => panic!("expected SurfaceReached, got {other:?}"),
        }
    }

    #[test]
    fn table_edge_reached() {
        use super::super::DopingTable;
        let t = DopingTable::new([(-1e-6, -1e22), (0.0, -1e22), (1e-9, 1e22), (1e-6, 1e22)]).unwrap();
        let spec = JunctionSpec::new(DopingProfile::Tabulated(t), EPS_R, 300.0, 1.5e16, Some(0.7)).unwrap();
        assert!(solve_depletion(&spec, 0.0).is_ok());
        assert!(matches!(
            solve_depletion(&spec, -50.0),
            Err(JunctionError::ProfileEdgeReached { .. })
        ));
    }

    #[test]
    fn width_and_peak_field_monotone_in_bias() {
        let p = DopingProfile::gaussian(1e24, 1e-6, 1e21).unwrap();
        let spec = JunctionSpec::new(p, EPS_R, 300.0, 1.5e16, None).unwrap();
        let sols: Vec<_> = [-10.0, -5.0, -1.0, 0.0, 0.3]
            .iter()
            .map(|&v| solve_depletion(&spec, v).unwrap())
            .collect();
        for w in sols.windows(2) {
            assert!(w[1].width < w[0].width);
            assert!(w[1].e_peak < w[0].e_peak);
        }
    }
}
