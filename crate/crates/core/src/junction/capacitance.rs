use rayon::prelude::*;

use super::{solve_depletion, DepletionSolution, JunctionError, JunctionSpec};

/// Default bias step (V) for the charge-difference capacitance.
pub const DEFAULT_DV: f64 = 1e-3;

/// Barrier capacitance per unit area (F/m²) by two routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capacitance {
    /// `ε/W`.
    pub c_w: f64,
    /// `-dQ/dV` by central difference of the n-side areal charge.
    pub c_dq: f64,
    pub solution: DepletionSolution,
}

impl Capacitance {
    pub fn relative_disagreement(&self) -> f64 {
        (self.c_dq - self.c_w).abs() / self.c_w
    }
}

/// Both capacitance estimates at `v_applied`.
///
/// The built-in voltage is held at its value for the centre bias while the
/// two neighbouring points are solved.
pub fn capacitance(
    spec: &JunctionSpec,
    v_applied: f64,
    dv: Option<f64>,
) -> Result<Capacitance, JunctionError> {
    let dv = dv.unwrap_or(DEFAULT_DV);
    if !(dv > 0.0 && dv.is_finite()) {
        return Err(JunctionError::InvalidSpec(format!(
            "bias step must be positive, got {dv}"
        )));
    }
    let solution = solve_depletion(spec, v_applied)?;
    let frozen = spec.with_v_bi_override(Some(solution.v_bi))?;
    let below = solve_depletion(&frozen, v_applied - dv)?;
    let above = solve_depletion(&frozen, v_applied + dv)?;
    Ok(Capacitance {
        c_w: spec.permittivity() / solution.width,
        c_dq: (below.charge_area - above.charge_area) / (2.0 * dv),
        solution,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointStatus {
    Ok,
    SurfaceReached,
    ProfileEdgeReached,
}

impl PointStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::SurfaceReached => "SurfaceReached",
            Self::ProfileEdgeReached => "ProfileEdgeReached",
        }
    }
}

/// One sweep bias. Values are absent when the solve hit a physical limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvPoint {
    pub v: f64,
    pub width: Option<f64>,
    /// `ε/W` (F/m²).
    pub c_area: Option<f64>,
    /// n-side areal charge (C/m²).
    pub q_area: Option<f64>,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvCurve {
    points: Vec<CvPoint>,
}

impl CvCurve {
    pub fn points(&self) -> &[CvPoint] {
        &self.points
    }

    pub fn valid(&self) -> impl Iterator<Item = &CvPoint> {
        self.points.iter().filter(|p| p.status == PointStatus::Ok)
    }
}

/// `n` evenly spaced biases from `v_min` to `v_max`, evaluated in parallel.
/// The result is identical to a sequential sweep.
pub fn cv_sweep(spec: &JunctionSpec, v_min: f64, v_max: f64, n: usize) -> Result<CvCurve, JunctionError> {
    if n < 2 {
        return Err(JunctionError::InvalidSweep(format!(
            "need at least 2 points, got {n}"
        )));
    }
    if !(v_min.is_finite() && v_max.is_finite() && v_min < v_max) {
        return Err(JunctionError::InvalidSweep(format!(
            "need finite v_min < v_max, got [{v_min}, {v_max}]"
        )));
    }
    let step = (v_max - v_min) / (n - 1) as f64;
    let biases: Vec<f64> = (0..n)
        .map(|i| {
            if i == n - 1 {
                v_max
            } else {
                v_min + step * i as f64
            }
        })
        .collect();
    let eps = spec.permittivity();
    let results: Vec<Result<CvPoint, JunctionError>> = biases
        .par_iter()
        .map(|&v| {
            let failed = |status| CvPoint {
                v,
                width: None,
                c_area: None,
                q_area: None,
                status,
            };
            match solve_depletion(spec, v) {
                Ok(s) => Ok(CvPoint {
                    v,
                    width: Some(s.width),
                    c_area: Some(eps / s.width),
                    q_area: Some(s.charge_area),
                    status: PointStatus::Ok,
                }),
                Err(JunctionError::SurfaceReached { .. }) => Ok(failed(PointStatus::SurfaceReached)),
                Err(JunctionError::ProfileEdgeReached { .. }) => Ok(failed(PointStatus::ProfileEdgeReached)),
                Err(e) => Err(e),
            }
        })
        .collect();
    let points = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    if points.iter().all(|p| p.status != PointStatus::Ok) {
        return Err(JunctionError::InvalidSweep(
            "no bias in the sweep could be solved".into(),
        ));
    }
    Ok(CvCurve { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::junction::DopingProfile;

    fn symmetric() -> JunctionSpec {
        let p = DopingProfile::abrupt(1e22, 1e22, 0.0).unwrap();
        JunctionSpec::new(p, 11.7, 300.0, 1.5e16, Some(0.6934)).unwrap()
    }

    #[test]
    fn abrupt_capacitance_example() {
        let c = capacitance(&symmetric(), 0.0, None).unwrap();
        assert!((c.c_w / 2.446_248_533_770_369e-4 - 1.0).abs() < 1e-9);
        assert!(c.relative_disagreement() < 1e-6);
        let reverse = capacitance(&symmetric(), -5.0, None).unwrap();
        assert!(reverse.c_w < c.c_w);
    }

    #[test]
    fn sweep_monotone() {
        let curve = cv_sweep(&symmetric(), -5.0, 0.5, 5).unwrap();
        let pts = curve.points();
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[4].v, 0.5);
        for w in pts.windows(2) {
            assert!(w[1].v > w[0].v);
            assert!(w[1].width.unwrap() < w[0].width.unwrap());
            assert!(w[1].c_area.unwrap() > w[0].c_area.unwrap());
        }
    }

    #[test]
    fn two_point_sweep() {
        let curve = cv_sweep(&symmetric(), 0.3 - 1e-6, 0.3, 2).unwrap();
        assert_eq!(curve.valid().count(), 2);
    }

    #[test]
    fn sweep_validation() {
        assert!(cv_sweep(&symmetric(), 0.0, 0.5, 1).is_err());
        assert!(cv_sweep(&symmetric(), 0.5, 0.0, 4).is_err());
        assert!(matches!(
            cv_sweep(&symmetric(), -1.0, 0.9, 4),
            Err(JunctionError::BiasExceedsBuiltIn { .. })
        ));
    }

    #[test]
    fn sweep_marks_surface_points() {
        let p = DopingProfile::gaussian(1e23, 1e-7, 1e22).unwrap();
        let spec = JunctionSpec::new(p, 11.7, 300.0, 1.5e16, None).unwrap();
        let curve = cv_sweep(&spec, -20.0, 0.0, 5).unwrap();
        assert_eq!(curve.points()[0].status, PointStatus::SurfaceReached);
        assert!(curve.points()[0].width.is_none());
        assert_eq!(curve.points()[4].status, PointStatus::Ok);
    }
}
