use super::{NumericsError, Tolerance};

/// Damped fixed-point iteration `x <- (1 - damping) x + damping g(x)`.
///
/// Returns the first iterate with `|x - g(x)| <= max(abs_tol, rel_tol |x|)`.
/// Running out of iterations is an error, never a silent truncation.
pub fn try_fixed_point<G, E>(mut g: G, x0: f64, damping: f64, tol: Tolerance) -> Result<f64, E>
where
    G: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(NumericsError::InvalidDamping(damping).into());
    }
    let mut x = x0;
    for _ in 0..tol.max_iterations() {
        let gx = g(x)?;
        if !gx.is_finite() {
            return Err(NumericsError::NonFiniteEvaluation { x }.into());
        }
        if (x - gx).abs() <= tol.threshold(x) {
            return Ok(x);
        }
        x = (1.0 - damping) * x + damping * gx;
    }
    Err(NumericsError::IterationLimitExceeded {
        limit: tol.max_iterations(),
        last: x,
    }
    .into())
}

pub fn fixed_point<G>(g: G, x0: f64, damping: f64, tol: Tolerance) -> Result<f64, NumericsError>
where
    G: Fn(f64) -> f64,
{
    try_fixed_point(|x| Ok::<_, NumericsError>(g(x)), x0, damping, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::new(1e-13, 0.0, 1000).unwrap()
    }

    #[test]
    fn constant_map() {
        let x = fixed_point(|_| 0.5, 0.0, 1.0, tol()).unwrap();
        assert_eq!(x, 0.5);
        let x = fixed_point(|_| 0.5, 0.0, 0.5, tol()).unwrap();
        assert!((x - 0.5).abs() <= 1e-13);
    }

    #[test]
    fn cosine_undamped() {
        // oracle: plain root bracketing of cos(x) - x by bisection
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.cos() - mid > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = fixed_point(f64::cos, 1.0, 1.0, tol()).unwrap();
        assert!((x - lo).abs() < 1e-12);
        assert!((x - 0.739_085_13).abs() < 1e-8);
    }

    #[test]
    fn identity_converges_immediately() {
        let mut calls = 0;
        let x = try_fixed_point(
            |x| {
                calls += 1;
                Ok::<_, NumericsError>(x)
            },
            3.0,
            0.5,
            tol(),
        )
        .unwrap();
        assert_eq!(x, 3.0);
        assert_eq!(calls, 1);
    }

    #[test]
    fn divergent_map_hits_limit() {
        let t = Tolerance::new(1e-12, 0.0, 50).unwrap();
        let err = fixed_point(|x| 2.0 * x + 1.0, 1.0, 1.0, t).unwrap_err();
        assert!(matches!(
            err,
            NumericsError::IterationLimitExceeded { limit: 50, .. }
        ));
    }

    #[test]
    fn damping_range() {
        assert!(matches!(
            fixed_point(|x| x, 0.0, 0.0, tol()),
            Err(NumericsError::InvalidDamping(_))
        ));
        assert!(fixed_point(|x| x, 0.0, 1.5, tol()).is_err());
    }
}
