//! Brent's bracketed root finder (inverse quadratic / secant steps with a
//! bisection safeguard).

use super::{Interval, NumericsError, Tolerance};

fn checked<E>(x: f64, y: f64) -> Result<f64, E>
where
    E: From<NumericsError>,
{
    if y.is_finite() {
        Ok(y)
    } else {
        Err(NumericsError::NonFiniteEvaluation { x }.into())
    }
}

/// Finds a zero of `f` inside `bracket`. The callback must change sign
/// across the bracket (a zero at either end is accepted).
///
/// The returned abscissa always lies in `[bracket.lo(), bracket.hi()]`.
pub fn try_find_root<F, E>(mut f: F, bracket: Interval, tol: Tolerance) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let (lo, hi) = (bracket.lo(), bracket.hi());
    let mut a = lo;
    let mut b = hi;
    let mut fa = checked(a, f(a)?)?;
    let mut fb = checked(b, f(b)?)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NumericsError::NoSignChange {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        }
        .into());
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..tol.max_iterations() {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol.threshold(b);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b.clamp(lo, hi));
        }

        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }

        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        b = b.clamp(lo, hi);
        fb = checked(b, f(b)?)?;
    }

    Err(NumericsError::IterationLimitExceeded {
        limit: tol.max_iterations(),
        last: b,
    }
    .into())
}

pub fn find_root<F>(f: F, bracket: Interval, tol: Tolerance) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    try_find_root(|x| Ok::<_, NumericsError>(f(x)), bracket, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    // Damped fixed-point oracle for cos(x) = x, independent of Brent.
    fn dottie_oracle() -> f64 {
        let mut x = 1.0_f64;
        for _ in 0..2000 {
            x = 0.5 * x + 0.5 * x.cos();
        }
        x
    }

    #[test]
    fn sqrt_two() {
        let r = find_root(|x| x * x - 2.0, iv(1.0, 2.0), Tolerance::root()).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn linear() {
        let r = find_root(|x| 2.0 * x - 1.0, iv(0.0, 1.0), Tolerance::root()).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cosine_fixed_point() {
        let oracle = dottie_oracle();
        assert!((oracle - 0.739_085_13).abs() < 1e-8);
        let r = find_root(|x| x.cos() - x, iv(0.0, 1.0), Tolerance::root()).unwrap();
        assert!((r - oracle).abs() < 1e-12);
    }

    #[test]
    fn endpoint_roots_accepted() {
        assert_eq!(find_root(|x| x, iv(0.0, 1.0), Tolerance::root()).unwrap(), 0.0);
        assert_eq!(
            find_root(|x| x - 1.0, iv(0.0, 1.0), Tolerance::root()).unwrap(),
            1.0
        );
    }

    #[test]
    fn no_sign_change() {
        let err = find_root(|x| x * x + 1.0, iv(-1.0, 1.0), Tolerance::root()).unwrap_err();
        assert!(matches!(err, NumericsError::NoSignChange { .. }));
    }

    #[test]
    fn iteration_limit() {
        let tol = Tolerance::new(0.0, 1e-15, 3).unwrap();
        let err = find_root(|x| x.powi(3) - 0.3, iv(0.0, 1.0), tol).unwrap_err();
        assert!(matches!(
            err,
            NumericsError::IterationLimitExceeded { limit: 3, .. }
        ));
    }

    #[test]
    fn steep_exponential() {
        let r = find_root(|x| (40.0 * x).exp() - 1e10, iv(0.0, 1.0), Tolerance::root()).unwrap();
        assert!((r - 1e10_f64.ln() / 40.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn root_stays_in_bracket(
            root in -10.0f64..10.0,
            left in 0.01f64..20.0,
            right in 0.01f64..20.0,
            cubic in -1.0f64..1.0,
        ) {
            let (lo, hi) = (root - left, root + right);
            let f = |x: f64| (x - root) * (1.0 + cubic * cubic * (x - root).powi(2));
            let r = find_root(f, iv(lo, hi), Tolerance::root()).unwrap();
            prop_assert!(r >= lo && r <= hi);
            prop_assert!((r - root).abs() <= 1e-10 * (1.0 + root.abs()));
        }
    }
}
