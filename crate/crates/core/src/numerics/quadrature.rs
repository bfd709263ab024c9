//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Interval, NumericsError, Tolerance};

/// Kronrod abscissae on [-1, 1], non-negative half, descending.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the odd-indexed Kronrod nodes (7-point rule).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Accepted integral together with the error estimate that justified it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn finite<E>(x: f64, y: f64) -> Result<f64, E>
where
    E: From<NumericsError>,
{
    if y.is_finite() {
        Ok(y)
    } else {
        Err(NumericsError::NonFiniteEvaluation { x }.into())
    }
}

fn kronrod15<F, E>(f: &mut F, lo: f64, hi: f64) -> Result<Segment, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);

    let fc = finite(center, f(center)?)?;
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = fc.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let (xl, xr) = (center - dx, center + dx);
        let f1 = finite(xl, f(xl)?)?;
        let f2 = finite(xr, f(xr)?)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }

    Ok(Segment {
        lo,
        hi,
        value,
        error,
        abs_value: res_abs,
    })
}

/// Integrates `f` over `iv`, splitting first at any `breaks` strictly inside
/// the interval. Discontinuities of the integrand belong in `breaks`.
///
/// The requested accuracy is floored at `100 * EPSILON * ∫|f|`, below which
/// the error estimate is pure rounding noise; integrals that cancel to zero
/// therefore terminate with `abs_tol = 0`.
pub fn try_integrate_pieces<F, E>(
    mut f: F,
    iv: Interval,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Quadrature, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&b| b > iv.lo() && b < iv.hi())
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut left = iv.lo();
    for &c in cuts.iter().chain(std::iter::once(&iv.hi())) {
        heap.push(kronrod15(&mut f, left, c)?);
        left = c;
    }

    let limit = tol.max_iterations().max(heap.len());
    loop {
        let (value, error, abs_value) = heap.iter().fold((0.0, 0.0, 0.0), |acc, s| {
            (acc.0 + s.value, acc.1 + s.error, acc.2 + s.abs_value)
        });
        let target = tol.threshold(value).max(100.0 * f64::EPSILON * abs_value);
        if error <= target {
            return Ok(Quadrature {
                value: sum_ordered(&heap),
                error,
                subdivisions: heap.len(),
            });
        }

        let worst = heap.peek().copied().expect("at least one segment");
        let mid = 0.5 * (worst.lo + worst.hi);
        if heap.len() >= limit || !(mid > worst.lo && mid < worst.hi) {
            return Err(NumericsError::SubdivisionLimitExceeded {
                limit,
                estimate: value,
                error,
            }
            .into());
        }
        heap.pop();
        heap.push(kronrod15(&mut f, worst.lo, mid)?);
        heap.push(kronrod15(&mut f, mid, worst.hi)?);
    }
}

// Summation in coordinate order so the result does not depend on heap layout.
fn sum_ordered(heap: &BinaryHeap<Segment>) -> f64 {
    let mut segs: Vec<&Segment> = heap.iter().collect();
    segs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    segs.iter().map(|s| s.value).sum()
}

pub fn try_integrate<F, E>(f: F, iv: Interval, tol: Tolerance) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    try_integrate_pieces(f, iv, &[], tol).map(|q| q.value)
}

pub fn integrate_pieces<F>(
    f: F,
    iv: Interval,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Quadrature, NumericsError>
where
    F: Fn(f64) -> f64,
{
    try_integrate_pieces(|x| Ok::<_, NumericsError>(f(x)), iv, breaks, tol)
}

/// Adaptive quadrature of `f` over `iv`.
pub fn integrate<F>(f: F, iv: Interval, tol: Tolerance) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    integrate_pieces(f, iv, &[], tol).map(|q| q.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    // Taylor series oracle: ∫₀¹ exp(-x²) dx = Σ (-1)ⁿ / (n! (2n+1)).
    fn exp_sq_taylor() -> f64 {
        let mut sum = 0.0;
        let mut fact = 1.0;
        for n in 0..30 {
            if n > 0 {
                fact *= n as f64;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign / (fact * (2 * n + 1) as f64);
        }
        sum
    }

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| x * x, iv(0.0, 1.0), Tolerance::default()).unwrap();
        assert!((q - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sine_over_half_period() {
        let q = integrate(f64::sin, iv(0.0, PI), Tolerance::default()).unwrap();
        assert!((q - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_matches_taylor_oracle() {
        let oracle = exp_sq_taylor();
        assert!((oracle - 0.746_824_132_81).abs() < 1e-11);
        let q = integrate(|x| (-x * x).exp(), iv(0.0, 1.0), Tolerance::default()).unwrap();
        assert!((q - oracle).abs() < 1e-14);
    }

    #[test]
    fn cancelling_integral_terminates_with_zero_abs_tol() {
        let tol = Tolerance::new(0.0, 1e-12, 500).unwrap();
        let q = integrate(|x| (2.0 * PI * x).sin(), iv(0.0, 1.0), tol).unwrap();
        assert!(q.abs() < 1e-14);
    }

    #[test]
    fn breakpoints_handle_jumps() {
        let step = |x: f64| if x < 0.3 { -1.0 } else { 2.0 };
        let q = integrate_pieces(step, iv(0.0, 1.0), &[0.3], Tolerance::default()).unwrap();
        assert!((q.value - (-0.3 + 1.4)).abs() < 1e-15);
        assert_eq!(q.subdivisions, 2);
        // without the hint the adaptive scheme still localises the jump
        let q = integrate(step, iv(0.0, 1.0), Tolerance::default()).unwrap();
        assert!((q - 1.1).abs() < 1e-9);
    }

    #[test]
    fn non_finite_reported() {
        let err = integrate(|x| 1.0 / (x - 0.5), iv(0.0, 1.0), Tolerance::default());
        // the centre node hits the pole exactly
        assert!(matches!(err, Err(NumericsError::NonFiniteEvaluation { x }) if x == 0.5));
    }

    #[test]
    fn subdivision_limit_reported() {
        let tol = Tolerance::new(0.0, 1e-14, 5).unwrap();
        let err = integrate(
            |x: f64| x.abs().sqrt().recip().min(1e300),
            iv(-1.0, 1.0 + 1e-3),
            tol,
        );
        assert!(matches!(
            err,
            Err(NumericsError::SubdivisionLimitExceeded { limit: 5, .. })
        ));
    }

    #[test]
    fn deterministic() {
        let f = |x: f64| (3.0 * x).cos() * (-x).exp();
        let a = integrate(f, iv(0.0, 7.0), Tolerance::default()).unwrap();
        let b = integrate(f, iv(0.0, 7.0), Tolerance::default()).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
