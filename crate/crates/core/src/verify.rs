//! Randomized equivalence check between the charge-moment voltage and the
//! double-integration Poisson route.
//!
//! Cases are drawn from a seeded ChaCha8 stream, so a given `(cases, seed)`
//! pair always produces the same report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::charge_moment::{ChargeDensity, ChargeError, ChargeRegion};

/// Residuals are `|V_moment - V_direct| / max(1, |V_direct|)`.
pub const RESIDUAL_BOUND: f64 = 1e-8;

/// Parametric shape of a random test density.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileShape {
    Polynomial {
        center: f64,
        half_width: f64,
        coeffs: Vec<f64>,
    },
    PiecewiseConstant {
        edges: Vec<f64>,
        values: Vec<f64>,
    },
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    Mixture {
        components: Vec<ProfileShape>,
    },
}

impl ProfileShape {
    pub fn density(&self) -> Result<ChargeDensity, ChargeError> {
        match self {
            Self::Polynomial {
                center,
                half_width,
                coeffs,
            } => ChargeDensity::polynomial(*center, *half_width, coeffs),
            Self::PiecewiseConstant { edges, values } => ChargeDensity::piecewise_constant(edges, values),
            Self::Gaussian {
                amplitude,
                center,
                width,
            } => ChargeDensity::gaussian(*amplitude, *center, *width),
            Self::Mixture { components } => {
                let mut acc = ChargeDensity::zero();
                for c in components {
                    acc = acc.sum(&c.density()?)?;
                }
                Ok(acc)
            }
        }
    }
}

/// One randomized region. `E₂` is fixed by Gauss's law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseParams {
    pub index: usize,
    pub profile: ProfileShape,
    /// Whether the moment uses the closed forms or quadrature.
    pub closed_form: bool,
    pub epsilon: f64,
    pub x1: f64,
    pub x2: f64,
    pub e1: f64,
}

impl CaseParams {
    pub fn region(&self) -> Result<ChargeRegion, ChargeError> {
        let exact = self.profile.density()?;
        let rho = if self.closed_form {
            exact
        } else {
            let breaks = exact.breakpoints().to_vec();
            ChargeDensity::builder(move |x| exact.eval(x))
                .breakpoints(breaks)
                .build()?
        };
        ChargeRegion::with_consistent_field(rho, self.epsilon, self.x1, self.x2, self.e1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResult {
    pub params: CaseParams,
    pub e2: f64,
    pub scr_voltage: f64,
    pub direct: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub cases: usize,
    pub seed: u64,
    pub bound: f64,
    pub max_residual: f64,
    pub failures: usize,
    pub worst: Option<CaseResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn shape<R: Rng>(rng: &mut R, x1: f64, x2: f64, allow_mixture: bool) -> ProfileShape {
    let len = x2 - x1;
    let kinds = if allow_mixture { 4 } else { 3 };
    match rng.gen_range(0..kinds) {
        0 => {
            let degree = rng.gen_range(0..=6);
            ProfileShape::Polynomial {
                center: 0.5 * (x1 + x2) + rng.gen_range(-0.5..0.5) * len,
                half_width: 0.5 * len * rng.gen_range(0.5..2.0),
                coeffs: (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            }
        }
        1 => {
            let pieces = rng.gen_range(1..=5);
            let mut edges: Vec<f64> = (0..=pieces)
                .map(|_| rng.gen_range(x1 - 0.2 * len..x2 + 0.2 * len))
                .collect();
            edges.sort_by(f64::total_cmp);
            edges.dedup();
            if edges.len() < 2 {
                edges = vec![x1, x2];
            }
            let values = (1..edges.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            ProfileShape::PiecewiseConstant { edges, values }
        }
        2 => ProfileShape::Gaussian {
            amplitude: rng.gen_range(-2.0..2.0),
            center: rng.gen_range(x1..x2),
            width: len * rng.gen_range(0.05..1.0),
        },
        _ => {
            let n = rng.gen_range(2..=3);
            ProfileShape::Mixture {
                components: (0..n).map(|_| shape(rng, x1, x2, false)).collect(),
            }
        }
    }
}

/// Draws `cases` random regions from `seed`.
pub fn random_cases(cases: usize, seed: u64) -> Vec<CaseParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .map(|index| {
            let x1 = rng.gen_range(-5.0..5.0);
            let x2 = x1 + rng.gen_range(0.2..5.0);
            let profile = shape(&mut rng, x1, x2, true);
            CaseParams {
                index,
                profile,
                closed_form: rng.gen_bool(0.5),
                epsilon: rng.gen_range(0.5..5.0),
                x1,
                x2,
                e1: rng.gen_range(-2.0..2.0),
            }
        })
        .collect()
}

pub fn run_case(params: &CaseParams) -> Result<CaseResult, ChargeError> {
    let region = params.region()?;
    let scr_voltage = region.scr_voltage()?;
    let direct = region.potential_drop_direct()?;
    Ok(CaseResult {
        params: params.clone(),
        e2: region.e2(),
        scr_voltage,
        direct,
        residual: (scr_voltage - direct).abs() / direct.abs().max(1.0),
    })
}

/// Runs the randomized suite. Cases are evaluated in parallel; the report
/// does not depend on scheduling.
pub fn verify(cases: usize, seed: u64) -> Result<VerifyReport, ChargeError> {
    let params = random_cases(cases, seed);
    let results = params.par_iter().map(run_case).collect::<Result<Vec<_>, _>>()?;
    let failures = results.iter().filter(|r| !(r.residual <= RESIDUAL_BOUND)).count();
    let worst = results
        .into_iter()
        .reduce(|a, b| if b.residual > a.residual { b } else { a });
    Ok(VerifyReport {
        cases,
        seed,
        bound: RESIDUAL_BOUND,
        max_residual: worst.as_ref().map_or(0.0, |w| w.residual),
        failures,
        worst,
    })
}
