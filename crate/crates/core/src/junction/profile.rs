use std::sync::Arc;

use super::JunctionError;
use crate::charge_moment::ChargeDensity;
use crate::constants::Q;
use crate::numerics::{erf_difference, Interval};

/// Net doping N(x) in m⁻³, positive for donors and negative for acceptors.
/// The p side always lies at lower x.
#[derive(Debug, Clone, PartialEq)]
pub enum DopingProfile {
    /// `-acceptor` for x < junction, `+donor` for x >= junction.
    Abrupt {
        acceptor: f64,
        donor: f64,
        junction: f64,
    },
    /// `N(x) = grade · (x - junction)`, grade in m⁻⁴.
    LinearGrade {
        grade: f64,
        junction: f64,
    },
    /// Acceptor Gaussian diffused from the surface x = 0 into a uniform
    /// donor substrate: `N(x) = background - surface · exp(-x²/length²)`.
    GaussianDiffusion {
        surface: f64,
        length: f64,
        background: f64,
    },
    Tabulated(DopingTable),
}

/// Sampled doping, linearly interpolated between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DopingTable {
    x: Vec<f64>,
    n: Vec<f64>,
}

impl DopingTable {
    /// Nodes must be strictly increasing in x and N must go from negative to
    /// positive exactly once.
    pub fn new(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, JunctionError> {
        let (x, n): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        if x.len() < 2 {
            return Err(JunctionError::InvalidProfile(
                "table needs at least two points".into(),
            ));
        }
        if x.iter().chain(&n).any(|v| !v.is_finite()) {
            return Err(JunctionError::InvalidProfile(
                "table entries must be finite".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(JunctionError::InvalidProfile(
                "table x must be strictly increasing".into(),
            ));
        }
        let signs: Vec<f64> = n.iter().filter(|v| **v != 0.0).map(|v| v.signum()).collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        if changes != 1 {
            return Err(JunctionError::InvalidProfile(format!(
                "table doping must change sign exactly once, found {changes} changes"
            )));
        }
        if signs[0] > 0.0 {
            return Err(JunctionError::InvalidProfile(
                "table must run from p-type (N < 0) at low x to n-type at high x".into(),
            ));
        }
        Ok(Self { x, n })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().copied().zip(self.n.iter().copied())
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn interpolate(&self, x: f64) -> f64 {
        let i = self.x.partition_point(|&xi| xi <= x).clamp(1, self.x.len() - 1);
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        let (n0, n1) = (self.n[i - 1], self.n[i]);
        n0 + (n1 - n0) * (x - x0) / (x1 - x0)
    }

    fn zero_crossing(&self) -> Option<f64> {
        let first_positive = self.n.iter().position(|&v| v > 0.0)?;
        let i = first_positive;
        if i == 0 {
            return None;
        }
        if self.n[i - 1] == 0.0 {
            // the zero run ends at the last zero node before the n side
            return Some(self.x[i - 1]);
        }
        let (x0, x1, n0, n1) = (self.x[i - 1], self.x[i], self.n[i - 1], self.n[i]);
        Some(x0 - n0 * (x1 - x0) / (n1 - n0))
    }
}

fn positive(name: &str, v: f64) -> Result<(), JunctionError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(JunctionError::InvalidProfile(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<(), JunctionError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(JunctionError::InvalidProfile(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

impl DopingProfile {
    pub fn abrupt(acceptor: f64, donor: f64, junction: f64) -> Result<Self, JunctionError> {
        let p = Self::Abrupt {
            acceptor,
            donor,
            junction,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn linear_grade(grade: f64, junction: f64) -> Result<Self, JunctionError> {
        let p = Self::LinearGrade { grade, junction };
        p.validate()?;
        Ok(p)
    }

    pub fn gaussian(surface: f64, length: f64, background: f64) -> Result<Self, JunctionError> {
        let p = Self::GaussianDiffusion {
            surface,
            length,
            background,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), JunctionError> {
        match *self {
            Self::Abrupt {
                acceptor,
                donor,
                junction,
            } => {
                positive("acceptor concentration", acceptor)?;
                positive("donor concentration", donor)?;
                finite("junction position", junction)
            }
            Self::LinearGrade { grade, junction } => {
                finite("junction position", junction)?;
                finite("grade", grade)?;
                if grade > 0.0 {
                    Ok(())
                } else if grade < 0.0 {
                    Err(JunctionError::InvalidProfile(
                        "negative grade puts the n side at low x; mirror the coordinate instead".into(),
                    ))
                } else {
                    Err(JunctionError::InvalidProfile("grade must be non-zero".into()))
                }
            }
            Self::GaussianDiffusion {
                surface,
                length,
                background,
            } => {
                positive("surface concentration", surface)?;
                positive("diffusion length", length)?;
                positive("background concentration", background)?;
                if surface > background {
                    Ok(())
                } else {
                    Err(JunctionError::InvalidProfile(
                        "surface concentration must exceed the background for a junction to form".into(),
                    ))
                }
            }
            Self::Tabulated(_) => Ok(()),
        }
    }

    /// Range of x on which the profile is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Self::GaussianDiffusion { .. } => (0.0, f64::INFINITY),
            Self::Tabulated(t) => t.domain(),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn net_doping(&self, x: f64) -> Result<f64, JunctionError> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(JunctionError::OutOfDomain { x, lo, hi });
        }
        Ok(match *self {
            Self::Abrupt {
                acceptor,
                donor,
                junction,
            } => {
                if x < junction {
                    -acceptor
                } else {
                    donor
                }
            }
            Self::LinearGrade { grade, junction } => grade * (x - junction),
            Self::GaussianDiffusion {
                surface,
                length,
                background,
            } => {
                let t = x / length;
                background - surface * (-t * t).exp()
            }
            Self::Tabulated(ref t) => t.interpolate(x),
        })
    }

    /// Point where N(x) changes sign.
    pub fn metallurgical_junction(&self) -> Result<f64, JunctionError> {
        match *self {
            Self::Abrupt { junction, .. } | Self::LinearGrade { junction, .. } => Ok(junction),
            Self::GaussianDiffusion {
                surface,
                length,
                background,
            } => Ok(length * (surface / background).ln().sqrt()),
            Self::Tabulated(ref t) => t.zero_crossing().ok_or(JunctionError::NoSignChange),
        }
    }

    /// Discontinuities of N or of its slope.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Abrupt { junction, .. } => vec![*junction],
            Self::Tabulated(t) => t.x.clone(),
            _ => Vec::new(),
        }
    }

    /// Space charge `ρ = q·N(x)` of the fully depleted profile. Closed forms
    /// of `∫ρ` and `∫xρ` are attached for every analytic variant and verified
    /// against quadrature on construction.
    pub fn charge_density(&self) -> Result<ChargeDensity, JunctionError> {
        let xj = self.metallurgical_junction()?;
        let density = match *self {
            Self::Abrupt {
                acceptor,
                donor,
                junction,
            } => {
                let (na, nd) = (Q * acceptor, Q * donor);
                // split [a, b] at the junction; u = x - xj on each side
                let sides = move |a: f64, b: f64| {
                    let (ua, ub) = (a - junction, b - junction);
                    ((ua.min(0.0), ub.min(0.0)), (ua.max(0.0), ub.max(0.0)))
                };
                ChargeDensity::builder(move |x| if x < junction { -na } else { nd })
                    .breakpoints([junction])
                    .charge_integral(move |a, b| {
                        let ((pa, pb), (na_, nb)) = sides(a, b);
                        nd * (nb - na_) - na * (pb - pa)
                    })
                    .moment_integral(move |a, b| {
                        let ((pa, pb), (na_, nb)) = sides(a, b);
                        let first = 0.5 * (nd * (nb - na_) * (nb + na_) - na * (pb - pa) * (pb + pa));
                        first + junction * (nd * (nb - na_) - na * (pb - pa))
                    })
                    .check_window(Interval::new(junction - 1e-4, junction + 1e-4)?)
                    .build()?
            }
            Self::LinearGrade { grade, junction } => {
                let qa = Q * grade;
                ChargeDensity::builder(move |x| qa * (x - junction))
                    .charge_integral(move |a, b| {
                        let (ua, ub) = (a - junction, b - junction);
                        0.5 * qa * (ub - ua) * (ub + ua)
                    })
                    .moment_integral(move |a, b| {
                        let (ua, ub) = (a - junction, b - junction);
                        qa * ((ub.powi(3) - ua.powi(3)) / 3.0 + 0.5 * junction * (ub - ua) * (ub + ua))
                    })
                    .check_window(Interval::new(junction - 1e-4, junction + 1e-4)?)
                    .build()?
            }
            Self::GaussianDiffusion {
                surface,
                length,
                background,
            } => {
                let (qc, qb) = (Q * surface, Q * background);
                let half_root_pi = 0.5 * std::f64::consts::PI.sqrt();
                ChargeDensity::builder(move |x| {
                    let t = x / length;
                    qb - qc * (-t * t).exp()
                })
                .support(0.0, f64::INFINITY)
                .charge_integral(move |a, b| {
                    qb * (b - a) - qc * length * half_root_pi * erf_difference(a / length, b / length)
                })
                // ∫x·exp(-x²/L²) dx = -(L²/2)·exp(-x²/L²)
                .moment_integral(move |a, b| {
                    let (ta, tb) = (a / length, b / length);
                    0.5 * qb * (b - a) * (b + a)
                        - 0.5 * qc * length * length * ((-ta * ta).exp() - (-tb * tb).exp())
                })
                .check_window(Interval::new(0.0, xj + 10.0 * length)?)
                .build()?
            }
            Self::Tabulated(ref t) => {
                let table = Arc::new(t.clone());
                let (lo, hi) = t.domain();
                ChargeDensity::builder(move |x| Q * table.interpolate(x))
                    .support(lo, hi)
                    .breakpoints(t.x.iter().copied())
                    .build()?
            }
        };
        Ok(density)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Tolerance;

    #[test]
    fn doping_examples() {
        let g = DopingProfile::gaussian(1e24, 1e-6, 1e21).unwrap();
        assert_eq!(g.net_doping(0.0).unwrap(), 1e21 - 1e24);
        let a = DopingProfile::abrupt(1e22, 1e22, 0.0).unwrap();
        assert_eq!(a.net_doping(-1e-7).unwrap(), -1e22);
        let l = DopingProfile::linear_grade(1e28, 0.0).unwrap();
        assert!((l.net_doping(1e-7).unwrap() - 1e21).abs() < 1e6);
    }

    #[test]
    fn gaussian_domain() {
        let g = DopingProfile::gaussian(1e24, 1e-6, 1e21).unwrap();
        assert!(matches!(
            g.net_doping(-1e-9),
            Err(JunctionError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn junction_positions() {
        let g = DopingProfile::gaussian(1e24, 1e-6, 1e21).unwrap();
        let xj = g.metallurgical_junction().unwrap();
        assert!((xj - 2.628_260_884_878_466e-6).abs() < 1e-19);
        assert!(g.net_doping(xj).unwrap().abs() < 1e21 * 1e-12);
        let a = DopingProfile::abrupt(1e22, 1e21, 5e-7).unwrap();
        assert_eq!(a.metallurgical_junction().unwrap(), 5e-7);
        let l = DopingProfile::linear_grade(1e28, 0.0).unwrap();
        assert_eq!(l.metallurgical_junction().unwrap(), 0.0);
    }

    #[test]
    fn invalid_profiles() {
        assert!(DopingProfile::abrupt(0.0, 1e22, 0.0).is_err());
        assert!(DopingProfile::abrupt(1e22, -1.0, 0.0).is_err());
        assert!(DopingProfile::linear_grade(0.0, 0.0).is_err());
        assert!(DopingProfile::linear_grade(-1e28, 0.0).is_err());
        assert!(DopingProfile::gaussian(1e20, 1e-6, 1e21).is_err());
        assert!(DopingProfile::gaussian(1e24, 0.0, 1e21).is_err());
    }

    #[test]
    fn table_validation_and_crossing() {
        assert!(DopingTable::new([(0.0, -1.0)]).is_err());
        assert!(DopingTable::new([(0.0, -1.0), (0.0, 1.0)]).is_err());
        assert!(DopingTable::new([(0.0, -1.0), (1.0, 1.0), (2.0, -1.0)]).is_err());
        assert!(DopingTable::new([(0.0, 1.0), (1.0, -1.0)]).is_err());
        assert!(DopingTable::new([(0.0, -1.0), (1.0, -2.0)]).is_err());

        let t = DopingTable::new([(0.0, -3.0), (1.0, -1.0), (2.0, 1.0), (3.0, 4.0)]).unwrap();
        let p = DopingProfile::Tabulated(t);
        assert_eq!(p.metallurgical_junction().unwrap(), 1.5);
        assert_eq!(p.net_doping(2.5).unwrap(), 2.5);
        assert!(p.net_doping(3.5).is_err());

        let z = DopingTable::new([(0.0, -1.0), (1.0, 0.0), (2.0, 1.0)]).unwrap();
        assert_eq!(DopingProfile::Tabulated(z).metallurgical_junction().unwrap(), 1.0);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let tol = Tolerance::new(0.0, 1e-13, 4000).unwrap();
        let profiles = [
            DopingProfile::abrupt(1e22, 3e21, 2e-7).unwrap(),
            DopingProfile::linear_grade(1e28, -1e-7).unwrap(),
            DopingProfile::gaussian(1e24, 1e-6, 1e21).unwrap(),
        ];
        for p in profiles {
            let rho = p.charge_density().unwrap();
            let xj = p.metallurgical_junction().unwrap();
            for (a, b) in [
                (xj - 3e-7, xj + 1e-7),
                (xj - 1e-8, xj + 2e-6),
                (xj + 1e-7, xj + 5e-7),
            ] {
                let a = a.max(0.0);
                let c = rho.charge(a, b, tol).unwrap();
                let cq = rho.quadrature_charge(a, b, tol).unwrap();
                let m = rho.moment(a, b, tol).unwrap();
                let mq = rho.quadrature_moment(a, b, tol).unwrap();
                assert!((c - cq).abs() <= 1e-10 * cq.abs(), "{p:?} charge {c} vs {cq}");
                assert!((m - mq).abs() <= 1e-10 * mq.abs(), "{p:?} moment {m} vs {mq}");
            }
        }
    }
}
