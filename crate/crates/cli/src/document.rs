//! Junction spec documents.
//!
//! Concentrations are given in cm⁻³, grades in cm⁻⁴, lengths in µm and
//! voltages in V. [`SpecDocument::to_spec`] converts to SI.

use serde::{Deserialize, Serialize};

use scr_core::junction::{DopingProfile, DopingTable, JunctionError, JunctionSpec};

const PER_CM3: f64 = 1e6;
const PER_CM4: f64 = 1e8;
const MICRON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileDoc {
    Abrupt {
        n_a_cm3: f64,
        n_d_cm3: f64,
        x_j_um: f64,
    },
    Linear {
        a_cm4: f64,
        x_j_um: f64,
    },
    Gaussian {
        c0_cm3: f64,
        l_um: f64,
        n_b_cm3: f64,
    },
    /// `[x_um, n_cm3]` pairs, net doping signed (+ donor).
    Tabulated {
        points: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialDoc {
    pub eps_r: f64,
    #[serde(rename = "T_K")]
    pub t_k: f64,
    pub n_i_cm3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub profile: ProfileDoc,
    pub material: MaterialDoc,
    #[serde(rename = "v_bi_override_V", default, skip_serializing_if = "Option::is_none")]
    pub v_bi_override: Option<f64>,
}

/// The same spec in SI units, as echoed in output metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiSpec {
    pub profile: SiProfile,
    pub eps_r: f64,
    #[serde(rename = "T_K")]
    pub t_k: f64,
    pub n_i_m3: f64,
    #[serde(rename = "v_bi_override_V", skip_serializing_if = "Option::is_none")]
    pub v_bi_override: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SiProfile {
    Abrupt { n_a_m3: f64, n_d_m3: f64, x_j_m: f64 },
    Linear { a_m4: f64, x_j_m: f64 },
    Gaussian { c0_m3: f64, l_m: f64, n_b_m3: f64 },
    Tabulated { points: Vec<[f64; 2]> },
}

impl SpecDocument {
    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec documents always serialize")
    }

    pub fn si(&self) -> SiSpec {
        let profile = match &self.profile {
            ProfileDoc::Abrupt {
                n_a_cm3,
                n_d_cm3,
                x_j_um,
            } => SiProfile::Abrupt {
                n_a_m3: n_a_cm3 * PER_CM3,
                n_d_m3: n_d_cm3 * PER_CM3,
                x_j_m: x_j_um * MICRON,
            },
            ProfileDoc::Linear { a_cm4, x_j_um } => SiProfile::Linear {
                a_m4: a_cm4 * PER_CM4,
                x_j_m: x_j_um * MICRON,
            },
            ProfileDoc::Gaussian {
                c0_cm3,
                l_um,
                n_b_cm3,
            } => SiProfile::Gaussian {
                c0_m3: c0_cm3 * PER_CM3,
                l_m: l_um * MICRON,
                n_b_m3: n_b_cm3 * PER_CM3,
            },
            ProfileDoc::Tabulated { points } => SiProfile::Tabulated {
                points: points.iter().map(|[x, n]| [x * MICRON, n * PER_CM3]).collect(),
            },
        };
        SiSpec {
            profile,
            eps_r: self.material.eps_r,
            t_k: self.material.t_k,
            n_i_m3: self.material.n_i_cm3 * PER_CM3,
            v_bi_override: self.v_bi_override,
        }
    }

    pub fn to_spec(&self) -> Result<JunctionSpec, JunctionError> {
        let si = self.si();
        let profile = match si.profile {
            SiProfile::Abrupt {
                n_a_m3,
                n_d_m3,
                x_j_m,
            } => DopingProfile::abrupt(n_a_m3, n_d_m3, x_j_m)?,
            SiProfile::Linear { a_m4, x_j_m } => DopingProfile::linear_grade(a_m4, x_j_m)?,
            SiProfile::Gaussian { c0_m3, l_m, n_b_m3 } => DopingProfile::gaussian(c0_m3, l_m, n_b_m3)?,
            SiProfile::Tabulated { points } => {
                DopingProfile::Tabulated(DopingTable::new(points.into_iter().map(|[x, n]| (x, n)))?)
            }
        };
        JunctionSpec::new(profile, si.eps_r, si.t_k, si.n_i_m3, si.v_bi_override)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ABRUPT: &str = r#"{
        "profile": {"type": "abrupt", "n_a_cm3": 1e16, "n_d_cm3": 1e16, "x_j_um": 0},
        "material": {"eps_r": 11.7, "T_K": 300, "n_i_cm3": 1.5e10},
        "v_bi_override_V": 0.6934
    }"#;

    #[test]
    fn parses_and_converts() {
        let doc = SpecDocument::parse(ABRUPT).unwrap();
        let spec = doc.to_spec().unwrap();
        assert_eq!(spec.n_i(), 1.5e16);
        assert_eq!(spec.net_doping(-1e-9).unwrap(), -1e22);
        assert_eq!(spec.v_bi_override(), Some(0.6934));
    }

    #[test]
    fn every_profile_type() {
        let docs = [
            r#"{"type": "linear", "a_cm4": 1e20, "x_j_um": 0.5}"#,
            r#"{"type": "gaussian", "c0_cm3": 1e18, "l_um": 1, "n_b_cm3": 1e15}"#,
            r#"{"type": "tabulated", "points": [[0, -1e16], [1, 1e16]]}"#,
        ];
        for p in docs {
            let text = format!(
                r#"{{"profile": {p}, "material": {{"eps_r": 11.7, "T_K": 300, "n_i_cm3": 1.5e10}}}}"#
            );
            let doc = SpecDocument::parse(&text).unwrap();
            doc.to_spec().unwrap();
        }
        let g = SpecDocument::parse(
            r#"{"profile": {"type": "gaussian", "c0_cm3": 1e18, "l_um": 1, "n_b_cm3": 1e15},
                "material": {"eps_r": 11.7, "T_K": 300, "n_i_cm3": 1.5e10}}"#,
        )
        .unwrap();
        assert_eq!(g.to_spec().unwrap().net_doping(0.0).unwrap(), 1e21 - 1e24);
    }

    #[test]
    fn rejects_malformed() {
        assert!(SpecDocument::parse(r#"{"profile": {"type": "step"}, "material": {}}"#).is_err());
        let extra = ABRUPT.replace("\"eps_r\"", "\"colour\": 1, \"eps_r\"");
        assert!(SpecDocument::parse(&extra).is_err());
        let bad = SpecDocument::parse(&ABRUPT.replace("1e16, \"n_d", "-1e16, \"n_d")).unwrap();
        assert!(bad.to_spec().is_err());
    }

    #[test]
    fn json_round_trip() {
        let doc = SpecDocument::parse(ABRUPT).unwrap();
        assert_eq!(SpecDocument::parse(&doc.to_json()).unwrap(), doc);
    }
}
