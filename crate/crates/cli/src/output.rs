//! Output artifacts: a metadata envelope around one of a small set of result
//! bodies, serialised as JSON or CSV with stable field order so reruns are
//! byte-identical.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Envelope {
    pub command: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub version: &'static str,
    pub rng: &'static str,
    #[serde(flatten)]
    pub result: ResultBody,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum ResultBody {
    Moments {
        basis: Vec<String>,
        moments: Vec<f64>,
    },
    Compare {
        rows: Vec<CompareRow>,
    },
    VixValue {
        k: u32,
        value: f64,
    },
    Signature {
        dim: usize,
        level: usize,
        t: f64,
        words: BTreeMap<String, f64>,
    },
    Estimate {
        mean: f64,
        std_error: f64,
        n_paths: usize,
        seed: u64,
    },
}

/// One line of a comparison report: analytic value against the Monte Carlo
/// estimate, with the z-score flagged beyond three standard errors.
#[derive(Debug, Serialize)]
pub struct CompareRow {
    pub name: String,
    pub analytic: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub z: f64,
    pub flagged: bool,
}

pub fn z_score(analytic: f64, mc_mean: f64, mc_se: f64) -> f64 {
    let diff = mc_mean - analytic;
    if mc_se > 0.0 {
        diff / mc_se
    } else if diff.abs() <= 1e-9 * analytic.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

impl Envelope {
    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("serializable output");
        bytes.push(b'\n');
        bytes
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut out = String::new();
        out.push_str(&format!("# command={}\n", self.command));
        out.push_str(&format!("# config_sha256={}\n", self.config_sha256));
        out.push_str(&format!("# seed={}\n", self.seed));
        out.push_str(&format!("# version={}\n", self.version));
        out.push_str(&format!("# rng={}\n", self.rng));
        match &self.result {
            ResultBody::Moments { basis, moments } => {
                out.push_str("index,monomial,value\n");
                for (i, (name, value)) in basis.iter().zip(moments).enumerate() {
                    out.push_str(&format!("{i},{name},{value}\n"));
                }
            }
            ResultBody::Compare { rows } => {
                out.push_str("name,analytic,mc_mean,mc_se,z,flagged\n");
                for row in rows {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        row.name, row.analytic, row.mc_mean, row.mc_se, row.z, row.flagged
                    ));
                }
            }
            ResultBody::VixValue { k, value } => {
                out.push_str("k,value\n");
                out.push_str(&format!("{k},{value}\n"));
            }
            ResultBody::Signature { words, .. } => {
                out.push_str("word,value\n");
                for (word, value) in words {
                    out.push_str(&format!("{word},{value}\n"));
                }
            }
            ResultBody::Estimate {
                mean,
                std_error,
                n_paths,
                seed,
            } => {
                out.push_str("mean,std_error,n_paths,seed\n");
                out.push_str(&format!("{mean},{std_error},{n_paths},{seed}\n"));
            }
        }
        out.into_bytes()
    }
}

/// Sample-level dump written next to the main artifact under `--dump`.
pub fn samples_csv(values: &[f64]) -> Vec<u8> {
    let mut out = String::from("path_index,value\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    out.into_bytes()
}
