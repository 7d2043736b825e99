//! Run configuration. Every field has an explicit default so that
//! `--print-config` shows the complete set of knobs.

use std::path::PathBuf;

use kolmo::kam::{KamOptions, SingularOptions};
use kolmo::newton::DiagonalizeOptions;
use kolmo::series::Mode;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub diophantine: DiophantineConfig,
    pub measure: MeasureConfig,
    pub certify: CertifyConfig,
    pub diagonalize: DiagonalizeConfig,
    pub kam: KamConfig,
    pub kam_singular: SingularConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("kolmo-out"),
            diophantine: DiophantineConfig::default(),
            measure: MeasureConfig::default(),
            certify: CertifyConfig::default(),
            diagonalize: DiagonalizeConfig::default(),
            kam: KamConfig::default(),
            kam_singular: SingularConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiophantineConfig {
    pub alpha: Vec<f64>,
    pub nu: f64,
    pub ncut: u64,
}

impl Default for DiophantineConfig {
    fn default() -> Self {
        Self { alpha: vec![1.0, (1.0 + 5f64.sqrt()) / 2.0], nu: 1.0, ncut: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureConfig {
    pub nu: f64,
    /// One CSV row per value.
    pub c: Vec<f64>,
    pub n_box: f64,
    pub samples: u64,
    pub ncut: u64,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self { nu: 1.0, c: vec![1e-3, 5e-4, 2.5e-4], n_box: 1.0, samples: 100_000, ncut: 50 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorChoice {
    Identity,
    /// `∂_{p_i}`
    DP,
    /// `q_i ∂_{q_i}` (torus) or `∂_{q_i}` (singular)
    DQ,
    /// `∂_t` (torus only)
    DT,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyConfig {
    pub operator: OperatorChoice,
    pub index: usize,
    pub mode: Mode,
    pub dim: usize,
    pub trials: u64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self { operator: OperatorChoice::DP, index: 0, mode: Mode::Torus, dim: 2, trials: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagonalizeConfig {
    /// Real part, row-major.
    pub matrix: Vec<Vec<f64>>,
    /// Imaginary part; empty means zero.
    pub matrix_im: Vec<Vec<f64>>,
    pub options: DiagonalizeOptions,
}

impl Default for DiagonalizeConfig {
    fn default() -> Self {
        Self {
            matrix: vec![vec![1.0, 0.1], vec![0.1, 2.0]],
            matrix_im: Vec::new(),
            options: DiagonalizeOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KamConfig {
    /// Hamiltonian JSON; the built-in two-frequency example when absent.
    pub input: Option<PathBuf>,
    pub options: KamOptions,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SingularConfig {
    /// Hamiltonian JSON; the built-in cubic example when absent.
    pub input: Option<PathBuf>,
    pub options: SingularOptions,
}

impl RunConfig {
    /// Checks the numeric preconditions of the section used by `cmd`.
    pub fn validate(&self, cmd: &str) -> Result<(), String> {
        let pos = |name: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { Err(format!("{name} must be positive, got {v}")) };
        match cmd {
            "diophantine" => {
                let d = &self.diophantine;
                if d.alpha.is_empty() || d.alpha.iter().any(|a| !a.is_finite()) {
                    return Err("alpha must be a nonempty vector of finite numbers".into());
                }
                if !(d.nu >= 0.0) {
                    return Err(format!("nu must be nonnegative, got {}", d.nu));
                }
                if d.ncut == 0 {
                    return Err("ncut must be at least 1".into());
                }
            }
            "measure" => {
                let m = &self.measure;
                pos("nu", m.nu)?;
                pos("n_box", m.n_box)?;
                if m.c.is_empty() || m.c.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
                    return Err("c must be a nonempty list of nonnegative numbers".into());
                }
                if m.samples == 0 || m.ncut == 0 {
                    return Err("samples and ncut must be at least 1".into());
                }
            }
            "certify" => {
                let c = &self.certify;
                if c.dim == 0 || c.index >= c.dim {
                    return Err(format!("index {} out of range for dim {}", c.index, c.dim));
                }
                if c.trials == 0 {
                    return Err("trials must be at least 1".into());
                }
                if c.operator == OperatorChoice::DT && c.mode == Mode::Singular {
                    return Err("d-t needs torus mode".into());
                }
            }
            "diagonalize" => {
                let d = &self.diagonalize;
                let n = d.matrix.len();
                if n == 0 || d.matrix.iter().any(|r| r.len() != n) {
                    return Err("matrix must be square and nonempty".into());
                }
                if !d.matrix_im.is_empty() && (d.matrix_im.len() != n || d.matrix_im.iter().any(|r| r.len() != n)) {
                    return Err("matrix_im must match the shape of matrix".into());
                }
                if d.matrix.iter().chain(&d.matrix_im).flatten().any(|x| !x.is_finite()) {
                    return Err("matrix entries must be finite".into());
                }
                let o = &d.options;
                pos("tol", o.tol)?;
                pos("gap_threshold", o.gap_threshold)?;
                if !(o.q > 1.0) {
                    return Err(format!("q must exceed 1, got {}", o.q));
                }
            }
            "kam" => {
                let o = &self.kam.options;
                pos("tol", o.tol)?;
                pos("s0", o.s0)?;
                pos("l", o.l)?;
                pos("t_value_scale", o.t_value_scale)?;
                pos("lie_tol", o.lie_tol)?;
                if !(o.q > 1.0) {
                    return Err(format!("q must exceed 1, got {}", o.q));
                }
            }
            "kam-singular" => {
                let o = &self.kam_singular.options;
                pos("tol", o.tol)?;
                pos("s0", o.s0)?;
                pos("l", o.l)?;
                pos("lie_tol", o.lie_tol)?;
                if !(o.q > 1.0) {
                    return Err(format!("q must exceed 1, got {}", o.q));
                }
            }
            _ => {}
        }
        Ok(())
    }
}
