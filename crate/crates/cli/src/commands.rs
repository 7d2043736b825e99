//! One function per subcommand. Each writes its artifacts under the output
//! directory and returns the process exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use kolmo::arithmetic::{best_constant, measure_estimate, ArithmeticError};
use kolmo::kam::{kam_run, kam_singular_run, KamError, NormalFormResult, SingularHamiltonian, TorusHamiltonian};
use kolmo::newton::{diagonalize_kolmogorov, ConvergenceReport, NewtonError};
use kolmo::operators::{certify_bound, OperatorError, SamplingDomain, ScaledOperator};
use kolmo::series::{Derivative, Mode, MultiIndex, ScaledSeries, Truncation};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{OperatorChoice, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RESONANCE: i32 = 3;
pub const EXIT_NON_DEGENERACY: i32 = 4;
pub const EXIT_NON_CONVERGENCE: i32 = 5;

const MEASURE_HEADER: &str = "# kolmo measure v1";
const SAMPLES_HEADER: &str = "# kolmo bound samples v1";

/// Failure with an exit code and an optional ledger to write before exiting.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    pub report: Option<ConvergenceReport>,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { code: EXIT_VALIDATION, message: message.into(), report: None }
    }
}

impl From<ArithmeticError> for Failure {
    fn from(e: ArithmeticError) -> Self {
        Failure::validation(e.to_string())
    }
}

impl From<OperatorError> for Failure {
    fn from(e: OperatorError) -> Self {
        Failure::validation(e.to_string())
    }
}

impl From<NewtonError> for Failure {
    fn from(e: NewtonError) -> Self {
        let message = e.to_string();
        match e {
            NewtonError::Resonance { .. } => Self { code: EXIT_RESONANCE, message, report: None },
            NewtonError::NonConvergence(r) => Self { code: EXIT_NON_CONVERGENCE, message, report: Some(*r) },
            _ => Failure::validation(message),
        }
    }
}

impl From<KamError> for Failure {
    fn from(e: KamError) -> Self {
        let message = e.to_string();
        match e {
            KamError::Resonance { report, .. } => Self { code: EXIT_RESONANCE, message, report: report.map(|r| *r) },
            KamError::NonDegeneracy { report, .. } => {
                Self { code: EXIT_NON_DEGENERACY, message, report: report.map(|r| *r) }
            }
            KamError::NonConvergence(r) => Self { code: EXIT_NON_CONVERGENCE, message, report: Some(*r) },
            KamError::Newton(n) => n.into(),
            _ => Failure::validation(message),
        }
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure::validation(format!("i/o error: {e}"))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join(name), text).map_err(io)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::validation(e.to_string()))?;
    text.push('\n');
    write(dir, name, &text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))
}

pub fn diophantine(cfg: &RunConfig) -> Result<i32, Failure> {
    let d = &cfg.diophantine;
    let cert = best_constant(&d.alpha, d.nu, d.ncut)?;
    write_json(&cfg.out, "certificate.json", &cert)?;
    println!("C = {:e} (worst j = {:?})", cert.c, cert.worst_j);
    Ok(if cert.c > 0.0 { EXIT_OK } else { EXIT_VERDICT })
}

pub fn measure(cfg: &RunConfig) -> Result<i32, Failure> {
    let m = &cfg.measure;
    let mut csv = format!("{MEASURE_HEADER}\nc,empirical_fraction,sigma,paper_bound\n");
    let mut ok = true;
    for &c in &m.c {
        let est = measure_estimate(m.nu, c, m.n_box, m.samples, m.ncut, cfg.seed)?;
        ok &= est.empirical_fraction <= est.paper_bound + 3.0 * est.sigma;
        writeln!(csv, "{:e},{:e},{:e},{:e}", est.c, est.empirical_fraction, est.sigma, est.paper_bound).unwrap();
    }
    write(&cfg.out, "measure.csv", &csv)?;
    println!("{} rows, bound {}", m.c.len(), if ok { "holds" } else { "violated" });
    Ok(if ok { EXIT_OK } else { EXIT_VERDICT })
}

pub fn certify(cfg: &RunConfig) -> Result<i32, Failure> {
    let c = &cfg.certify;
    let op = match c.operator {
        OperatorChoice::Identity => ScaledOperator::identity(),
        OperatorChoice::DP => ScaledOperator::derivation(c.mode, Derivative::P(c.index))?,
        OperatorChoice::DQ => {
            let which = match c.mode {
                Mode::Torus => Derivative::QLog(c.index),
                Mode::Singular => Derivative::Q(c.index),
            };
            ScaledOperator::derivation(c.mode, which)?
        }
        OperatorChoice::DT => ScaledOperator::derivation(c.mode, Derivative::T)?,
    };
    let domain = match c.mode {
        Mode::Torus => SamplingDomain::torus(c.dim),
        Mode::Singular => SamplingDomain::singular(c.dim),
    };
    let cert = certify_bound(&op, op.order(), c.trials, cfg.seed, &domain).map_err(|e| Failure::validation(e.to_string()))?;
    let mut csv = format!("{SAMPLES_HEADER}\ns,t,ratio,declared\n");
    for b in &cert.samples {
        writeln!(csv, "{:e},{:e},{:e},{:e}", b.s, b.t, b.ratio, b.declared).unwrap();
    }
    write(&cfg.out, "bound_samples.csv", &csv)?;
    write_json(&cfg.out, "bound.json", &cert)?;
    println!("order {}: C_emp = {:e}, declared = {:e}, {}", cert.order, cert.c_emp, cert.declared, if cert.pass { "pass" } else { "FAIL" });
    Ok(if cert.pass { EXIT_OK } else { EXIT_VERDICT })
}

#[derive(Serialize)]
struct MatrixOut {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl From<&DMatrix<Complex64>> for MatrixOut {
    fn from(m: &DMatrix<Complex64>) -> Self {
        let rows = |f: fn(&Complex64) -> f64| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect();
        Self { re: rows(|z| z.re), im: rows(|z| z.im) }
    }
}

#[derive(Serialize)]
struct DiagonalizationOut {
    g: MatrixOut,
    d_re: Vec<f64>,
    d_im: Vec<f64>,
    cond_g: f64,
    xi_norms: Vec<f64>,
    g_steps: Vec<f64>,
    report: ConvergenceReport,
}

pub fn diagonalize(cfg: &RunConfig) -> Result<i32, Failure> {
    let d = &cfg.diagonalize;
    let n = d.matrix.len();
    let a = DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(d.matrix[i][j], d.matrix_im.get(i).map_or(0.0, |r| r[j]))
    });
    let res = diagonalize_kolmogorov(&a, &d.options)?;
    write(&cfg.out, "report.csv", &res.report.to_csv())?;
    let out = DiagonalizationOut {
        g: (&res.g).into(),
        d_re: res.d.iter().map(|z| z.re).collect(),
        d_im: res.d.iter().map(|z| z.im).collect(),
        cond_g: res.cond_g,
        xi_norms: res.xi_norms.clone(),
        g_steps: res.g_steps.clone(),
        report: res.report.clone(),
    };
    write_json(&cfg.out, "diagonalization.json", &out)?;
    println!("{} steps, cond(g) = {:.3}, verdict {}", res.report.steps(), res.cond_g, res.report.verdict);
    Ok(if res.report.verdict { EXIT_OK } else { EXIT_VERDICT })
}

/// `α = (1, φ)`, `β = 2·I`, `R = t·cos θ₁·(1 + p₁)`.
pub fn example_torus() -> TorusHamiltonian {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let tr = Truncation::new(12, 4, 4);
    let idx = |i: i32, j: u32| MultiIndex::new(vec![i, 0], vec![j, 0], 1);
    let half = Complex64::new(0.5, 0.0);
    let terms = [(idx(1, 0), half), (idx(-1, 0), half), (idx(1, 1), half), (idx(-1, 1), half)];
    let r = ScaledSeries::from_terms(2, Mode::Torus, tr, true, terms).expect("valid example");
    TorusHamiltonian::new(vec![1.0, phi], vec![vec![2.0, 0.0], vec![0.0, 2.0]], r).expect("valid example")
}

/// `ω = 1`, `R = q³ + 0.05 q²p + 0.1 q²p²`, truncated at total degree 8.
pub fn example_singular() -> SingularHamiltonian {
    let tr = Truncation::total_degree(8);
    let terms = [
        (MultiIndex::new(vec![3], vec![0], 0), Complex64::new(1.0, 0.0)),
        (MultiIndex::new(vec![2], vec![1], 0), Complex64::new(0.05, 0.0)),
        (MultiIndex::new(vec![2], vec![2], 0), Complex64::new(0.1, 0.0)),
    ];
    let r = ScaledSeries::from_terms(1, Mode::Singular, tr, true, terms).expect("valid example");
    SingularHamiltonian::new(vec![1.0], r).expect("valid example")
}

fn emit_normal_form(cfg: &RunConfig, res: &NormalFormResult) -> Result<i32, Failure> {
    write(&cfg.out, "report.csv", &res.report.to_csv())?;
    write_json(&cfg.out, "normal_form.json", res)?;
    for w in &res.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{} steps, residual {:e}, order {}, verdict {}",
        res.report.steps(),
        res.residual.error_norm,
        res.report.order.map_or("n/a".to_string(), |o| format!("{o:.3}")),
        res.report.verdict
    );
    Ok(if res.report.verdict && res.report.converged { EXIT_OK } else { EXIT_VERDICT })
}

pub fn kam(cfg: &RunConfig) -> Result<i32, Failure> {
    let ham = match &cfg.kam.input {
        Some(p) => read_json::<TorusHamiltonian>(p)?,
        None => example_torus(),
    };
    ham.validate()?;
    let res = kam_run(&ham, &cfg.kam.options)?;
    emit_normal_form(cfg, &res)
}

pub fn kam_singular(cfg: &RunConfig) -> Result<i32, Failure> {
    let ham = match &cfg.kam_singular.input {
        Some(p) => read_json::<SingularHamiltonian>(p)?,
        None => example_singular(),
    };
    ham.validate()?;
    let res = kam_singular_run(&ham, &cfg.kam_singular.options)?;
    emit_normal_form(cfg, &res)
}

/// Writes the ledger carried by a failure, if any.
pub fn write_failure_report(cfg: &RunConfig, f: &Failure) {
    if let Some(r) = &f.report {
        let _ = write(&cfg.out, "report.csv", &r.to_csv());
    }
}
