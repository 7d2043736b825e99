use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub n: usize,
    pub s_n: f64,
    pub e_n: f64,
    /// Norm of the transversal correction made at this step, if any.
    pub alpha_n: Option<f64>,
    /// `ρ^{q^n}`.
    pub envelope: f64,
}

/// Per-iteration norms with fitted convergence data.
///
/// The verdict compares the errors with the envelope `ρ^{q^n}`; it is
/// computed, never enforced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub iterations: Vec<IterationRecord>,
    pub q: f64,
    pub rho: f64,
    /// `ρ` was fitted as `e_0 · max(K, 1)` rather than supplied.
    pub rho_fitted: bool,
    /// `max e_{n+1}/e_n²` over the pre-saturation window.
    pub k_fit: f64,
    /// Slope of `log e_{n+1}` against `log e_n` (needs two pre-saturation pairs).
    pub order: Option<f64>,
    /// Errors below this are treated as round-off and excluded from fits.
    pub noise_floor: f64,
    pub verdict: bool,
    pub converged: bool,
    /// Sufficient condition `2^{k(n+1)/l} ρ^{(2−q)q^n} ≤ 1` for all recorded `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sufficient_condition: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basin_ok: Option<bool>,
    /// `Σ ‖α_n‖`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_total: Option<f64>,
    /// `R Σ ρ^{2^i}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_ok: Option<bool>,
}

const CSV_HEADER: &str = "# kolmo convergence report v1";

impl ConvergenceReport {
    pub fn errors(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.e_n).collect()
    }

    pub fn last_error(&self) -> f64 {
        self.iterations.last().map_or(f64::NAN, |r| r.e_n)
    }

    /// Number of steps taken (records minus the initial one).
    pub fn steps(&self) -> usize {
        self.iterations.len().saturating_sub(1)
    }

    /// `e_n ≤ ρ^{q^n}` for every record (round-off excepted), for another `q`.
    pub fn envelope_holds(&self, q: f64) -> bool {
        self.rho < 1.0
            && self
                .iterations
                .iter()
                .all(|r| r.e_n <= self.rho.powf(q.powi(r.n as i32)) * (1.0 + 1e-12) || r.e_n <= self.noise_floor)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{CSV_HEADER}").unwrap();
        writeln!(out, "n,s_n,e_n,alpha_n,envelope").unwrap();
        for r in &self.iterations {
            let alpha = r.alpha_n.map(|a| format!("{a:e}")).unwrap_or_default();
            writeln!(out, "{},{:e},{:e},{},{:e}", r.n, r.s_n, r.e_n, alpha, r.envelope).unwrap();
        }
        out
    }
}

/// Collects `(s_n, e_n, α_n)` and produces the fitted report.
#[derive(Clone, Debug, Default)]
pub struct ReportBuilder {
    rows: Vec<(f64, f64, Option<f64>)>,
}

impl ReportBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, s_n: f64, e_n: f64, alpha_n: Option<f64>) {
        self.rows.push((s_n, e_n, alpha_n));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Fits `K`, `ρ` (unless given) and the order; evaluates the envelope.
    pub fn finish(&self, q: f64, rho: Option<f64>, noise_floor: f64, converged: bool) -> ConvergenceReport {
        let e: Vec<f64> = self.rows.iter().map(|r| r.1).collect();
        let live = |x: f64| x > noise_floor;
        let mut k_fit: f64 = 0.0;
        let mut pts = Vec::new();
        for w in e.windows(2) {
            if live(w[0]) && live(w[1]) {
                k_fit = k_fit.max(w[1] / (w[0] * w[0]));
                pts.push((w[0].ln(), w[1].ln()));
            }
        }
        let order = slope(&pts);
        let e0 = e.first().copied().unwrap_or(0.0);
        let (rho, rho_fitted) = match rho {
            Some(r) => (r, false),
            None => (e0 * k_fit.max(1.0), true),
        };
        let iterations: Vec<IterationRecord> = self
            .rows
            .iter()
            .enumerate()
            .map(|(n, &(s_n, e_n, alpha_n))| IterationRecord {
                n,
                s_n,
                e_n,
                alpha_n,
                envelope: rho.powf(q.powi(n as i32)),
            })
            .collect();
        let verdict = rho < 1.0
            && iterations
                .iter()
                .all(|r| r.e_n <= r.envelope * (1.0 + 1e-12) || r.e_n <= noise_floor);
        ConvergenceReport {
            iterations,
            q,
            rho,
            rho_fitted,
            k_fit,
            order,
            noise_floor,
            verdict,
            converged,
            sufficient_condition: None,
            basin_ok: None,
            drift_total: None,
            drift_budget: None,
            budget_ok: None,
        }
    }
}

/// Least-squares slope; `None` with fewer than two points.
fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}
