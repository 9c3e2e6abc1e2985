//! Log-domain power-law fits of bandwidth and transmit power against
//! distance, parameter-range checks, and the bivariate polynomial surface
//! used to approximate the open distance.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acoustics::Environment;
use crate::error::{Error, Result};
use crate::linkbudget::{HopBudget, LinkBudget, UPA_TO_WATT};
use crate::numeric::logspace;

/// Power-law channel model for one target SNR:
/// `B(l) = omega * l^-lambda` (kHz) and `P_T(l) = psi * l^gamma` (W).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitModel {
    pub omega: f64,
    pub lambda: f64,
    /// Acoustic power scale in uPa.
    pub delta: f64,
    /// Electrical power scale in W.
    pub psi: f64,
    pub gamma: f64,
    pub snr0_db: f64,
}

/// Reference constants for the default environment, as published with the
/// original fits. `psi` follows `log10 psi = 0.1 SNR0 + PUBLISHED_PSI_INTERCEPT`.
pub const PUBLISHED_LOG10_OMEGA: f64 = 1.4291;
pub const PUBLISHED_LAMBDA: f64 = 0.5392;
pub const PUBLISHED_GAMMA: f64 = 2.2074;
pub const PUBLISHED_PSI_SLOPE: f64 = 0.1;
pub const PUBLISHED_PSI_INTERCEPT: f64 = -4.9040;

impl FitModel {
    /// The published parameter set at target SNR `snr0_db`.
    pub fn published(snr0_db: f64, env: &Environment) -> Self {
        let psi = 10f64.powf(PUBLISHED_PSI_SLOPE * snr0_db + PUBLISHED_PSI_INTERCEPT);
        Self {
            omega: 10f64.powf(PUBLISHED_LOG10_OMEGA),
            lambda: PUBLISHED_LAMBDA,
            delta: psi * env.eta / UPA_TO_WATT,
            psi,
            gamma: PUBLISHED_GAMMA,
            snr0_db,
        }
    }

    /// Bandwidth in kHz at distance `l_km`.
    pub fn bandwidth_khz(&self, l_km: f64) -> f64 {
        self.omega * l_km.powf(-self.lambda)
    }

    /// Electrical transmit power in W at distance `l_km`.
    pub fn transmit_power_w(&self, l_km: f64) -> f64 {
        self.psi * l_km.powf(self.gamma)
    }

    pub fn range_violations(&self) -> Vec<RangeViolation> {
        validate_ranges(self)
    }

    pub fn validate(&self) -> Result<()> {
        let v = validate_ranges(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parameter {
    Omega,
    Psi,
    Lambda,
    Gamma,
}

/// One failed admissible-range constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeViolation {
    pub parameter: Parameter,
    pub value: f64,
    pub constraint: String,
}

impl fmt::Display for RangeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (got {})", self.constraint, self.value)
    }
}

/// Checks the admissible parameter regions the closed-form analysis relies on.
pub fn validate_ranges(model: &FitModel) -> Vec<RangeViolation> {
    let mut out = Vec::new();
    let mut check = |ok: bool, parameter, value, constraint: &str| {
        if !ok {
            out.push(RangeViolation {
                parameter,
                value,
                constraint: constraint.to_owned(),
            });
        }
    };
    check(model.omega > 0.0, Parameter::Omega, model.omega, "Ω: ω > 0");
    check(model.psi > 0.0, Parameter::Psi, model.psi, "Ψ: ψ > 0");
    check(
        model.lambda > 0.5 && model.lambda < 0.6,
        Parameter::Lambda,
        model.lambda,
        "Λ: 0.5 < λ < 0.6",
    );
    check(
        model.gamma > 2.1 && model.gamma < 2.3,
        Parameter::Gamma,
        model.gamma,
        "Γ: 2.1 < γ < 2.3",
    );
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

/// Least-squares solve of `design * beta = y` with column equilibration:
/// Householder QR, then an SVD of the square triangular factor for the rank
/// test and the solve. Fails if the design is numerically rank deficient.
fn least_squares(design: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let (rows, cols) = design.shape();
    if rows < cols {
        return Err(Error::Rank(format!("{rows} samples for {cols} unknowns")));
    }
    let scales: Vec<f64> = (0..cols)
        .map(|j| design.column(j).amax())
        .map(|s| if s > 0.0 { s } else { 1.0 })
        .collect();
    let mut scaled = design.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).unscale_mut(*s);
    }
    let qr = scaled.qr();
    let qty = qr.q().tr_mul(y);
    let svd = qr.r().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax.is_nan() || smax <= 0.0 || smin <= smax * 1e-12 {
        return Err(Error::Rank(format!(
            "design matrix condition {smax:e}/{smin:e}"
        )));
    }
    let beta = svd
        .solve(&qty, 0.0)
        .map_err(|e| Error::Rank(e.to_owned()))?;
    Ok(DVector::from_iterator(
        cols,
        beta.iter().zip(&scales).map(|(b, s)| b / s),
    ))
}

/// Ordinary least-squares line `y = slope * x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<Line> {
    if xs.len() != ys.len() {
        return Err(Error::Rank("x and y lengths differ".into()));
    }
    if xs.len() < 2 {
        return Err(Error::Rank(format!("{} sample(s), need at least 2", xs.len())));
    }
    if xs.iter().any(|x| !x.is_finite()) || ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::Rank("non-finite sample".into()));
    }
    if xs.iter().all(|&x| x == xs[0]) {
        return Err(Error::Rank("all abscissae identical".into()));
    }
    // centring keeps the two columns well separated
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let design = DMatrix::from_fn(xs.len(), 2, |r, c| if c == 0 { xs[r] - mean } else { 1.0 });
    let beta = least_squares(&design, &DVector::from_column_slice(ys))?;
    Ok(Line {
        slope: beta[0],
        intercept: beta[1] - beta[0] * mean,
    })
}

fn log_log(samples: &[(f64, f64)]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    for &(l, v) in samples {
        if !(l > 0.0 && v > 0.0) {
            return Err(Error::domain("sample", if l > 0.0 { v } else { l }, "distances and values must be > 0"));
        }
        xs.push(l.log10());
        ys.push(v.log10());
    }
    Ok((xs, ys))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthFit {
    pub omega: f64,
    pub lambda: f64,
}

/// Fits `B = omega * l^-lambda` to `(l km, B kHz)` samples.
pub fn fit_bandwidth_model(samples: &[(f64, f64)]) -> Result<BandwidthFit> {
    let (xs, ys) = log_log(samples)?;
    let line = fit_line(&xs, &ys)?;
    Ok(BandwidthFit {
        omega: 10f64.powf(line.intercept),
        lambda: -line.slope,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub psi: f64,
    pub gamma: f64,
    pub delta: f64,
}

/// Fits `P_T = psi * l^gamma` to `(l km, P_T W)` samples and back-computes
/// the acoustic scale `delta` in uPa.
pub fn fit_power_model(samples: &[(f64, f64)], _snr0_db: f64, env: &Environment) -> Result<PowerFit> {
    let (xs, ys) = log_log(samples)?;
    let line = fit_line(&xs, &ys)?;
    let psi = 10f64.powf(line.intercept);
    Ok(PowerFit {
        psi,
        gamma: line.slope,
        delta: psi * env.eta / UPA_TO_WATT,
    })
}

/// Exact per-distance budgets, computed in parallel.
pub fn sample_channel(lb: &LinkBudget, distances: &[f64]) -> Result<Vec<(f64, HopBudget)>> {
    distances
        .par_iter()
        .map(|&l| lb.hop_budget(l).map(|h| (l, h)))
        .collect()
}

/// Default fitting grid: 60 log-spaced distances over [1, 100] km.
pub fn default_fit_distances() -> Vec<f64> {
    logspace(1.0, 100.0, 60)
}

/// Fits one [`FitModel`] per target SNR from pre-computed channel samples.
pub fn fit_models_from_samples(
    samples: &[(f64, HopBudget)],
    snrs_db: &[f64],
    env: &Environment,
) -> Result<Vec<FitModel>> {
    let bw: Vec<(f64, f64)> = samples.iter().map(|(l, h)| (*l, h.band.width_khz)).collect();
    let b = fit_bandwidth_model(&bw)?;
    snrs_db
        .iter()
        .map(|&snr| {
            let pw: Vec<(f64, f64)> = samples
                .iter()
                .map(|(l, h)| (*l, h.acoustic_power(snr) * UPA_TO_WATT / env.eta))
                .collect();
            let p = fit_power_model(&pw, snr, env)?;
            Ok(FitModel {
                omega: b.omega,
                lambda: b.lambda,
                delta: p.delta,
                psi: p.psi,
                gamma: p.gamma,
                snr0_db: snr,
            })
        })
        .collect()
}

/// Samples the exact link budget on `distances` and fits every SNR.
pub fn fit_models(lb: &LinkBudget, distances: &[f64], snrs_db: &[f64]) -> Result<Vec<FitModel>> {
    let samples = sample_channel(lb, distances)?;
    fit_models_from_samples(&samples, snrs_db, &lb.env)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiTrend {
    /// Change of `log10 psi` per dB of target SNR.
    pub slope_per_db: f64,
    pub intercept: f64,
}

impl PsiTrend {
    pub fn psi(&self, snr0_db: f64) -> f64 {
        10f64.powf(self.slope_per_db * snr0_db + self.intercept)
    }
}

/// Line of `log10 psi` against target SNR in dB.
pub fn fit_psi_trend(models: &[FitModel]) -> Result<PsiTrend> {
    let xs: Vec<f64> = models.iter().map(|m| m.snr0_db).collect();
    let ys = models
        .iter()
        .map(|m| {
            if m.psi > 0.0 {
                Ok(m.psi.log10())
            } else {
                Err(Error::domain("psi", m.psi, "must be > 0"))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let line = fit_line(&xs, &ys)?;
    Ok(PsiTrend {
        slope_per_db: line.slope,
        intercept: line.intercept,
    })
}

/// `z(x, y) = sum f_ij x^i y^j` over `i <= m`, `j <= n`, `i + j <= max(m, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolySurface {
    pub m: usize,
    pub n: usize,
    /// `rows[i][j] = f_ij`; row `i` holds the admissible `j` in order.
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Deserialize)]
struct CoefficientTable {
    m: usize,
    n: usize,
    coefficients: Vec<Coefficient>,
}

const PUBLISHED_SURFACE: &str = include_str!("../data/open_distance_coeffs.json");

impl PolySurface {
    /// Admissible `(i, j)` exponent pairs in row-major order.
    pub fn monomials(m: usize, n: usize) -> Vec<(usize, usize)> {
        let cap = m.max(n);
        (0..=m)
            .flat_map(|i| (0..=n).filter(move |&j| i + j <= cap).map(move |j| (i, j)))
            .collect()
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        let cap = m.max(n);
        let rows = (0..=m).map(|i| vec![0.0; n.min(cap - i) + 1]).collect();
        Self { m, n, rows }
    }

    pub fn from_coefficients(m: usize, n: usize, coeffs: &[Coefficient]) -> Result<Self> {
        let mut s = Self::zeros(m, n);
        for c in coeffs {
            match s.rows.get_mut(c.i).and_then(|r| r.get_mut(c.j)) {
                Some(slot) => *slot = c.value,
                None => {
                    return Err(Error::Fit(format!(
                        "coefficient ({}, {}) outside the degree-({m}, {n}) triangle",
                        c.i, c.j
                    )))
                }
            }
        }
        Ok(s)
    }

    /// Parses a row-major `{m, n, coefficients: [{i, j, value}]}` table.
    pub fn from_json(text: &str) -> Result<Self> {
        let t: CoefficientTable =
            serde_json::from_str(text).map_err(|e| Error::Fit(format!("bad coefficient table: {e}")))?;
        Self::from_coefficients(t.m, t.n, &t.coefficients)
    }

    /// The shipped degree-(5, 5) reference surface.
    pub fn published() -> Self {
        Self::from_json(PUBLISHED_SURFACE).expect("bundled coefficient table is valid")
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.rows.get(i).and_then(|r| r.get(j)).copied()
    }

    pub fn coefficients(&self) -> Vec<Coefficient> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &value)| Coefficient { i, j, value }))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nested Horner evaluation.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.rows.iter().rev().fold(0.0, |acc, row| {
            acc * x + row.iter().rev().fold(0.0, |a, &c| a * y + c)
        })
    }
}

pub fn eval_surface(s: &PolySurface, log10_pr: f64, snr0_db: f64) -> f64 {
    s.eval(log10_pr, snr0_db)
}

/// Goodness of fit, computed on the z values the surface was fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoFReport {
    pub sse: f64,
    /// Residual standard error, `sqrt(SSE / (N - p))`.
    pub rmse: f64,
    pub r2: f64,
    pub adj_r2: f64,
    pub points: usize,
    pub coefficients: usize,
}

impl GoFReport {
    pub fn from_residuals(z: &[f64], residuals: &[f64], coefficients: usize) -> Self {
        let n = z.len();
        let mean = z.iter().sum::<f64>() / n as f64;
        let sst: f64 = z.iter().map(|v| (v - mean).powi(2)).sum();
        let sse: f64 = residuals.iter().map(|r| r * r).sum();
        let dof = n.saturating_sub(coefficients).max(1) as f64;
        let r2 = if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };
        let adj_r2 = if sst > 0.0 {
            1.0 - (sse / dof) / (sst / (n as f64 - 1.0))
        } else {
            1.0
        };
        Self {
            sse,
            rmse: (sse / dof).sqrt(),
            r2,
            adj_r2,
            points: n,
            coefficients,
        }
    }
}

/// One observation `(log10 P_R, SNR0 dB, log10 l_OP)`.
pub type SurfacePoint = (f64, f64, f64);

/// Least-squares fit of a degree-(m, n) triangular polynomial surface.
pub fn fit_open_distance_surface(points: &[SurfacePoint], m: usize, n: usize) -> Result<(PolySurface, GoFReport)> {
    if m < 1 || n < 1 {
        return Err(Error::Fit(format!("degrees must be >= 1 (got {m}, {n})")));
    }
    let terms = PolySurface::monomials(m, n);
    if points.len() <= terms.len() {
        return Err(Error::Fit(format!(
            "{} points cannot determine {} coefficients",
            points.len(),
            terms.len()
        )));
    }
    let design = DMatrix::from_fn(points.len(), terms.len(), |r, c| {
        let (x, y, _) = points[r];
        let (i, j) = terms[c];
        x.powi(i as i32) * y.powi(j as i32)
    });
    let z: Vec<f64> = points.iter().map(|p| p.2).collect();
    let beta = least_squares(&design, &DVector::from_column_slice(&z))
        .map_err(|e| Error::Fit(e.to_string()))?;
    let coeffs: Vec<Coefficient> = terms
        .iter()
        .zip(beta.iter())
        .map(|(&(i, j), &value)| Coefficient { i, j, value })
        .collect();
    let surface = PolySurface::from_coefficients(m, n, &coeffs)?;
    let residuals: Vec<f64> = points.iter().map(|&(x, y, z)| z - surface.eval(x, y)).collect();
    let gof = GoFReport::from_residuals(&z, &residuals, terms.len());
    Ok((surface, gof))
}
