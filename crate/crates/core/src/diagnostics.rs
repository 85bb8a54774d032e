//! Residual diagnostics: generalized Cox–Snell (GCS), randomized quantile
//! (RQ) and U residuals, their reference moments, simulated QQ envelopes and
//! the Ljung–Box check on raw residuals.
//!
//! RQ follows the printed definition Φ⁻¹(Ŝ(tᵢ)), the negative of the more
//! common Φ⁻¹(F̂(tᵢ)). Both are standard normal under the model.
//!
//! Kurtosis here is non-excess (m₄/m₂²), so RQ targets 3.

use crate::dist::{GammaMixture, LbsParams};
use crate::error::{LbsError, Result};
use crate::numeric::{brent, quantile_sorted, SampleMoments};
use crate::regression::{fit as refit, FitOptions, FitResult, RegressionSpec};
use crate::rng::stream;
use crate::special::{chi_square_sf, norm_quantile};
use nalgebra::DVector;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// Ŝ is clamped to [S_CLAMP, 1 − S_CLAMP] before Φ⁻¹.
pub const S_CLAMP: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResidualKind {
    Gcs,
    Rq,
    U,
}

impl ResidualKind {
    pub const ALL: [ResidualKind; 3] = [ResidualKind::Gcs, ResidualKind::Rq, ResidualKind::U];

    pub fn name(self) -> &'static str {
        match self {
            ResidualKind::Gcs => "gcs",
            ResidualKind::Rq => "rq",
            ResidualKind::U => "u",
        }
    }
}

impl fmt::Display for ResidualKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ResidualKind {
    type Err = LbsError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gcs" => Ok(ResidualKind::Gcs),
            "rq" => Ok(ResidualKind::Rq),
            "u" => Ok(ResidualKind::U),
            other => Err(LbsError::Config(format!("unknown residual kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSet {
    pub gcs: Vec<f64>,
    pub rq: Vec<f64>,
    pub u: Vec<f64>,
    pub theta: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Observations whose Ŝ had to be clamped for RQ.
    pub clamped: usize,
}

impl ResidualSet {
    pub fn get(&self, kind: ResidualKind) -> &[f64] {
        match kind {
            ResidualKind::Gcs => &self.gcs,
            ResidualKind::Rq => &self.rq,
            ResidualKind::U => &self.u,
        }
    }

    pub fn len(&self) -> usize {
        self.gcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gcs.is_empty()
    }
}

/// Residuals of `t` under per-observation parameters.
pub fn residuals_from_params(t: &[f64], params: &[LbsParams]) -> Result<ResidualSet> {
    if t.len() != params.len() {
        return Err(LbsError::InvalidParameter(
            "response and parameter lengths differ".into(),
        ));
    }
    let n = t.len();
    let mut out = ResidualSet {
        gcs: Vec::with_capacity(n),
        rq: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
        theta: Vec::with_capacity(n),
        alpha: Vec::with_capacity(n),
        clamped: 0,
    };
    for (&ti, d) in t.iter().zip(params) {
        // −ln Ŝ from the log-space survival keeps GCS finite far in the tail
        out.gcs.push(-d.ln_survival(ti)?);
        let s = d.survival(ti)?;
        let sc = s.clamp(S_CLAMP, 1.0 - S_CLAMP);
        if sc != s {
            out.clamped += 1;
        }
        out.rq.push(norm_quantile(sc));
        out.u.push(d.u_transform(ti));
        out.theta.push(d.theta());
        out.alpha.push(d.alpha());
    }
    Ok(out)
}

pub fn residuals_at(spec: &RegressionSpec, delta: &DVector<f64>) -> Result<ResidualSet> {
    residuals_from_params(spec.response(), &spec.fitted_params(delta)?)
}

pub fn residuals(spec: &RegressionSpec, fit: &FitResult) -> Result<ResidualSet> {
    residuals_at(spec, &fit.delta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceMoments {
    pub mean: f64,
    pub sd: f64,
    /// Skewness m₃/m₂^{3/2}.
    pub cs: f64,
    /// Non-excess kurtosis m₄/m₂².
    pub ck: f64,
}

/// Reference mean, SD, skewness and kurtosis. `alpha` only matters for U.
pub fn reference_moments(kind: ResidualKind, alpha: f64) -> ReferenceMoments {
    match kind {
        ResidualKind::Gcs => ReferenceMoments {
            mean: 1.0,
            sd: 1.0,
            cs: 2.0,
            ck: 9.0,
        },
        ResidualKind::Rq => ReferenceMoments {
            mean: 0.0,
            sd: 1.0,
            cs: 0.0,
            ck: 3.0,
        },
        ResidualKind::U => {
            let a2 = alpha * alpha;
            let d = 6.0 * a2 * a2 + 24.0 * a2 + 8.0;
            ReferenceMoments {
                mean: 3.0 - 4.0 / (a2 + 2.0),
                sd: (6.0 - 16.0 / ((a2 + 2.0) * (a2 + 2.0))).sqrt(),
                cs: 8.0 * (3.0 * a2.powi(3) + 18.0 * a2 * a2 + 36.0 * a2 + 8.0) / d.powf(1.5),
                ck: 12.0 * (21.0 * a2.powi(4) + 168.0 * a2.powi(3) + 456.0 * a2 * a2 + 480.0 * a2 + 80.0) / (d * d),
            }
        }
    }
}

/// Sample moments in the same convention as [`ReferenceMoments`].
pub fn sample_moments(x: &[f64]) -> Option<ReferenceMoments> {
    SampleMoments::from_slice(x).map(|m| ReferenceMoments {
        mean: m.mean,
        sd: m.sd,
        cs: m.skewness,
        ck: m.kurtosis,
    })
}

/// Quantile of the equal-weight average of the U mixtures at `alphas`.
pub fn u_average_quantile(alphas: &[f64], p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(LbsError::Domain(format!("quantile level {p} outside (0,1)")));
    }
    let mixtures: Vec<GammaMixture> = alphas.iter().map(|&a| GammaMixture::new(a)).collect();
    if mixtures.is_empty() {
        return Err(LbsError::InvalidParameter("no alpha values".into()));
    }
    let k = mixtures.len() as f64;
    let cdf = |u: f64| mixtures.iter().map(|m| m.cdf(u)).sum::<f64>() / k;
    let mut hi = 1.0;
    while cdf(hi) < p {
        hi *= 2.0;
    }
    Ok(brent(|u| cdf(u) - p, 0.0, hi, 1e-12, 300)?.0)
}

/// Reference quantiles at plotting positions (i − ½)/n.
pub fn theoretical_quantiles(kind: ResidualKind, n: usize, alphas: &[f64]) -> Result<Vec<f64>> {
    (1..=n)
        .map(|i| {
            let p = (i as f64 - 0.5) / n as f64;
            match kind {
                ResidualKind::Gcs => Ok(-(-p).ln_1p()),
                ResidualKind::Rq => Ok(norm_quantile(p)),
                ResidualKind::U => u_average_quantile(alphas, p),
            }
        })
        .collect()
}

/// Pointwise simulated band for a QQ plot.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeBand {
    pub kind: ResidualKind,
    pub level: f64,
    pub theoretical: Vec<f64>,
    /// Sorted observed residuals.
    pub observed: Vec<f64>,
    pub lo: Vec<f64>,
    pub median: Vec<f64>,
    pub hi: Vec<f64>,
    /// Observed order statistics outside [lo, hi].
    pub outside: usize,
    /// Simulations that contributed to the band.
    pub simulations: usize,
    pub failures: usize,
}

impl EnvelopeBand {
    pub fn fraction_inside(&self) -> f64 {
        1.0 - self.outside as f64 / self.observed.len() as f64
    }
}

/// Per-order-statistic quantiles of simulated sorted residual vectors.
pub fn band_from_simulations(
    kind: ResidualKind,
    observed: &[f64],
    simulated: &[Vec<f64>],
    theoretical: Vec<f64>,
    level: f64,
) -> Result<EnvelopeBand> {
    if !(level > 0.0 && level < 1.0) {
        return Err(LbsError::InvalidParameter(format!(
            "level must lie in (0, 1), got {level}"
        )));
    }
    let n = observed.len();
    if simulated.is_empty() {
        return Err(LbsError::Unavailable("no simulated residual sets".into()));
    }
    if simulated.iter().any(|s| s.len() != n) || theoretical.len() != n {
        return Err(LbsError::InvalidParameter("residual vectors differ in length".into()));
    }
    let mut obs = observed.to_vec();
    obs.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let (mut lo, mut med, mut hi) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let mut col = vec![0.0; simulated.len()];
    for i in 0..n {
        for (c, s) in col.iter_mut().zip(simulated) {
            *c = s[i];
        }
        col.sort_by(f64::total_cmp);
        lo.push(quantile_sorted(&col, tail));
        med.push(quantile_sorted(&col, 0.5));
        hi.push(quantile_sorted(&col, 1.0 - tail));
    }
    let outside = (0..n).filter(|&i| obs[i] < lo[i] || obs[i] > hi[i]).count();
    Ok(EnvelopeBand {
        kind,
        level,
        theoretical,
        observed: obs,
        lo,
        median: med,
        hi,
        outside,
        simulations: simulated.len(),
        failures: 0,
    })
}

/// Simulated envelope: `m` responses drawn from the fitted model, each
/// refitted, residuals sorted. Simulation `k` uses stream (seed, k).
pub fn envelope(
    spec: &RegressionSpec,
    fit: &FitResult,
    kind: ResidualKind,
    m: usize,
    level: f64,
    seed: u64,
) -> Result<EnvelopeBand> {
    let res = residuals(spec, fit)?;
    let params = spec.fitted_params(&fit.delta)?;
    let opts = FitOptions {
        start: Some(fit.delta.clone()),
        covariance: false,
        ..FitOptions::default()
    };
    let sims: Vec<Option<Vec<f64>>> = (0..m as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k);
            let t: Vec<f64> = params.iter().map(|d| d.sample_one(&mut rng)).collect();
            let s = spec.with_response(t).ok()?;
            let f = refit(&s, &opts).ok().filter(|f| f.converged)?;
            let mut r = residuals(&s, &f).ok()?.get(kind).to_vec();
            r.sort_by(f64::total_cmp);
            Some(r)
        })
        .collect();
    let failures = sims.iter().filter(|s| s.is_none()).count();
    let sims: Vec<Vec<f64>> = sims.into_iter().flatten().collect();
    let theo = theoretical_quantiles(kind, spec.n(), &res.alpha)?;
    let mut band = band_from_simulations(kind, res.get(kind), &sims, theo, level)?;
    band.failures = failures;
    Ok(band)
}

/// tᵢ − E(Tᵢ) with E(Tᵢ) the LBS mean at the fitted (α̂ᵢ, θ̂ᵢ).
pub fn raw_residuals(spec: &RegressionSpec, fit: &FitResult) -> Result<Vec<f64>> {
    let params = spec.fitted_params(&fit.delta)?;
    Ok(spec.response().iter().zip(&params).map(|(t, d)| t - d.mean()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LjungBox {
    pub lags: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// Sample autocorrelations ρ̂₁..ρ̂ₕ.
pub fn autocorrelations(x: &[f64], h: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if h == 0 || h >= n {
        return Err(LbsError::Domain(format!("need 0 < h < n, got h = {h}, n = {n}")));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0: f64 = d.iter().map(|v| v * v).sum();
    if !(c0 > 0.0) {
        return Err(LbsError::Domain("zero variance: autocorrelations undefined".into()));
    }
    Ok((1..=h)
        .map(|k| d[k..].iter().zip(&d[..n - k]).map(|(a, b)| a * b).sum::<f64>() / c0)
        .collect())
}

/// Q = n(n+2) Σₖ ρ̂ₖ²/(n−k), p-value from χ²ₕ.
pub fn ljung_box(x: &[f64], h: usize) -> Result<LjungBox> {
    let n = x.len() as f64;
    let rho = autocorrelations(x, h)?;
    let q = n
        * (n + 2.0)
        * rho
            .iter()
            .enumerate()
            .map(|(k, r)| r * r / (n - (k + 1) as f64))
            .sum::<f64>();
    Ok(LjungBox {
        lags: h,
        statistic: q,
        p_value: chi_square_sf(h as f64, q),
    })
}
