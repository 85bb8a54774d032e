//! Asymptotic (ACI), percentile bootstrap (PCI) and BCa bootstrap (BCI)
//! confidence intervals for the regression coefficients.

use crate::error::{LbsError, Result};
use crate::numeric::quantile_sorted;
use crate::regression::{fit as refit, FitOptions, FitResult, RegressionSpec};
use crate::rng::stream;
use crate::special::{norm_cdf, norm_quantile};
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// Bootstrap replicas used when none are requested explicitly.
pub const DEFAULT_REPLICAS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalMethod {
    Aci,
    Pci,
    Bci,
}

impl fmt::Display for IntervalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntervalMethod::Aci => "ACI",
            IntervalMethod::Pci => "PCI",
            IntervalMethod::Bci => "BCI",
        })
    }
}

impl FromStr for IntervalMethod {
    type Err = LbsError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aci" => Ok(IntervalMethod::Aci),
            "pci" => Ok(IntervalMethod::Pci),
            "bci" | "bca" => Ok(IntervalMethod::Bci),
            other => Err(LbsError::Config(format!("unknown interval method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalEstimate {
    pub index: usize,
    pub method: IntervalMethod,
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    /// BCI only: the BCa adjustment was undefined and the percentile
    /// interval was returned instead.
    pub fallback: bool,
}

impl IntervalEstimate {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Replica estimates of a parametric bootstrap.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapRun {
    /// Requested number of replicas.
    pub b: usize,
    /// Converged replica estimates, one row per replica.
    pub replicas: Vec<Vec<f64>>,
    /// Stream index of each row in `replicas`.
    pub streams: Vec<u64>,
    pub failures: usize,
    pub master_seed: u64,
}

impl BootstrapRun {
    /// More than 10% of replicas failed.
    pub fn unreliable(&self) -> bool {
        self.failures * 10 > self.b
    }

    /// Sorted replica values of coefficient `j`.
    pub fn column_sorted(&self, j: usize) -> Vec<f64> {
        let mut col: Vec<f64> = self.replicas.iter().map(|r| r[j]).collect();
        col.sort_by(f64::total_cmp);
        col
    }

    pub fn mean(&self) -> Vec<f64> {
        let m = self.replicas.first().map_or(0, |r| r.len());
        let k = self.replicas.len() as f64;
        (0..m)
            .map(|j| self.replicas.iter().map(|r| r[j]).sum::<f64>() / k)
            .collect()
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(LbsError::InvalidParameter(format!(
            "level must lie in (0, 1), got {level}"
        )))
    }
}

/// δ̂ⱼ ± z₁₋κ/₂ · SEⱼ
pub fn aci(fit: &FitResult, level: f64) -> Result<Vec<IntervalEstimate>> {
    check_level(level)?;
    let se = fit
        .std_errors()
        .ok_or_else(|| LbsError::Unavailable("fit has no covariance matrix".into()))?;
    let z = norm_quantile(0.5 + level / 2.0);
    Ok(se
        .iter()
        .enumerate()
        .map(|(j, s)| IntervalEstimate {
            index: j,
            method: IntervalMethod::Aci,
            level,
            lower: fit.delta[j] - z * s,
            upper: fit.delta[j] + z * s,
            fallback: false,
        })
        .collect())
}

fn refit_options(fit: &FitResult) -> FitOptions {
    FitOptions {
        start: Some(fit.delta.clone()),
        covariance: false,
        ..FitOptions::default()
    }
}

/// Simulates `b` responses from the fitted model and refits each one.
/// Replica `k` uses stream (master_seed, k); refits warm-start at δ̂.
pub fn parametric_bootstrap(
    spec: &RegressionSpec,
    fit: &FitResult,
    b: usize,
    master_seed: u64,
) -> Result<BootstrapRun> {
    let params = spec.fitted_params(&fit.delta)?;
    let opts = refit_options(fit);
    let results: Vec<Option<Vec<f64>>> = (0..b as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(master_seed, k);
            let t: Vec<f64> = params.iter().map(|d| d.sample_one(&mut rng)).collect();
            let s = spec.with_response(t).ok()?;
            let r = refit(&s, &opts).ok()?;
            r.converged.then(|| r.delta.iter().copied().collect())
        })
        .collect();
    let mut run = BootstrapRun {
        b,
        replicas: Vec::new(),
        streams: Vec::new(),
        failures: 0,
        master_seed,
    };
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Some(d) => {
                run.replicas.push(d);
                run.streams.push(k as u64);
            }
            None => run.failures += 1,
        }
    }
    Ok(run)
}

/// Empirical (type-7) quantiles at κ/2 and 1 − κ/2 of each replica column.
pub fn pci(run: &BootstrapRun, level: f64) -> Result<Vec<IntervalEstimate>> {
    check_level(level)?;
    if run.replicas.len() < 2 {
        return Err(LbsError::Unavailable(format!(
            "percentile interval needs at least 2 converged replicas, have {}",
            run.replicas.len()
        )));
    }
    let m = run.replicas[0].len();
    let tail = (1.0 - level) / 2.0;
    Ok((0..m)
        .map(|j| {
            let col = run.column_sorted(j);
            IntervalEstimate {
                index: j,
                method: IntervalMethod::Pci,
                level,
                lower: quantile_sorted(&col, tail),
                upper: quantile_sorted(&col, 1.0 - tail),
                fallback: false,
            }
        })
        .collect())
}

/// Leave-one-out estimates δ̂₍ᵢ₎, warm-started at δ̂. Entries are `None`
/// where the reduced design is singular or the refit does not converge.
pub fn jackknife(spec: &RegressionSpec, fit: &FitResult) -> Vec<Option<Vec<f64>>> {
    let opts = refit_options(fit);
    (0..spec.n())
        .into_par_iter()
        .map(|i| {
            let s = spec.without_observation(i).ok()?;
            let r = refit(&s, &opts).ok()?;
            r.converged.then(|| r.delta.iter().copied().collect())
        })
        .collect()
}

/// Jackknife acceleration Σ(ψ̄ − ψᵢ)³ / (6[Σ(ψ̄ − ψᵢ)²]^{3/2}); zero when the
/// leave-one-out values do not vary.
pub fn acceleration(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let (mut s2, mut s3) = (0.0, 0.0);
    for v in values {
        let d = mean - v;
        s2 += d * d;
        s3 += d * d * d;
    }
    if s2 <= 0.0 {
        0.0
    } else {
        s3 / (6.0 * s2.powf(1.5))
    }
}

/// Bias correction z₀ = Φ⁻¹(P̂(replica < δ̂ⱼ)), ties counted as one half.
pub fn bias_correction(sorted: &[f64], estimate: f64) -> f64 {
    let below = sorted.iter().filter(|&&v| v < estimate).count() as f64;
    let ties = sorted.iter().filter(|&&v| v == estimate).count() as f64;
    norm_quantile((below + 0.5 * ties) / sorted.len() as f64)
}

/// BCa intervals from replicas, the original estimate and leave-one-out
/// estimates. Falls back to the percentile interval for a coefficient whose
/// z₀ is infinite or whose adjusted positions are undefined.
pub fn bca_intervals(
    run: &BootstrapRun,
    estimate: &[f64],
    jack: &[Option<Vec<f64>>],
    level: f64,
) -> Result<Vec<IntervalEstimate>> {
    let percentile = pci(run, level)?;
    let tail = (1.0 - level) / 2.0;
    let z_lo = norm_quantile(tail);
    let z_hi = norm_quantile(1.0 - tail);
    Ok(percentile
        .into_iter()
        .map(|p| {
            let j = p.index;
            let col = run.column_sorted(j);
            let z0 = bias_correction(&col, estimate[j]);
            let loo: Vec<f64> = jack.iter().flatten().map(|d| d[j]).collect();
            let a = acceleration(&loo);
            let position = |z: f64| {
                let denom = 1.0 - a * (z0 + z);
                (denom > 0.0).then(|| norm_cdf(z0 + (z0 + z) / denom))
            };
            match (z0.is_finite(), position(z_lo), position(z_hi)) {
                (true, Some(lo), Some(hi)) if lo <= hi => IntervalEstimate {
                    index: j,
                    method: IntervalMethod::Bci,
                    level,
                    lower: quantile_sorted(&col, lo),
                    upper: quantile_sorted(&col, hi),
                    fallback: false,
                },
                _ => IntervalEstimate {
                    method: IntervalMethod::Bci,
                    fallback: true,
                    ..p
                },
            }
        })
        .collect())
}

/// BCa intervals with jackknife acceleration computed from `spec`.
pub fn bci(run: &BootstrapRun, fit: &FitResult, spec: &RegressionSpec, level: f64) -> Result<Vec<IntervalEstimate>> {
    check_level(level)?;
    let jack = jackknife(spec, fit);
    let estimate: Vec<f64> = fit.delta.iter().copied().collect();
    bca_intervals(run, &estimate, &jack, level)
}

/// Intervals for each requested method, plus the bootstrap run when PCI or
/// BCI was requested.
pub fn confidence_intervals(
    spec: &RegressionSpec,
    fit_result: &FitResult,
    methods: &[IntervalMethod],
    level: f64,
    b: usize,
    master_seed: u64,
) -> Result<(Vec<IntervalEstimate>, Option<BootstrapRun>)> {
    let mut out = Vec::new();
    let needs_boot = methods.iter().any(|m| *m != IntervalMethod::Aci);
    let run = if needs_boot {
        Some(parametric_bootstrap(spec, fit_result, b, master_seed)?)
    } else {
        None
    };
    for m in methods {
        let ivs = match m {
            IntervalMethod::Aci => aci(fit_result, level)?,
            IntervalMethod::Pci => pci(run.as_ref().expect("bootstrap run"), level)?,
            IntervalMethod::Bci => bci(run.as_ref().expect("bootstrap run"), fit_result, spec, level)?,
        };
        out.extend(ivs);
    }
    Ok((out, run))
}
