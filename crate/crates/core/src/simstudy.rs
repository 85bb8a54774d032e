//! Monte Carlo harness for estimator bias/MSE, interval coverage and
//! residual moments under the simulation design of the LBS regression.
//!
//! Replication `r` draws everything (covariates and response) from stream
//! (seed, r); bootstrap replicas inside it use a master seed derived from
//! (seed, r). Reports are therefore identical across thread counts.

use crate::diagnostics::{reference_moments, residuals, ReferenceMoments, ResidualKind};
use crate::error::{LbsError, Result};
use crate::inference::{aci, bci, parametric_bootstrap, pci, IntervalEstimate, IntervalMethod};
use crate::numeric::NeumaierSum;
use crate::regression::{fit, FitOptions, FitResult, Link, RegressionSpec};
use crate::rng::{derive_seed, stream};
use crate::LbsParams;
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use std::io::Write;

/// How αᵢ is generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaComponent {
    /// ln αᵢ = ρ₀ + ρ₁w₁ᵢ
    Covariate { rho0: f64, rho1: f64 },
    /// ln αᵢ = ρ₀ = ln α
    Intercept { alpha: f64 },
}

/// Law of the non-intercept covariates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovariateLaw {
    Uniform { lo: f64, hi: f64 },
}

impl Default for CovariateLaw {
    fn default() -> Self {
        CovariateLaw::Uniform { lo: -1.0, hi: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub label: String,
    pub n: usize,
    /// (β₀, β₁) of ln θᵢ = β₀ + β₁x₁ᵢ.
    pub beta: [f64; 2],
    pub alpha: AlphaComponent,
    pub replications: usize,
    /// Bootstrap replicas per replication (coverage study only).
    pub bootstrap: usize,
    pub seed: u64,
    pub covariates: CovariateLaw,
    /// Draw new covariates every replication (otherwise those of
    /// replication 0 are reused).
    pub redraw_covariates: bool,
}

impl ScenarioConfig {
    pub fn covariate(n: usize, rho1: f64) -> Self {
        ScenarioConfig {
            label: format!("rho1={rho1}"),
            n,
            beta: [1.0, -1.0],
            alpha: AlphaComponent::Covariate { rho0: -1.0, rho1 },
            replications: 1000,
            bootstrap: 200,
            seed: 1,
            covariates: CovariateLaw::default(),
            redraw_covariates: true,
        }
    }

    pub fn intercept(n: usize, alpha: f64) -> Self {
        ScenarioConfig {
            label: format!("alpha={alpha}"),
            alpha: AlphaComponent::Intercept { alpha },
            ..Self::covariate(n, 0.0)
        }
    }

    /// Blocks of a named table: `table1`, `table3`, `table5` use the
    /// covariate design with ρ₁ ∈ {0.25, 0.75, 1.25}; `table2`, `table4`,
    /// `table6` the intercept design with α ∈ {0.25, 0.5, 1, 2, 2.5}.
    pub fn preset(name: &str, n: usize) -> Result<Vec<ScenarioConfig>> {
        let key = name.trim().to_ascii_lowercase();
        match key.as_str() {
            "table1" | "table3" | "table5" => Ok([0.25, 0.75, 1.25].iter().map(|&r| Self::covariate(n, r)).collect()),
            "table2" | "table4" | "table6" => Ok([0.25, 0.5, 1.0, 2.0, 2.5]
                .iter()
                .map(|&a| Self::intercept(n, a))
                .collect()),
            _ => Err(LbsError::Config(format!("unknown scenario '{name}'"))),
        }
    }

    /// Study kind implied by a preset name.
    pub fn preset_study(name: &str) -> Result<StudyKind> {
        match name.trim().to_ascii_lowercase().as_str() {
            "table1" | "table2" => Ok(StudyKind::Estimation),
            "table3" | "table4" => Ok(StudyKind::Coverage),
            "table5" | "table6" => Ok(StudyKind::Residual),
            _ => Err(LbsError::Config(format!("unknown scenario '{name}'"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(LbsError::InvalidParameter("replications must be at least 1".into()));
        }
        if self.n < 5 {
            return Err(LbsError::InvalidParameter(format!("n = {} is too small", self.n)));
        }
        if let AlphaComponent::Intercept { alpha } = self.alpha {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(LbsError::InvalidParameter(format!(
                    "alpha must be positive, got {alpha}"
                )));
            }
        }
        let CovariateLaw::Uniform { lo, hi } = self.covariates;
        if !(lo < hi) {
            return Err(LbsError::InvalidParameter("covariate range is empty".into()));
        }
        Ok(())
    }

    /// True coefficient vector (β₀, β₁, ρ₀[, ρ₁]).
    pub fn truth(&self) -> Vec<f64> {
        match self.alpha {
            AlphaComponent::Covariate { rho0, rho1 } => vec![self.beta[0], self.beta[1], rho0, rho1],
            AlphaComponent::Intercept { alpha } => vec![self.beta[0], self.beta[1], alpha.ln()],
        }
    }

    pub fn coefficient_names(&self) -> Vec<&'static str> {
        match self.alpha {
            AlphaComponent::Covariate { .. } => vec!["beta0", "beta1", "rho0", "rho1"],
            AlphaComponent::Intercept { .. } => vec!["beta0", "beta1", "rho0"],
        }
    }

    /// Every generated αᵢ is at most 2, so every density is unimodal.
    pub fn unimodal(&self) -> bool {
        let CovariateLaw::Uniform { lo, hi } = self.covariates;
        let max_ln_alpha = match self.alpha {
            AlphaComponent::Covariate { rho0, rho1 } => rho0 + (rho1 * lo).max(rho1 * hi),
            AlphaComponent::Intercept { alpha } => alpha.ln(),
        };
        max_ln_alpha <= 2f64.ln()
    }

    /// Data set of replication `rep`.
    pub fn simulate(&self, rep: usize) -> Result<RegressionSpec> {
        let n = self.n;
        let CovariateLaw::Uniform { lo, hi } = self.covariates;
        let design_rep = if self.redraw_covariates { rep } else { 0 };
        let mut crng = stream(self.seed, design_rep as u64);
        let mut x = DMatrix::from_element(n, 2, 1.0);
        let mut w1 = Vec::with_capacity(n);
        for i in 0..n {
            x[(i, 1)] = crng.random_range(lo..hi);
            w1.push(crng.random_range(lo..hi));
        }
        // response draws come from their own stream so fixed designs still
        // get fresh responses
        let mut rng = stream(derive_seed(self.seed, 0x7265_7370), rep as u64);
        let mut t = Vec::with_capacity(n);
        for i in 0..n {
            let theta = (self.beta[0] + self.beta[1] * x[(i, 1)]).exp();
            let alpha = match self.alpha {
                AlphaComponent::Covariate { rho0, rho1 } => (rho0 + rho1 * w1[i]).exp(),
                AlphaComponent::Intercept { alpha } => alpha,
            };
            t.push(LbsParams::new(alpha, theta)?.sample_one(&mut rng));
        }
        let w = match self.alpha {
            AlphaComponent::Covariate { .. } => DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { w1[i] }),
            AlphaComponent::Intercept { .. } => DMatrix::from_element(n, 1, 1.0),
        };
        RegressionSpec::new(t, x, w, Link::Log, Link::Log)
    }

    fn fit_replication(&self, rep: usize, covariance: bool) -> Option<(RegressionSpec, FitResult)> {
        let spec = self.simulate(rep).ok()?;
        let opts = FitOptions {
            covariance,
            ..FitOptions::default()
        };
        let f = fit(&spec, &opts).ok()?;
        f.converged.then_some((spec, f))
    }

    fn check_failures(&self, failures: usize) -> Result<()> {
        if self.unimodal() && failures * 50 > self.replications {
            return Err(LbsError::Convergence(format!(
                "{failures} of {} replications failed in unimodal scenario '{}'",
                self.replications, self.label
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Estimation,
    Coverage,
    Residual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSummary {
    pub name: &'static str,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub name: &'static str,
    pub truth: f64,
    pub method: IntervalMethod,
    pub covered: usize,
    /// Replications where the interval was available.
    pub total: usize,
    /// Replications where the interval was unavailable (no covariance, too
    /// few replicas).
    pub unavailable: usize,
    /// Intervals that contain the point estimate.
    pub estimate_inside: usize,
    /// BCI intervals that fell back to the percentile interval.
    pub fallbacks: usize,
}

impl CoverageRow {
    /// Coverage in percent.
    pub fn percent(&self) -> f64 {
        if self.total == 0 {
            f64::NAN
        } else {
            100.0 * self.covered as f64 / self.total as f64
        }
    }

    /// ±3 binomial standard errors around `nominal` percent.
    pub fn tolerance(&self, nominal: f64) -> f64 {
        let p = nominal / 100.0;
        300.0 * (p * (1.0 - p) / self.total.max(1) as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSummary {
    pub kind: ResidualKind,
    /// Average over replications of the per-replication sample moments.
    pub averaged: ReferenceMoments,
    /// Moments of all residuals pooled across replications.
    pub pooled: ReferenceMoments,
    /// Target moments (U only when α is constant).
    pub reference: Option<ReferenceMoments>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub label: String,
    pub n: usize,
    pub replications: usize,
    pub failures: usize,
    pub estimation: Vec<CoefficientSummary>,
    pub coverage: Vec<CoverageRow>,
    pub residuals: Vec<ResidualSummary>,
}

impl StudyReport {
    fn empty(config: &ScenarioConfig) -> Self {
        StudyReport {
            label: config.label.clone(),
            n: config.n,
            replications: config.replications,
            failures: 0,
            estimation: Vec::new(),
            coverage: Vec::new(),
            residuals: Vec::new(),
        }
    }

    pub fn coefficient(&self, name: &str) -> Option<&CoefficientSummary> {
        self.estimation.iter().find(|c| c.name == name)
    }

    pub fn coverage_of(&self, name: &str, method: IntervalMethod) -> Option<&CoverageRow> {
        self.coverage.iter().find(|c| c.name == name && c.method == method)
    }

    pub fn residual(&self, kind: ResidualKind) -> Option<&ResidualSummary> {
        self.residuals.iter().find(|r| r.kind == kind)
    }

    /// Long-format rows `scenario,n,section,item,statistic,value`.
    pub fn write_csv<W: Write>(&self, out: W, header: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if header {
            w.write_record(["scenario", "n", "section", "item", "statistic", "value"])?;
        }
        let n = self.n.to_string();
        let mut row = |section: &str, item: &str, stat: &str, v: f64| {
            w.write_record([self.label.as_str(), &n, section, item, stat, &fmt17(v)])
        };
        row("run", "all", "replications", self.replications as f64)?;
        row("run", "all", "failures", self.failures as f64)?;
        for c in &self.estimation {
            row("estimation", c.name, "truth", c.truth)?;
            row("estimation", c.name, "mean", c.mean)?;
            row("estimation", c.name, "bias", c.bias)?;
            row("estimation", c.name, "mse", c.mse)?;
        }
        for c in &self.coverage {
            let item = format!("{}:{}", c.name, c.method);
            row("coverage", &item, "percent", c.percent())?;
            row("coverage", &item, "covered", c.covered as f64)?;
            row("coverage", &item, "total", c.total as f64)?;
            row("coverage", &item, "unavailable", c.unavailable as f64)?;
            row("coverage", &item, "fallbacks", c.fallbacks as f64)?;
        }
        for r in &self.residuals {
            for (tag, m) in [
                ("avg", Some(r.averaged)),
                ("pooled", Some(r.pooled)),
                ("ref", r.reference),
            ] {
                let Some(m) = m else { continue };
                let item = r.kind.name();
                row("residual", item, &format!("{tag}_mean"), m.mean)?;
                row("residual", item, &format!("{tag}_sd"), m.sd)?;
                row("residual", item, &format!("{tag}_cs"), m.cs)?;
                row("residual", item, &format!("{tag}_ck"), m.ck)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip representation (at most 17 significant digits).
pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:?}")
}

/// Replication-level estimates; failed fits are counted.
pub fn run_estimation_study(config: &ScenarioConfig) -> Result<StudyReport> {
    config.validate()?;
    let estimates: Vec<Option<Vec<f64>>> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            config
                .fit_replication(r, false)
                .map(|(_, f)| f.delta.iter().copied().collect())
        })
        .collect();
    let failures = estimates.iter().filter(|e| e.is_none()).count();
    config.check_failures(failures)?;
    let ok: Vec<Vec<f64>> = estimates.into_iter().flatten().collect();
    let mut report = StudyReport::empty(config);
    report.failures = failures;
    if ok.is_empty() {
        return Err(LbsError::Convergence("no replication converged".into()));
    }
    let k = ok.len() as f64;
    for (j, (&name, &truth)) in config.coefficient_names().iter().zip(&config.truth()).enumerate() {
        let mean = ok.iter().map(|e| e[j]).collect::<NeumaierSum>().value() / k;
        let mse = ok
            .iter()
            .map(|e| (e[j] - truth).powi(2))
            .collect::<NeumaierSum>()
            .value()
            / k;
        report.estimation.push(CoefficientSummary {
            name,
            truth,
            mean,
            bias: mean - truth,
            mse,
        });
    }
    Ok(report)
}

/// Per-replication intervals for each method, indexed like `methods`.
type ReplicationIntervals = Vec<Option<Vec<IntervalEstimate>>>;

fn replication_intervals(
    config: &ScenarioConfig,
    rep: usize,
    methods: &[IntervalMethod],
    level: f64,
) -> Option<(Vec<f64>, ReplicationIntervals)> {
    let needs_cov = methods.contains(&IntervalMethod::Aci);
    let (spec, f) = config.fit_replication(rep, needs_cov)?;
    let run = if methods.iter().any(|m| *m != IntervalMethod::Aci) {
        parametric_bootstrap(&spec, &f, config.bootstrap, derive_seed(config.seed, rep as u64 + 1)).ok()
    } else {
        None
    };
    let out = methods
        .iter()
        .map(|m| match m {
            IntervalMethod::Aci => aci(&f, level).ok(),
            IntervalMethod::Pci => run.as_ref().and_then(|r| pci(r, level).ok()),
            IntervalMethod::Bci => run.as_ref().and_then(|r| bci(r, &f, &spec, level).ok()),
        })
        .collect();
    Some((f.delta.iter().copied().collect(), out))
}

/// Coverage of the true coefficients by each requested interval method.
pub fn run_coverage_study(config: &ScenarioConfig, methods: &[IntervalMethod], level: f64) -> Result<StudyReport> {
    config.validate()?;
    let mut report = StudyReport::empty(config);
    if methods.is_empty() {
        return Ok(report);
    }
    let reps: Vec<Option<(Vec<f64>, ReplicationIntervals)>> = (0..config.replications)
        .into_par_iter()
        .map(|r| replication_intervals(config, r, methods, level))
        .collect();
    let failures = reps.iter().filter(|r| r.is_none()).count();
    config.check_failures(failures)?;
    report.failures = failures;
    let truth = config.truth();
    let names = config.coefficient_names();
    for (mi, &method) in methods.iter().enumerate() {
        for (j, &name) in names.iter().enumerate() {
            let mut row = CoverageRow {
                name,
                truth: truth[j],
                method,
                covered: 0,
                total: 0,
                unavailable: 0,
                estimate_inside: 0,
                fallbacks: 0,
            };
            for (est, ivs) in reps.iter().flatten() {
                match &ivs[mi] {
                    Some(iv) => {
                        let iv = iv[j];
                        row.total += 1;
                        row.covered += iv.contains(truth[j]) as usize;
                        row.estimate_inside += iv.contains(est[j]) as usize;
                        row.fallbacks += iv.fallback as usize;
                    }
                    None => row.unavailable += 1,
                }
            }
            report.coverage.push(row);
        }
    }
    Ok(report)
}

/// Mergeable accumulator of the first four central moments.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentAccumulator {
    n: f64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl MomentAccumulator {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n;
        self.n += 1.0;
        let n = self.n;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term1 = delta * dn * n1;
        self.mean += dn;
        self.m4 += term1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += term1 * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += term1;
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        if other.n == 0.0 {
            return;
        }
        if self.n == 0.0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.n, other.n);
        let n = na + nb;
        let d = other.mean - self.mean;
        let d2 = d * d;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 =
            self.m3 + other.m3 + d * d2 * na * nb * (na - nb) / (n * n) + 3.0 * d * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * other.m3 - nb * self.m3) / n;
        *self = MomentAccumulator {
            n,
            mean: self.mean + d * nb / n,
            m2,
            m3,
            m4,
        };
    }

    pub fn count(&self) -> usize {
        self.n as usize
    }

    /// Same conventions as [`crate::numeric::SampleMoments`].
    pub fn moments(&self) -> ReferenceMoments {
        let n = self.n;
        let (c2, c3, c4) = (self.m2 / n, self.m3 / n, self.m4 / n);
        ReferenceMoments {
            mean: self.mean,
            sd: (self.m2 / (n - 1.0)).sqrt(),
            cs: c3 / c2.powf(1.5),
            ck: c4 / (c2 * c2),
        }
    }
}

impl FromIterator<f64> for MomentAccumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = MomentAccumulator::default();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// Residual moments averaged over replications, plus pooled moments.
pub fn run_residual_study(config: &ScenarioConfig, kinds: &[ResidualKind]) -> Result<StudyReport> {
    config.validate()?;
    let per_rep: Vec<Option<Vec<MomentAccumulator>>> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let (spec, f) = config.fit_replication(r, false)?;
            let res = residuals(&spec, &f).ok()?;
            Some(kinds.iter().map(|&k| res.get(k).iter().copied().collect()).collect())
        })
        .collect();
    let failures = per_rep.iter().filter(|r| r.is_none()).count();
    config.check_failures(failures)?;
    let ok: Vec<Vec<MomentAccumulator>> = per_rep.into_iter().flatten().collect();
    if ok.is_empty() {
        return Err(LbsError::Convergence("no replication converged".into()));
    }
    let mut report = StudyReport::empty(config);
    report.failures = failures;
    let k = ok.len() as f64;
    for (ki, &kind) in kinds.iter().enumerate() {
        let mut pooled = MomentAccumulator::default();
        let mut sums = [NeumaierSum::default(); 4];
        for rep in &ok {
            pooled.merge(&rep[ki]);
            let m = rep[ki].moments();
            for (s, v) in sums.iter_mut().zip([m.mean, m.sd, m.cs, m.ck]) {
                s.add(v);
            }
        }
        let reference = match (kind, config.alpha) {
            (ResidualKind::U, AlphaComponent::Intercept { alpha }) => Some(reference_moments(kind, alpha)),
            (ResidualKind::U, AlphaComponent::Covariate { .. }) => None,
            _ => Some(reference_moments(kind, 1.0)),
        };
        report.residuals.push(ResidualSummary {
            kind,
            averaged: ReferenceMoments {
                mean: sums[0].value() / k,
                sd: sums[1].value() / k,
                cs: sums[2].value() / k,
                ck: sums[3].value() / k,
            },
            pooled: pooled.moments(),
            reference,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::SampleMoments;

    #[test]
    fn accumulator_matches_two_pass_and_merges() {
        let x: Vec<f64> = (0..200)
            .map(|i| ((i * 37) % 101) as f64 / 7.0 + (i as f64).sqrt())
            .collect();
        let direct = SampleMoments::from_slice(&x).unwrap();
        let acc: MomentAccumulator = x.iter().copied().collect();
        let m = acc.moments();
        assert!((m.mean - direct.mean).abs() < 1e-12);
        assert!((m.sd - direct.sd).abs() < 1e-12);
        assert!((m.cs - direct.skewness).abs() < 1e-11);
        assert!((m.ck - direct.kurtosis).abs() < 1e-11);
        let mut a: MomentAccumulator = x[..63].iter().copied().collect();
        let b: MomentAccumulator = x[63..].iter().copied().collect();
        a.merge(&b);
        let mm = a.moments();
        assert!((mm.cs - m.cs).abs() < 1e-11 && (mm.ck - m.ck).abs() < 1e-11);
        assert_eq!(a.count(), 200);
    }

    #[test]
    fn single_replication_reports_its_error() {
        let mut c = ScenarioConfig::covariate(80, 0.25);
        c.replications = 1;
        c.seed = 5;
        let rep = run_estimation_study(&c).unwrap();
        let (spec, f) = c.fit_replication(0, false).unwrap();
        assert_eq!(spec, c.simulate(0).unwrap());
        for (j, s) in rep.estimation.iter().enumerate() {
            assert!((s.mean - f.delta[j]).abs() < 1e-15);
            assert!((s.bias - (f.delta[j] - s.truth)).abs() < 1e-15);
            assert!((s.mse - s.bias * s.bias).abs() < 1e-15);
        }
    }

    #[test]
    fn presets_and_unimodality() {
        let t2 = ScenarioConfig::preset("table2", 50).unwrap();
        assert_eq!(t2.len(), 5);
        assert!(t2[3].unimodal());
        assert!(!t2[4].unimodal());
        assert!(ScenarioConfig::preset("table1", 50)
            .unwrap()
            .iter()
            .all(|c| c.unimodal()));
        assert!(ScenarioConfig::preset("table9", 50).is_err());
        assert_eq!(ScenarioConfig::preset_study("table4").unwrap(), StudyKind::Coverage);
    }

    #[test]
    fn empty_method_list_gives_empty_table() {
        let c = ScenarioConfig::covariate(50, 0.25);
        let r = run_coverage_study(&c, &[], 0.95).unwrap();
        assert!(r.coverage.is_empty());
    }

    #[test]
    fn fixed_design_reuses_covariates() {
        let mut c = ScenarioConfig::intercept(30, 1.0);
        c.redraw_covariates = false;
        let a = c.simulate(0).unwrap();
        let b = c.simulate(1).unwrap();
        assert_eq!(a.x(), b.x());
        assert_ne!(a.response(), b.response());
        c.redraw_covariates = true;
        assert_ne!(c.simulate(0).unwrap().x(), c.simulate(1).unwrap().x());
    }
}
