//! End-to-end analysis of a data set: fit, intervals, residuals, envelopes,
//! Ljung–Box, and the files that record them.

use super::config::ModelConfig;
use super::dataset::Dataset;
use crate::diagnostics::{
    envelope, ljung_box, raw_residuals, residuals, EnvelopeBand, LjungBox, ResidualKind, ResidualSet,
};
use crate::error::{LbsError, Result};
use crate::inference::{aci, bci, parametric_bootstrap, pci, BootstrapRun, IntervalEstimate, IntervalMethod};
use crate::regression::{fit, FitOptions, FitResult, RegressionSpec};
use crate::rng::derive_seed;
use crate::simstudy::fmt17;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

const BOOTSTRAP_LABEL: u64 = 1;
const ENVELOPE_LABEL: u64 = 100;

#[derive(Debug, Clone)]
pub struct FitReport {
    pub config: ModelConfig,
    pub names: Vec<String>,
    pub spec: RegressionSpec,
    pub fit: FitResult,
    pub intervals: Vec<IntervalEstimate>,
    pub bootstrap: Option<BootstrapRun>,
    pub residuals: ResidualSet,
    pub raw_residuals: Vec<f64>,
    pub envelopes: Vec<EnvelopeBand>,
    pub ljung_box: Vec<LjungBox>,
    pub files: Vec<PathBuf>,
}

fn envelope_seed(seed: u64, kind: ResidualKind) -> u64 {
    let k = ResidualKind::ALL.iter().position(|x| *x == kind).unwrap_or(0);
    derive_seed(seed, ENVELOPE_LABEL + k as u64)
}

/// An interval that excludes zero.
pub fn is_significant(iv: &IntervalEstimate) -> bool {
    iv.lower > 0.0 || iv.upper < 0.0
}

impl FitReport {
    pub fn interval(&self, j: usize, method: IntervalMethod) -> Option<&IntervalEstimate> {
        self.intervals.iter().find(|iv| iv.index == j && iv.method == method)
    }

    /// Coefficient table rounded to 4 decimals.
    pub fn table(&self) -> String {
        let se = self.fit.std_errors();
        let width = self.names.iter().map(|n| n.len()).max().unwrap_or(0).max(11);
        let mut s = format!("{:width$}  {:>10}  {:>10}", "coefficient", "estimate", "se");
        for m in &self.config.ci {
            s += &format!("  {:>22}", m.to_string());
        }
        s.push('\n');
        for (j, name) in self.names.iter().enumerate() {
            let se_j = se.as_ref().map_or("NA".to_string(), |v| format!("{:.4}", v[j]));
            s += &format!("{name:width$}  {:>10.4}  {se_j:>10}", self.fit.delta[j]);
            for m in &self.config.ci {
                let cell = match self.interval(j, *m) {
                    Some(iv) => format!(
                        "({:.4}, {:.4}){}",
                        iv.lower,
                        iv.upper,
                        if is_significant(iv) { "*" } else { " " }
                    ),
                    None => "NA".to_string(),
                };
                s += &format!("  {cell:>22}");
            }
            s.push('\n');
        }
        s
    }

    fn write_coefficients<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["coefficient".to_string(), "estimate".into(), "se".into()];
        for m in &self.config.ci {
            let m = m.to_string().to_ascii_lowercase();
            header.push(format!("{m}_lower"));
            header.push(format!("{m}_upper"));
            header.push(format!("{m}_significant"));
        }
        w.write_record(&header)?;
        let se = self.fit.std_errors();
        for (j, name) in self.names.iter().enumerate() {
            let mut rec = vec![
                name.clone(),
                fmt17(self.fit.delta[j]),
                se.as_ref().map_or(String::new(), |v| fmt17(v[j])),
            ];
            for m in &self.config.ci {
                match self.interval(j, *m) {
                    Some(iv) => {
                        rec.push(fmt17(iv.lower));
                        rec.push(fmt17(iv.upper));
                        rec.push(is_significant(iv).to_string());
                    }
                    None => rec.extend([String::new(), String::new(), String::new()]),
                }
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_residuals<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "t", "theta", "alpha", "raw", "gcs", "rq", "u"])?;
        let r = &self.residuals;
        for i in 0..r.len() {
            w.write_record([
                (i + 1).to_string(),
                fmt17(self.spec.response()[i]),
                fmt17(r.theta[i]),
                fmt17(r.alpha[i]),
                fmt17(self.raw_residuals[i]),
                fmt17(r.gcs[i]),
                fmt17(r.rq[i]),
                fmt17(r.u[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_ljung_box<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lags", "statistic", "p_value"])?;
        for lb in &self.ljung_box {
            w.write_record([lb.lags.to_string(), fmt17(lb.statistic), fmt17(lb.p_value)])?;
        }
        w.flush()?;
        Ok(())
    }

    fn manifest(&self) -> String {
        let mut s = self.config.to_text();
        s += &format!("# lbs-core {}\n", env!("CARGO_PKG_VERSION"));
        s += &format!("# n = {}\n", self.spec.n());
        s += &format!("# converged = {}\n", self.fit.converged);
        s += &format!("# iterations = {}\n", self.fit.iterations);
        s += &format!("# gradient_norm = {}\n", fmt17(self.fit.gradient_norm));
        s += &format!("# loglik = {}\n", fmt17(self.fit.loglik));
        s += &format!("# aic = {}\n", fmt17(self.fit.aic()));
        s += &format!("# hessian = {:?}\n", self.fit.hessian_source);
        if let Some(run) = &self.bootstrap {
            s += &format!(
                "# bootstrap = {} replicas, {} failures{}\n",
                run.b,
                run.failures,
                if run.unreliable() { " (unreliable)" } else { "" }
            );
        }
        for e in &self.envelopes {
            s += &format!(
                "# envelope {} = {} simulations, {} failures, {} of {} outside\n",
                e.kind,
                e.simulations,
                e.failures,
                e.outside,
                e.observed.len()
            );
        }
        s
    }

    /// Writes coefficients.csv, residuals.csv, `envelope_<kind>.csv`,
    /// ljung_box.csv and manifest.txt into `dir`.
    pub fn write_files(&mut self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        let path = dir.join("coefficients.csv");
        self.write_coefficients(File::create(&path)?)?;
        files.push(path);
        let path = dir.join("residuals.csv");
        self.write_residuals(File::create(&path)?)?;
        files.push(path);
        for e in &self.envelopes {
            let path = dir.join(format!("envelope_{}.csv", e.kind));
            write_envelope_csv(e, File::create(&path)?)?;
            files.push(path);
        }
        let path = dir.join("ljung_box.csv");
        self.write_ljung_box(File::create(&path)?)?;
        files.push(path);
        let path = dir.join("manifest.txt");
        std::fs::write(&path, self.manifest())?;
        files.push(path);
        self.files = files;
        Ok(())
    }
}

/// Columns index, residual, theoretical, lo, median, hi.
pub fn write_envelope_csv<W: Write>(band: &EnvelopeBand, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "residual", "theoretical", "lo", "median", "hi"])?;
    for i in 0..band.observed.len() {
        w.write_record([
            (i + 1).to_string(),
            fmt17(band.observed[i]),
            fmt17(band.theoretical[i]),
            fmt17(band.lo[i]),
            fmt17(band.median[i]),
            fmt17(band.hi[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the configured analysis. Files are written only when `out_dir` is
/// given. A fit that does not converge is an error.
pub fn fit_report(config: &ModelConfig, data: &Dataset, out_dir: Option<&Path>) -> Result<FitReport> {
    config.validate()?;
    let spec = config.build_spec(data)?;
    let f = fit(&spec, &FitOptions::default())?;
    if !f.converged {
        return Err(LbsError::Convergence(format!(
            "fit stopped after {} iterations with score sup-norm {:e}",
            f.iterations, f.gradient_norm
        )));
    }
    let needs_boot = config.ci.iter().any(|m| *m != IntervalMethod::Aci);
    let run = if needs_boot {
        Some(parametric_bootstrap(
            &spec,
            &f,
            config.bootstrap,
            derive_seed(config.seed, BOOTSTRAP_LABEL),
        )?)
    } else {
        None
    };
    let mut intervals = Vec::new();
    for m in &config.ci {
        let ivs = match m {
            IntervalMethod::Aci => aci(&f, config.level),
            IntervalMethod::Pci => pci(run.as_ref().expect("bootstrap run"), config.level),
            IntervalMethod::Bci => bci(run.as_ref().expect("bootstrap run"), &f, &spec, config.level),
        };
        // an unavailable method leaves its columns empty rather than
        // aborting the report
        match ivs {
            Ok(v) => intervals.extend(v),
            Err(LbsError::Unavailable(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let res = residuals(&spec, &f)?;
    let raw = raw_residuals(&spec, &f)?;
    let mut envelopes = Vec::new();
    if config.envelope > 0 {
        for kind in &config.residuals {
            let seed = envelope_seed(config.seed, *kind);
            envelopes.push(envelope(
                &spec,
                &f,
                *kind,
                config.envelope,
                config.envelope_level,
                seed,
            )?);
        }
    }
    let ljung = config
        .ljung_box_lags
        .iter()
        .filter(|&&h| h < spec.n())
        .map(|&h| ljung_box(&raw, h))
        .collect::<Result<Vec<_>>>()?;
    let mut report = FitReport {
        config: config.clone(),
        names: config.coefficient_names(),
        spec,
        fit: f,
        intervals,
        bootstrap: run,
        residuals: res,
        raw_residuals: raw,
        envelopes,
        ljung_box: ljung,
        files: Vec::new(),
    };
    if let Some(dir) = out_dir {
        report.write_files(dir)?;
    }
    Ok(report)
}

/// Envelope for a single residual kind (the `residuals` subcommand).
pub fn residual_envelope(
    config: &ModelConfig,
    data: &Dataset,
    kind: ResidualKind,
    m: usize,
    level: f64,
) -> Result<EnvelopeBand> {
    let spec = config.build_spec(data)?;
    let f = fit(&spec, &FitOptions::default())?;
    if !f.converged {
        return Err(LbsError::Convergence(format!(
            "fit did not converge (score sup-norm {:e})",
            f.gradient_norm
        )));
    }
    if m == 0 {
        let res = residuals(&spec, &f)?;
        let obs = res.get(kind).to_vec();
        let theo = crate::diagnostics::theoretical_quantiles(kind, spec.n(), &res.alpha)?;
        let mut sorted = obs.clone();
        sorted.sort_by(f64::total_cmp);
        return Ok(EnvelopeBand {
            kind,
            level,
            theoretical: theo,
            lo: vec![f64::NAN; sorted.len()],
            median: vec![f64::NAN; sorted.len()],
            hi: vec![f64::NAN; sorted.len()],
            observed: sorted,
            outside: 0,
            simulations: 0,
            failures: 0,
        });
    }
    envelope(&spec, &f, kind, m, level, envelope_seed(config.seed, kind))
}
