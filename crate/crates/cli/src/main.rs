use clap::{Args, Parser, Subcommand, ValueEnum};
use lbs::diagnostics::ResidualKind;
use lbs::inference::IntervalMethod;
use lbs::io::{self, ingest_csv, residual_envelope, write_envelope_csv, Dataset, ModelConfig};
use lbs::rng::stream;
use lbs::shape::{classify_modes, hazard_shape, ModeShape};
use lbs::simstudy::{run_coverage_study, run_estimation_study, run_residual_study, ScenarioConfig, StudyKind};
use lbs::{LbsError, LbsParams, Result};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

type Eval = fn(&LbsParams, f64) -> Result<f64>;

/// Length-biased Birnbaum–Saunders regression.
#[derive(Parser, Debug)]
#[command(name = "lbsreg", version)]
struct Cli {
    /// Worker threads for bootstrap, envelopes and studies (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the model in a config file and report estimates and intervals.
    Fit(FitArgs),
    /// QQ envelope of one residual kind as CSV.
    Residuals(ResidualArgs),
    /// Monte Carlo study presets, or a synthetic evaporation dataset.
    Simulate(SimulateArgs),
    /// Distribution functions for fixed (alpha, theta).
    Dist(DistArgs),
    /// Descriptive statistics of data columns.
    Summarize(SummarizeArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV data; overrides `data` in the config (which is relative to the config file).
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Interval methods, e.g. `aci,pci,bci`.
    #[arg(long, value_delimiter = ',')]
    ci: Option<Vec<String>>,
    #[arg(long)]
    level: Option<f64>,
    /// Bootstrap replicas.
    #[arg(long)]
    boot: Option<usize>,
    /// Envelope simulations per residual kind (0 disables envelopes).
    #[arg(long)]
    envelope: Option<usize>,
}

#[derive(Args, Debug)]
struct ResidualArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "gcs")]
    kind: String,
    #[arg(long, default_value_t = 100)]
    envelope: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Output file (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// table1 … table6, or `evaporation` for a synthetic data set.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    boot: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Run only this block (0-based) of the table.
    #[arg(long)]
    block: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum DistOp {
    Pdf,
    Cdf,
    Sf,
    Hazard,
    Quantile,
    Sample,
    Modes,
    HazardShape,
}

#[derive(Args, Debug)]
struct DistArgs {
    op: DistOp,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    /// Points t (or probabilities for `quantile`).
    #[arg(allow_negative_numbers = true)]
    values: Vec<f64>,
    /// Sample size for `sample`.
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Scan range for `hazard-shape`.
    #[arg(long, default_value_t = 1e-3)]
    lo: f64,
    #[arg(long, default_value_t = 100.0)]
    hi: f64,
}

#[derive(Args, Debug)]
struct SummarizeArgs {
    #[arg(long)]
    data: PathBuf,
    /// Columns to summarize (default: all).
    #[arg(long, value_delimiter = ',')]
    column: Option<Vec<String>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let res = match cli.command {
        Command::Fit(a) => cmd_fit(a, &mut out),
        Command::Residuals(a) => cmd_residuals(a, &mut out),
        Command::Simulate(a) => cmd_simulate(a, &mut out),
        Command::Dist(a) => cmd_dist(a, &mut out),
        Command::Summarize(a) => cmd_summarize(a, &mut out),
    };
    match res.and_then(|_| out.flush().map_err(LbsError::from)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn with_path(path: &Path) -> impl Fn(LbsError) -> LbsError + '_ {
    move |e| match e {
        LbsError::Io(io) => LbsError::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        e => e,
    }
}

fn load_model(a: &ModelArgs) -> Result<(ModelConfig, Dataset)> {
    let mut config = ModelConfig::read(&a.config).map_err(with_path(&a.config))?;
    if let Some(s) = a.seed {
        config.seed = s;
    }
    let path = match (&a.data, &config.data) {
        (Some(p), _) => p.clone(),
        (None, Some(d)) => a.config.parent().unwrap_or(Path::new(".")).join(d),
        (None, None) => {
            return Err(LbsError::Config(
                "no data file: pass --data or set `data` in the config".into(),
            ))
        }
    };
    let data = ingest_csv(&path).map_err(with_path(&path))?;
    Ok((config, data))
}

fn cmd_fit(a: FitArgs, out: &mut impl Write) -> Result<()> {
    let (mut config, data) = load_model(&a.model)?;
    if let Some(ci) = &a.ci {
        config.ci = ci.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    }
    if let Some(l) = a.level {
        config.level = l;
    }
    if let Some(b) = a.boot {
        config.bootstrap = b;
    }
    if let Some(m) = a.envelope {
        config.envelope = m;
    }
    let report = io::fit_report(&config, &data, a.out_dir.as_deref())?;
    write!(out, "{}", report.table())?;
    for lb in &report.ljung_box {
        writeln!(
            out,
            "Ljung-Box lags={} Q={:.4} p={:.4}",
            lb.lags, lb.statistic, lb.p_value
        )?;
    }
    for e in &report.envelopes {
        writeln!(
            out,
            "envelope {}: {}/{} inside ({} simulations)",
            e.kind,
            e.observed.len() - e.outside,
            e.observed.len(),
            e.simulations
        )?;
    }
    if let Some(run) = &report.bootstrap {
        if run.unreliable() {
            writeln!(out, "warning: {} of {} bootstrap refits failed", run.failures, run.b)?;
        }
    }
    for f in &report.files {
        writeln!(out, "wrote {}", f.display())?;
    }
    Ok(())
}

fn cmd_residuals(a: ResidualArgs, out: &mut impl Write) -> Result<()> {
    let (config, data) = load_model(&a.model)?;
    let kind: ResidualKind = a.kind.parse()?;
    let band = residual_envelope(&config, &data, kind, a.envelope, a.level)?;
    match &a.out {
        Some(p) => write_envelope_csv(&band, BufWriter::new(File::create(p)?)),
        None => write_envelope_csv(&band, out),
    }
}

fn open_out<'a>(path: &Option<PathBuf>, out: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(out),
    })
}

fn cmd_simulate(a: SimulateArgs, out: &mut impl Write) -> Result<()> {
    if a.scenario.eq_ignore_ascii_case("evaporation") {
        let data = io::synthetic::evaporation_dataset(a.n.unwrap_or(70), a.seed)?;
        let mut w = open_out(&a.out, out)?;
        data.write_csv(&mut w)?;
        w.flush()?;
        return Ok(());
    }
    let kind = ScenarioConfig::preset_study(&a.scenario)?;
    let mut blocks = ScenarioConfig::preset(&a.scenario, a.n.unwrap_or(100))?;
    if let Some(b) = a.block {
        if b >= blocks.len() {
            return Err(LbsError::InvalidParameter(format!(
                "block {b} out of range, {} has {} blocks",
                a.scenario,
                blocks.len()
            )));
        }
        blocks = vec![blocks.swap_remove(b)];
    }
    let methods = [IntervalMethod::Aci, IntervalMethod::Pci, IntervalMethod::Bci];
    let mut w = open_out(&a.out, out)?;
    for (i, mut cfg) in blocks.into_iter().enumerate() {
        cfg.seed = a.seed;
        if let Some(r) = a.reps {
            cfg.replications = r;
        }
        if let Some(b) = a.boot {
            cfg.bootstrap = b;
        }
        let report = match kind {
            StudyKind::Estimation => run_estimation_study(&cfg)?,
            StudyKind::Coverage => run_coverage_study(&cfg, &methods, a.level)?,
            StudyKind::Residual => run_residual_study(&cfg, &ResidualKind::ALL)?,
        };
        report.write_csv(&mut w, i == 0)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_dist(a: DistArgs, out: &mut impl Write) -> Result<()> {
    let p = LbsParams::new(a.alpha, a.theta)?;
    match a.op {
        DistOp::Modes => {
            let r = classify_modes(&p);
            writeln!(out, "kind,mode,lower,antimode,upper,discriminant")?;
            match r.shape {
                ModeShape::Unimodal { mode } => writeln!(out, "unimodal,{mode:?},,,,{:?}", r.discriminant)?,
                ModeShape::Bimodal { lower, antimode, upper } => {
                    writeln!(out, "bimodal,,{lower:?},{antimode:?},{upper:?},{:?}", r.discriminant)?
                }
            }
        }
        DistOp::HazardShape => {
            let r = hazard_shape(&p, a.lo, a.hi, 2000)?;
            writeln!(out, "lo,hi,direction")?;
            for (lo, hi, d) in &r.segments {
                writeln!(out, "{lo:?},{hi:?},{}", format!("{d:?}").to_lowercase())?;
            }
        }
        DistOp::Sample => {
            let mut rng = stream(a.seed, 0);
            writeln!(out, "t")?;
            for t in p.sample(a.n, &mut rng) {
                writeln!(out, "{t:?}")?;
            }
        }
        op => {
            if a.values.is_empty() {
                return Err(LbsError::InvalidParameter("no values given".into()));
            }
            let (head, f): (&str, Eval) = match op {
                DistOp::Pdf => ("t,pdf", LbsParams::pdf),
                DistOp::Cdf => ("t,cdf", LbsParams::cdf),
                DistOp::Sf => ("t,sf", LbsParams::survival),
                DistOp::Hazard => ("t,hazard", LbsParams::hazard),
                _ => ("p,quantile", LbsParams::quantile),
            };
            writeln!(out, "{head}")?;
            for &v in &a.values {
                writeln!(out, "{v:?},{:?}", f(&p, v)?)?;
            }
        }
    }
    Ok(())
}

fn cmd_summarize(a: SummarizeArgs, out: &mut impl Write) -> Result<()> {
    let data = ingest_csv(&a.data).map_err(with_path(&a.data))?;
    let cols = a.column.unwrap_or_else(|| data.names().to_vec());
    writeln!(
        out,
        "{:<16} {:>5} {:>10} {:>10} {:>10} {:>10} {:>10} {:>8} {:>8} {:>8}",
        "column", "n", "min", "median", "mean", "max", "sd", "cv%", "cs", "ck"
    )?;
    for c in &cols {
        let s = io::summarize(&data, c)?;
        writeln!(
            out,
            "{:<16} {:>5} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>8.2} {:>8.4} {:>8.4}",
            c, s.n, s.min, s.median, s.mean, s.max, s.sd, s.cv, s.cs, s.ck_excess
        )?;
    }
    Ok(())
}
