//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p lbs-core --test acceptance`.

use lbs::diagnostics::{ljung_box, ResidualKind};
use lbs::inference::IntervalMethod;
use lbs::io::fit_report;
use lbs::io::synthetic::{evaporation_config, evaporation_dataset, evaporation_truth};
use lbs::regression::{fit, FitOptions, Link, RegressionSpec};
use lbs::rng::stream;
use lbs::shape::{classify_modes, ModeShape};
use lbs::simstudy::{run_coverage_study, run_estimation_study, run_residual_study, ScenarioConfig};
use lbs::{GammaMixture, LbsParams};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

type Criterion = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------------------
// independent reference routines

/// ln f(t; α, θ) from the length-biased construction t·f_BS(t)/E(Y).
fn oracle_ln_pdf(alpha: f64, theta: f64, t: f64) -> f64 {
    let a = ((t / theta).sqrt() - (theta / t).sqrt()) / alpha;
    let da = ((t / theta).sqrt() + (theta / t).sqrt()) / (2.0 * alpha * t);
    t.ln() - 0.5 * a * a - 0.5 * (2.0 * PI).ln() + da.ln() - (theta * (alpha * alpha + 2.0) / 2.0).ln()
}

/// ∫ f(t) dt over t ∈ [e^lo, e^hi], substituting t = e^u.
fn oracle_mass(alpha: f64, theta: f64, lo: f64, hi: f64) -> f64 {
    let pieces = 400;
    let h = (hi - lo) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let a = lo + k as f64 * h;
            quadrature::integrate(
                |u: f64| (oracle_ln_pdf(alpha, theta, u.exp()) + u).exp(),
                a,
                a + h,
                1e-15,
            )
            .integral
        })
        .sum()
}

/// Half-width in ln t beyond which the mass is below 1e-300.
fn log_range(alpha: f64) -> f64 {
    (1500.0 * alpha * alpha + 50.0).ln()
}

/// Kolmogorov distribution tail P(K > λ).
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn ks_p_value(d: f64, effective_n: f64) -> f64 {
    let sn = effective_n.sqrt();
    kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
}

fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    (d, ks_p_value(d, na * nb / (na + nb)))
}

fn ks_one_sample(x: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut x = x.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d = 0.0f64;
    for (i, &v) in x.iter().enumerate() {
        let f = cdf(v);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    (d, ks_p_value(d, n))
}

/// Nelder–Mead on two parameters, restarted until it stops moving.
fn nelder_mead(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], step: f64) -> [f64; 2] {
    let mut best = start;
    for _ in 0..8 {
        let mut s = [best, [best[0] + step, best[1]], [best[0], best[1] + step]];
        let mut fs = s.map(&f);
        for _ in 0..5000 {
            let mut idx = [0, 1, 2];
            idx.sort_by(|&i, &j| fs[i].total_cmp(&fs[j]));
            s = idx.map(|i| s[i]);
            fs = idx.map(|i| fs[i]);
            let size = (s[2][0] - s[0][0]).abs().max((s[2][1] - s[0][1]).abs());
            if size < 1e-12 {
                break;
            }
            let c = [(s[0][0] + s[1][0]) / 2.0, (s[0][1] + s[1][1]) / 2.0];
            let at = |k: f64| [c[0] + k * (s[2][0] - c[0]), c[1] + k * (s[2][1] - c[1])];
            let r = at(-1.0);
            let fr = f(r);
            if fr < fs[0] {
                let e = at(-2.0);
                let fe = f(e);
                (s[2], fs[2]) = if fe < fr { (e, fe) } else { (r, fr) };
            } else if fr < fs[1] {
                (s[2], fs[2]) = (r, fr);
            } else {
                let ct = at(if fr < fs[2] { -0.5 } else { 0.5 });
                let fc = f(ct);
                if fc < fs[2].min(fr) {
                    (s[2], fs[2]) = (ct, fc);
                } else {
                    for i in 1..3 {
                        s[i] = [(s[i][0] + s[0][0]) / 2.0, (s[i][1] + s[0][1]) / 2.0];
                        fs[i] = f(s[i]);
                    }
                }
            }
        }
        let moved = (s[0][0] - best[0]).abs().max((s[0][1] - best[1]).abs());
        best = s[0];
        if moved < 1e-11 {
            break;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// criteria

fn distribution_correctness() -> Outcome {
    let start = Instant::now();
    let (mut worst_mass, mut worst_sf) = (0.0f64, 0.0f64);
    for &alpha in &[0.25, 0.5, 1.0, 2.0, 2.5, 4.0] {
        for &theta in &[0.5, 1.0, 10.0] {
            let p = LbsParams::new(alpha, theta).unwrap();
            let (c, r) = (theta.ln(), log_range(alpha));
            let mass = oracle_mass(alpha, theta, c - r, c + r);
            worst_mass = worst_mass.max((mass - 1.0).abs());
            for &k in &[0.05, 0.3, 0.9, 1.0, 1.7, 4.0, 15.0] {
                let t = k * theta;
                let tail = oracle_mass(alpha, theta, t.ln(), c + r);
                worst_sf = worst_sf.max((p.survival(t).unwrap() - tail).abs());
            }
        }
    }
    let secs = start.elapsed();
    check(
        worst_mass < 1e-8 && worst_sf < 1e-8 && secs < Duration::from_secs(30),
        format!("max |mass-1| {worst_mass:.2e}, max |S-quad| {worst_sf:.2e}, {secs:.1?}"),
    )
}

fn mode_theorem() -> Outcome {
    let start = Instant::now();
    let mut rng = stream(2002, 0);
    let grid = 100_000;
    let mut bad = Vec::new();
    let mut bimodal = 0;
    for _ in 0..200 {
        let alpha: f64 = rng.random_range(0.2..4.5);
        let theta: f64 = rng.random_range(-2.0f64..2.5).exp();
        let p = LbsParams::new(alpha, theta).unwrap();
        let span = (4.0 * alpha * alpha + 4.0).ln();
        let (lo, hi) = (theta.ln() - span, theta.ln() + span);
        let cell = (hi - lo) / (grid - 1) as f64;
        let u: Vec<f64> = (0..grid).map(|i| lo + i as f64 * cell).collect();
        let f: Vec<f64> = u.iter().map(|&v| oracle_ln_pdf(alpha, theta, v.exp())).collect();
        let mut maxima = Vec::new();
        let mut minima = Vec::new();
        for i in 1..grid - 1 {
            if f[i] > f[i - 1] && f[i] >= f[i + 1] {
                maxima.push(u[i]);
            }
            if f[i] < f[i - 1] && f[i] <= f[i + 1] {
                minima.push(u[i]);
            }
        }
        let near = |a: f64, b: f64| (a - b.ln()).abs() <= cell;
        let ok = match classify_modes(&p).shape {
            ModeShape::Unimodal { mode } => maxima.len() == 1 && near(maxima[0], mode),
            ModeShape::Bimodal { lower, antimode, upper } => {
                bimodal += 1;
                maxima.len() == 2
                    && minima.len() == 1
                    && near(maxima[0], lower)
                    && near(maxima[1], upper)
                    && near(minima[0], antimode)
            }
        };
        if !ok {
            bad.push((alpha, theta, maxima.len()));
        }
    }
    let secs = start.elapsed();
    check(
        bad.is_empty() && secs < Duration::from_secs(60),
        format!(
            "200 pairs ({bimodal} bimodal), {} disagreements {:?}, {secs:.1?}",
            bad.len(),
            &bad[..bad.len().min(3)]
        ),
    )
}

fn sampler_law() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for (k, &alpha) in [0.5, 1.0, 3.0].iter().enumerate() {
        let p = LbsParams::new(alpha, 1.0).unwrap();
        let mix = p.sample(10_000, &mut stream(303, 2 * k as u64));
        let inv = p
            .sample_by_inversion(10_000, &mut stream(303, 2 * k as u64 + 1))
            .unwrap();
        let (d, pv) = ks_two_sample(&mix, &inv);
        let g = GammaMixture::new(alpha);
        let u_mix: Vec<f64> = mix.iter().map(|&t| p.u_transform(t)).collect();
        let u_inv: Vec<f64> = inv.iter().map(|&t| p.u_transform(t)).collect();
        let (_, pm) = ks_one_sample(&u_mix, |u| g.cdf(u));
        let (_, pi) = ks_one_sample(&u_inv, |u| g.cdf(u));
        pass &= pv > 0.01 && pm > 0.01 && pi > 0.01;
        lines.push(format!("α={alpha}: D={d:.4} p={pv:.3}, U p={pm:.3}/{pi:.3}"));
    }
    check(pass, lines.join("; "))
}

fn simulate_design(n: usize, seed: u64) -> RegressionSpec {
    let mut cfg = ScenarioConfig::covariate(n, 0.5);
    cfg.seed = seed;
    cfg.simulate(0).unwrap()
}

fn derivative_exactness() -> Outcome {
    let start = Instant::now();
    let base = simulate_design(80, 404);
    let links = [
        (Link::Log, Link::Log),
        (Link::SquareRoot, Link::Log),
        (Link::Log, Link::SquareRoot),
    ];
    let mut rng = stream(404, 9);
    let (mut worst_g, mut worst_h, mut points) = (0.0f64, 0.0f64, 0);
    while points < 50 {
        let (l1, l2) = links[points % 3];
        let spec = RegressionSpec::new(base.response().to_vec(), base.x().clone(), base.w().clone(), l1, l2).unwrap();
        let d = DVector::from_fn(spec.dim(), |j, _| {
            let centre = match (j < spec.p(), l1, l2) {
                (true, Link::SquareRoot, _) | (false, _, Link::SquareRoot) => 2.0,
                _ => 0.0,
            };
            centre + rng.random_range(-1.0..1.0)
        });
        let Ok(ll) = spec.log_likelihood(&d) else { continue };
        if !ll.is_finite() {
            continue;
        }
        let g = spec.score(&d).unwrap();
        let h = spec.hessian(&d).unwrap();
        let k = spec.dim();
        let mut fd_g = DVector::zeros(k);
        let mut fd_h = DMatrix::zeros(k, k);
        for j in 0..k {
            let step = 1e-6 * (1.0 + d[j].abs());
            let mut up = d.clone();
            up[j] += step;
            let mut dn = d.clone();
            dn[j] -= step;
            fd_g[j] = (spec.log_likelihood(&up).unwrap() - spec.log_likelihood(&dn).unwrap()) / (2.0 * step);
            let col = (spec.score(&up).unwrap() - spec.score(&dn).unwrap()) / (2.0 * step);
            fd_h.set_column(j, &col);
        }
        worst_g = worst_g.max((&g - &fd_g).amax() / fd_g.amax().max(1.0));
        worst_h = worst_h.max((&h - &fd_h).amax() / fd_h.amax().max(1.0));
        points += 1;
    }
    let secs = start.elapsed();
    check(
        worst_g < 1e-6 && worst_h < 1e-5 && secs < Duration::from_secs(30),
        format!("50 points, score rel {worst_g:.2e}, Hessian rel {worst_h:.2e}, {secs:.1?}"),
    )
}

fn estimation_mse() -> Outcome {
    let start = Instant::now();
    let mut cfg = ScenarioConfig::covariate(500, 0.25);
    cfg.replications = 1000;
    let r = run_estimation_study(&cfg).unwrap();
    let published = [("beta0", 0.0003), ("beta1", 0.0007), ("rho0", 0.0010), ("rho1", 0.0025)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, mse) in published {
        let c = r.coefficient(name).unwrap();
        pass &= (c.mse - mse).abs() <= 0.5 * mse;
        if name.starts_with("beta") {
            pass &= c.bias.abs() < 0.01;
        }
        parts.push(format!("{name} bias {:+.4} mse {:.5} (published {mse})", c.bias, c.mse));
    }
    let secs = start.elapsed();
    pass &= secs < Duration::from_secs(600);
    check(
        pass,
        format!("{}; {} failures; {secs:.1?}", parts.join(", "), r.failures),
    )
}

fn coverage() -> Outcome {
    let start = Instant::now();
    let mut cfg = ScenarioConfig::covariate(500, 0.25);
    cfg.replications = 1000;
    let r = run_coverage_study(&cfg, &[IntervalMethod::Aci], 0.95).unwrap();
    let aci = r.coverage_of("beta1", IntervalMethod::Aci).unwrap().percent();

    let mut cfg = ScenarioConfig::covariate(100, 0.25);
    cfg.replications = 200;
    cfg.bootstrap = 200;
    let r = run_coverage_study(&cfg, &[IntervalMethod::Pci, IntervalMethod::Bci], 0.95).unwrap();
    let pci = r.coverage_of("beta1", IntervalMethod::Pci).unwrap().percent();
    let bci = r.coverage_of("beta1", IntervalMethod::Bci).unwrap().percent();
    let secs = start.elapsed();
    check(
        (93.5..=96.5).contains(&aci)
            && (pci - 93.80).abs() <= 4.0
            && (bci - 93.88).abs() <= 4.0
            && secs < Duration::from_secs(1800),
        format!(
            "beta1 ACI n=500 {aci:.2} (published 95.04), PCI n=100 {pci:.2} (93.80), BCI {bci:.2} (93.88), {secs:.1?}"
        ),
    )
}

fn small_sample_coverage() -> Outcome {
    let start = Instant::now();
    let mut cfg = ScenarioConfig::intercept(50, 2.5);
    cfg.replications = 500;
    let r = run_coverage_study(&cfg, &[IntervalMethod::Aci, IntervalMethod::Bci], 0.95).unwrap();
    let aci = r.coverage_of("beta0", IntervalMethod::Aci).unwrap().percent();
    let bci = r.coverage_of("beta0", IntervalMethod::Bci).unwrap().percent();
    check(
        aci < 80.0 && bci > aci,
        format!(
            "beta0 ACI {aci:.2} (published 66.58), BCI {bci:.2} (published 81.42), B={}, {} failures, {:.1?}",
            cfg.bootstrap,
            r.failures,
            start.elapsed()
        ),
    )
}

fn residual_moments() -> Outcome {
    let start = Instant::now();
    let mut cfg = ScenarioConfig::covariate(500, 0.25);
    cfg.replications = 500;
    let r = run_residual_study(&cfg, &[ResidualKind::Gcs, ResidualKind::Rq]).unwrap();
    let gcs = r.residual(ResidualKind::Gcs).unwrap();
    let rq = r.residual(ResidualKind::Rq).unwrap();
    let m = gcs.pooled;
    let published = [0.9999, 0.9969, 1.9310, 8.3488];
    let tol = [0.02, 0.02, 0.1, 0.5];
    let got = [m.mean, m.sd, m.cs, m.ck];
    let pass = (0..4).all(|k| (got[k] - published[k]).abs() <= tol[k])
        && rq.pooled.mean.abs() < 0.01
        && (rq.pooled.sd - 1.0).abs() < 0.02;
    let a = gcs.averaged;
    check(
        pass,
        format!(
            "GCS pooled ({:.4}, {:.4}, {:.4}, {:.4}), per-replication average ({:.4}, {:.4}, {:.4}, {:.4}); RQ mean {:+.4} sd {:.4}; {:.1?}",
            m.mean, m.sd, m.cs, m.ck, a.mean, a.sd, a.cs, a.ck, rq.pooled.mean, rq.pooled.sd,
            start.elapsed()
        ),
    )
}

/// Datasets whose direct maximum lies on the Gamma(3/2) boundary
/// (α → ∞, θα² fixed) have no interior MLE and are redrawn; the filter uses
/// the direct maximizer only.
fn oracle_equivalence() -> Outcome {
    let mut rng = stream(909, 0);
    let (mut worst, mut used, mut draw, mut boundary) = (0.0f64, 0, 0u64, 0);
    while used < 20 {
        draw += 1;
        let alpha: f64 = rng.random_range(0.2..3.0);
        let theta: f64 = rng.random_range(-1.5f64..2.0).exp();
        let n = 40 + 20 * (used % 5);
        let t = LbsParams::new(alpha, theta).unwrap().sample(n, &mut stream(909, draw));
        let negll = |p: [f64; 2]| -> f64 {
            let (th, al) = (p[0].exp(), p[1].exp());
            -t.iter().map(|&v| oracle_ln_pdf(al, th, v)).sum::<f64>()
        };
        let mut start = [0.0, 0.0];
        let mut best = f64::INFINITY;
        for i in 0..61 {
            for j in 0..41 {
                let p = [-3.0 + 0.1 * i as f64, -2.5 + 0.1 * j as f64];
                let v = negll(p);
                if v < best {
                    best = v;
                    start = p;
                }
            }
        }
        let opt = nelder_mead(negll, start, 0.05);
        if opt[1] > 4.0 {
            boundary += 1;
            continue;
        }
        let spec = RegressionSpec::intercept_only(t.clone(), Link::Log, Link::Log).unwrap();
        let res = fit(&spec, &FitOptions::default()).unwrap();
        if !res.converged {
            return check(false, format!("dataset {used} did not converge"));
        }
        worst = worst
            .max((res.delta[0] - opt[0]).abs())
            .max((res.delta[1] - opt[1]).abs());
        used += 1;
    }
    check(
        worst < 1e-6,
        format!("20 datasets, max |δ - δ_direct| {worst:.2e} ({boundary} boundary draws redrawn)"),
    )
}

fn pipeline() -> Outcome {
    let start = Instant::now();
    let truth = evaporation_truth();
    let (mut recovered, mut inside, mut points, mut errors) = (0, 0, 0, 0);
    for seed in 0..100u64 {
        let data = evaporation_dataset(70, 1000 + seed).unwrap();
        let mut config = evaporation_config();
        config.seed = seed;
        config.ci = vec![IntervalMethod::Aci, IntervalMethod::Pci, IntervalMethod::Bci];
        config.bootstrap = 100;
        match fit_report(&config, &data, None) {
            Ok(r) => {
                let se = r.fit.std_errors().unwrap();
                let ok = (0..truth.len()).all(|j| (r.fit.delta[j] - truth[j]).abs() <= 3.0 * se[j]);
                recovered += ok as usize;
                for e in &r.envelopes {
                    inside += e.observed.len() - e.outside;
                    points += e.observed.len();
                }
            }
            Err(_) => errors += 1,
        }
    }
    let frac = inside as f64 / points.max(1) as f64;

    // Ljung–Box under i.i.d. data
    let p = LbsParams::new(0.5, 100.0).unwrap();
    let mut pv = [Vec::new(), Vec::new()];
    for k in 0..1000u64 {
        let x = p.sample(70, &mut stream(1010, k));
        for (slot, h) in [4, 16].iter().enumerate() {
            pv[slot].push(ljung_box(&x, *h).unwrap().p_value);
        }
    }
    let (_, p4) = ks_one_sample(&pv[0], |u| u.clamp(0.0, 1.0));
    let (_, p16) = ks_one_sample(&pv[1], |u| u.clamp(0.0, 1.0));
    check(
        recovered >= 90 && frac >= 0.90 && p4 > 0.01 && p16 > 0.01,
        format!(
            "recovered {recovered}/100 ({errors} errors), envelope coverage {:.2}%, Ljung-Box null KS p {p4:.3} (h=4) {p16:.3} (h=16), {:.1?}",
            100.0 * frac,
            start.elapsed()
        ),
    )
}

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("distribution correctness", distribution_correctness),
        ("mode theorem", mode_theorem),
        ("sampler law", sampler_law),
        ("derivative exactness", derivative_exactness),
        ("estimation bias and MSE", estimation_mse),
        ("interval coverage", coverage),
        ("small-sample coverage ordering", small_sample_coverage),
        ("residual moments", residual_moments),
        ("oracle equivalence", oracle_equivalence),
        ("synthetic pipeline", pipeline),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let o = run();
        println!(
            "AC{:<2} {} {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += !o.pass as usize;
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
