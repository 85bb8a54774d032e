//! Browser bindings for the static demo in `www/`.

use lbs::diagnostics::{envelope, residuals, ResidualKind};
use lbs::rng::stream;
use lbs::shape::{classify_modes, hazard_shape, ModeShape, Monotonicity};
use lbs::simstudy::{AlphaComponent, ScenarioConfig};
use lbs::{fit, FitOptions, LbsParams};
use wasm_bindgen::prelude::*;

fn js_err(e: lbs::LbsError) -> JsError {
    JsError::new(&e.to_string())
}

/// Density and hazard on a grid, with the mode structure.
#[wasm_bindgen]
pub struct Curves {
    t: Vec<f64>,
    pdf: Vec<f64>,
    hazard: Vec<f64>,
    modes: Vec<f64>,
    antimode: f64,
    turning: Vec<f64>,
    increasing_at_end: bool,
}

#[wasm_bindgen]
impl Curves {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn pdf(&self) -> Vec<f64> {
        self.pdf.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn hazard(&self) -> Vec<f64> {
        self.hazard.clone()
    }
    /// One mode when unimodal, (t₋, t₊) when bimodal.
    #[wasm_bindgen(getter)]
    pub fn modes(&self) -> Vec<f64> {
        self.modes.clone()
    }
    /// NaN when unimodal.
    #[wasm_bindgen(getter)]
    pub fn antimode(&self) -> f64 {
        self.antimode
    }
    #[wasm_bindgen(getter)]
    pub fn turning(&self) -> Vec<f64> {
        self.turning.clone()
    }
    #[wasm_bindgen(getter, js_name = increasingAtEnd)]
    pub fn increasing_at_end(&self) -> bool {
        self.increasing_at_end
    }
}

#[wasm_bindgen]
pub fn curves(alpha: f64, theta: f64, tmax: f64, points: usize) -> Result<Curves, JsError> {
    let p = LbsParams::new(alpha, theta).map_err(js_err)?;
    let points = points.max(2);
    let t: Vec<f64> = (1..=points).map(|i| tmax * i as f64 / points as f64).collect();
    let pdf = t
        .iter()
        .map(|&x| p.pdf(x))
        .collect::<lbs::Result<Vec<_>>>()
        .map_err(js_err)?;
    let hazard = t
        .iter()
        .map(|&x| p.hazard(x))
        .collect::<lbs::Result<Vec<_>>>()
        .map_err(js_err)?;
    let report = classify_modes(&p);
    let antimode = match report.shape {
        ModeShape::Bimodal { antimode, .. } => antimode,
        ModeShape::Unimodal { .. } => f64::NAN,
    };
    let shape = hazard_shape(&p, t[0], tmax, 800).map_err(js_err)?;
    let increasing_at_end = shape.segments.last().is_some_and(|s| s.2 == Monotonicity::Increasing);
    Ok(Curves {
        t,
        pdf,
        hazard,
        modes: report.modes(),
        antimode,
        turning: shape.turning_points,
        increasing_at_end,
    })
}

/// Histogram of a sample against the exact density.
#[wasm_bindgen]
pub struct Histogram {
    edges: Vec<f64>,
    density: Vec<f64>,
    exact: Vec<f64>,
    ks: f64,
    outside: usize,
}

#[wasm_bindgen]
impl Histogram {
    #[wasm_bindgen(getter)]
    pub fn edges(&self) -> Vec<f64> {
        self.edges.clone()
    }
    /// Empirical density per bin.
    #[wasm_bindgen(getter)]
    pub fn density(&self) -> Vec<f64> {
        self.density.clone()
    }
    /// Exact density at bin midpoints.
    #[wasm_bindgen(getter)]
    pub fn exact(&self) -> Vec<f64> {
        self.exact.clone()
    }
    /// Kolmogorov–Smirnov distance to the exact CDF.
    #[wasm_bindgen(getter)]
    pub fn ks(&self) -> f64 {
        self.ks
    }
    /// Draws beyond the last edge.
    #[wasm_bindgen(getter)]
    pub fn outside(&self) -> usize {
        self.outside
    }
}

#[wasm_bindgen]
pub fn sample_histogram(alpha: f64, theta: f64, n: usize, bins: usize, seed: u64) -> Result<Histogram, JsError> {
    let p = LbsParams::new(alpha, theta).map_err(js_err)?;
    let bins = bins.max(1);
    let mut x = p.sample(n.max(1), &mut stream(seed, 0));
    x.sort_by(f64::total_cmp);
    let hi = p.quantile(0.99).map_err(js_err)?;
    let w = hi / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut outside = 0;
    for &v in &x {
        match ((v / w) as usize).min(bins) {
            b if b < bins => counts[b] += 1,
            _ => outside += 1,
        }
    }
    let m = x.len() as f64;
    let density = counts.iter().map(|&c| c as f64 / (m * w)).collect();
    let exact = (0..bins)
        .map(|b| p.pdf((b as f64 + 0.5) * w))
        .collect::<lbs::Result<Vec<_>>>()
        .map_err(js_err)?;
    let mut ks: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let f = p.cdf(v).map_err(js_err)?;
        ks = ks.max((f - i as f64 / m).abs()).max(((i + 1) as f64 / m - f).abs());
    }
    Ok(Histogram {
        edges: (0..=bins).map(|b| b as f64 * w).collect(),
        density,
        exact,
        ks,
        outside,
    })
}

/// Regression fit on simulated data with a QQ envelope of the
/// randomized quantile residuals.
#[wasm_bindgen]
pub struct FitDemo {
    truth: Vec<f64>,
    estimate: Vec<f64>,
    se: Vec<f64>,
    loglik: f64,
    iterations: usize,
    theoretical: Vec<f64>,
    observed: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    outside: usize,
    gcs_mean: f64,
}

#[wasm_bindgen]
impl FitDemo {
    /// (β₀, β₁, ρ₀, ρ₁)
    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn estimate(&self) -> Vec<f64> {
        self.estimate.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn se(&self) -> Vec<f64> {
        self.se.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn loglik(&self) -> f64 {
        self.loglik
    }
    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }
    #[wasm_bindgen(getter)]
    pub fn theoretical(&self) -> Vec<f64> {
        self.theoretical.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn observed(&self) -> Vec<f64> {
        self.observed.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn lo(&self) -> Vec<f64> {
        self.lo.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn hi(&self) -> Vec<f64> {
        self.hi.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn outside(&self) -> usize {
        self.outside
    }
    #[wasm_bindgen(getter, js_name = gcsMean)]
    pub fn gcs_mean(&self) -> f64 {
        self.gcs_mean
    }
}

/// ln θᵢ = β₀ + β₁xᵢ, ln αᵢ = ρ₀ + ρ₁wᵢ with x, w ~ U(−1, 1).
#[wasm_bindgen]
pub fn fit_demo(
    n: usize,
    beta0: f64,
    beta1: f64,
    rho0: f64,
    rho1: f64,
    sims: usize,
    seed: u64,
) -> Result<FitDemo, JsError> {
    let mut cfg = ScenarioConfig::covariate(n, rho1);
    cfg.beta = [beta0, beta1];
    cfg.alpha = AlphaComponent::Covariate { rho0, rho1 };
    cfg.seed = seed;
    cfg.validate().map_err(js_err)?;
    let spec = cfg.simulate(0).map_err(js_err)?;
    let f = fit(&spec, &FitOptions::default()).map_err(js_err)?;
    if !f.converged {
        return Err(JsError::new(&format!(
            "fit did not converge (score {:e})",
            f.gradient_norm
        )));
    }
    let res = residuals(&spec, &f).map_err(js_err)?;
    let band = envelope(&spec, &f, ResidualKind::Rq, sims.max(1), 0.95, seed.wrapping_add(1)).map_err(js_err)?;
    Ok(FitDemo {
        truth: cfg.truth(),
        estimate: f.delta.iter().copied().collect(),
        se: f.std_errors().unwrap_or_default(),
        loglik: f.loglik,
        iterations: f.iterations,
        theoretical: band.theoretical,
        observed: band.observed,
        lo: band.lo,
        hi: band.hi,
        outside: band.outside,
        gcs_mean: res.gcs.iter().sum::<f64>() / res.gcs.len() as f64,
    })
}
