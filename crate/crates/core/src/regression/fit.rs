use super::init::initial_values;
use super::model::RegressionSpec;
use super::optim::{bfgs, BfgsOptions};
use crate::error::{LbsError, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Sup-norm score tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Overrides the least-squares start.
    pub start: Option<DVector<f64>>,
    /// Skip the covariance computation (bootstrap refits do not need it).
    pub covariance: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol: 1e-8,
            max_iter: 500,
            start: None,
            covariance: true,
        }
    }
}

/// Where the covariance matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HessianSource {
    Analytic,
    FiniteDifference,
    /// Neither Hessian gave a positive-definite observed information.
    Unavailable,
    NotRequested,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// β̂ followed by ρ̂.
    pub delta: DVector<f64>,
    pub p: usize,
    pub q: usize,
    /// [−ℓ̈(δ̂)]⁻¹
    pub covariance: Option<DMatrix<f64>>,
    pub hessian_source: HessianSource,
    pub loglik: f64,
    pub initial_loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    /// ‖score(δ̂)‖∞
    pub gradient_norm: f64,
    /// Largest score change caused by moving each coordinate of δ̂ one ulp,
    /// max over components of Σₖ |Hⱼₖ|·ulp(δ̂ₖ). A score below this cannot be
    /// resolved in double precision.
    pub score_floor: f64,
}

impl FitResult {
    pub fn beta(&self) -> &[f64] {
        &self.delta.as_slice()[..self.p]
    }
    pub fn rho(&self) -> &[f64] {
        &self.delta.as_slice()[self.p..]
    }
    pub fn std_errors(&self) -> Option<Vec<f64>> {
        self.covariance
            .as_ref()
            .map(|c| (0..c.nrows()).map(|j| c[(j, j)].max(0.0).sqrt()).collect())
    }
    /// AIC = −2ℓ + 2(p+q)
    pub fn aic(&self) -> f64 {
        -2.0 * self.loglik + 2.0 * (self.p + self.q) as f64
    }
}

fn information_inverse(info: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let chol = info.clone().cholesky()?;
    let inv = chol.inverse();
    let sym = (&inv + inv.transpose()) * 0.5;
    sym.iter().all(|v| v.is_finite()).then_some(sym)
}

fn ulp(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        f64::MIN_POSITIVE
    } else {
        f64::from_bits(a.to_bits() + 1) - a
    }
}

fn score_floor(h: &DMatrix<f64>, delta: &DVector<f64>) -> f64 {
    let u: Vec<f64> = delta.iter().map(|&d| ulp(d)).collect();
    h.row_iter()
        .map(|r| r.iter().zip(&u).map(|(hjk, uk)| hjk.abs() * uk).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Newton steps with backtracking from `delta`. A step is accepted when it
/// shrinks the score and does not lower the log-likelihood beyond rounding.
/// Stops when the step stalls.
fn newton_polish(
    spec: &RegressionSpec,
    delta: &mut DVector<f64>,
    ll: &mut f64,
    grad: &mut DVector<f64>,
    max_steps: usize,
) -> usize {
    // once the predicted gain is below the rounding floor of an n-term sum the
    // log-likelihood carries no information and only the score is compared
    let floor = spec.n() as f64 * f64::EPSILON * ll.abs().max(1.0);
    let mut taken = 0;
    for _ in 0..max_steps {
        let Ok(h) = spec.hessian(delta) else { break };
        let Some(chol) = (-h).cholesky() else { break };
        let dir = chol.solve(grad);
        let noise = 0.5 * grad.dot(&dir) < floor;
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let trial = &*delta + &dir * step;
            if let Ok((lt, gt)) = spec.value_and_score(&trial) {
                let slack = if noise {
                    floor
                } else {
                    64.0 * f64::EPSILON * ll.abs().max(1.0)
                };
                if lt >= *ll - slack && gt.amax() < grad.amax() {
                    *delta = trial;
                    *ll = lt;
                    *grad = gt;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
        taken += 1;
        if (dir * step).amax() <= 1e-13 * (1.0 + delta.amax()) {
            break;
        }
    }
    taken
}

/// Maximum-likelihood fit by BFGS from the least-squares start, followed by a
/// short Newton polish. The covariance is the inverse observed information.
pub fn fit(spec: &RegressionSpec, options: &FitOptions) -> Result<FitResult> {
    let start = match &options.start {
        Some(s) if s.len() == spec.dim() => s.clone(),
        Some(s) => {
            return Err(LbsError::InvalidParameter(format!(
                "start has length {}, expected {}",
                s.len(),
                spec.dim()
            )))
        }
        None => initial_values(spec)?,
    };
    let initial_loglik = spec.log_likelihood(&start)?;
    let seed = spec.hessian(&start).ok().and_then(|h| information_inverse(&(-h)));
    let bopts = BfgsOptions {
        tol: options.tol,
        max_iter: options.max_iter,
        ..BfgsOptions::default()
    };
    let out = bfgs(|d| spec.value_and_score(d).map(|(l, g)| (-l, -g)), start, seed, &bopts)?;
    let mut delta = out.x;
    let mut ll = -out.value;
    let mut grad = -out.gradient;
    let polish = newton_polish(spec, &mut delta, &mut ll, &mut grad, 8);
    let gradient_norm = grad.amax();
    let hess = spec.hessian(&delta).ok();
    let score_floor = hess.as_ref().map_or(0.0, |h| score_floor(h, &delta));
    let converged = gradient_norm.is_finite() && gradient_norm < options.tol.max(score_floor);

    let (covariance, hessian_source) = if !options.covariance {
        (None, HessianSource::NotRequested)
    } else if let Some(c) = hess.and_then(|h| information_inverse(&(-h))) {
        (Some(c), HessianSource::Analytic)
    } else if let Some(c) = spec
        .finite_difference_hessian(&delta)
        .ok()
        .and_then(|h| information_inverse(&(-h)))
    {
        (Some(c), HessianSource::FiniteDifference)
    } else {
        (None, HessianSource::Unavailable)
    };

    Ok(FitResult {
        delta,
        p: spec.p(),
        q: spec.q(),
        covariance,
        hessian_source,
        loglik: ll,
        initial_loglik,
        converged,
        iterations: out.iterations + polish,
        gradient_norm,
        score_floor,
    })
}
