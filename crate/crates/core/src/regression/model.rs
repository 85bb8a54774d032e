//! LBS regression: g₁(θᵢ) = xᵢᵀβ, g₂(αᵢ) = wᵢᵀρ, coefficient vector δ = (β, ρ).
//!
//! Per observation, with ℓᵢ the log-density,
//!
//! ```text
//! zᵢ  = ∂ℓᵢ/∂θ  = 1/(t+θ) − (1/t − t/θ²)/(2α²) − 3/(2θ)
//! cᵢ  = ∂ℓᵢ/∂α  = (t/θ + θ/t − 2)/α³ − (2 + 3α²)/(2α + α³)
//! zᵢ′ = ∂²ℓᵢ/∂θ² = 3/(2θ²) − t/(α²θ³) − 1/(t+θ)²
//! cᵢ′ = ∂²ℓᵢ/∂α² = (4 + 3α⁴)/(2α + α³)² − 3(t/θ + θ/t − 2)/α⁴
//! kᵢ  = ∂²ℓᵢ/∂θ∂α = (1/t − t/θ²)/α³
//! ```
//!
//! and the chain-rule factors aᵢ = 1/g₁′(θᵢ), bᵢ = 1/g₂′(αᵢ),
//! dᵢ = −g₁″/g₁′², eᵢ = −g₂″/g₂′². The score is (Xᵀ𝒜z, Wᵀℬc) and the
//! Hessian has blocks XᵀVX, XᵀHW, WᵀUW with vᵢ = zᵢ′aᵢ² + zᵢdᵢaᵢ,
//! hᵢ = kᵢbᵢaᵢ, uᵢ = cᵢ′bᵢ² + cᵢeᵢbᵢ.

use super::link::Link;
use crate::dist::LbsParams;
use crate::error::{LbsError, Result};
use crate::numeric::NeumaierSum;
use crate::special::LN_SQRT_2PI;
use nalgebra::{DMatrix, DVector};

/// Response, design matrices and links of an LBS regression.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSpec {
    t: Vec<f64>,
    x: DMatrix<f64>,
    w: DMatrix<f64>,
    theta_link: Link,
    alpha_link: Link,
}

/// Diagonal factors of the score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreWorkspace {
    pub z: Vec<f64>,
    pub c: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Diagonal factors of the Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianWorkspace {
    pub zprime: Vec<f64>,
    pub cprime: Vec<f64>,
    pub d: Vec<f64>,
    pub e: Vec<f64>,
    pub k: Vec<f64>,
    pub v: Vec<f64>,
    pub h: Vec<f64>,
    pub u: Vec<f64>,
}

fn column_rank(m: &DMatrix<f64>) -> usize {
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let tol = smax * (m.nrows().max(m.ncols()) as f64) * f64::EPSILON * 16.0;
    svd.singular_values.iter().filter(|&&s| s > tol).count()
}

impl RegressionSpec {
    pub fn new(t: Vec<f64>, x: DMatrix<f64>, w: DMatrix<f64>, theta_link: Link, alpha_link: Link) -> Result<Self> {
        let n = t.len();
        if let Some((i, v)) = t.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(LbsError::InvalidParameter(format!(
                "response must be positive and finite; t[{i}] = {v}"
            )));
        }
        if x.nrows() != n || w.nrows() != n {
            return Err(LbsError::InvalidParameter(format!(
                "design rows ({}, {}) do not match n = {n}",
                x.nrows(),
                w.nrows()
            )));
        }
        let (p, q) = (x.ncols(), w.ncols());
        if p == 0 || q == 0 {
            return Err(LbsError::InvalidParameter(
                "both design matrices need at least one column".into(),
            ));
        }
        if p + q >= n {
            return Err(LbsError::InvalidParameter(format!(
                "need p + q < n, got p = {p}, q = {q}, n = {n}"
            )));
        }
        if column_rank(&x) < p {
            return Err(LbsError::SingularDesign("X is not of full column rank".into()));
        }
        if column_rank(&w) < q {
            return Err(LbsError::SingularDesign("W is not of full column rank".into()));
        }
        Ok(RegressionSpec {
            t,
            x,
            w,
            theta_link,
            alpha_link,
        })
    }

    /// Intercept-only model in both components.
    pub fn intercept_only(t: Vec<f64>, theta_link: Link, alpha_link: Link) -> Result<Self> {
        let n = t.len();
        Self::new(
            t,
            DMatrix::from_element(n, 1, 1.0),
            DMatrix::from_element(n, 1, 1.0),
            theta_link,
            alpha_link,
        )
    }

    /// Same designs and links, new response (length and positivity checked).
    pub fn with_response(&self, t: Vec<f64>) -> Result<Self> {
        if t.len() != self.n() {
            return Err(LbsError::InvalidParameter("response length changed".into()));
        }
        if t.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(LbsError::InvalidParameter("response must be positive".into()));
        }
        Ok(RegressionSpec { t, ..self.clone() })
    }

    /// The model with observation `i` removed. Fails if that breaks rank.
    pub fn without_observation(&self, i: usize) -> Result<Self> {
        let t: Vec<f64> = self
            .t
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| *v)
            .collect();
        Self::new(
            t,
            self.x.clone().remove_row(i),
            self.w.clone().remove_row(i),
            self.theta_link,
            self.alpha_link,
        )
    }

    /// Rows reordered by `perm` (row k of the result is row `perm[k]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        let t = perm.iter().map(|&i| self.t[i]).collect();
        let x = DMatrix::from_fn(n, self.p(), |r, c| self.x[(perm[r], c)]);
        let w = DMatrix::from_fn(n, self.q(), |r, c| self.w[(perm[r], c)]);
        Self::new(t, x, w, self.theta_link, self.alpha_link)
    }

    pub fn n(&self) -> usize {
        self.t.len()
    }
    pub fn p(&self) -> usize {
        self.x.ncols()
    }
    pub fn q(&self) -> usize {
        self.w.ncols()
    }
    /// p + q
    pub fn dim(&self) -> usize {
        self.p() + self.q()
    }
    pub fn response(&self) -> &[f64] {
        &self.t
    }
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }
    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }
    pub fn theta_link(&self) -> Link {
        self.theta_link
    }
    pub fn alpha_link(&self) -> Link {
        self.alpha_link
    }

    fn check_delta(&self, delta: &DVector<f64>) -> Result<()> {
        if delta.len() != self.dim() {
            return Err(LbsError::InvalidParameter(format!(
                "coefficient vector has length {}, expected {}",
                delta.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// θᵢ and αᵢ for every observation.
    pub fn predictors(&self, delta: &DVector<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_delta(delta)?;
        let (p, q) = (self.p(), self.q());
        let mut theta = Vec::with_capacity(self.n());
        let mut alpha = Vec::with_capacity(self.n());
        for i in 0..self.n() {
            let mut eta1 = 0.0;
            for j in 0..p {
                eta1 += self.x[(i, j)] * delta[j];
            }
            let mut eta2 = 0.0;
            for j in 0..q {
                eta2 += self.w[(i, j)] * delta[p + j];
            }
            let th = self
                .theta_link
                .inverse(eta1)
                .ok_or_else(|| LbsError::Infeasible(format!("theta[{i}] from predictor {eta1}")))?;
            let al = self
                .alpha_link
                .inverse(eta2)
                .ok_or_else(|| LbsError::Infeasible(format!("alpha[{i}] from predictor {eta2}")))?;
            theta.push(th);
            alpha.push(al);
        }
        Ok((theta, alpha))
    }

    /// Fitted LBS(αᵢ, θᵢ) per observation.
    pub fn fitted_params(&self, delta: &DVector<f64>) -> Result<Vec<LbsParams>> {
        let (theta, alpha) = self.predictors(delta)?;
        alpha.iter().zip(&theta).map(|(&a, &t)| LbsParams::new(a, t)).collect()
    }

    /// A fresh response drawn from LBS(αᵢ, θᵢ) at `delta`.
    pub fn simulate_response<R: rand::Rng + ?Sized>(&self, delta: &DVector<f64>, rng: &mut R) -> Result<Vec<f64>> {
        Ok(self.fitted_params(delta)?.iter().map(|d| d.sample_one(rng)).collect())
    }

    /// Σᵢ ln f(tᵢ; αᵢ, θᵢ), including the −½ln(2π) − ½ln tᵢ terms.
    pub fn log_likelihood(&self, delta: &DVector<f64>) -> Result<f64> {
        let (theta, alpha) = self.predictors(delta)?;
        let mut acc = NeumaierSum::default();
        for i in 0..self.n() {
            acc.add(obs_log_density(self.t[i], theta[i], alpha[i]));
        }
        Ok(acc.value())
    }

    pub fn score_workspace(&self, delta: &DVector<f64>) -> Result<ScoreWorkspace> {
        let (theta, alpha) = self.predictors(delta)?;
        let n = self.n();
        let mut ws = ScoreWorkspace {
            z: Vec::with_capacity(n),
            c: Vec::with_capacity(n),
            a: Vec::with_capacity(n),
            b: Vec::with_capacity(n),
        };
        for i in 0..n {
            let (t, th, al) = (self.t[i], theta[i], alpha[i]);
            ws.z.push(dtheta(t, th, al));
            ws.c.push(dalpha(t, th, al));
            ws.a.push(1.0 / self.theta_link.d1(th));
            ws.b.push(1.0 / self.alpha_link.d1(al));
        }
        Ok(ws)
    }

    pub fn score(&self, delta: &DVector<f64>) -> Result<DVector<f64>> {
        let ws = self.score_workspace(delta)?;
        Ok(self.assemble_score(&ws))
    }

    fn assemble_score(&self, ws: &ScoreWorkspace) -> DVector<f64> {
        let (p, q) = (self.p(), self.q());
        let mut g = DVector::zeros(p + q);
        for i in 0..self.n() {
            let za = ws.z[i] * ws.a[i];
            let cb = ws.c[i] * ws.b[i];
            for j in 0..p {
                g[j] += za * self.x[(i, j)];
            }
            for j in 0..q {
                g[p + j] += cb * self.w[(i, j)];
            }
        }
        g
    }

    /// Log-likelihood and score in one pass.
    pub fn value_and_score(&self, delta: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        let (theta, alpha) = self.predictors(delta)?;
        let (p, q) = (self.p(), self.q());
        let mut g = DVector::zeros(p + q);
        let mut acc = NeumaierSum::default();
        for i in 0..self.n() {
            let (t, th, al) = (self.t[i], theta[i], alpha[i]);
            acc.add(obs_log_density(t, th, al));
            let za = dtheta(t, th, al) / self.theta_link.d1(th);
            let cb = dalpha(t, th, al) / self.alpha_link.d1(al);
            for j in 0..p {
                g[j] += za * self.x[(i, j)];
            }
            for j in 0..q {
                g[p + j] += cb * self.w[(i, j)];
            }
        }
        Ok((acc.value(), g))
    }

    pub fn hessian_workspace(&self, delta: &DVector<f64>) -> Result<HessianWorkspace> {
        let (theta, alpha) = self.predictors(delta)?;
        let n = self.n();
        let mut hw = HessianWorkspace {
            zprime: Vec::with_capacity(n),
            cprime: Vec::with_capacity(n),
            d: Vec::with_capacity(n),
            e: Vec::with_capacity(n),
            k: Vec::with_capacity(n),
            v: Vec::with_capacity(n),
            h: Vec::with_capacity(n),
            u: Vec::with_capacity(n),
        };
        for i in 0..n {
            let (t, th, al) = (self.t[i], theta[i], alpha[i]);
            let (g1, g2) = (self.theta_link, self.alpha_link);
            let a = 1.0 / g1.d1(th);
            let b = 1.0 / g2.d1(al);
            let d = -g1.d2(th) * a * a;
            let e = -g2.d2(al) * b * b;
            let z = dtheta(t, th, al);
            let c = dalpha(t, th, al);
            let al2 = al * al;
            let zp = 1.5 / (th * th) - t / (al2 * th * th * th) - 1.0 / ((t + th) * (t + th));
            let cp = (4.0 + 3.0 * al2 * al2) / (2.0 * al + al2 * al).powi(2) - 3.0 * excess(t, th) / (al2 * al2);
            let k = inv_diff(t, th) / (al2 * al);
            hw.v.push(zp * a * a + z * d * a);
            hw.h.push(k * b * a);
            hw.u.push(cp * b * b + c * e * b);
            hw.zprime.push(zp);
            hw.cprime.push(cp);
            hw.d.push(d);
            hw.e.push(e);
            hw.k.push(k);
        }
        Ok(hw)
    }

    /// Analytic Hessian of the log-likelihood.
    pub fn hessian(&self, delta: &DVector<f64>) -> Result<DMatrix<f64>> {
        let hw = self.hessian_workspace(delta)?;
        let (p, q) = (self.p(), self.q());
        let mut hess = DMatrix::zeros(p + q, p + q);
        for i in 0..self.n() {
            for r in 0..p {
                let xr = self.x[(i, r)];
                for s in 0..=r {
                    hess[(r, s)] += hw.v[i] * xr * self.x[(i, s)];
                }
            }
            for r in 0..q {
                let wr = self.w[(i, r)];
                for s in 0..=r {
                    hess[(p + r, p + s)] += hw.u[i] * wr * self.w[(i, s)];
                }
                for s in 0..p {
                    hess[(p + r, s)] += hw.h[i] * wr * self.x[(i, s)];
                }
            }
        }
        for r in 0..p + q {
            for s in 0..r {
                hess[(s, r)] = hess[(r, s)];
            }
        }
        Ok(hess)
    }

    /// Central finite-difference Hessian of the analytic score.
    pub fn finite_difference_hessian(&self, delta: &DVector<f64>) -> Result<DMatrix<f64>> {
        let m = self.dim();
        let mut hess = DMatrix::zeros(m, m);
        for j in 0..m {
            let h = 1e-5 * (1.0 + delta[j].abs());
            let mut up = delta.clone();
            up[j] += h;
            let mut down = delta.clone();
            down[j] -= h;
            let col = (self.score(&up)? - self.score(&down)?) / (2.0 * h);
            hess.set_column(j, &col);
        }
        Ok((&hess + hess.transpose()) * 0.5)
    }
}

/// t/θ + θ/t − 2 written as (t − θ)²/(tθ); the direct form loses all
/// precision when α is small and t ≈ θ.
fn excess(t: f64, th: f64) -> f64 {
    (t - th).powi(2) / (t * th)
}

/// 1/t − t/θ² = (θ − t)(θ + t)/(tθ²)
fn inv_diff(t: f64, th: f64) -> f64 {
    (th - t) * (th + t) / (t * th * th)
}

pub(crate) fn obs_log_density(t: f64, th: f64, al: f64) -> f64 {
    let al2 = al * al;
    -excess(t, th) / (2.0 * al2) - (2.0 * al + al2 * al).ln() - 1.5 * th.ln() + (t + th).ln()
        - 0.5 * t.ln()
        - LN_SQRT_2PI
}

fn dtheta(t: f64, th: f64, al: f64) -> f64 {
    1.0 / (t + th) - inv_diff(t, th) / (2.0 * al * al) - 1.5 / th
}

fn dalpha(t: f64, th: f64, al: f64) -> f64 {
    let al2 = al * al;
    excess(t, th) / (al2 * al) - (2.0 + 3.0 * al2) / (2.0 * al + al2 * al)
}
