//! The length-biased Birnbaum–Saunders distribution LBS(α, θ).
//!
//! Density
//!
//! ```text
//! f(t) = [√(t/θ) + √(θ/t)] exp{−(t/θ + θ/t − 2)/(2α²)} / (√(2π) α θ (α² + 2)),  t > 0
//! ```
//!
//! i.e. t·f_Y(t)/E(Y) for Y ~ BS(α, θ). With a(t) = (√(t/θ) − √(θ/t))/α,
//! A(t) = √(4 + α²a²)/α and c = α²/(α² + 2) the survival function is
//!
//! ```text
//! S(t) = 1 − Φ(a) + c·φ(a)·[M(A) + a + A]
//! ```
//!
//! where M is the normal Mills ratio. This uses e^{2/α²}·φ(A) = φ(a), which
//! turns the closed form into something that can be evaluated in log space
//! in the right tail without cancellation.

use crate::error::{LbsError, Result};
use crate::numeric::{brent, integrate_pieces};
use crate::special::{gamma_cdf, mills_ratio, norm_cdf, norm_ln_pdf, norm_pdf, LN_SQRT_2PI};
use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// Shape α and scale θ of an LBS distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbsParams {
    alpha: f64,
    theta: f64,
}

/// a(t) and A(t) evaluated at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardizeTerms {
    pub a: f64,
    pub big_a: f64,
}

/// Law of U = (T/θ + θ/T − 2)/α² for T ~ LBS(α, θ):
/// π·Gamma(1/2, 2) + (1 − π)·Gamma(3/2, 2) with π = 2/(α² + 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaMixture {
    pub pi: f64,
}

pub const MIXTURE_SHAPE1: f64 = 0.5;
pub const MIXTURE_SHAPE2: f64 = 1.5;
pub const MIXTURE_SCALE: f64 = 2.0;

const QUANTILE_MAX_ITER: usize = 200;
const QUANTILE_CDF_TOL: f64 = 1e-10;

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(LbsError::Domain(format!("t must be positive and finite, got {t}")))
    }
}

impl LbsParams {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(LbsError::InvalidParameter(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        if !(theta.is_finite() && theta > 0.0) {
            return Err(LbsError::InvalidParameter(format!(
                "theta must be positive and finite, got {theta}"
            )));
        }
        Ok(LbsParams { alpha, theta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// E(Y) = θ(α² + 2)/2 of the underlying (unweighted) BS law.
    pub fn base_mean(&self) -> f64 {
        self.theta * (self.alpha * self.alpha + 2.0) / 2.0
    }

    pub fn mixture(&self) -> GammaMixture {
        GammaMixture::new(self.alpha)
    }

    pub fn standardize(&self, t: f64) -> Result<StandardizeTerms> {
        check_t(t)?;
        Ok(self.terms(t))
    }

    fn terms(&self, t: f64) -> StandardizeTerms {
        // √(t/θ) − √(θ/t) = (t − θ)/√(tθ), free of cancellation near t = θ
        let a = (t - self.theta) / ((t * self.theta).sqrt() * self.alpha);
        let big_a = (4.0 / (self.alpha * self.alpha) + a * a).sqrt();
        StandardizeTerms { a, big_a }
    }

    /// (T/θ + θ/T − 2)/α², the U transform.
    pub fn u_transform(&self, t: f64) -> f64 {
        let a = self.terms(t).a;
        a * a
    }

    pub fn pdf(&self, t: f64) -> Result<f64> {
        Ok(self.ln_pdf(t)?.exp())
    }

    pub fn ln_pdf(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.ln_pdf_unchecked(t))
    }

    pub(crate) fn ln_pdf_unchecked(&self, t: f64) -> f64 {
        let (al, th) = (self.alpha, self.theta);
        -(t - th).powi(2) / (t * th) / (2.0 * al * al) - (2.0 * al + al * al * al).ln() - 1.5 * th.ln() + (t + th).ln()
            - 0.5 * t.ln()
            - LN_SQRT_2PI
    }

    /// Returns (F(t), S(t)), each computed on the side where it is small.
    fn cdf_sf(&self, t: f64) -> (f64, f64) {
        let StandardizeTerms { a, big_a } = self.terms(t);
        let a2 = self.alpha * self.alpha;
        let c = a2 / (a2 + 2.0);
        if a > 0.0 {
            let sf = self.ln_sf_positive(a, big_a, c).exp();
            (1.0 - sf, sf)
        } else {
            // A + a = (4/α²)/(A − a) avoids cancellation as a → −∞.
            let sum = (4.0 / a2) / (big_a - a);
            let cdf = (norm_cdf(a) - c * norm_pdf(a) * (mills_ratio(big_a) + sum)).max(0.0);
            (cdf, 1.0 - cdf)
        }
    }

    fn ln_sf_positive(&self, a: f64, big_a: f64, c: f64) -> f64 {
        norm_ln_pdf(a) + (mills_ratio(a) + c * (mills_ratio(big_a) + a + big_a)).ln()
    }

    pub fn survival(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.cdf_sf(t).1)
    }

    /// ln S(t), finite far into the right tail.
    pub fn ln_survival(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.ln_survival_unchecked(t))
    }

    fn ln_survival_unchecked(&self, t: f64) -> f64 {
        let StandardizeTerms { a, big_a } = self.terms(t);
        if a > 0.0 {
            let a2 = self.alpha * self.alpha;
            self.ln_sf_positive(a, big_a, a2 / (a2 + 2.0))
        } else {
            (-self.cdf_sf(t).0).ln_1p()
        }
    }

    pub fn cdf(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.cdf_sf(t).0)
    }

    pub fn hazard(&self, t: f64) -> Result<f64> {
        Ok(self.ln_hazard(t)?.exp())
    }

    pub fn ln_hazard(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.ln_pdf_unchecked(t) - self.ln_survival_unchecked(t))
    }

    /// Inverse CDF, by Brent's method in log time.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(LbsError::Domain(format!("quantile level must lie in (0,1), got {u}")));
        }
        let theta = self.theta;
        // Work with whichever tail is small so the residual keeps relative accuracy.
        let residual = |s: f64| {
            let (cdf, sf) = self.cdf_sf(theta * s.exp());
            if u <= 0.5 {
                cdf - u
            } else {
                (1.0 - u) - sf
            }
        };
        let mut lo = -1.0;
        let mut hi = 1.0;
        let mut grow = 0;
        while residual(lo) > 0.0 {
            lo *= 2.0;
            grow += 1;
            if grow > 12 {
                return Err(LbsError::Convergence("quantile bracket (lower)".into()));
            }
        }
        grow = 0;
        while residual(hi) < 0.0 {
            hi *= 2.0;
            grow += 1;
            if grow > 12 {
                return Err(LbsError::Convergence("quantile bracket (upper)".into()));
            }
        }
        let (s, _) = brent(residual, lo, hi, 1e-14, QUANTILE_MAX_ITER)?;
        if residual(s).abs() > QUANTILE_CDF_TOL {
            return Err(LbsError::Convergence(format!(
                "quantile residual {} above tolerance",
                residual(s).abs()
            )));
        }
        Ok(theta * s.exp())
    }

    /// One draw through the gamma-mixture representation of U.
    ///
    /// Draw U from the mixture, solve t² − sθt + θ² = 0 with s = α²U + 2 and
    /// keep the larger root with probability t₊/(t₊ + t₋): length biasing
    /// reweights the two equiprobable BS roots proportionally to t.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = self.mixture().sample(rng);
        self.root_from_u(u, rng.random::<f64>())
    }

    fn root_from_u(&self, u: f64, coin: f64) -> f64 {
        let a2u = self.alpha * self.alpha * u;
        let s = a2u + 2.0;
        let disc = (a2u * (a2u + 4.0)).sqrt();
        let upper = self.theta * (s + disc) / 2.0;
        let lower = self.theta * self.theta / upper;
        if coin * (upper + lower) < upper {
            upper
        } else {
            lower
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    /// Draws by inverse-CDF transform; slower, used to cross-check [`Self::sample`].
    pub fn sample_by_inversion<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        (0..n)
            .map(|_| {
                let mut u: f64 = rng.random();
                while u == 0.0 {
                    u = rng.random();
                }
                self.quantile(u)
            })
            .collect()
    }

    /// E(T) = θ(2 + 4α² + 3α⁴)/(2 + α²)
    pub fn mean(&self) -> f64 {
        let a2 = self.alpha * self.alpha;
        self.theta * (2.0 + 4.0 * a2 + 3.0 * a2 * a2) / (2.0 + a2)
    }

    /// Var(T) = θ²α²(4 + 17α² + 24α⁴ + 6α⁶)/(2 + α²)²
    pub fn variance(&self) -> f64 {
        let a2 = self.alpha * self.alpha;
        let num = 4.0 + 17.0 * a2 + 24.0 * a2 * a2 + 6.0 * a2 * a2 * a2;
        self.theta * self.theta * a2 * num / ((2.0 + a2) * (2.0 + a2))
    }

    /// E(Yʳ) for Y ~ BS(α, θ). Closed form for r ≤ 2, quadrature above.
    pub fn bs_moment(&self, r: u32) -> f64 {
        let a2 = self.alpha * self.alpha;
        let th = self.theta;
        match r {
            0 => 1.0,
            1 => th * (a2 + 2.0) / 2.0,
            2 => th * th * (3.0 * a2 * a2 + 4.0 * a2 + 2.0) / 2.0,
            _ => {
                // y = θeˢ: f_Y(y)dy = φ((2/α)sinh(s/2))·cosh(s/2)/α ds
                let al = self.alpha;
                let rf = r as f64;
                let half = 2.0 * (12.0 * al).asinh() + (1.0 + 2.0 * a2 * rf).ln() + 4.0;
                let integrand = |s: f64| {
                    let z = 2.0 / al * (0.5 * s).sinh();
                    (rf * s + norm_ln_pdf(z)).exp() * (0.5 * s).cosh() / al
                };
                th.powi(r as i32) * integrate_pieces(integrand, -half, half, 200, 1e-14)
            }
        }
    }

    /// E[T^{−(r+1)}] = E(Yʳ)/(θ^{2r} E(Y)).
    pub fn neg_moment(&self, r: u32) -> f64 {
        self.bs_moment(r) / (self.theta.powi(2 * r as i32) * self.base_mean())
    }
}

impl GammaMixture {
    pub fn new(alpha: f64) -> Self {
        GammaMixture {
            pi: 2.0 / (alpha * alpha + 2.0),
        }
    }

    pub fn cdf(&self, u: f64) -> f64 {
        self.pi * gamma_cdf(MIXTURE_SHAPE1, MIXTURE_SCALE, u)
            + (1.0 - self.pi) * gamma_cdf(MIXTURE_SHAPE2, MIXTURE_SCALE, u)
    }

    pub fn pdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        // χ²₁ and χ²₃ densities
        let chi1 = (-0.5 * u).exp() / (2.0 * std::f64::consts::PI * u).sqrt();
        self.pi * chi1 + (1.0 - self.pi) * u * chi1
    }

    pub fn mean(&self) -> f64 {
        3.0 - 2.0 * self.pi
    }

    /// Raw moments E(Uᵏ) for k = 1..=4.
    pub fn raw_moments(&self) -> [f64; 4] {
        // Gamma(k, 2) raw moments: 2ʲ Γ(k+j)/Γ(k)
        let m = |shape: f64| {
            let mut out = [0.0; 4];
            let mut acc = 1.0;
            for (j, o) in out.iter_mut().enumerate() {
                acc *= 2.0 * (shape + j as f64);
                *o = acc;
            }
            out
        };
        let (m1, m2) = (m(MIXTURE_SHAPE1), m(MIXTURE_SHAPE2));
        let mut out = [0.0; 4];
        for j in 0..4 {
            out[j] = self.pi * m1[j] + (1.0 - self.pi) * m2[j];
        }
        out
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let shape = if rng.random::<f64>() < self.pi {
            MIXTURE_SHAPE1
        } else {
            MIXTURE_SHAPE2
        };
        Gamma::new(shape, MIXTURE_SCALE)
            .expect("fixed gamma parameters")
            .sample(rng)
    }

    /// Inverse CDF by bisection-safe Brent on (0, ∞).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(LbsError::Domain(format!("mixture quantile level {p} outside (0,1)")));
        }
        let mut hi = 1.0;
        while self.cdf(hi) < p {
            hi *= 2.0;
        }
        let (u, _) = brent(|u| self.cdf(u) - p, 0.0, hi, 1e-13, 300)?;
        Ok(u)
    }
}
