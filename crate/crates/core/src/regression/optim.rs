//! BFGS minimization with a backtracking Armijo line search.
//!
//! The objective returns `Err` at infeasible points; those are treated as +∞
//! and the step is shrunk.

use crate::error::{LbsError, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    /// Sup-norm gradient tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    pub max_backtracks: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            tol: 1e-8,
            max_iter: 500,
            c1: 1e-4,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsOutcome {
    pub x: DVector<f64>,
    pub value: f64,
    pub gradient: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the line search could not make progress.
    pub stalled: bool,
}

/// Minimizes `objective`, which returns (f, ∇f).
///
/// `inv_hessian` seeds the inverse-Hessian approximation; without it the
/// identity is rescaled after the first step.
pub fn bfgs<F>(
    mut objective: F,
    x0: DVector<f64>,
    inv_hessian: Option<DMatrix<f64>>,
    opts: &BfgsOptions,
) -> Result<BfgsOutcome>
where
    F: FnMut(&DVector<f64>) -> Result<(f64, DVector<f64>)>,
{
    let m = x0.len();
    let (mut f, mut g) = objective(&x0)?;
    if !f.is_finite() {
        return Err(LbsError::Infeasible(
            "objective not finite at the starting point".into(),
        ));
    }
    let mut x = x0;
    let seeded = inv_hessian.is_some();
    let mut h = inv_hessian.unwrap_or_else(|| DMatrix::identity(m, m));
    let mut iterations = 0;
    let mut stalled = false;
    let mut reset_once = false;

    while iterations < opts.max_iter {
        if g.amax() < opts.tol {
            break;
        }
        let mut dir = -(&h * &g);
        let mut slope = g.dot(&dir);
        if !(slope < 0.0) {
            h = DMatrix::identity(m, m);
            dir = -g.clone();
            slope = g.dot(&dir);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial = &x + &dir * step;
            if let Ok((ft, gt)) = objective(&trial) {
                if ft.is_finite() && ft <= f + opts.c1 * step * slope {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gn)) = accepted else {
            if reset_once {
                stalled = true;
                break;
            }
            // retry once along steepest descent
            reset_once = true;
            h = DMatrix::identity(m, m) / g.norm().max(1.0);
            continue;
        };
        reset_once = false;
        iterations += 1;
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if iterations == 1 && !seeded && sy > 0.0 {
            h = DMatrix::identity(m, m) * (sy / y.dot(&y));
        }
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H ← H − ρ(s·(Hy)ᵀ + (Hy)·sᵀ) + (ρ²·yᵀHy + ρ)·s·sᵀ
            h -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
            h += (&s * s.transpose()) * (rho * rho * yhy + rho);
        }
        let df = f - fnew;
        x = xn;
        f = fnew;
        g = gn;
        if df.abs() <= f64::EPSILON * f.abs() && s.amax() <= f64::EPSILON * (1.0 + x.amax()) {
            stalled = true;
            break;
        }
    }
    Ok(BfgsOutcome {
        converged: g.amax() < opts.tol,
        x,
        value: f,
        gradient: g,
        iterations,
        stalled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let obj = |x: &DVector<f64>| {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = DVector::from_vec(vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)]);
            Ok((f, g))
        };
        let out = bfgs(obj, DVector::from_vec(vec![-1.2, 1.0]), None, &BfgsOptions::default()).unwrap();
        assert!(out.converged, "{out:?}");
        assert!((out.x[0] - 1.0).abs() < 1e-7 && (out.x[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn infeasible_region_is_avoided() {
        // minimum of x − 2 ln x at x = 2; x ≤ 0 infeasible
        let obj = |x: &DVector<f64>| {
            if x[0] <= 0.0 {
                return Err(LbsError::Infeasible("x <= 0".into()));
            }
            Ok((x[0] - 2.0 * x[0].ln(), DVector::from_vec(vec![1.0 - 2.0 / x[0]])))
        };
        let out = bfgs(obj, DVector::from_vec(vec![0.05]), None, &BfgsOptions::default()).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 2.0).abs() < 1e-8);
    }
}
