use super::model::RegressionSpec;
use crate::error::{LbsError, Result};
use nalgebra::{DMatrix, DVector};

/// Smallest value of yᵢ passed to g₂ when tᵢ coincides with θ̂ᵢ.
pub const Y_FLOOR: f64 = 1e-8;

fn ols(design: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let xtx = design.transpose() * design;
    let xty = design.transpose() * y;
    let chol = xtx
        .cholesky()
        .ok_or_else(|| LbsError::SingularDesign("XᵀX is not positive definite".into()))?;
    Ok(chol.solve(&xty))
}

/// Least-squares starting values: β₀ from g₁(t) on X, then ρ₀ from
/// g₂(yᵢ) on W with yᵢ = √(tᵢ/θ̂ᵢ + θ̂ᵢ/tᵢ − 2).
pub fn initial_values(spec: &RegressionSpec) -> Result<DVector<f64>> {
    let (g1, g2) = (spec.theta_link(), spec.alpha_link());
    let t = spec.response();
    let lhs = DVector::from_iterator(t.len(), t.iter().map(|&v| g1.apply(v)));
    let beta = ols(spec.x(), &lhs)?;
    let eta1 = spec.x() * &beta;
    let mut gy = DVector::zeros(t.len());
    for i in 0..t.len() {
        let th = g1
            .inverse(eta1[i])
            .ok_or_else(|| LbsError::Infeasible(format!("initial theta[{i}] from predictor {}", eta1[i])))?;
        let y = (t[i] / th + th / t[i] - 2.0).max(0.0).sqrt().max(Y_FLOOR);
        gy[i] = g2.apply(y);
    }
    let rho = ols(spec.w(), &gy)?;
    let mut delta = DVector::zeros(spec.dim());
    delta.rows_mut(0, spec.p()).copy_from(&beta);
    delta.rows_mut(spec.p(), spec.q()).copy_from(&rho);
    Ok(delta)
}
