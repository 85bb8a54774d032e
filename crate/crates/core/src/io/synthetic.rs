//! Synthetic stand-in for the water-evaporation application: four
//! covariates drawn independently and uniformly over plausible monthly
//! ranges, response from the fitted model of the application.

use super::config::ModelConfig;
use super::dataset::Dataset;
use crate::error::Result;
use crate::rng::stream;
use crate::LbsParams;
use rand::Rng;

/// θ-coefficients: intercept, evapotranspiration, insolation, cloudiness, humidity.
pub const EVAPORATION_BETA: [f64; 5] = [6.743, 0.0015, 0.0011, 0.0434, -0.0366];
/// α-coefficients: intercept, insolation, cloudiness.
pub const EVAPORATION_RHO: [f64; 3] = [1.0396, -0.0130, -0.2324];

/// (name, lower, upper) of each covariate.
pub const EVAPORATION_COVARIATES: [(&str, f64, f64); 4] = [
    ("evapotranspiration", 0.0, 150.0),
    ("insolation", 100.0, 300.0),
    ("cloudiness", 1.0, 9.0),
    ("humidity", 40.0, 85.0),
];

pub fn evaporation_dataset(n: usize, seed: u64) -> Result<Dataset> {
    let mut rng = stream(seed, 0);
    let mut cols: Vec<Vec<f64>> = (0..5).map(|_| Vec::with_capacity(n)).collect();
    for _ in 0..n {
        let x: Vec<f64> = EVAPORATION_COVARIATES
            .iter()
            .map(|&(_, lo, hi)| rng.random_range(lo..hi))
            .collect();
        let eta1 = EVAPORATION_BETA[0] + (0..4).map(|j| EVAPORATION_BETA[j + 1] * x[j]).sum::<f64>();
        let eta2 = EVAPORATION_RHO[0] + EVAPORATION_RHO[1] * x[1] + EVAPORATION_RHO[2] * x[2];
        let t = LbsParams::new(eta2.exp(), eta1.exp())?.sample_one(&mut rng);
        cols[0].push(t);
        for j in 0..4 {
            cols[j + 1].push(x[j]);
        }
    }
    let mut names = vec!["evaporation".to_string()];
    names.extend(EVAPORATION_COVARIATES.iter().map(|c| c.0.to_string()));
    Dataset::new(names, cols)
}

/// Model configuration matching [`evaporation_dataset`].
pub fn evaporation_config() -> ModelConfig {
    ModelConfig {
        response: "evaporation".into(),
        theta_covariates: EVAPORATION_COVARIATES.iter().map(|c| c.0.to_string()).collect(),
        alpha_covariates: vec!["insolation".into(), "cloudiness".into()],
        ..ModelConfig::default()
    }
}

/// Generating coefficients in model order (β then ρ).
pub fn evaporation_truth() -> Vec<f64> {
    EVAPORATION_BETA.iter().chain(&EVAPORATION_RHO).copied().collect()
}
