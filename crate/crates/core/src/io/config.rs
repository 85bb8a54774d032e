//! Flat `key = value` model configuration. Lists are comma separated and
//! `#` starts a comment.
//!
//! ```text
//! response = evaporation
//! theta_covariates = evapotranspiration, insolation, cloudiness, humidity
//! alpha_covariates = insolation, cloudiness
//! ci = aci, pci, bci
//! ```

use super::dataset::Dataset;
use crate::diagnostics::ResidualKind;
use crate::error::{LbsError, Result};
use crate::inference::{IntervalMethod, DEFAULT_REPLICAS};
use crate::regression::{Link, RegressionSpec};
use nalgebra::DMatrix;
use std::collections::HashSet;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub response: String,
    pub theta_covariates: Vec<String>,
    pub alpha_covariates: Vec<String>,
    pub theta_link: Link,
    pub alpha_link: Link,
    pub theta_intercept: bool,
    pub alpha_intercept: bool,
    pub ci: Vec<IntervalMethod>,
    pub level: f64,
    pub bootstrap: usize,
    pub seed: u64,
    /// Simulations per QQ envelope; 0 disables envelopes.
    pub envelope: usize,
    pub envelope_level: f64,
    pub residuals: Vec<ResidualKind>,
    pub ljung_box_lags: Vec<usize>,
    /// Data file, recorded so a manifest can be replayed.
    pub data: Option<String>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            response: String::new(),
            theta_covariates: Vec::new(),
            alpha_covariates: Vec::new(),
            theta_link: Link::Log,
            alpha_link: Link::Log,
            theta_intercept: true,
            alpha_intercept: true,
            ci: vec![IntervalMethod::Aci],
            level: 0.95,
            bootstrap: DEFAULT_REPLICAS,
            seed: 1,
            envelope: 100,
            envelope_level: 0.95,
            residuals: ResidualKind::ALL.to_vec(),
            ljung_box_lags: vec![4, 16],
            data: None,
        }
    }
}

fn list(v: &str) -> Vec<String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| LbsError::Config(format!("{key}: cannot parse '{v}'")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(LbsError::Config(format!("{key}: expected true/false, got '{v}'"))),
    }
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ModelConfig::default();
        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LbsError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(LbsError::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            match key {
                "response" => c.response = value.to_string(),
                "theta_covariates" => c.theta_covariates = list(value),
                "alpha_covariates" => c.alpha_covariates = list(value),
                "theta_link" => c.theta_link = value.parse()?,
                "alpha_link" => c.alpha_link = value.parse()?,
                "theta_intercept" => c.theta_intercept = parse_bool(key, value)?,
                "alpha_intercept" => c.alpha_intercept = parse_bool(key, value)?,
                "ci" => c.ci = list(value).iter().map(|s| s.parse()).collect::<Result<_>>()?,
                "level" => c.level = parse_num(key, value)?,
                "bootstrap" => c.bootstrap = parse_num(key, value)?,
                "seed" => c.seed = parse_num(key, value)?,
                "envelope" => c.envelope = parse_num(key, value)?,
                "envelope_level" => c.envelope_level = parse_num(key, value)?,
                "residuals" => c.residuals = list(value).iter().map(|s| s.parse()).collect::<Result<_>>()?,
                "ljung_box_lags" => {
                    c.ljung_box_lags = list(value).iter().map(|s| parse_num(key, s)).collect::<Result<_>>()?
                }
                "data" => c.data = Some(value.to_string()),
                other => return Err(LbsError::Config(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.response.is_empty() {
            return Err(LbsError::Config("missing 'response'".into()));
        }
        for (name, v) in [("level", self.level), ("envelope_level", self.envelope_level)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(LbsError::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if !self.theta_intercept && self.theta_covariates.is_empty() {
            return Err(LbsError::Config("theta component has no terms".into()));
        }
        if !self.alpha_intercept && self.alpha_covariates.is_empty() {
            return Err(LbsError::Config("alpha component has no terms".into()));
        }
        if self.ci.iter().any(|m| *m != IntervalMethod::Aci) && self.bootstrap < 2 {
            return Err(LbsError::Config("bootstrap intervals need bootstrap >= 2".into()));
        }
        Ok(())
    }

    /// Text form accepted by [`ModelConfig::parse`].
    pub fn to_text(&self) -> String {
        let join = |v: &[String]| v.join(", ");
        let mut s = String::new();
        s += &format!("response = {}\n", self.response);
        s += &format!("theta_covariates = {}\n", join(&self.theta_covariates));
        s += &format!("alpha_covariates = {}\n", join(&self.alpha_covariates));
        s += &format!("theta_link = {}\n", self.theta_link);
        s += &format!("alpha_link = {}\n", self.alpha_link);
        s += &format!("theta_intercept = {}\n", self.theta_intercept);
        s += &format!("alpha_intercept = {}\n", self.alpha_intercept);
        let ci: Vec<String> = self.ci.iter().map(|m| m.to_string().to_ascii_lowercase()).collect();
        s += &format!("ci = {}\n", ci.join(", "));
        s += &format!("level = {:?}\n", self.level);
        s += &format!("bootstrap = {}\n", self.bootstrap);
        s += &format!("seed = {}\n", self.seed);
        s += &format!("envelope = {}\n", self.envelope);
        s += &format!("envelope_level = {:?}\n", self.envelope_level);
        let kinds: Vec<&str> = self.residuals.iter().map(|k| k.name()).collect();
        s += &format!("residuals = {}\n", kinds.join(", "));
        let lags: Vec<String> = self.ljung_box_lags.iter().map(|l| l.to_string()).collect();
        s += &format!("ljung_box_lags = {}\n", lags.join(", "));
        if let Some(d) = &self.data {
            s += &format!("data = {d}\n");
        }
        s
    }

    /// Names of the θ- then α-coefficients, e.g. `theta:(intercept)`.
    pub fn coefficient_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.theta_intercept {
            out.push("theta:(intercept)".to_string());
        }
        out.extend(self.theta_covariates.iter().map(|c| format!("theta:{c}")));
        if self.alpha_intercept {
            out.push("alpha:(intercept)".to_string());
        }
        out.extend(self.alpha_covariates.iter().map(|c| format!("alpha:{c}")));
        out
    }

    fn design(&self, data: &Dataset, intercept: bool, covariates: &[String]) -> Result<DMatrix<f64>> {
        let n = data.n();
        let cols: Vec<&[f64]> = covariates.iter().map(|c| data.column(c)).collect::<Result<_>>()?;
        let k = intercept as usize;
        Ok(DMatrix::from_fn(n, k + cols.len(), |i, j| {
            if j < k {
                1.0
            } else {
                cols[j - k][i]
            }
        }))
    }

    /// Regression specification for `data`; checks that every referenced
    /// column exists and that the response is positive.
    pub fn build_spec(&self, data: &Dataset) -> Result<RegressionSpec> {
        let t = data.column(&self.response)?;
        if let Some(i) = t.iter().position(|v| *v <= 0.0) {
            return Err(LbsError::Parse {
                row: i + 1,
                column: self.response.clone(),
                message: format!("response must be positive, got {}", t[i]),
            });
        }
        let x = self.design(data, self.theta_intercept, &self.theta_covariates)?;
        let w = self.design(data, self.alpha_intercept, &self.alpha_covariates)?;
        RegressionSpec::new(t.to_vec(), x, w, self.theta_link, self.alpha_link)
    }
}
