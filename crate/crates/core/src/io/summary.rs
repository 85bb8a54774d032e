use crate::error::{LbsError, Result};
use crate::numeric::{quantile_sorted, SampleMoments};

/// Descriptive statistics of one column. Kurtosis is *excess* here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
    pub sd: f64,
    /// 100·sd/mean
    pub cv: f64,
    pub cs: f64,
    pub ck_excess: f64,
    /// Skewness and kurtosis are undefined (zero variance or n < 2).
    pub shape_undefined: bool,
}

pub fn summarize_values(x: &[f64]) -> Result<Summary> {
    if x.is_empty() {
        return Err(LbsError::Domain("empty column".into()));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = x.len();
    let (mean, sd, cs, ck) = match SampleMoments::from_slice(x) {
        Some(m) => (m.mean, m.sd, m.skewness, m.kurtosis - 3.0),
        None => (x[0], 0.0, f64::NAN, f64::NAN),
    };
    let cv = if sd == 0.0 { 0.0 } else { 100.0 * sd / mean };
    Ok(Summary {
        n,
        min: sorted[0],
        median: quantile_sorted(&sorted, 0.5),
        mean,
        max: sorted[n - 1],
        sd,
        cv,
        cs,
        ck_excess: ck,
        shape_undefined: !(cs.is_finite() && ck.is_finite()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let s = summarize_values(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert_eq!((s.n, s.min, s.median, s.mean, s.max), (8, 2.0, 4.5, 5.0, 9.0));
        assert!((s.sd - (32.0f64 / 7.0).sqrt()).abs() < 1e-14);
        assert!((s.cv - 100.0 * s.sd / 5.0).abs() < 1e-12);
        // m2 = 4, m3 = 42/8, m4 = 356/8
        assert!((s.cs - 5.25 / 8.0).abs() < 1e-14);
        assert!((s.ck_excess - (44.5 / 16.0 - 3.0)).abs() < 1e-14);
    }

    #[test]
    fn constant_and_empty() {
        let s = summarize_values(&[3.0; 5]).unwrap();
        assert_eq!((s.sd, s.cv), (0.0, 0.0));
        assert!(s.shape_undefined);
        assert!(summarize_values(&[]).is_err());
    }
}
