//! Modes and hazard shape of LBS(α, θ).
//!
//! Critical points of the density solve the cubic
//! p₃(t) = t³ − θ(α²−1)t² + θ²(α²−1)t − θ³ = (t − θ)(t² − θ(α²−2)t + θ²).
//! For α ≤ 2 the density is unimodal at θ; for α > 2 it has modes
//! t± = (θ/2)[(α²−2) ± α√((α−2)(α+2))] around the antimode θ.

use crate::dist::LbsParams;
use crate::error::{LbsError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeShape {
    Unimodal { mode: f64 },
    Bimodal { lower: f64, antimode: f64, upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeReport {
    pub shape: ModeShape,
    /// Discriminant of p₃, θ⁶α²(α−2)³(α+2)³.
    pub discriminant: f64,
}

impl ModeReport {
    pub fn is_bimodal(&self) -> bool {
        matches!(self.shape, ModeShape::Bimodal { .. })
    }

    /// The local maxima of the density, in increasing order.
    pub fn modes(&self) -> Vec<f64> {
        match self.shape {
            ModeShape::Unimodal { mode } => vec![mode],
            ModeShape::Bimodal { lower, upper, .. } => vec![lower, upper],
        }
    }
}

/// Coefficients (c₃, c₂, c₁, c₀) of p₃.
pub fn cubic_coefficients(params: &LbsParams) -> [f64; 4] {
    let th = params.theta();
    let k = params.alpha() * params.alpha() - 1.0;
    [1.0, -th * k, th * th * k, -th * th * th]
}

pub fn eval_cubic(coef: &[f64; 4], t: f64) -> f64 {
    ((coef[0] * t + coef[1]) * t + coef[2]) * t + coef[3]
}

/// General cubic discriminant 18abcd − 4b³d + b²c² − 4ac³ − 27a²d².
pub fn cubic_discriminant(coef: &[f64; 4]) -> f64 {
    let [a, b, c, d] = *coef;
    18.0 * a * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c - 4.0 * a * c.powi(3) - 27.0 * a * a * d * d
}

pub fn classify_modes(params: &LbsParams) -> ModeReport {
    let (al, th) = (params.alpha(), params.theta());
    let discriminant = th.powi(6) * al * al * ((al - 2.0) * (al + 2.0)).powi(3);
    // α = 2 is a triple root at θ and still unimodal.
    let shape = if al <= 2.0 {
        ModeShape::Unimodal { mode: th }
    } else {
        let upper = 0.5 * th * ((al * al - 2.0) + al * ((al - 2.0) * (al + 2.0)).sqrt());
        ModeShape::Bimodal {
            lower: th * th / upper,
            antimode: th,
            upper,
        }
    };
    ModeReport { shape, discriminant }
}

/// a(t) and its first three derivatives.
pub fn a_derivatives(params: &LbsParams, t: f64, order: u8) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(LbsError::Domain(format!("t must be positive, got {t}")));
    }
    let (al, th) = (params.alpha(), params.theta());
    let up = (t / th).sqrt();
    let down = (th / t).sqrt();
    match order {
        0 => Ok((up - down) / al),
        1 => Ok((up + down) / (2.0 * al * t)),
        2 => Ok(-(up + 3.0 * down) / (4.0 * al * t * t)),
        3 => Ok(3.0 * (up + 5.0 * down) / (8.0 * al * t * t * t)),
        _ => Err(LbsError::Unsupported(format!("a(t) derivative of order {order}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

/// Monotone pieces of the hazard over a scanned range.
#[derive(Debug, Clone, PartialEq)]
pub struct HazardShapeReport {
    /// Ordered, disjoint pieces covering the scan range; directions alternate.
    pub segments: Vec<(f64, f64, Monotonicity)>,
    pub turning_points: Vec<f64>,
}

impl HazardShapeReport {
    pub fn increasing(&self) -> Vec<(f64, f64)> {
        self.pieces(Monotonicity::Increasing)
    }

    pub fn decreasing(&self) -> Vec<(f64, f64)> {
        self.pieces(Monotonicity::Decreasing)
    }

    fn pieces(&self, dir: Monotonicity) -> Vec<(f64, f64)> {
        self.segments
            .iter()
            .filter(|s| s.2 == dir)
            .map(|s| (s.0, s.1))
            .collect()
    }

    /// Direction of the hazard at `t`, if `t` lies in the scanned range.
    pub fn direction_at(&self, t: f64) -> Option<Monotonicity> {
        self.segments.iter().find(|s| s.0 <= t && t <= s.1).map(|s| s.2)
    }
}

/// Sign of d/dt ln h(t) by a central difference with step 1e-5·t.
fn hazard_slope(params: &LbsParams, t: f64) -> f64 {
    let h = 1e-5 * t;
    let up = params.ln_hazard(t + h).unwrap_or(f64::NAN);
    let down = params.ln_hazard(t - h).unwrap_or(f64::NAN);
    (up - down) / (2.0 * h)
}

/// Scans `[lo, hi]` on a log-spaced grid and locates hazard turning points.
pub fn hazard_shape(params: &LbsParams, lo: f64, hi: f64, grid: usize) -> Result<HazardShapeReport> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(LbsError::Domain(format!("degenerate scan range [{lo}, {hi}]")));
    }
    if grid < 16 {
        return Err(LbsError::Domain(format!("grid size {grid} below 16")));
    }
    let step = (hi / lo).ln() / (grid - 1) as f64;
    let points: Vec<f64> = (0..grid).map(|i| lo * (step * i as f64).exp()).collect();
    let dir = |s: f64| {
        if s >= 0.0 {
            Monotonicity::Increasing
        } else {
            Monotonicity::Decreasing
        }
    };
    let slopes: Vec<f64> = points.iter().map(|&t| hazard_slope(params, t)).collect();

    let mut turning_points = Vec::new();
    let mut segments = Vec::new();
    let mut seg_start = lo;
    let mut current = dir(slopes[0]);
    for i in 1..grid {
        let d = dir(slopes[i]);
        if d != current {
            // bisect on the slope sign to 1e-8 relative
            let (mut a, mut b) = (points[i - 1], points[i]);
            while (b - a) > 1e-8 * a {
                let m = 0.5 * (a + b);
                if dir(hazard_slope(params, m)) == current {
                    a = m;
                } else {
                    b = m;
                }
            }
            let tp = 0.5 * (a + b);
            turning_points.push(tp);
            segments.push((seg_start, tp, current));
            seg_start = tp;
            current = d;
        }
    }
    segments.push((seg_start, hi, current));
    Ok(HazardShapeReport {
        segments,
        turning_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(alpha: f64, theta: f64) -> LbsParams {
        LbsParams::new(alpha, theta).unwrap()
    }

    #[test]
    fn cubic_at_unit_alpha() {
        assert_eq!(cubic_coefficients(&p(1.0, 1.0)), [1.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn theta_is_a_root_and_factorisation_holds() {
        for &(al, th) in &[(0.4, 2.0), (1.7, 0.3), (3.3, 5.0)] {
            let c = cubic_coefficients(&p(al, th));
            assert!(eval_cubic(&c, th).abs() < 1e-12 * th.powi(3));
            // (t − θ)(t² − θ(α²−2)t + θ²)
            let k = al * al - 2.0;
            let expanded = [1.0, -th * k - th, th * th + th * th * k, -th.powi(3)];
            for i in 0..4 {
                assert!((c[i] - expanded[i]).abs() < 1e-12 * (1.0 + c[i].abs()));
            }
        }
    }

    #[test]
    fn boundary_alpha_two_is_unimodal() {
        let r = classify_modes(&p(2.0, 5.0));
        assert_eq!(r.shape, ModeShape::Unimodal { mode: 5.0 });
        assert_eq!(r.discriminant, 0.0);
    }

    #[test]
    fn bimodal_alpha_three() {
        let r = classify_modes(&p(3.0, 1.0));
        match r.shape {
            ModeShape::Bimodal { lower, antimode, upper } => {
                let s5 = 5f64.sqrt();
                assert!((upper - (7.0 + 3.0 * s5) / 2.0).abs() < 1e-14);
                assert!((lower - (7.0 - 3.0 * s5) / 2.0).abs() < 1e-14);
                assert!((upper - 6.854102).abs() < 1e-6 && (lower - 0.145898).abs() < 1e-6);
                assert!((lower * upper - 1.0).abs() < 1e-14);
                assert_eq!(antimode, 1.0);
            }
            _ => panic!("expected bimodal"),
        }
        assert!(r.discriminant > 0.0);
    }

    #[test]
    fn discriminant_closed_form_matches_general_formula() {
        let r = classify_modes(&p(1.0, 1.0));
        assert_eq!(r.discriminant, -27.0);
        for &(al, th) in &[(0.5, 1.0), (1.0, 1.0), (2.5, 1.3), (4.0, 0.7)] {
            let d = classify_modes(&p(al, th)).discriminant;
            let g = cubic_discriminant(&cubic_coefficients(&p(al, th)));
            assert!((d - g).abs() < 1e-9 * (1.0 + d.abs()), "{al}: {d} vs {g}");
        }
    }

    #[test]
    fn a_derivative_signs_and_finite_differences() {
        let d = p(1.3, 2.0);
        assert_eq!(a_derivatives(&d, 2.0, 0).unwrap(), 0.0);
        for &t in &[0.05, 0.5, 2.0, 7.0, 40.0] {
            assert!(a_derivatives(&d, t, 1).unwrap() > 0.0);
            assert!(a_derivatives(&d, t, 2).unwrap() < 0.0);
            assert!(a_derivatives(&d, t, 3).unwrap() > 0.0);
            for order in 0..3u8 {
                let h = 1e-5 * t;
                let fd =
                    (a_derivatives(&d, t + h, order).unwrap() - a_derivatives(&d, t - h, order).unwrap()) / (2.0 * h);
                let exact = a_derivatives(&d, t, order + 1).unwrap();
                assert!((fd - exact).abs() < 1e-6 * exact.abs(), "order {order} t {t}");
            }
        }
        assert!(a_derivatives(&d, 1.0, 4).is_err());
    }

    #[test]
    fn hazard_shape_unimodal_case() {
        let d = p(1.0, 1.0);
        let r = hazard_shape(&d, 0.01, 1.0, 64).unwrap();
        assert_eq!(r.segments.len(), 1);
        assert_eq!(r.segments[0].2, Monotonicity::Increasing);
        // The tail keeps rising toward 1/(2α²θ); there is no decreasing stretch.
        let tail = hazard_shape(&d, 50.0, 100.0, 64).unwrap();
        assert_eq!(tail.decreasing(), Vec::<(f64, f64)>::new());
        assert_eq!(tail.increasing(), vec![(50.0, 100.0)]);
    }

    #[test]
    fn hazard_shape_bimodal_case() {
        let d = p(3.0, 1.0);
        let r = hazard_shape(&d, 1e-3, 200.0, 400).unwrap();
        // increasing below t₋ and somewhere in (θ, t₊)
        assert_eq!(r.direction_at(0.1), Some(Monotonicity::Increasing));
        let inc_between = r.increasing().iter().any(|&(a, b)| b > 1.0 && a < 6.854);
        assert!(inc_between, "{r:?}");
        // rises to about t₋, falls inside (t₋, θ), then rises again
        assert_eq!(r.turning_points.len(), 2, "{r:?}");
        assert!(r.turning_points[0] > 0.1459 && r.turning_points[0] < 1.0);
        assert!(r.turning_points[1] > r.turning_points[0] && r.turning_points[1] < 1.0);
        for w in r.segments.windows(2) {
            assert_ne!(w[0].2, w[1].2);
            assert_eq!(w[0].1, w[1].0);
        }
    }

    #[test]
    fn hazard_shape_rejects_degenerate_range() {
        assert!(hazard_shape(&p(1.0, 1.0), 1.0, 1.0, 64).is_err());
        assert!(hazard_shape(&p(1.0, 1.0), 0.0, 1.0, 64).is_err());
        assert!(hazard_shape(&p(1.0, 1.0), 0.1, 1.0, 8).is_err());
    }
}
