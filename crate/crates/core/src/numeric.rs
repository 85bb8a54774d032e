//! Small numerical utilities: bracketed root-finding, piecewise quadrature,
//! empirical quantiles and compensated moment accumulation.

use crate::error::{LbsError, Result};

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// Stops when the bracket is narrower than `xtol` (absolute) or an exact
/// zero is hit. Returns the best abscissa and the iteration count.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<(f64, usize)> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok((a, 0));
    }
    if fb == 0.0 {
        return Ok((b, 0));
    }
    if fa.signum() == fb.signum() {
        return Err(LbsError::Domain(format!("root not bracketed on [{a}, {b}]")));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok((b, iter));
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(LbsError::Convergence(format!(
        "Brent iteration did not converge in {max_iter} steps"
    )))
}

/// Integrates `f` over `[a, b]` by splitting it into `pieces` equal segments
/// and applying tanh-sinh quadrature to each.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, pieces: usize, tol: f64) -> f64 {
    let pieces = pieces.max(1);
    let h = (b - a) / pieces as f64;
    let mut acc = NeumaierSum::default();
    for k in 0..pieces {
        let lo = a + k as f64 * h;
        let hi = if k + 1 == pieces { b } else { lo + h };
        acc.add(quadrature::integrate(&f, lo, hi, tol / pieces as f64).integral);
    }
    acc.value()
}

/// Type-7 (linear interpolation) empirical quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty sample");
    let p = p.clamp(0.0, 1.0);
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Mean, standard deviation and shape coefficients of a sample.
///
/// `sd` uses the n − 1 divisor; skewness and kurtosis are the moment
/// ratios m₃/m₂^{3/2} and m₄/m₂² (kurtosis is *not* excess).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

impl SampleMoments {
    pub fn from_slice(x: &[f64]) -> Option<Self> {
        let n = x.len();
        if n < 2 {
            return None;
        }
        let nf = n as f64;
        let mean = x.iter().copied().collect::<NeumaierSum>().value() / nf;
        let mut m2 = NeumaierSum::default();
        let mut m3 = NeumaierSum::default();
        let mut m4 = NeumaierSum::default();
        for &v in x {
            let d = v - mean;
            let d2 = d * d;
            m2.add(d2);
            m3.add(d2 * d);
            m4.add(d2 * d2);
        }
        let m2 = m2.value() / nf;
        let m3 = m3.value() / nf;
        let m4 = m4.value() / nf;
        let (skewness, kurtosis) = if m2 > 0.0 {
            (m3 / m2.powf(1.5), m4 / (m2 * m2))
        } else {
            (f64::NAN, f64::NAN)
        };
        Some(SampleMoments {
            n,
            mean,
            sd: (m2 * nf / (nf - 1.0)).sqrt(),
            skewness,
            kurtosis,
        })
    }
}
