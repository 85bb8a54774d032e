use lbs::regression::{fit, initial_values, FitOptions, HessianSource, Link, RegressionSpec};
use lbs::rng::stream;
use lbs::LbsParams;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

/// Simulated data with x, w ~ U(−1, 1) and log links.
fn simulate(n: usize, beta: [f64; 2], rho: [f64; 2], seed: u64) -> RegressionSpec {
    let mut rng = stream(seed, 0);
    let mut t = Vec::with_capacity(n);
    let mut x = DMatrix::from_element(n, 2, 1.0);
    let mut w = DMatrix::from_element(n, 2, 1.0);
    for i in 0..n {
        let xi: f64 = rng.random_range(-1.0..1.0);
        let wi: f64 = rng.random_range(-1.0..1.0);
        x[(i, 1)] = xi;
        w[(i, 1)] = wi;
        let th = (beta[0] + beta[1] * xi).exp();
        let al = (rho[0] + rho[1] * wi).exp();
        t.push(LbsParams::new(al, th).unwrap().sample_one(&mut rng));
    }
    RegressionSpec::new(t, x, w, Link::Log, Link::Log).unwrap()
}

fn random_points(spec: &RegressionSpec, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = stream(seed, 1);
    let mut out = Vec::new();
    while out.len() < count {
        let d = DVector::from_fn(spec.dim(), |_, _| rng.random_range(-1.5..1.5));
        if spec.log_likelihood(&d).is_ok() {
            out.push(d);
        }
    }
    out
}

#[test]
fn score_matches_finite_differences() {
    let spec = simulate(60, [1.0, -1.0], [-1.0, 0.25], 11);
    for d in random_points(&spec, 50, 3) {
        let g = spec.score(&d).unwrap();
        let mut fd = DVector::zeros(spec.dim());
        for j in 0..spec.dim() {
            let h = 1e-6 * (1.0 + d[j].abs());
            let mut up = d.clone();
            up[j] += h;
            let mut dn = d.clone();
            dn[j] -= h;
            fd[j] = (spec.log_likelihood(&up).unwrap() - spec.log_likelihood(&dn).unwrap()) / (2.0 * h);
        }
        let rel = (&g - &fd).amax() / fd.amax().max(1.0);
        assert!(rel < 1e-6, "{rel} at {d:?}");
    }
}

#[test]
fn score_matches_finite_differences_sqrt_links() {
    let base = simulate(40, [1.0, -0.5], [-0.5, 0.25], 12);
    let spec = RegressionSpec::new(
        base.response().to_vec(),
        base.x().clone(),
        base.w().clone(),
        Link::SquareRoot,
        Link::SquareRoot,
    )
    .unwrap();
    let mut rng = stream(5, 5);
    let mut checked = 0;
    while checked < 20 {
        let d = DVector::from_vec(vec![
            rng.random_range(1.0..2.0),
            rng.random_range(-0.3..0.3),
            rng.random_range(0.5..1.5),
            rng.random_range(-0.3..0.3),
        ]);
        let Ok(g) = spec.score(&d) else { continue };
        for j in 0..4 {
            let h = 1e-6 * (1.0 + d[j].abs());
            let mut up = d.clone();
            up[j] += h;
            let mut dn = d.clone();
            dn[j] -= h;
            let fd = (spec.log_likelihood(&up).unwrap() - spec.log_likelihood(&dn).unwrap()) / (2.0 * h);
            assert!((g[j] - fd).abs() / fd.abs().max(1.0) < 1e-6);
        }
        checked += 1;
    }
}

#[test]
fn hessian_matches_finite_differences() {
    let spec = simulate(60, [1.0, -1.0], [-1.0, 0.25], 21);
    for d in random_points(&spec, 20, 4) {
        let h = spec.hessian(&d).unwrap();
        let fd = spec.finite_difference_hessian(&d).unwrap();
        let rel = (&h - &fd).amax() / fd.amax().max(1.0);
        assert!(rel < 1e-5, "{rel}");
        assert_eq!(h, h.transpose());
    }
}

#[test]
fn well_specified_fit_n500() {
    let spec = simulate(500, [1.0, -1.0], [-1.0, 0.25], 2024);
    let d0 = initial_values(&spec).unwrap();
    assert!((d0[0] - 1.0).abs() < 0.5 && (d0[1] + 1.0).abs() < 0.5, "{d0:?}");
    let res = fit(&spec, &FitOptions::default()).unwrap();
    assert!(res.converged, "{res:?}");
    assert!(res.gradient_norm < 1e-8);
    assert!(res.loglik >= res.initial_loglik);
    assert_eq!(res.hessian_source, HessianSource::Analytic);
    let h = spec.hessian(&res.delta).unwrap();
    let eig = SymmetricEigen::new(h).eigenvalues;
    assert!(eig.iter().all(|&e| e < 0.0), "{eig:?}");
    let cov = res.covariance.as_ref().unwrap();
    assert_eq!(cov, &cov.transpose());
    assert!(res.std_errors().unwrap().iter().all(|&s| s > 0.0));
    // estimates within a few standard errors of the truth
    let truth = [1.0, -1.0, -1.0, 0.25];
    for (j, se) in res.std_errors().unwrap().iter().enumerate() {
        assert!((res.delta[j] - truth[j]).abs() < 4.0 * se, "coef {j}");
    }
}

#[test]
fn row_order_does_not_change_fit() {
    let spec = simulate(120, [1.0, -1.0], [-1.0, 0.25], 77);
    let n = spec.n();
    let perm: Vec<usize> = (0..n).map(|i| (i * 37 + 5) % n).collect();
    let a = fit(&spec, &FitOptions::default()).unwrap();
    let b = fit(&spec.permuted(&perm).unwrap(), &FitOptions::default()).unwrap();
    assert!((&a.delta - &b.delta).amax() < 1e-10, "{:?} vs {:?}", a.delta, b.delta);
    assert!((a.loglik - b.loglik).abs() < 1e-10 * a.loglik.abs());
}

#[test]
fn rescaling_response_shifts_intercept() {
    let spec = simulate(150, [1.0, -1.0], [-1.0, 0.25], 8);
    let c = 3.7_f64;
    let scaled = spec
        .with_response(spec.response().iter().map(|v| v * c).collect())
        .unwrap();
    let a = fit(&spec, &FitOptions::default()).unwrap();
    let b = fit(&scaled, &FitOptions::default()).unwrap();
    assert!((b.delta[0] - a.delta[0] - c.ln()).abs() < 1e-6);
    for j in 1..4 {
        assert!((b.delta[j] - a.delta[j]).abs() < 1e-6);
    }
    assert!((a.loglik - b.loglik - 150.0 * c.ln()).abs() < 1e-6);
}

/// ln f(t; α, θ) written from the length-biased construction t·f_BS(t)/E(Y).
fn oracle_ln_density(alpha: f64, theta: f64, t: f64) -> f64 {
    let a = ((t / theta).sqrt() - (theta / t).sqrt()) / alpha;
    let da = ((t / theta).sqrt() + (theta / t).sqrt()) / (2.0 * alpha * t);
    t.ln() - 0.5 * a * a - 0.5 * (2.0 * std::f64::consts::PI).ln() + da.ln()
        - (theta * (alpha * alpha + 2.0) / 2.0).ln()
}

/// Nelder–Mead on a 2-parameter function, restarted until it stops moving.
fn nelder_mead(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], step: f64) -> [f64; 2] {
    let mut best = start;
    for _ in 0..6 {
        let mut s = [best, [best[0] + step, best[1]], [best[0], best[1] + step]];
        let mut fs = s.map(&f);
        for _ in 0..4000 {
            let mut idx = [0, 1, 2];
            idx.sort_by(|&i, &j| fs[i].partial_cmp(&fs[j]).unwrap());
            s = idx.map(|i| s[i]);
            fs = idx.map(|i| fs[i]);
            let size = ((s[2][0] - s[0][0]).abs()).max((s[2][1] - s[0][1]).abs());
            if size < 1e-12 {
                break;
            }
            let c = [(s[0][0] + s[1][0]) / 2.0, (s[0][1] + s[1][1]) / 2.0];
            let at = |k: f64| [c[0] + k * (s[2][0] - c[0]), c[1] + k * (s[2][1] - c[1])];
            let r = at(-1.0);
            let fr = f(r);
            if fr < fs[0] {
                let e = at(-2.0);
                let fe = f(e);
                if fe < fr {
                    s[2] = e;
                    fs[2] = fe;
                } else {
                    s[2] = r;
                    fs[2] = fr;
                }
            } else if fr < fs[1] {
                s[2] = r;
                fs[2] = fr;
            } else {
                let k = if fr < fs[2] { -0.5 } else { 0.5 };
                let ct = at(k);
                let fc = f(ct);
                if fc < fs[2].min(fr) {
                    s[2] = ct;
                    fs[2] = fc;
                } else {
                    for i in 1..3 {
                        s[i] = [(s[i][0] + s[0][0]) / 2.0, (s[i][1] + s[0][1]) / 2.0];
                        fs[i] = f(s[i]);
                    }
                }
            }
        }
        let moved = (s[0][0] - best[0]).abs().max((s[0][1] - best[1]).abs());
        best = s[0];
        if moved < 1e-10 {
            break;
        }
    }
    best
}

#[test]
fn intercept_only_fit_matches_direct_maximization() {
    let mut rng = stream(99, 0);
    let truth = LbsParams::new(0.6, 2.5).unwrap();
    let t = truth.sample(300, &mut rng);
    let negll = |p: [f64; 2]| -> f64 {
        let (th, al) = (p[0].exp(), p[1].exp());
        -t.iter().map(|&v| oracle_ln_density(al, th, v)).sum::<f64>()
    };
    // coarse grid then simplex
    let mut start = [0.0, 0.0];
    let mut fbest = f64::INFINITY;
    for i in 0..41 {
        for j in 0..41 {
            let p = [-2.0 + 0.1 * i as f64, -2.0 + 0.1 * j as f64];
            let v = negll(p);
            if v < fbest {
                fbest = v;
                start = p;
            }
        }
    }
    let opt = nelder_mead(negll, start, 0.05);
    let spec = RegressionSpec::intercept_only(t.clone(), Link::Log, Link::Log).unwrap();
    let res = fit(&spec, &FitOptions::default()).unwrap();
    assert!(res.converged);
    assert!((res.delta[0] - opt[0]).abs() < 1e-6, "{} vs {}", res.delta[0], opt[0]);
    assert!((res.delta[1] - opt[1]).abs() < 1e-6, "{} vs {}", res.delta[1], opt[1]);
    assert!((res.loglik + negll(opt)).abs() < 1e-8 * res.loglik.abs());
}

#[test]
fn explicit_start_and_bad_start_length() {
    let spec = simulate(80, [1.0, -1.0], [-1.0, 0.25], 5);
    let opts = FitOptions {
        start: Some(DVector::from_vec(vec![0.5, 0.0, -0.5, 0.0])),
        ..FitOptions::default()
    };
    let a = fit(&spec, &opts).unwrap();
    let b = fit(&spec, &FitOptions::default()).unwrap();
    assert!((&a.delta - &b.delta).amax() < 1e-7);
    let bad = FitOptions {
        start: Some(DVector::from_vec(vec![0.5])),
        ..FitOptions::default()
    };
    assert!(fit(&spec, &bad).is_err());
}
