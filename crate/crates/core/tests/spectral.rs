use std::f64::consts::PI;

use whitham_cm::error::Error;
use whitham_cm::kernel;
use whitham_cm::quad::GaussRule;
use whitham_cm::spectral::{self, NewtonOptions, PeriodicGrid, SpectralOperator};
use whitham_cm::symbols;
use whitham_cm::waves::{self, GswParams, WaveMeta, WaveProfile};

const TAU: f64 = 0.2;

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn imported(grid: PeriodicGrid, values: Vec<f64>, speed: f64) -> WaveProfile {
    WaveProfile { grid, x: grid.nodes(), values, speed, tau: TAU, bernoulli: 0.0, meta: WaveMeta::imported() }
}

/// An even grid function with a few modes of decreasing size.
fn test_vector(grid: &PeriodicGrid, shift: f64) -> Vec<f64> {
    grid.nodes()
        .iter()
        .map(|&x| (-(x / 4.0).powi(2)).exp() * (1.0 + shift * (0.7 * x).cos()) + 0.1 * (2.0 * PI * 3.0 * x / grid.l).cos())
        .collect()
}

#[test]
fn cosines_are_eigenfunctions() {
    let grid = PeriodicGrid::new(256, 40.0).unwrap();
    let x = grid.nodes();
    for n in [1, 5, 17, 60] {
        let k = 2.0 * PI * n as f64 / grid.l;
        let phi: Vec<f64> = x.iter().map(|&xi| (k * xi).cos()).collect();
        let out = spectral::apply_m(&phi, &grid, TAU).unwrap();
        let m = symbols::m_real(TAU, k);
        let want: Vec<f64> = phi.iter().map(|p| m * p).collect();
        assert!(sup_diff(&out, &want) < 1e-12 * m, "n {n}");
    }
}

#[test]
fn constants_are_fixed() {
    let grid = PeriodicGrid::new(256, 40.0).unwrap();
    let out = spectral::apply_m(&vec![0.37; 256], &grid, TAU).unwrap();
    assert!(out.iter().all(|y| (y - 0.37).abs() < 1e-15));
}

#[test]
fn multiplier_is_self_adjoint() {
    let grid = PeriodicGrid::new(512, 60.0).unwrap();
    let op = SpectralOperator::m_tau(grid, TAU);
    let u = test_vector(&grid, 0.5);
    let v: Vec<f64> = grid.nodes().iter().map(|&x| (-(x - 3.0).powi(2) / 8.0).exp() * (1.3 * x).sin()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (a, b) = (dot(&op.apply(&u), &v), dot(&u, &op.apply(&v)));
    assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "{a} vs {b}");
}

#[test]
fn gaussian_matches_kernel_convolution() {
    // ∫ K(|u|) g(x − u) du = ∫_0^∞ K(u) (g(x − u) + g(x + u)) du, with u = t² removing the singularity
    let grid = PeriodicGrid::new(1024, 64.0).unwrap();
    let g = |x: f64| (-x * x).exp();
    let vals: Vec<f64> = grid.nodes().iter().map(|&x| g(x)).collect();
    let spec = spectral::apply_l(&vals, &grid, TAU).unwrap();
    let rule = GaussRule::new(40);
    let top = 30f64.sqrt();
    for j in [512usize, 536] {
        let x = grid.nodes()[j];
        let mut total = 0.0;
        for p in 0..120 {
            let (a, b) = (top * p as f64 / 120.0, top * (p + 1) as f64 / 120.0);
            total += rule.integrate(a, b, |t| {
                let u = t * t;
                2.0 * t * kernel::kernel_eval(TAU, u).unwrap() * (g(x - u) + g(x + u))
            });
        }
        assert!((spec[j] - total).abs() < 1e-6, "x {x}: {} vs {total}", spec[j]);
    }
}

#[test]
fn aliased_input_is_rejected() {
    let grid = PeriodicGrid::new(64, 10.0).unwrap();
    let vals: Vec<f64> = (0..64).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let e = spectral::apply_m_checked(&vals, &grid, TAU, 1e-8).unwrap_err();
    assert!(matches!(e, Error::AliasingError(_)));
}

#[test]
fn zero_has_zero_residual() {
    let grid = PeriodicGrid::new(256, 50.0).unwrap();
    let r = spectral::residual(&imported(grid, vec![0.0; 256], 0.9), 0.9, TAU).unwrap();
    assert_eq!(r.sup, 0.0);
    assert_eq!(r.l2, 0.0);
}

#[test]
fn jacobian_matches_central_differences() {
    // the residual is quadratic, so the central difference is exact up to rounding
    // and the one-sided difference is off by exactly h v²
    let grid = PeriodicGrid::new(512, 60.0).unwrap();
    let c = 0.95;
    let phi = test_vector(&grid, 0.3);
    let v = test_vector(&grid, -0.8);
    let res = |f: &[f64]| spectral::residual(&imported(grid, f.to_vec(), c), c, TAU).unwrap().values;
    let mv = spectral::apply_m(&v, &grid, TAU).unwrap();
    let jv: Vec<f64> = mv.iter().zip(&v).zip(&phi).map(|((m, vi), p)| m - c * vi + 2.0 * p * vi).collect();
    let mut errs = vec![];
    for h in [1e-4, 1e-5] {
        let plus: Vec<f64> = phi.iter().zip(&v).map(|(p, vi)| p + h * vi).collect();
        let minus: Vec<f64> = phi.iter().zip(&v).map(|(p, vi)| p - h * vi).collect();
        let (rp, rm, r0) = (res(&plus), res(&minus), res(&phi));
        let central: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        assert!(sup_diff(&central, &jv) < 1e-11 / h, "h {h}");
        let one_sided: Vec<f64> = rp.iter().zip(&r0).zip(&jv).zip(&v).map(|(((a, b), j), vi)| (a - b) / h - j - h * vi * vi).collect();
        errs.push(sup(&one_sided));
        let first_order: Vec<f64> = rp.iter().zip(&r0).zip(&jv).map(|((a, b), j)| (a - b) / h - j).collect();
        assert!((sup(&first_order) - h * sup(&v.iter().map(|x| x * x).collect::<Vec<_>>())).abs() < 1e-3 * h);
    }
    assert!(errs.iter().all(|e| *e < 1e-9), "{errs:?}");
}

#[test]
fn msw_residual_is_small_relative_to_the_wave() {
    let grid = PeriodicGrid::new(4096, 400.0).unwrap();
    let p = waves::msw_profile(1.0, -1e-3, 0.0, &grid).unwrap();
    let r = spectral::residual(&p, p.speed, p.tau).unwrap();
    assert!(r.sup / r.sup_profile < 0.2, "{}", r.sup / r.sup_profile);
    assert!(r.aliasing < 1e-8);
}

#[test]
fn newton_refines_msw_and_keeps_evenness() {
    let grid = PeriodicGrid::new(2048, 300.0).unwrap();
    let p = waves::msw_profile(1.0, -1e-3, 0.0, &grid).unwrap();
    let rep = spectral::newton_refine(&p, p.speed, p.tau, &NewtonOptions::default()).unwrap();
    assert!(rep.iterations <= 10);
    assert!(*rep.history.last().unwrap() < 1e-11);
    assert!(rep.profile.meta.refined);
    let v = &rep.profile.values;
    for j in 1..grid.n / 2 {
        assert_eq!(v[j], v[grid.mirror(j)]);
    }
    // the refinement is a fixed point of a second pass
    let again = spectral::newton_refine(&rep.profile, p.speed, p.tau, &NewtonOptions::default()).unwrap();
    assert_eq!(again.iterations, 0);
    assert_eq!(again.profile.values, rep.profile.values);
}

#[test]
fn refinement_commutes_with_galilean_shifts() {
    let grid = PeriodicGrid::new(2048, 300.0).unwrap();
    let p = waves::msw_profile(1.0, -1e-3, 0.0, &grid).unwrap();
    let opts = NewtonOptions::default();
    let v = 2e-3;
    let a = spectral::newton_refine(&p, p.speed, TAU, &opts).unwrap().profile;
    let a = waves::galilean_shift(&a, v);
    let q = waves::galilean_shift(&p, v);
    let b = spectral::newton_refine(&q, q.speed, TAU, &opts).unwrap().profile;
    assert!((a.speed - b.speed).abs() < 1e-15);
    assert!(sup_diff(&a.values, &b.values) < 1e-9, "{}", sup_diff(&a.values, &b.values));
}

#[test]
fn gsw_residual_decreases_with_mu() {
    let mut sups = vec![];
    for mu in [1e-2, 5e-3, 2.5e-3] {
        let gp = GswParams::new(mu, 1.0, 0.0, 0.0);
        let grid = PeriodicGrid::new(4096, waves::gsw_commensurate_period(TAU, &gp, 200.0).unwrap()).unwrap();
        let p = waves::gsw_profile(TAU, &gp, &grid).unwrap();
        sups.push(spectral::residual(&p, p.speed, p.tau).unwrap().sup);
    }
    assert!(sups.windows(2).all(|w| w[1] < w[0]), "{sups:?}");
}

#[test]
fn grid_rejects_bad_sizes() {
    assert!(PeriodicGrid::new(100, 10.0).is_err());
    assert!(PeriodicGrid::new(256, -1.0).is_err());
    let g = PeriodicGrid::new(256, 10.0).unwrap();
    assert!(spectral::apply_m(&[0.0; 10], &g, TAU).is_err());
}

#[test]
fn gsw_refinement_at_fixed_speed_reports_the_free_ripple_direction() {
    // the periodic ripple family has a free amplitude at fixed c; plain Newton reports it rather than drifting
    let gp = GswParams::new(-1e-3, 1.0, 0.0, 0.0);
    let grid = PeriodicGrid::new(4096, waves::gsw_commensurate_period(TAU, &gp, 400.0).unwrap()).unwrap();
    let p = waves::gsw_profile(TAU, &gp, &grid).unwrap();
    let e = spectral::newton_refine(&p, p.speed, TAU, &NewtonOptions::default()).unwrap_err();
    assert!(matches!(e, Error::SingularJacobian(_)), "{e}");
    assert_eq!(e.exit_code(), 3);
}
