use std::f64::consts::PI;

use mixtype_core::parabolic::{green_g, heat_u, heat_ux_boundary, kernel_n, HeatData};
use mixtype_core::traces::{build_e, solve_volterra, solve_volterra_system, VolterraSystem};
use mixtype_core::*;

// N(x, y; x1, y1) summed over n in [−50, 50] with no truncation test
fn long_n(x: f64, x1: f64, dt: f64) -> f64 {
    let mut s = 0.0;
    for n in -50..=50 {
        let a = x - x1 + 2.0 * n as f64;
        let b = x + x1 + 2.0 * n as f64;
        s += (-a * a / (4.0 * dt)).exp() + (-b * b / (4.0 * dt)).exp();
    }
    s / (2.0 * (PI * dt).sqrt())
}

fn long_g(x: f64, x1: f64, dt: f64) -> f64 {
    let mut s = 0.0;
    for n in -50..=50 {
        let a = x - x1 + 2.0 * n as f64;
        let b = x + x1 + 2.0 * n as f64;
        s += (-a * a / (4.0 * dt)).exp() - (-b * b / (4.0 * dt)).exp();
    }
    s / (2.0 * (PI * dt).sqrt())
}

// Crank-Nicolson for u_xx = u_y on the unit square, u(x, 0) = 0, u(0, y) = y, u(1, y) = 0
fn crank_nicolson(n: usize, steps: usize, y_end: f64) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let k = y_end / steps as f64;
    let r = k / (h * h);
    let mut u = vec![0.0; n + 1];
    let interior = n - 1;
    for s in 0..steps {
        let y1 = (s + 1) as f64 * k;
        let mut rhs: Vec<f64> = (1..n).map(|i| u[i] + 0.5 * r * (u[i - 1] - 2.0 * u[i] + u[i + 1])).collect();
        rhs[0] += 0.5 * r * y1;
        // Thomas sweep for the constant tridiagonal (−r/2, 1 + r, −r/2)
        let (lo, di) = (-0.5 * r, 1.0 + r);
        let mut c = vec![0.0; interior];
        let mut d = vec![0.0; interior];
        c[0] = lo / di;
        d[0] = rhs[0] / di;
        for i in 1..interior {
            let m = di - lo * c[i - 1];
            c[i] = lo / m;
            d[i] = (rhs[i] - lo * d[i - 1]) / m;
        }
        for i in (0..interior).rev() {
            let next = if i + 1 < interior { u[i + 2] } else { 0.0 };
            u[i + 1] = d[i] - c[i] * next;
        }
        u[0] = y1;
        u[n] = 0.0;
    }
    u
}

#[test]
fn side_data_matches_crank_nicolson() {
    let tau1 = TraceFn::zeros(256).unwrap();
    let tau2 = TraceFn::sample(256, |y| y, Some(&|_: f64| 1.0)).unwrap();
    let f = SourceTerm::zero();
    let u = heat_u(Point::new(0.25, 0.2), &tau1, &tau2, &tau1, &f, &KernelConfig::default()).unwrap();
    let fd = crank_nicolson(400, 400, 0.2)[100];
    assert!((u - fd).abs() <= 2e-4, "{u} vs {fd}");
}

#[test]
fn separated_solution_examples() {
    let tau1 = TraceFn::sample(256, |x| (PI * x).sin(), Some(&|x: f64| PI * (PI * x).cos())).unwrap();
    let zero = TraceFn::zeros(256).unwrap();
    let f = SourceTerm::zero();
    let cfg = KernelConfig::default();
    let u = heat_u(Point::new(0.5, 0.1), &tau1, &zero, &zero, &f, &cfg).unwrap();
    assert!((u - 0.372_708_5).abs() < 1e-6, "{u}");
    let flux = heat_ux_boundary(Side::Left, 0.1, &tau1, &zero, &zero, &f, &cfg).unwrap();
    assert!((flux - PI * (-PI * PI * 0.1).exp()).abs() < 1e-5, "{flux}");
}

// one-sided differences at x = h approach the boundary flux as h → 0
#[test]
fn flux_is_the_limit_of_interior_differences() {
    let tau1 = TraceFn::sample(128, |x| x * (1.0 - x), Some(&|x: f64| 1.0 - 2.0 * x)).unwrap();
    let tau2 = TraceFn::sample(128, |y| 0.3 * y, Some(&|_: f64| 0.3)).unwrap();
    let zero = TraceFn::zeros(128).unwrap();
    let f = SourceTerm::constant(1.0);
    let heat = HeatData::new(&tau1, &tau2, &zero, &f, KernelConfig::default());
    let y = 0.3;
    let flux = heat.ux_boundary(Side::Left, y).unwrap();
    let mut errs = Vec::new();
    for h in [4e-3, 2e-3, 1e-3] {
        let u = |x: f64| heat.u(Point::new(x, y)).unwrap();
        errs.push(((u(h) - u(0.0)) / h - flux).abs());
    }
    assert!(errs[2] < 1e-3, "{errs:?}");
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn kernels_match_long_sums() {
    let cfg = KernelConfig::default();
    let g = green_g(0.5, 0.1, 0.5, 0.0, &cfg).unwrap();
    assert!((g - long_g(0.5, 0.5, 0.1)).abs() < 1e-13);
    for dt in [1e-3, 0.05, 0.5, 3.0] {
        let n = kernel_n(0.0, dt, 0.0, 0.0, &cfg).unwrap();
        assert!((n - long_n(0.0, 0.0, dt)).abs() <= 1e-12 * n.abs().max(1.0), "dt = {dt}");
    }
    let cross = kernel_n(0.0, 0.5, 1.0, 0.49, &cfg).unwrap();
    assert!(cross >= 0.0 && cross < 1e-9);
}

#[test]
fn dirichlet_property_holds_to_series_tolerance() {
    let cfg = KernelConfig::default();
    for &(x, dt) in &[(0.1, 1e-4), (0.5, 0.01), (0.9, 0.3), (0.3, 5.0)] {
        for x1 in [0.0, 1.0] {
            assert!(green_g(x, dt, x1, 0.0, &cfg).unwrap().abs() <= 10.0 * cfg.series_tol);
        }
    }
}

#[test]
fn truncation_error_shrinks_with_the_cap() {
    let dt = 8.0;
    let exact = long_n(0.3, 0.6, dt);
    let mut last = f64::INFINITY;
    for cap in [4, 8, 16, 24] {
        let cfg = KernelConfig {
            series_tol: 0.0,
            n_cap: cap,
            ..KernelConfig::default()
        };
        let err = (kernel_n(0.3, dt, 0.6, 0.0, &cfg).unwrap() - exact).abs();
        assert!(err < last, "cap {cap}: {err} not below {last}");
        last = err;
    }
    assert!(last < 1e-12);
}

#[test]
fn e1_matches_trapezoid_oracle() {
    let tau1 = TraceFn::sample(256, |x| (PI * x).sin(), Some(&|x: f64| PI * (PI * x).cos())).unwrap();
    let zero = TraceFn::zeros(256).unwrap();
    let f = SourceTerm::zero();
    let heat = HeatData::new(&tau1, &zero, &zero, &f, KernelConfig::default());
    let sigma = Sigma::new(0.0, 0.0, 0.0).unwrap();
    let e1 = build_e(0.1, Side::Left, &sigma, &heat, 0.0).unwrap();
    let panels = 10_000;
    let h = 1.0 / panels as f64;
    let g = |x1: f64| PI * (PI * x1).cos() * long_n(0.0, x1, 0.1);
    let trap = h * (0.5 * (g(0.0) + g(1.0)) + (1..panels).map(|i| g(i as f64 * h)).sum::<f64>());
    assert!((e1 - trap).abs() < 1e-8, "{e1} vs {trap}");
    assert!((e1 - PI * (-PI * PI * 0.1).exp()).abs() < 1e-8);
}

#[test]
fn e_is_flux_plus_scaled_a() {
    let zero = TraceFn::zeros(64).unwrap();
    let f = SourceTerm::constant(1.0);
    let heat = HeatData::new(&zero, &zero, &zero, &f, KernelConfig::default());
    let sigma = Sigma::new(0.0, 0.3, -0.2).unwrap();
    for y in [0.05, 0.4, 0.9] {
        let e1 = build_e(y, Side::Left, &sigma, &heat, 0.7).unwrap();
        let e2 = build_e(y, Side::Right, &sigma, &heat, -0.4).unwrap();
        let fl = heat.ux_boundary(Side::Left, y).unwrap();
        let fr = heat.ux_boundary(Side::Right, y).unwrap();
        assert!((e1 - (0.7 / 0.7 + fl)).abs() < 1e-12);
        assert!((e2 - (-0.4 / 1.2 - fr)).abs() < 1e-12);
    }
}

// Σ exp(−n²/t)/√π and Σ exp(−(2n+1)²/(4t))/√π, long sums
fn self_profile(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0 / PI.sqrt();
    }
    (-50..=50).map(|n: i32| (-(n * n) as f64 / t).exp()).sum::<f64>() / PI.sqrt()
}

fn cross_profile(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (-50..=50).map(|n: i32| (-((2 * n + 1) * (2 * n + 1)) as f64 / (4.0 * t)).exp()).sum::<f64>() / PI.sqrt()
}

// ∫_0^y a(s) p(y − s)/√(y − s) ds = 2 ∫_0^{√y} a(y − r²) p(r²) dr by composite Simpson
fn abel_forward(a: &dyn Fn(f64) -> f64, p: &dyn Fn(f64) -> f64, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let n = 2000;
    let top = y.sqrt();
    let h = top / n as f64;
    let g = |r: f64| a(y - r * r) * p(r * r);
    let mut s = g(0.0) + g(top);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    2.0 * s * h / 3.0
}

#[test]
fn volterra_recovers_manufactured_derivatives() {
    let sigma = Sigma::new(0.0, 0.25, -0.3).unwrap();
    let [c2, c3] = sigma.leading();
    let a = |y: f64| y;
    let b = |y: f64| 1.0 - y;
    let m = 256;
    let ys: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
    let e1: Vec<f64> = ys
        .iter()
        .map(|&y| c2 * a(y) + abel_forward(&a, &self_profile, y) - abel_forward(&b, &cross_profile, y))
        .collect();
    let e2: Vec<f64> = ys
        .iter()
        .map(|&y| c3 * b(y) + abel_forward(&b, &self_profile, y) - abel_forward(&a, &cross_profile, y))
        .collect();
    let g = solve_volterra(&sigma, &e1, &e2, &KernelConfig::default()).unwrap();
    for (k, &y) in ys.iter().enumerate() {
        assert!((g.tau2_deriv[k] - a(y)).abs() <= 1e-3, "tau2' at {y}");
        assert!((g.tau3_deriv[k] - b(y)).abs() <= 1e-3, "tau3' at {y}");
    }
    assert!(g.backsub_residual <= 1e-10);
}

// doubling M changes the Abel solution by O(h^1.5) or better
#[test]
fn abel_solutions_settle_under_refinement() {
    let ks = |_: f64| 1.0 / PI.sqrt();
    let kc = |_: f64| 0.0;
    let sys = VolterraSystem {
        lead: [1.0, 1.0],
        self_profile: &ks,
        cross_profile: &kc,
    };
    let e = |y: f64| y.exp() * (1.0 + libm::erf(y.sqrt()));
    let solve_at = |m: usize| {
        let rhs: Vec<f64> = (0..=m).map(|k| e(k as f64 / m as f64)).collect();
        solve_volterra_system(&sys, &rhs, &rhs).unwrap().tau2_deriv
    };
    let levels = [32, 64, 128, 256];
    let sols: Vec<Vec<f64>> = levels.iter().map(|&m| solve_at(m)).collect();
    let changes: Vec<f64> = (0..3)
        .map(|i| {
            (0..=levels[i])
                .map(|k| (sols[i][k] - sols[i + 1][2 * k]).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    for w in changes.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.5, "{changes:?}");
    }
}
