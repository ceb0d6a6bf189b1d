use mixtype_core::hyperbolic::{compute_a, dalembert_grad, dalembert_u, dalembert_xy_grad};
use mixtype_core::*;

fn traces() -> (TraceFn, TraceFn) {
    let tau = TraceFn::sample(128, |t| (2.0 * t).sin() * t, Some(&|t: f64| 2.0 * t * (2.0 * t).cos() + (2.0 * t).sin())).unwrap();
    let nu = TraceFn::sample(128, |t| 0.3 - t * t, Some(&|t: f64| -2.0 * t)).unwrap();
    (tau, nu)
}

// a point strictly inside the characteristic triangle on `line`, from frame coordinates
fn inside(line: Line, lp: f64, lq: f64) -> CharPoint {
    to_char(line.from_local(lp, lq))
}

#[test]
fn type_line_reproduces_cauchy_data() {
    let (tau, nu) = traces();
    let f = SourceTerm::parse("1 + x*y").unwrap();
    for line in Line::ALL {
        for i in 1..20 {
            let t = i as f64 / 20.0;
            let cp = to_char(line.point_at(t));
            let u = dalembert_u(line, &tau, &nu, &f, cp, 1e-12).unwrap();
            assert!((u - tau.eval(t)).abs() < 1e-12, "{line} t = {t}");
        }
    }
    // normal derivative on AB is ν1 = u_y
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for i in 1..20 {
        let x = i as f64 / 20.0;
        let (_, uy) = dalembert_xy_grad(Line::AB, &tau, &nu, &f, to_char(Point::new(x, 0.0)), 1e-12).unwrap();
        worst = worst.max((uy - nu.eval(x)).abs());
        let u = |y: f64| dalembert_u(Line::AB, &tau, &nu, &f, to_char(Point::new(x, y)), 1e-12).unwrap();
        let fd = (3.0 * u(0.0) - 4.0 * u(-h) + u(-2.0 * h)) / (2.0 * h);
        assert!((fd - nu.eval(x)).abs() < 1e-5, "x = {x}: {fd}");
    }
    assert!(worst < 1e-12);
}

#[test]
fn gradient_matches_differences() {
    let (tau, nu) = traces();
    let f = SourceTerm::parse("cos(x) - y").unwrap();
    for line in Line::ALL {
        for &(lp, lq) in &[(0.2, 0.5), (0.35, 0.4), (0.1, 0.9)] {
            let cp = inside(line, lp, lq);
            let (uxi, ueta) = dalembert_grad(line, &tau, &nu, &f, cp, 1e-13).unwrap();
            for h in [1e-3, 1e-4] {
                let u = |dxi: f64, deta: f64| {
                    let c = CharPoint {
                        xi: cp.xi + dxi,
                        eta: cp.eta + deta,
                    };
                    dalembert_u(line, &tau, &nu, &f, c, 1e-13).unwrap()
                };
                let fxi = (u(h, 0.0) - u(-h, 0.0)) / (2.0 * h);
                let feta = (u(0.0, h) - u(0.0, -h)) / (2.0 * h);
                let err = (fxi - uxi).abs().max((feta - ueta).abs());
                assert!(err <= 10.0 * h * h, "{line} ({lp}, {lq}) h = {h}: {err}");
            }
        }
    }
}

#[test]
fn constant_source_gradient_matches_differences() {
    let zero = TraceFn::zeros(64).unwrap();
    let f = SourceTerm::constant(1.0);
    let h = 1e-5;
    for line in Line::ALL {
        let cp = inside(line, 0.3, 0.6);
        let (uxi, ueta) = dalembert_grad(line, &zero, &zero, &f, cp, 1e-13).unwrap();
        let u = |dxi: f64, deta: f64| {
            let c = CharPoint {
                xi: cp.xi + dxi,
                eta: cp.eta + deta,
            };
            dalembert_u(line, &zero, &zero, &f, c, 1e-13).unwrap()
        };
        assert!(((u(h, 0.0) - u(-h, 0.0)) / (2.0 * h) - uxi).abs() < 1e-6);
        assert!(((u(0.0, h) - u(0.0, -h)) / (2.0 * h) - ueta).abs() < 1e-6);
    }
}

#[test]
fn a1_for_constant_source() {
    let curve = TypeChangeCurve::bump(Line::AB, 0.25).unwrap();
    let maps = CharMaps::build(&curve).unwrap();
    let f = SourceTerm::constant(1.0);
    for sigma in [0.0, 0.4, -0.3] {
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            let a = compute_a(Line::AB, t, sigma, &f, &maps, 1e-12).unwrap();
            let expect = sigma * (maps.upsilon(t).unwrap() - t) / 2.0 + (t - maps.rho(t).unwrap()) / 2.0;
            assert!((a - expect).abs() < 1e-12, "sigma = {sigma}, t = {t}");
        }
    }
    // ρ(0.5) by bisection on x + x(1 − x)/4 = 0.5
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid + mid * (1.0 - mid) / 4.0 < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho = lo - lo * (1.0 - lo) / 4.0;
    let a = compute_a(Line::AB, 0.5, 0.0, &f, &maps, 1e-12).unwrap();
    assert!((a - (0.5 - rho) / 2.0).abs() < 1e-10);
    assert_eq!(compute_a(Line::AD, 0.3, 0.5, &SourceTerm::zero(), &maps, 1e-12).unwrap(), 0.0);
}
