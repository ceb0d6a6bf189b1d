use mixtype_core::expr::{BinOp, Func};
use mixtype_core::*;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::X),
        Just(Expr::Y),
        (-50.0f64..50.0).prop_map(Expr::Num),
        (1u32..9).prop_map(|k| Expr::Num(k as f64)),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        let op = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow)
        ];
        let func = proptest::sample::select(Func::ALL.to_vec());
        prop_oneof![
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::bin(o, a, b)),
            (func, inner.clone()).prop_map(|(f, a)| Expr::call(f, a)),
            inner.prop_map(|a| Expr::Neg(Box::new(a))),
        ]
    })
}

#[test]
fn f1_is_quarter_of_f_at_random_points() {
    let f = SourceTerm::parse("sin(3*x)*exp(-y) + x*y^2 - 0.5").unwrap();
    let strategy = (0.0f64..1.0, -0.5f64..1.0).prop_filter("inside the hull", |&(x, y)| {
        mixtype_core::source::in_domain_hull(Point::new(x, y))
    });
    runner(100)
        .run(&strategy, |(x, y)| {
            let p = Point::new(x, y);
            let direct = f.eval(p).unwrap() / 4.0;
            let via_char = f.f1_eval(to_char(p)).unwrap();
            prop_assert!((direct - via_char).abs() <= 1e-14, "{direct} vs {via_char}");
            Ok(())
        })
        .unwrap();
}

#[test]
fn printed_expressions_parse_back_to_the_same_function() {
    let strategy = (arb_expr(), proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 10));
    runner(200)
        .run(&strategy, |(e, pts)| {
            let text = e.to_string();
            let back = Expr::parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
            prop_assert_eq!(back.to_string(), text.clone());
            for (x, y) in pts {
                match (e.eval(x, y), back.eval(x, y)) {
                    (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0), "{text} at ({x}, {y})"),
                    (Err(_), Err(_)) => {}
                    (a, b) => prop_assert!(false, "{text} at ({x}, {y}): {a:?} vs {b:?}"),
                }
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn parser_examples() {
    let e = Expr::parse("sin(3.141592653589793*x)*exp(-y)").unwrap();
    assert!((e.eval(0.5, 0.0).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(Expr::parse("0").unwrap().constant_value(), Some(0.0));
    let err = Expr::parse("x + * y").unwrap_err();
    assert_eq!(err.offset, 4);
    assert_eq!(Expr::parse("sin(pi*x)").unwrap().eval(0.5, 0.0).unwrap(), 1.0);
}

#[test]
fn f1_examples() {
    let cp = CharPoint { xi: 0.6, eta: 0.2 };
    assert_eq!(SourceTerm::zero().f1_eval(cp).unwrap(), 0.0);
    assert_eq!(SourceTerm::constant(1.0).f1_eval(cp).unwrap(), 0.25);
    let fx = SourceTerm::parse("x").unwrap();
    assert!((fx.f1_eval(cp).unwrap() - 0.1).abs() < 1e-15);
}

fn bumps(c: f64) -> [TypeChangeCurve; 3] {
    [
        TypeChangeCurve::bump(Line::AB, c).unwrap(),
        TypeChangeCurve::bump(Line::AD, c).unwrap(),
        TypeChangeCurve::bump(Line::BC, c).unwrap(),
    ]
}

// bisection on an increasing function
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn upsilon_matches_bisection_oracle() {
    let maps = CharMaps::build(&TypeChangeCurve::bump(Line::AB, 0.25).unwrap()).unwrap();
    let g = |x: f64| x * (1.0 - x) / 4.0;
    let x = bisect(|x| x - g(x) - 0.5, 0.0, 1.0);
    assert!((maps.upsilon(0.5).unwrap() - (x + g(x))).abs() < 1e-12);
}

#[test]
fn rho_inverts_upsilon_on_every_line() {
    for c in [0.1, 0.25, 0.45] {
        for curve in bumps(c) {
            let maps = CharMaps::build(&curve).unwrap();
            for i in 0..=100 {
                let s = i as f64 / 100.0;
                let back = maps.rho(maps.upsilon(s).unwrap()).unwrap();
                assert!((back - s).abs() <= 1e-10, "{:?} c = {c}, s = {s}: {back}", curve.line());
            }
        }
    }
    let table = TypeChangeCurve::table(Line::AB, &[(0.0, 0.0), (0.3, 0.05), (0.6, 0.07), (1.0, 0.0)]).unwrap();
    let maps = CharMaps::build(&table).unwrap();
    for i in 0..=100 {
        let s = i as f64 / 100.0;
        assert!((maps.rho(maps.upsilon(s).unwrap()).unwrap() - s).abs() <= 1e-9);
    }
}

#[test]
fn affixes_lie_on_curve_and_characteristic() {
    for curve in bumps(0.25) {
        let line = curve.line();
        let maps = CharMaps::build(&curve).unwrap();
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            for starred in [false, true] {
                let p = affix(t, starred, &maps).unwrap();
                let (lp, lq) = line.to_local(p);
                let along = if starred { lp - t } else { lq - t };
                assert!(along.abs() <= 1e-10, "{line} t = {t}: off characteristic by {along}");
                // on the curve: (lp + lq)/2 is the parameter and (lq − lp)/2 the deviation
                let s = 0.5 * (lp + lq);
                let dev = 0.5 * (lq - lp) - curve.deviation(s);
                assert!(dev.abs() <= 1e-10, "{line} t = {t}: off curve by {dev}");
            }
        }
        assert!(affix(0.0, false, &maps).unwrap().distance(line.point_at(0.0)) <= 1e-12);
        assert!(affix(1.0, true, &maps).unwrap().distance(line.point_at(1.0)) <= 1e-12);
    }
}

// 2-D Newton on {x − y = 0.5, y = −x(1 − x)/4}
#[test]
fn affix_matches_newton_oracle() {
    let maps = CharMaps::build(&TypeChangeCurve::bump(Line::AB, 0.25).unwrap()).unwrap();
    let (mut x, mut y) = (0.5, 0.0);
    for _ in 0..50 {
        let f1 = x - y - 0.5;
        let f2 = y + x * (1.0 - x) / 4.0;
        let (a, b, c, d) = (1.0, -1.0, (1.0 - 2.0 * x) / 4.0, 1.0);
        let det = a * d - b * c;
        x -= (d * f1 - b * f2) / det;
        y -= (a * f2 - c * f1) / det;
    }
    let p = affix(0.5, false, &maps).unwrap();
    assert!((p.x - x).abs() < 1e-12 && (p.y - y).abs() < 1e-12, "{p:?} vs ({x}, {y})");
    assert_eq!(affix(0.0, false, &maps).unwrap(), Point::A);
    assert!(affix(1.0, false, &maps).unwrap().distance(Point::B) < 1e-12);
}

#[test]
fn classify_examples() {
    let curves = bumps(0.25);
    assert_eq!(classify(Point::new(0.5, 0.5), &curves), Location::Subdomain(SubdomainId::Omega0));
    assert_eq!(classify(Point::new(0.5, -0.05), &curves), Location::Subdomain(SubdomainId::Omega1));
    assert!(matches!(classify(Point::new(0.5, 0.0), &curves), Location::OnInterface));
    assert_eq!(classify(Point::new(0.5, -0.07), &curves), Location::Outside);
    assert_eq!(classify(Point::new(-0.05, 0.5), &curves), Location::Subdomain(SubdomainId::Omega2));
    assert_eq!(classify(Point::new(1.05, 0.5), &curves), Location::Subdomain(SubdomainId::Omega3));
}

#[test]
fn steep_curves_are_rejected() {
    assert!(TypeChangeCurve::bump(Line::AB, 1.5).is_err());
    let wiggle = TypeChangeCurve::table(Line::AB, &[(0.0, 0.0), (0.1, 0.2), (0.2, 0.0), (1.0, 0.0)]);
    assert!(wiggle.and_then(|c| CharMaps::build(&c)).is_err());
}
