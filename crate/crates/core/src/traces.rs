//! The unknown traces: `τ1` from a two-point boundary problem on AB, `τ2'`
//! and `τ3'` from a coupled weakly singular Volterra system on AD and BC,
//! and every `ν` from the relations with `τ'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Line;
use crate::parabolic::{n_cross_profile, n_self_profile, HeatData, KernelConfig, Side};
use crate::quad;
use crate::trace::TraceFn;

/// Smallest admissible solver grid.
pub const MIN_GRID: usize = 16;

/// Step matrices with a larger condition number are rejected.
pub const MAX_STEP_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigma {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl Sigma {
    pub fn new(s1: f64, s2: f64, s3: f64) -> Result<Self> {
        let s = Sigma { s1, s2, s3 };
        s.validate()?;
        Ok(s)
    }

    /// `σ1 ≠ ±1`, `σ2, σ3 ∈ (−1, 1)`.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma1", self.s1), ("sigma2", self.s2), ("sigma3", self.s3)] {
            if !v.is_finite() {
                return Err(Error::SigmaInvalid {
                    name,
                    value: v,
                    reason: "not a finite number",
                });
            }
        }
        if self.s1.abs() == 1.0 {
            return Err(Error::SigmaInvalid {
                name: "sigma1",
                value: self.s1,
                reason: "sigma1 = +1 or -1 makes the problem on AB degenerate",
            });
        }
        for (name, v) in [("sigma2", self.s2), ("sigma3", self.s3)] {
            if v.abs() >= 1.0 {
                return Err(Error::SigmaInvalid {
                    name,
                    value: v,
                    reason: "must lie strictly inside (-1, 1)",
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, line: Line) -> f64 {
        match line {
            Line::AB => self.s1,
            Line::AD => self.s2,
            Line::BC => self.s3,
        }
    }

    /// `λ = (1 − σ1)/(1 + σ1)`.
    pub fn lambda(&self) -> f64 {
        (1.0 - self.s1) / (1.0 + self.s1)
    }

    /// Leading Volterra coefficients `(1 + σ)/(1 − σ)` for AD and BC.
    pub fn leading(&self) -> [f64; 2] {
        [(1.0 + self.s2) / (1.0 - self.s2), (1.0 + self.s3) / (1.0 - self.s3)]
    }
}

/// Solves `τ'' − λτ' = f*` on `[0, 1]` with `τ(0) = τ(1) = 0`, where
/// `f*(x) = f(x, 0) − A1(x)/(1 + σ1)`. Values and derivatives are both
/// taken from the closed form.
pub fn solve_tau1(
    sig: &Sigma,
    f_on_ab: &(dyn Fn(f64) -> f64 + Sync),
    a1: &(dyn Fn(f64) -> Result<f64> + Sync),
    m: usize,
) -> Result<TraceFn> {
    sig.validate()?;
    check_grid(m)?;
    let denom = 1.0 + sig.s1;
    let fstar = |x: f64| -> Result<f64> { Ok(f_on_ab(x) - a1(x)? / denom) };
    solve_bvp(sig.lambda(), &fstar, m)
}

/// Closed-form solution of `τ'' − λτ' = f*`, `τ(0) = τ(1) = 0`:
/// with `J(x) = ∫_0^x e^{λ(x−t)} f*(t) dt` and `F = J − ∫_0^x f*`,
/// `τ = (F − C(e^{λx} − 1))/λ`, `τ' = J − C e^{λx}`, `C = F(1)/(e^λ − 1)`.
pub fn solve_bvp(lambda: f64, fstar: &(dyn Fn(f64) -> Result<f64> + Sync), m: usize) -> Result<TraceFn> {
    if !(lambda.is_finite() && lambda != 0.0) {
        return Err(Error::InvalidParameter(format!("BVP rate lambda = {lambda} is not usable")));
    }
    let h = 1.0 / m as f64;
    let rule = quad::rule(10);
    let growth = (lambda * h).exp();
    let mut j = vec![0.0; m + 1];
    let mut s = vec![0.0; m + 1];
    for k in 0..m {
        let (x0, x1) = (k as f64 * h, (k + 1) as f64 * h);
        let (mut cj, mut cs) = (0.0, 0.0);
        let half = 0.5 * h;
        for (z, w) in rule.nodes.iter().zip(&rule.weights) {
            let t = x0 + half * (1.0 + z);
            let v = fstar(t)?;
            cj += w * (lambda * (x1 - t)).exp() * v;
            cs += w * v;
        }
        j[k + 1] = growth * j[k] + half * cj;
        s[k + 1] = s[k] + half * cs;
    }
    let f1 = j[m] - s[m];
    let c = f1 / lambda.exp_m1();
    let mut values = Vec::with_capacity(m + 1);
    let mut derivs = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let x = k as f64 * h;
        values.push((j[k] - s[k] - c * (lambda * x).exp_m1()) / lambda);
        derivs.push(j[k] - c * (lambda * x).exp());
    }
    values[0] = 0.0;
    values[m] = 0.0;
    if values.iter().chain(&derivs).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("solving the boundary problem on AB".into()));
    }
    TraceFn::from_values_and_derivs(values, derivs)
}

fn check_grid(m: usize) -> Result<()> {
    if m < MIN_GRID {
        return Err(Error::InvalidParameter(format!("grid M must be at least {MIN_GRID}, got {m}")));
    }
    Ok(())
}

/// Right-hand side of the Volterra system at height `y`:
///
/// ```text
/// E1 = A2/(1 − σ2) + ∫ τ1' N(0, y; x1, 0) dx1 − ∬ f G_x(0, y; ·)
/// E2 = A3/(1 − σ3) − ∫ τ1' N(1, y; x1, 0) dx1 + ∬ f G_x(1, y; ·)
/// ```
///
/// At `y = 0` the flux integrals take their limits `τ1'(0)` and `τ1'(1)`.
pub fn build_e(y: f64, side: Side, sig: &Sigma, heat: &HeatData<'_>, a_value: f64) -> Result<f64> {
    let (s, sign) = match side {
        Side::Left => (sig.s2, 1.0),
        Side::Right => (sig.s3, -1.0),
    };
    let flux = if y <= 0.0 {
        heat.tau1.deriv(side.x())
    } else {
        heat.initial_flux(side, y) - heat.source_flux(side, y)
    };
    let e = a_value / (1.0 - s) + sign * flux;
    if e.is_finite() {
        Ok(e)
    } else {
        Err(Error::NonFinite(format!("building the Volterra right-hand side at y = {y}")))
    }
}

/// Coupled second-kind system for `a = τ2'` and `b = τ3'`:
///
/// ```text
/// c2 a + ∫_0^y a K_s − ∫_0^y b K_c = E1
/// c3 b + ∫_0^y b K_s − ∫_0^y a K_c = E2
/// ```
///
/// with kernels `K(t) = profile(t)/√t`.
pub struct VolterraSystem<'a> {
    pub lead: [f64; 2],
    pub self_profile: &'a dyn Fn(f64) -> f64,
    pub cross_profile: &'a dyn Fn(f64) -> f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolterraGrid {
    pub nodes: Vec<f64>,
    pub tau2_deriv: Vec<f64>,
    pub tau3_deriv: Vec<f64>,
    pub rhs1: Vec<f64>,
    pub rhs2: Vec<f64>,
    /// Largest violation of the discrete equations by the solution.
    pub backsub_residual: f64,
}

impl VolterraGrid {
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Moments `h^{-1/2} ∫ (y_k − s)^{−1/2} ℓ(s) ds` of the hat functions of a
/// uniform grid. `left[m]` belongs to the cell whose left node lies `m`
/// steps below `y_k`, `right[m]` to the cell whose right node lies `m − 1`
/// steps below.
fn moment_tables(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut left = vec![0.0; m + 2];
    let mut right = vec![0.0; m + 2];
    for i in 1..=m + 1 {
        let a = i as f64;
        let b = a - 1.0;
        let p32 = (2.0 / 3.0) * (a * a.sqrt() - b * b.sqrt());
        let p12 = 2.0 * (a.sqrt() - b.sqrt());
        left[i] = p32 - b * p12;
        right[i] = a * p12 - p32;
    }
    (left, right)
}

/// Causal product-trapezoid marching; each step solves a 2×2 system.
pub fn solve_volterra_system(sys: &VolterraSystem<'_>, e1: &[f64], e2: &[f64]) -> Result<VolterraGrid> {
    if e1.len() != e2.len() || e1.is_empty() {
        return Err(Error::InvalidParameter("Volterra right-hand sides must have equal length".into()));
    }
    let m = e1.len() - 1;
    check_grid(m)?;
    let h = 1.0 / m as f64;
    let sh = h.sqrt();
    let (left, right) = moment_tables(m);
    let weight = |k: usize, j: usize| -> f64 {
        let mut w = 0.0;
        if j < k {
            w += left[k - j];
        }
        if j >= 1 {
            w += right[k - j + 1];
        }
        sh * w
    };
    let ps: Vec<f64> = (0..=m).map(|i| (sys.self_profile)(i as f64 * h)).collect();
    let pc: Vec<f64> = (0..=m).map(|i| (sys.cross_profile)(i as f64 * h)).collect();
    if ps.iter().chain(&pc).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sampling the Volterra kernels".into()));
    }

    let [c2, c3] = sys.lead;
    let mut a = vec![0.0; m + 1];
    let mut b = vec![0.0; m + 1];
    for k in 0..=m {
        let (mut r1, mut r2) = (e1[k], e2[k]);
        for j in 0..k {
            let w = weight(k, j);
            r1 -= w * (ps[k - j] * a[j] - pc[k - j] * b[j]);
            r2 -= w * (ps[k - j] * b[j] - pc[k - j] * a[j]);
        }
        let d = if k == 0 { 0.0 } else { weight(k, k) };
        let m11 = c2 + d * ps[0];
        let m22 = c3 + d * ps[0];
        let off = -d * pc[0];
        let det = m11 * m22 - off * off;
        let norm = (m11.abs() + off.abs()).max(m22.abs() + off.abs());
        let inv_norm = (m22.abs() + off.abs()).max(m11.abs() + off.abs()) / det.abs();
        let cond = norm * inv_norm;
        if !(det != 0.0 && cond.is_finite() && cond <= MAX_STEP_CONDITION) {
            return Err(Error::StepSingular { step: k, cond });
        }
        a[k] = (m22 * r1 - off * r2) / det;
        b[k] = (m11 * r2 - off * r1) / det;
    }

    let mut backsub: f64 = 0.0;
    for k in 0..=m {
        let (mut l1, mut l2) = (c2 * a[k], c3 * b[k]);
        for j in 0..=k {
            let w = if k == 0 { 0.0 } else { weight(k, j) };
            l1 += w * (ps[k - j] * a[j] - pc[k - j] * b[j]);
            l2 += w * (ps[k - j] * b[j] - pc[k - j] * a[j]);
        }
        backsub = backsub.max((l1 - e1[k]).abs()).max((l2 - e2[k]).abs());
    }
    if a.iter().chain(&b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("marching the Volterra system".into()));
    }
    Ok(VolterraGrid {
        nodes: (0..=m).map(|k| k as f64 * h).collect(),
        tau2_deriv: a,
        tau3_deriv: b,
        rhs1: e1.to_vec(),
        rhs2: e2.to_vec(),
        backsub_residual: backsub,
    })
}

/// The system coupling AD and BC through the strip kernel `N`.
pub fn solve_volterra(sig: &Sigma, e1: &[f64], e2: &[f64], cfg: &KernelConfig) -> Result<VolterraGrid> {
    sig.validate()?;
    let ks = |t: f64| n_self_profile(t, cfg);
    let kc = |t: f64| n_cross_profile(t, cfg);
    let sys = VolterraSystem {
        lead: sig.leading(),
        self_profile: &ks,
        cross_profile: &kc,
    };
    solve_volterra_system(&sys, e1, e2)
}

/// `ν` from `(1 − εσ) τ' − (1 + εσ) ε ν = A`, node by node (`ε` the line's
/// orientation): `ν1 = [(1 − σ1) τ1' − A1]/(1 + σ1)`,
/// `ν2 = [A2 − (1 + σ2) τ2']/(1 − σ2)` and likewise for `ν3`.
pub fn recover_nu(line: Line, tau_deriv: &TraceFn, a_nodes: &[f64], sigma: f64) -> Result<TraceFn> {
    let eps = line.orientation();
    let denom = 1.0 + eps * sigma;
    if !(sigma.is_finite() && denom != 0.0) {
        return Err(Error::SigmaInvalid {
            name: match line {
                Line::AB => "sigma1",
                Line::AD => "sigma2",
                Line::BC => "sigma3",
            },
            value: sigma,
            reason: "the relation on this line cannot be solved for nu",
        });
    }
    let d = tau_deriv.values();
    if a_nodes.len() != d.len() {
        return Err(Error::InvalidParameter(format!(
            "relation right-hand side has {} nodes, trace has {}",
            a_nodes.len(),
            d.len()
        )));
    }
    let values = d
        .iter()
        .zip(a_nodes)
        .map(|(tp, a)| eps * ((1.0 - eps * sigma) * tp - a) / denom)
        .collect();
    TraceFn::from_values(values)
}

/// `τ(t) = anchor + ∫_0^t τ'`, integrating the interpolant of `τ'` exactly;
/// node derivatives are the `τ'` samples.
pub fn integrate_deriv(tau_deriv: &TraceFn, anchor: f64) -> Result<TraceFn> {
    let values = (0..=tau_deriv.intervals())
        .map(|k| anchor + tau_deriv.antiderivative(tau_deriv.node(k)))
        .collect();
    TraceFn::from_values_and_derivs(values, tau_deriv.values().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sigma_validation() {
        assert!(Sigma::new(0.3, -0.4, 0.5).is_ok());
        assert!(Sigma::new(5.0, 0.0, 0.0).is_ok());
        for (s, name) in [((1.0, 0.0, 0.0), "sigma1"), ((-1.0, 0.0, 0.0), "sigma1"), ((0.0, 1.0, 0.0), "sigma2"), ((0.0, 0.0, -1.5), "sigma3")] {
            match Sigma::new(s.0, s.1, s.2) {
                Err(Error::SigmaInvalid { name: n, .. }) => assert_eq!(n, name),
                other => panic!("{other:?}"),
            }
        }
        assert!(Sigma::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn bvp_zero_data() {
        let sig = Sigma::new(0.4, 0.0, 0.0).unwrap();
        let tau = solve_tau1(&sig, &|_| 0.0, &|_| Ok(0.0), 32).unwrap();
        assert_eq!(tau.max_abs(), 0.0);
    }

    #[test]
    fn bvp_manufactured() {
        let sig = Sigma::new(0.0, 0.0, 0.0).unwrap();
        let tau = solve_tau1(&sig, &|x| 2.0 * x - 3.0, &|_| Ok(0.0), 64).unwrap();
        for (k, v) in tau.values().iter().enumerate() {
            let x = tau.node(k);
            assert!((v - x * (1.0 - x)).abs() < 1e-12);
            assert!((tau.deriv_values()[k] - (1.0 - 2.0 * x)).abs() < 1e-12);
        }
        assert_eq!(tau.values()[0], 0.0);
        assert_eq!(tau.values()[64], 0.0);
    }

    // τ'' − λτ' = f* by a second difference, for negative and positive λ
    #[test]
    fn bvp_residual() {
        for s1 in [-0.6, 0.2, 3.0] {
            let sig = Sigma::new(s1, 0.0, 0.0).unwrap();
            let lam = sig.lambda();
            let f = |x: f64| (3.0 * x).cos() + x;
            let m = 128;
            let tau = solve_tau1(&sig, &f, &|x| Ok(0.1 * x * x), m).unwrap();
            let fstar = |x: f64| f(x) - 0.1 * x * x / (1.0 + s1);
            let h = 1.0 / m as f64;
            let v = tau.values();
            for k in 1..m {
                let x = tau.node(k);
                let res = (v[k + 1] - 2.0 * v[k] + v[k - 1]) / (h * h) - lam * (v[k + 1] - v[k - 1]) / (2.0 * h) - fstar(x);
                assert!(res.abs() < 2e-3, "sigma1 = {s1}, x = {x}: {res}");
            }
        }
    }

    fn abel_system(e: impl Fn(f64) -> f64, m: usize) -> VolterraGrid {
        let ks = |_: f64| 1.0 / PI.sqrt();
        let kc = |_: f64| 0.0;
        let sys = VolterraSystem {
            lead: [1.0, 1.0],
            self_profile: &ks,
            cross_profile: &kc,
        };
        let rhs: Vec<f64> = (0..=m).map(|k| e(k as f64 / m as f64)).collect();
        solve_volterra_system(&sys, &rhs, &rhs).unwrap()
    }

    #[test]
    fn abel_constant_solution() {
        let g = abel_system(|y| 1.0 + 2.0 * (y / PI).sqrt(), 64);
        for v in &g.tau2_deriv {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!(g.backsub_residual < 1e-12);
    }

    #[test]
    fn abel_exponential_converges() {
        let e = |y: f64| y.exp() * (1.0 + libm::erf(y.sqrt()));
        let err = |m: usize| {
            let g = abel_system(e, m);
            g.nodes
                .iter()
                .zip(&g.tau2_deriv)
                .map(|(y, v)| (v - y.exp()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e2 < 1e-3);
        assert!((e1 / e2).log2() > 1.3, "{e1} {e2}");
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let sig = Sigma::new(0.0, 0.2, -0.3).unwrap();
        let z = vec![0.0; 33];
        let g = solve_volterra(&sig, &z, &z, &KernelConfig::default()).unwrap();
        assert!(g.tau2_deriv.iter().chain(&g.tau3_deriv).all(|v| *v == 0.0));
    }

    #[test]
    fn coupled_backsubstitution_is_exact() {
        let sig = Sigma::new(0.0, 0.5, -0.5).unwrap();
        let m = 64;
        let e1: Vec<f64> = (0..=m).map(|k| (k as f64 / m as f64).sin() + 1.0).collect();
        let e2: Vec<f64> = (0..=m).map(|k| 2.0 - k as f64 / m as f64).collect();
        let g = solve_volterra(&sig, &e1, &e2, &KernelConfig::default()).unwrap();
        assert!(g.backsub_residual < 1e-12);
    }

    #[test]
    fn nu_recovery_examples() {
        let m = 16;
        let ones = TraceFn::sample(m, |_| 1.0, None).unwrap();
        let nu = recover_nu(Line::AB, &ones, &vec![0.0; m + 1], 0.0).unwrap();
        assert!(nu.values().iter().all(|v| (v - 1.0).abs() < 1e-15));
        let ident = TraceFn::sample(m, |y| y, None).unwrap();
        let a: Vec<f64> = ident.nodes().iter().map(|y| 2.0 * y).collect();
        let nu2 = recover_nu(Line::AD, &ident, &a, 0.5).unwrap();
        for (k, v) in nu2.values().iter().enumerate() {
            assert!((v - ident.node(k)).abs() < 1e-15);
        }
    }

    // re-forming the relation from the recovered ν gives back A
    #[test]
    fn nu_recovery_round_trip() {
        let m = 32;
        let tp = TraceFn::sample(m, |t| (2.0 * t).cos(), None).unwrap();
        let a: Vec<f64> = tp.nodes().iter().map(|t| t * t - 0.3).collect();
        for line in Line::ALL {
            let s = 0.35;
            let nu = recover_nu(line, &tp, &a, s).unwrap();
            let e = line.orientation();
            for k in 0..=m {
                let lhs = (1.0 - e * s) * tp.values()[k] - (1.0 + e * s) * e * nu.values()[k];
                assert!((lhs - a[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn integrate_deriv_examples() {
        let z = TraceFn::zeros(16).unwrap();
        assert_eq!(integrate_deriv(&z, 0.0).unwrap().max_abs(), 0.0);
        let two_y = TraceFn::sample(16, |y| 2.0 * y, None).unwrap();
        let sq = integrate_deriv(&two_y, 0.0).unwrap();
        for i in 0..=50 {
            let y = i as f64 / 50.0;
            assert!((sq.eval(y) - y * y).abs() < 1e-10);
        }
        let cos = TraceFn::sample(256, f64::cos, None).unwrap();
        let s = integrate_deriv(&cos, 1.0).unwrap();
        for i in 0..=50 {
            let y = i as f64 / 50.0;
            assert!((s.eval(y) - 1.0 - y.sin()).abs() < 1e-8);
        }
    }
}
