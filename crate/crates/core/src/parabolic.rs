//! Heat equation `u_xx − u_y = f` on the unit square by the method of images.
//!
//! The strip kernels, with `dt = y − y1` and images over all integers `n`:
//!
//! ```text
//! G = 1/(2√(π dt)) Σ [exp(−(x − x1 + 2n)²/(4dt)) − exp(−(x + x1 + 2n)²/(4dt))]
//! N = 1/(2√(π dt)) Σ [exp(−(x − x1 + 2n)²/(4dt)) + exp(−(x + x1 + 2n)²/(4dt))]
//! ```
//!
//! `G` is the Dirichlet Green's function, and `G_x = −N_x1` term by term.
//! The solution is evaluated in Duhamel form,
//!
//! ```text
//! u = ∫ τ1 G(x, y; x1, 0) dx1 + τ2(0) B0(x, y) + τ3(0) B1(x, y)
//!   + ∫_0^y τ2'(s) B0(x, y − s) ds + ∫_0^y τ3'(s) B1(x, y − s) ds − ∬ f G
//! ```
//!
//! where `B0` is the response to unit boundary data switched on at `x = 0`
//! and `B1(x, t) = B0(1 − x, t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quad;
use crate::source::SourceTerm;
use crate::trace::TraceFn;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const GAUSS_N: usize = 8;
const WINDOW: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelConfig {
    /// Image shells are added until one contributes less than this.
    pub series_tol: f64,
    /// Largest image index `|n|`.
    pub n_cap: usize,
    /// Smaller time differences are raised to this value.
    pub min_dt: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            series_tol: 1e-12,
            n_cap: 32,
            min_dt: 1e-12,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_tol > 0.0 && self.series_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kernel.series_tol must be positive, got {}",
                self.series_tol
            )));
        }
        if self.n_cap < 4 {
            return Err(Error::InvalidParameter(format!(
                "kernel.n_cap must be at least 4, got {}",
                self.n_cap
            )));
        }
        if !(self.min_dt >= 0.0 && self.min_dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kernel.min_dt must be nonnegative, got {}",
                self.min_dt
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Kind {
    G,
    Gx,
    N,
}

/// Image series with shell-wise truncation.
#[inline]
fn series(kind: Kind, x: f64, x1: f64, dt: f64, cfg: &KernelConfig) -> f64 {
    let dt = dt.max(cfg.min_dt);
    let inv4 = 0.25 / dt;
    let pref = 0.5 * FRAC_1_SQRT_PI / dt.sqrt();
    let a0 = x - x1;
    let b0 = x + x1;
    let term = |n: f64| -> f64 {
        let a = a0 + 2.0 * n;
        let b = b0 + 2.0 * n;
        let ea = (-a * a * inv4).exp();
        let eb = (-b * b * inv4).exp();
        match kind {
            Kind::G => ea - eb,
            Kind::N => ea + eb,
            Kind::Gx => (b * eb - a * ea) * 2.0 * inv4,
        }
    };
    let mut total = term(0.0);
    for k in 1..=cfg.n_cap {
        let kf = k as f64;
        let shell = term(kf) + term(-kf);
        total += shell;
        if k >= 2 && (pref * shell).abs() < cfg.series_tol {
            break;
        }
    }
    pref * total
}

fn time_step(y: f64, y1: f64) -> Result<f64> {
    if y1 < y && (y - y1).is_finite() {
        Ok(y - y1)
    } else {
        Err(Error::InvalidTime { y, y1 })
    }
}

pub fn green_g(x: f64, y: f64, x1: f64, y1: f64, cfg: &KernelConfig) -> Result<f64> {
    Ok(series(Kind::G, x, x1, time_step(y, y1)?, cfg))
}

/// `∂G/∂x`.
pub fn green_g_x(x: f64, y: f64, x1: f64, y1: f64, cfg: &KernelConfig) -> Result<f64> {
    Ok(series(Kind::Gx, x, x1, time_step(y, y1)?, cfg))
}

pub fn kernel_n(x: f64, y: f64, x1: f64, y1: f64, cfg: &KernelConfig) -> Result<f64> {
    Ok(series(Kind::N, x, x1, time_step(y, y1)?, cfg))
}

/// `∂N/∂x1`, equal to `−∂G/∂x`.
pub fn kernel_n_x1(x: f64, y: f64, x1: f64, y1: f64, cfg: &KernelConfig) -> Result<f64> {
    Ok(-series(Kind::Gx, x, x1, time_step(y, y1)?, cfg))
}

/// `√t · N(0, t; 0, 0) = Σ exp(−n²/t) / √π`, the smooth factor of the
/// boundary kernel on its own side.
pub fn n_self_profile(t: f64, cfg: &KernelConfig) -> f64 {
    if t <= 0.0 {
        return FRAC_1_SQRT_PI;
    }
    t.sqrt() * series(Kind::N, 0.0, 0.0, t, cfg)
}

/// `√t · N(0, t; 1, 0) = Σ exp(−(2n + 1)²/(4t)) / √π`, the coupling between
/// the two sides.
pub fn n_cross_profile(t: f64, cfg: &KernelConfig) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    t.sqrt() * series(Kind::N, 0.0, 1.0, t, cfg)
}

/// `B0(x, t) = Σ_{n≥0} [erfc((2n + x)/(2√t)) − erfc((2n + 2 − x)/(2√t))]`:
/// heat flow on the strip from zero initial data, unit data at `x = 0` and
/// zero data at `x = 1`.
pub fn step_response(x: f64, t: f64, cfg: &KernelConfig) -> f64 {
    if t <= 0.0 {
        return if x <= 0.0 { 1.0 } else { 0.0 };
    }
    let s = 0.5 / t.sqrt();
    let mut total = 0.0;
    for n in 0..=cfg.n_cap {
        let nf = 2.0 * n as f64;
        let term = libm::erfc((nf + x) * s) - libm::erfc((nf + 2.0 - x) * s);
        total += term;
        if n >= 1 && term.abs() < cfg.series_tol {
            break;
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// `x = 0` (line AD)
    Left,
    /// `x = 1` (line BC)
    Right,
}

impl Side {
    pub fn x(self) -> f64 {
        match self {
            Side::Left => 0.0,
            Side::Right => 1.0,
        }
    }

    pub fn from_index(i: u8) -> Option<Side> {
        match i {
            0 => Some(Side::Left),
            1 => Some(Side::Right),
            _ => None,
        }
    }
}

/// Breakpoints on `[0, 1]` for an `x1`-integral against a kernel peak of
/// width `sigma` at `center`; optionally aligned with a trace grid.
fn x_breaks(center: f64, sigma: f64, grid: Option<&TraceFn>) -> Vec<f64> {
    let lo = (center - WINDOW * sigma).max(0.0);
    let hi = (center + WINDOW * sigma).min(1.0);
    let mut extra: Vec<f64> = quad::gaussian_breaks(center, sigma).collect();
    extra.extend([0.25, 0.5, 0.75]);
    if let Some(tr) = grid {
        let h = tr.step();
        let k0 = (lo / h).ceil() as usize;
        let k1 = ((hi / h).floor() as usize).min(tr.intervals());
        extra.extend((k0..=k1).map(|k| tr.node(k)));
    }
    quad::breakpoints(lo, hi, extra)
}

/// Values of `r = √(y − s)` at which a boundary layer of the point `x` is
/// switched on.
fn layer_r_breaks(x: f64) -> Vec<f64> {
    const W: [f64; 9] = [0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.5, 5.0];
    let mut out = Vec::new();
    for d in [x, 1.0 - x] {
        if d > 0.0 {
            out.extend(W.iter().map(|w| d * w));
        }
    }
    out
}

/// `∫_0^y g(s, y − s) ds` through `s = y − r²`, panels aligned with the
/// trace grid (when given) and with `r_extra`.
fn time_quad(y: f64, grid: Option<&TraceFn>, r_extra: &[f64], mut g: impl FnMut(f64, f64) -> f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let rmax = y.sqrt();
    let mut rs: Vec<f64> = r_extra.to_vec();
    if let Some(tr) = grid {
        let h = tr.step();
        let kmax = ((y / h).ceil() as usize).min(tr.intervals());
        rs.extend((0..=kmax).map(|k| tr.node(k)).filter(|s| *s < y).map(|s| (y - s).sqrt()));
    }
    for k in 1..4 {
        rs.push(rmax * k as f64 / 4.0);
    }
    let first = rs
        .iter()
        .copied()
        .filter(|r| *r > 0.0 && *r < rmax)
        .fold(rmax, f64::min);
    let mut scale = first;
    for _ in 0..3 {
        scale *= 0.5;
        rs.push(scale);
    }
    let brk = quad::breakpoints(0.0, rmax, rs);
    quad::piecewise(&brk, GAUSS_N, |r| {
        let dt = r * r;
        2.0 * r * g(y - dt, dt)
    })
}

fn is_zero_trace(tr: &TraceFn) -> bool {
    tr.max_abs() == 0.0 && tr.deriv_values().iter().all(|d| *d == 0.0)
}

/// Traces and source of a heat problem on the unit square.
#[derive(Debug, Clone, Copy)]
pub struct HeatData<'a> {
    pub tau1: &'a TraceFn,
    pub tau2: &'a TraceFn,
    pub tau3: &'a TraceFn,
    pub source: &'a SourceTerm,
    pub kernel: KernelConfig,
}

impl<'a> HeatData<'a> {
    pub fn new(tau1: &'a TraceFn, tau2: &'a TraceFn, tau3: &'a TraceFn, source: &'a SourceTerm, kernel: KernelConfig) -> Self {
        HeatData {
            tau1,
            tau2,
            tau3,
            source,
            kernel,
        }
    }

    pub fn u(&self, p: Point) -> Result<f64> {
        let Point { x, y } = p;
        let tol = 1e-12;
        if !p.is_finite() || !(-tol..=1.0 + tol).contains(&x) || !(-tol..=1.0 + tol).contains(&y) {
            return Err(Error::OutOfRegion {
                x,
                y,
                region: "the closed unit square",
            });
        }
        let (x, y) = (x.clamp(0.0, 1.0), y.clamp(0.0, 1.0));
        if y == 0.0 {
            return Ok(self.tau1.eval(x));
        }
        let cfg = &self.kernel;
        let mut u = self.initial_term(x, y);
        let (a2, a3) = (self.tau2.eval(0.0), self.tau3.eval(0.0));
        if a2 != 0.0 {
            u += a2 * step_response(x, y, cfg);
        }
        if a3 != 0.0 {
            u += a3 * step_response(1.0 - x, y, cfg);
        }
        u += self.layer_term(x, y, self.tau2, false);
        u += self.layer_term(x, y, self.tau3, true);
        u -= self.source_term(x, y);
        if u.is_finite() {
            Ok(u)
        } else {
            Err(Error::NonFinite(format!("evaluating the heat representation at ({x}, {y})")))
        }
    }

    /// `∫_0^1 τ1(x1) G(x, y; x1, 0) dx1`.
    pub fn initial_term(&self, x: f64, y: f64) -> f64 {
        if is_zero_trace(self.tau1) {
            return 0.0;
        }
        let cfg = &self.kernel;
        let brk = x_breaks(x, (2.0 * y).sqrt(), Some(self.tau1));
        quad::piecewise(&brk, GAUSS_N, |x1| self.tau1.eval(x1) * series(Kind::G, x, x1, y, cfg))
    }

    /// `∫_0^y τ'(s) B(x, y − s) ds` with `B = B0`, or `B1` when `right`.
    fn layer_term(&self, x: f64, y: f64, tr: &TraceFn, right: bool) -> f64 {
        if is_zero_trace(tr) {
            return 0.0;
        }
        let cfg = &self.kernel;
        let xe = if right { 1.0 - x } else { x };
        time_quad(y, Some(tr), &layer_r_breaks(x), |s, dt| tr.deriv(s) * step_response(xe, dt, cfg))
    }

    /// `∬ f G` over `[0, 1] × [0, y]`.
    pub fn source_term(&self, x: f64, y: f64) -> f64 {
        if self.source.is_zero() {
            return 0.0;
        }
        let cfg = &self.kernel;
        let rb = layer_r_breaks(x);
        if let Some(c) = self.source.constant_value() {
            // ∫_0^1 G dx1 = 1 − B0 − B1
            return c * time_quad(y, None, &rb, |_, dt| {
                1.0 - step_response(x, dt, cfg) - step_response(1.0 - x, dt, cfg)
            });
        }
        let src = self.source;
        time_quad(y, None, &rb, |s, dt| {
            let brk = x_breaks(x, (2.0 * dt).sqrt(), None);
            quad::piecewise(&brk, GAUSS_N, |x1| src.value(x1, s) * series(Kind::G, x, x1, dt, cfg))
        })
    }

    /// `∫_0^1 τ1'(x1) N(side, y; x1, 0) dx1`.
    pub fn initial_flux(&self, side: Side, y: f64) -> f64 {
        if is_zero_trace(self.tau1) {
            return 0.0;
        }
        let cfg = &self.kernel;
        let xs = side.x();
        let brk = x_breaks(xs, (2.0 * y).sqrt(), Some(self.tau1));
        quad::piecewise(&brk, GAUSS_N, |x1| self.tau1.deriv(x1) * series(Kind::N, xs, x1, y, cfg))
    }

    /// `∫_0^y τ'(s) N(side, y; from, s) ds`.
    fn layer_flux(&self, side: Side, y: f64, tr: &TraceFn, from: Side) -> f64 {
        if is_zero_trace(tr) {
            return 0.0;
        }
        let cfg = &self.kernel;
        let (xs, x1) = (side.x(), from.x());
        time_quad(y, Some(tr), &[], |s, dt| tr.deriv(s) * series(Kind::N, xs, x1, dt, cfg))
    }

    /// `∬ f G_x(side, y; ·)` over `[0, 1] × [0, y]`.
    pub fn source_flux(&self, side: Side, y: f64) -> f64 {
        if self.source.is_zero() {
            return 0.0;
        }
        let cfg = &self.kernel;
        let xs = side.x();
        if let Some(c) = self.source.constant_value() {
            // ∂x (1 − B0 − B1) = N(x; 0) − N(x; 1)
            return c * time_quad(y, None, &[], |_, dt| {
                series(Kind::N, xs, 0.0, dt, cfg) - series(Kind::N, xs, 1.0, dt, cfg)
            });
        }
        let src = self.source;
        time_quad(y, None, &[], |s, dt| {
            let brk = x_breaks(xs, (2.0 * dt).sqrt(), None);
            quad::piecewise(&brk, GAUSS_N, |x1| src.value(x1, s) * series(Kind::Gx, xs, x1, dt, cfg))
        })
    }

    /// `u_x` on a side of the square, from the kernel `N` after integrating
    /// the Green's function by parts.
    pub fn ux_boundary(&self, side: Side, y: f64) -> Result<f64> {
        if !(y > 0.0 && y <= 1.0 + 1e-12) {
            return Err(Error::InvalidTime { y, y1: 0.0 });
        }
        let y = y.min(1.0);
        let cfg = &self.kernel;
        let xs = side.x();
        let mut ux = self.initial_flux(side, y);
        let gap0 = self.tau1.eval(0.0) - self.tau2.eval(0.0);
        let gap1 = self.tau1.eval(1.0) - self.tau3.eval(0.0);
        if gap0 != 0.0 {
            ux += gap0 * series(Kind::N, xs, 0.0, y, cfg);
        }
        if gap1 != 0.0 {
            ux -= gap1 * series(Kind::N, xs, 1.0, y, cfg);
        }
        ux -= self.layer_flux(side, y, self.tau2, Side::Left);
        ux += self.layer_flux(side, y, self.tau3, Side::Right);
        ux -= self.source_flux(side, y);
        if ux.is_finite() {
            Ok(ux)
        } else {
            Err(Error::NonFinite(format!("evaluating the boundary flux at y = {y}")))
        }
    }
}

pub fn heat_u(
    p: Point,
    tau1: &TraceFn,
    tau2: &TraceFn,
    tau3: &TraceFn,
    source: &SourceTerm,
    cfg: &KernelConfig,
) -> Result<f64> {
    HeatData::new(tau1, tau2, tau3, source, *cfg).u(p)
}

pub fn heat_ux_boundary(
    side: Side,
    y: f64,
    tau1: &TraceFn,
    tau2: &TraceFn,
    tau3: &TraceFn,
    source: &SourceTerm,
    cfg: &KernelConfig,
) -> Result<f64> {
    HeatData::new(tau1, tau2, tau3, source, *cfg).ux_boundary(side, y)
}
