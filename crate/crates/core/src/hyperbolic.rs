//! D'Alembert representation of the wave equation `u_xx − u_yy = f` in the
//! hyperbolic pieces, and the right-hand sides `A` of the relations between
//! `τ'` and `ν` on each type-changing line.
//!
//! Everything is evaluated in the line's local frame (see [`crate::geometry`]),
//! where the equation reads `u_pq = g` with `g = orientation · f1`, the line
//! is `p = q` and the data are `u = τ`, `u_p − u_q = orientation · ν`:
//!
//! ```text
//! u(p, q) = [τ(p) + τ(q)]/2 − (orientation/2) ∫_p^q ν − ∫_p^q dp1 ∫_{p1}^q g(p1, q1) dq1
//! ```

pub use crate::trace::TraceFn;

use crate::error::{Error, Result};
use crate::geometry::{CharMaps, CharPoint, Line};
use crate::quad;
use crate::source::SourceTerm;

const FRAME_TOL: f64 = 1e-12;

/// `g(p, q)` of the line's frame.
#[inline]
pub fn frame_source(line: Line, source: &SourceTerm, lp: f64, lq: f64) -> f64 {
    let pt = line.from_local(lp, lq);
    line.orientation() * 0.25 * source.value(pt.x, pt.y)
}

fn frame_constant(line: Line, source: &SourceTerm) -> Option<f64> {
    source.constant_value().map(|c| line.orientation() * 0.25 * c)
}

fn local_coords(line: Line, cp: CharPoint) -> Result<(f64, f64)> {
    let (lp, lq) = line.char_to_local(cp);
    let ok = lp >= -FRAME_TOL && lq <= 1.0 + FRAME_TOL && lp <= lq + FRAME_TOL;
    if !ok || !lp.is_finite() || !lq.is_finite() {
        let pt = crate::geometry::from_char(cp);
        return Err(Error::OutOfRegion {
            x: pt.x,
            y: pt.y,
            region: match line {
                Line::AB => "the characteristic triangle of AB",
                Line::AD => "the characteristic triangle of AD",
                Line::BC => "the characteristic triangle of BC",
            },
        });
    }
    let lp = lp.clamp(0.0, 1.0);
    let lq = lq.clamp(lp, 1.0);
    Ok((lp, lq))
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// `∫_p^q dp1 ∫_{p1}^q g(p1, q1) dq1` over the triangle cut off by the point.
pub fn source_double_integral(line: Line, source: &SourceTerm, lp: f64, lq: f64, tol: f64) -> f64 {
    if lq <= lp {
        return 0.0;
    }
    if let Some(g) = frame_constant(line, source) {
        return g * 0.5 * (lq - lp) * (lq - lp);
    }
    quad::adaptive(
        |p1| quad::adaptive(|q1| frame_source(line, source, p1, q1), p1, lq, tol),
        lp,
        lq,
        tol,
    )
}

/// `∫_a^b g(p_fixed, q1) dq1`.
fn integral_along_q(line: Line, source: &SourceTerm, p_fixed: f64, a: f64, b: f64, tol: f64) -> f64 {
    if let Some(g) = frame_constant(line, source) {
        return g * (b - a);
    }
    quad::adaptive(|q1| frame_source(line, source, p_fixed, q1), a, b, tol)
}

/// `∫_a^b g(p1, q_fixed) dp1`.
fn integral_along_p(line: Line, source: &SourceTerm, q_fixed: f64, a: f64, b: f64, tol: f64) -> f64 {
    if let Some(g) = frame_constant(line, source) {
        return g * (b - a);
    }
    quad::adaptive(|p1| frame_source(line, source, p1, q_fixed), a, b, tol)
}

pub fn dalembert_u(
    line: Line,
    tau: &TraceFn,
    nu: &TraceFn,
    source: &SourceTerm,
    cp: CharPoint,
    tol: f64,
) -> Result<f64> {
    let (lp, lq) = local_coords(line, cp)?;
    let mut u = 0.5 * (tau.eval(lp) + tau.eval(lq)) - 0.5 * line.orientation() * nu.integral(lp, lq);
    if !source.is_zero() {
        u -= source_double_integral(line, source, lp, lq, tol);
    }
    finite(u, "evaluating the D'Alembert representation")
}

/// Frame derivatives `(u_p, u_q)`.
pub fn dalembert_local_grad(
    line: Line,
    tau: &TraceFn,
    nu: &TraceFn,
    source: &SourceTerm,
    cp: CharPoint,
    tol: f64,
) -> Result<(f64, f64)> {
    let (lp, lq) = local_coords(line, cp)?;
    let k = line.orientation();
    let mut up = 0.5 * tau.deriv(lp) + 0.5 * k * nu.eval(lp);
    let mut uq = 0.5 * tau.deriv(lq) - 0.5 * k * nu.eval(lq);
    if !source.is_zero() && lq > lp {
        up += integral_along_q(line, source, lp, lp, lq, tol);
        uq -= integral_along_p(line, source, lq, lp, lq, tol);
    }
    Ok((finite(up, "differentiating the D'Alembert representation")?, finite(uq, "differentiating the D'Alembert representation")?))
}

/// `(u_x, u_y)`.
pub fn dalembert_xy_grad(
    line: Line,
    tau: &TraceFn,
    nu: &TraceFn,
    source: &SourceTerm,
    cp: CharPoint,
    tol: f64,
) -> Result<(f64, f64)> {
    let (up, uq) = dalembert_local_grad(line, tau, nu, source, cp, tol)?;
    Ok(line.grad_from_local(up, uq))
}

/// `(u_xi, u_eta)`, so that `u_x + u_y = 2 u_xi` and `u_x − u_y = 2 u_eta`.
pub fn dalembert_grad(
    line: Line,
    tau: &TraceFn,
    nu: &TraceFn,
    source: &SourceTerm,
    cp: CharPoint,
    tol: f64,
) -> Result<(f64, f64)> {
    let (ux, uy) = dalembert_xy_grad(line, tau, nu, source, cp, tol)?;
    Ok((0.5 * (ux + uy), 0.5 * (ux - uy)))
}

/// `A(t) = 2 ε σ ∫_t^{υ(t)} g(t, q1) dq1 + 2 ∫_{ρ(t)}^t g(p1, t) dp1` with
/// `ε = line.orientation()`. With it the nonlocal condition becomes
/// `(1 − εσ) τ' − (1 + εσ) orientation·ν = A`.
pub fn compute_a(line: Line, t: f64, sigma: f64, source: &SourceTerm, maps: &CharMaps, tol: f64) -> Result<f64> {
    if source.is_zero() {
        return Ok(0.0);
    }
    let eps = line.orientation();
    let mut a = 0.0;
    if sigma != 0.0 {
        let up = maps.upsilon(t)?;
        a += 2.0 * eps * sigma * integral_along_q(line, source, t, t, up, tol);
    }
    let rho = maps.rho(t)?;
    a += 2.0 * integral_along_p(line, source, t, rho, t, tol);
    finite(a, "computing the relation right-hand side")
}
