//! The mixed domain: the unit square Ω0, three hyperbolic pieces Ω1 (below
//! AB), Ω2 (left of AD), Ω3 (right of BC), the curves bounding them, and
//! the characteristic coordinates ξ = x + y, η = x − y.
//!
//! Each hyperbolic piece is handled in a local characteristic frame `(p, q)`
//! in which its type-changing line is the diagonal `p = q = t` (t the arc
//! parameter along the line) and the piece lies in `p <= q`:
//!
//! | line | frame                    | line parameter |
//! |------|--------------------------|----------------|
//! | AB   | `(ξ, η)`                 | `x`            |
//! | AD   | `(ξ, −η)`                | `y`            |
//! | BC   | `(1 − η, ξ − 1)`         | `y`            |
//!
//! In every frame the bounding curve is `(t − δ(t), t + δ(t))`, where `δ` is
//! the curve's deviation from its line (`γ1`, `γ2`, and `γ3 − 1`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;

/// Number of uniformly spaced samples used for curve invariant checks.
pub const CHECK_SAMPLES: usize = 101;

const ROOT_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const A: Point = Point { x: 0.0, y: 0.0 };
    pub const B: Point = Point { x: 1.0, y: 0.0 };
    pub const C: Point = Point { x: 1.0, y: 1.0 };
    pub const D: Point = Point { x: 0.0, y: 1.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Characteristic coordinates `xi = x + y`, `eta = x − y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharPoint {
    pub xi: f64,
    pub eta: f64,
}

pub fn to_char(p: Point) -> CharPoint {
    CharPoint {
        xi: p.x + p.y,
        eta: p.x - p.y,
    }
}

pub fn from_char(c: CharPoint) -> Point {
    Point {
        x: 0.5 * (c.xi + c.eta),
        y: 0.5 * (c.xi - c.eta),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubdomainId {
    Omega0,
    Omega1,
    Omega2,
    Omega3,
}

impl SubdomainId {
    pub const ALL: [SubdomainId; 4] = [Self::Omega0, Self::Omega1, Self::Omega2, Self::Omega3];

    /// The hyperbolic piece's type-changing line, `None` for Ω0.
    pub fn line(self) -> Option<Line> {
        match self {
            SubdomainId::Omega0 => None,
            SubdomainId::Omega1 => Some(Line::AB),
            SubdomainId::Omega2 => Some(Line::AD),
            SubdomainId::Omega3 => Some(Line::BC),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SubdomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "omega{}", self.index())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Subdomain(SubdomainId),
    OnInterface,
    Outside,
}

/// A type-changing line together with its hyperbolic neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Line {
    AB,
    AD,
    BC,
}

impl Line {
    pub const ALL: [Line; 3] = [Line::AB, Line::AD, Line::BC];

    pub fn from_index(i: u8) -> Option<Line> {
        match i {
            1 => Some(Line::AB),
            2 => Some(Line::AD),
            3 => Some(Line::BC),
            _ => None,
        }
    }

    /// 1, 2, 3 for AB, AD, BC.
    pub fn index(self) -> u8 {
        self as u8 + 1
    }

    pub fn subdomain(self) -> SubdomainId {
        match self {
            Line::AB => SubdomainId::Omega1,
            Line::AD => SubdomainId::Omega2,
            Line::BC => SubdomainId::Omega3,
        }
    }

    /// +1 for AB, −1 for AD and BC.
    ///
    /// The same sign shows up three times: `u_pq = orientation · f1`, the
    /// frame's cross-line derivative `u_p − u_q = orientation · ν` with the
    /// line's normal derivative ν (u_y on AB, −u_x on AD, u_x on BC), and the
    /// nonlocal condition `u_q(θ) = orientation · σ · u_p(θ*)`.
    pub fn orientation(self) -> f64 {
        match self {
            Line::AB => 1.0,
            Line::AD | Line::BC => -1.0,
        }
    }

    pub fn to_local(self, p: Point) -> (f64, f64) {
        match self {
            Line::AB => (p.x + p.y, p.x - p.y),
            Line::AD => (p.x + p.y, p.y - p.x),
            Line::BC => (1.0 - p.x + p.y, p.x + p.y - 1.0),
        }
    }

    pub fn from_local(self, lp: f64, lq: f64) -> Point {
        match self {
            Line::AB => Point::new(0.5 * (lp + lq), 0.5 * (lp - lq)),
            Line::AD => Point::new(0.5 * (lp - lq), 0.5 * (lp + lq)),
            Line::BC => Point::new(0.5 * (lq - lp) + 1.0, 0.5 * (lp + lq)),
        }
    }

    pub fn char_to_local(self, c: CharPoint) -> (f64, f64) {
        match self {
            Line::AB => (c.xi, c.eta),
            Line::AD => (c.xi, -c.eta),
            Line::BC => (1.0 - c.eta, c.xi - 1.0),
        }
    }

    pub fn local_to_char(self, lp: f64, lq: f64) -> CharPoint {
        match self {
            Line::AB => CharPoint { xi: lp, eta: lq },
            Line::AD => CharPoint { xi: lp, eta: -lq },
            Line::BC => CharPoint {
                xi: lq + 1.0,
                eta: 1.0 - lp,
            },
        }
    }

    /// `(u_x, u_y)` from frame derivatives `(u_p, u_q)`.
    pub fn grad_from_local(self, up: f64, uq: f64) -> (f64, f64) {
        match self {
            Line::AB => (up + uq, up - uq),
            Line::AD => (up - uq, up + uq),
            Line::BC => (uq - up, up + uq),
        }
    }

    /// Point on the line at arc parameter `t`.
    pub fn point_at(self, t: f64) -> Point {
        match self {
            Line::AB => Point::new(t, 0.0),
            Line::AD => Point::new(0.0, t),
            Line::BC => Point::new(1.0, t),
        }
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Line::AB => "AB",
            Line::AD => "AD",
            Line::BC => "BC",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveShape {
    /// `δ(t) = c·t·(1 − t)`
    Bump { c: f64 },
    /// Tabulated `(t, γ(t))` rows, joined by a monotone cubic.
    Table(MonotoneCubic),
}

/// One of the three curves γ1, γ2, γ3 closing the hyperbolic pieces.
///
/// `gamma` follows the usual conventions: Ω1 is bounded by `y = −γ1(x)`,
/// Ω2 by `x = −γ2(y)`, and Ω3 by `x = γ3(y)` with `γ3(0) = γ3(1) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeChangeCurve {
    line: Line,
    shape: CurveShape,
}

impl TypeChangeCurve {
    pub fn new(line: Line, shape: CurveShape) -> Result<Self> {
        let curve = TypeChangeCurve { line, shape };
        curve.check_shape()?;
        Ok(curve)
    }

    pub fn bump(line: Line, c: f64) -> Result<Self> {
        Self::new(line, CurveShape::Bump { c })
    }

    /// From `(t, γ(t))` rows; the rows must span `t ∈ [0, 1]`.
    pub fn table(line: Line, rows: &[(f64, f64)]) -> Result<Self> {
        let (ts, gs): (Vec<f64>, Vec<f64>) = rows.iter().copied().unzip();
        let cubic = MonotoneCubic::new(ts, gs).map_err(|e| Error::InvalidCurve {
            curve: line.index(),
            reason: e.to_string(),
        })?;
        Self::new(line, CurveShape::Table(cubic))
    }

    pub fn line(&self) -> Line {
        self.line
    }

    pub fn shape(&self) -> &CurveShape {
        &self.shape
    }

    fn offset(&self) -> f64 {
        if self.line == Line::BC {
            1.0
        } else {
            0.0
        }
    }

    pub fn gamma(&self, t: f64) -> f64 {
        self.deviation(t) + self.offset()
    }

    pub fn gamma_prime(&self, t: f64) -> f64 {
        self.deviation_prime(t)
    }

    /// Distance of the curve from its line, measured along the line normal.
    pub fn deviation(&self, t: f64) -> f64 {
        match &self.shape {
            CurveShape::Bump { c } => c * t * (1.0 - t),
            CurveShape::Table(cubic) => cubic.eval(t) - self.offset(),
        }
    }

    pub fn deviation_prime(&self, t: f64) -> f64 {
        match &self.shape {
            CurveShape::Bump { c } => c * (1.0 - 2.0 * t),
            CurveShape::Table(cubic) => cubic.deriv(t),
        }
    }

    /// Physical point of the curve at line parameter `t`.
    pub fn point(&self, t: f64) -> Point {
        let d = self.deviation(t);
        self.line.from_local(t - d, t + d)
    }

    /// `(t, γ(t))` on `n + 1` uniform parameters.
    pub fn samples(&self, n: usize) -> Vec<(f64, f64)> {
        (0..=n)
            .map(|k| {
                let t = k as f64 / n as f64;
                (t, self.gamma(t))
            })
            .collect()
    }

    fn check_shape(&self) -> Result<()> {
        let curve = self.line.index();
        let invalid = |reason: String| Error::InvalidCurve { curve, reason };
        match &self.shape {
            CurveShape::Bump { c } => {
                if !c.is_finite() {
                    return Err(invalid(format!("bump amplitude {c} is not finite")));
                }
            }
            CurveShape::Table(cubic) => {
                let (lo, hi) = cubic.domain();
                if lo != 0.0 || hi != 1.0 {
                    return Err(invalid(format!("table must span t in [0, 1], got [{lo}, {hi}]")));
                }
            }
        }
        for t in [0.0, 1.0] {
            let d = self.deviation(t);
            if d.abs() > 1e-12 {
                return Err(invalid(format!(
                    "gamma({t}) = {} but must equal {}",
                    self.gamma(t),
                    self.offset()
                )));
            }
        }
        check_monotone(curve, |t| self.deviation(t), |t| self.deviation_prime(t))?;

        // bounded second differences as a C² proxy
        let n = CHECK_SAMPLES - 1;
        let h = 1.0 / n as f64;
        for k in 1..n {
            let t = k as f64 * h;
            let dd = (self.deviation(t - h) - 2.0 * self.deviation(t) + self.deviation(t + h)) / (h * h);
            if !dd.is_finite() || dd.abs() > 1e3 {
                return Err(invalid(format!("curve is not smooth near t = {t}")));
            }
        }
        Ok(())
    }

    /// The curve must stay strictly between its line and the far sides of
    /// the characteristic triangle, touching only at the two endpoints.
    pub fn check_strictly_interior(&self) -> Result<()> {
        let n = CHECK_SAMPLES - 1;
        for k in 1..n {
            let t = k as f64 / n as f64;
            let d = self.deviation(t);
            if !(d > 0.0 && t - d > 0.0 && t + d < 1.0) {
                return Err(Error::InvalidCurve {
                    curve: self.line.index(),
                    reason: format!("curve leaves the open characteristic triangle near t = {t}"),
                });
            }
        }
        Ok(())
    }
}

fn check_monotone(curve: u8, dev: impl Fn(f64) -> f64, dev_prime: impl Fn(f64) -> f64) -> Result<()> {
    let n = CHECK_SAMPLES - 1;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=n {
        let t = k as f64 / n as f64;
        let d = dev(t);
        let dp = dev_prime(t);
        let (lp, lq) = (t - d, t + d);
        let slope_ok = 1.0 - dp > 0.0 && 1.0 + dp > 0.0;
        let step_ok = prev.is_none_or(|(pp, pq)| lp > pp && lq > pq);
        if !slope_ok || !step_ok || !lp.is_finite() || !lq.is_finite() {
            return Err(Error::NonMonotone { curve, t });
        }
        prev = Some((lp, lq));
    }
    Ok(())
}

/// The curve as a graph in its line's characteristic frame: `upsilon` gives
/// `q` as a function of `p` and `rho` gives `p` as a function of `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharMaps {
    curve: TypeChangeCurve,
}

impl CharMaps {
    pub fn build(curve: &TypeChangeCurve) -> Result<Self> {
        check_monotone(
            curve.line.index(),
            |t| curve.deviation(t),
            |t| curve.deviation_prime(t),
        )?;
        Ok(CharMaps { curve: curve.clone() })
    }

    pub fn curve(&self) -> &TypeChangeCurve {
        &self.curve
    }

    pub fn line(&self) -> Line {
        self.curve.line
    }

    /// Line parameter `t` at which the curve's `p` coordinate equals `s`.
    pub fn param_of_p(&self, s: f64) -> Result<f64> {
        self.invert(s, -1.0)
    }

    /// Line parameter `t` at which the curve's `q` coordinate equals `s`.
    pub fn param_of_q(&self, s: f64) -> Result<f64> {
        self.invert(s, 1.0)
    }

    pub fn upsilon(&self, s: f64) -> Result<f64> {
        let t = self.param_of_p(s)?;
        Ok(t + self.curve.deviation(t))
    }

    pub fn rho(&self, s: f64) -> Result<f64> {
        let t = self.param_of_q(s)?;
        Ok(t - self.curve.deviation(t))
    }

    fn invert(&self, s: f64, sign: f64) -> Result<f64> {
        let c = &self.curve;
        let g = |t: f64| t + sign * c.deviation(t) - s;
        let dg = |t: f64| 1.0 + sign * c.deviation_prime(t);
        monotone_root(g, dg, 0.0, 1.0).ok_or(Error::NoIntersection {
            curve: c.line.index(),
            t: s,
        })
    }
}

/// Root of an increasing function on `[lo, hi]`: Newton steps kept inside
/// a shrinking bracket, bisection when Newton would leave it.
pub fn monotone_root(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
) -> Option<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    let slack = 1e-13;
    if !(flo <= slack && fhi >= -slack) {
        return None;
    }
    if flo >= 0.0 {
        return Some(lo);
    }
    if fhi <= 0.0 {
        return Some(hi);
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let v = f(t);
        if v == 0.0 {
            return Some(t);
        }
        if v < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= ROOT_TOL {
            return Some(0.5 * (lo + hi));
        }
        let d = df(t);
        let newton = t - v / d;
        let next = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - t).abs() <= 0.25 * ROOT_TOL {
            return Some(next);
        }
        t = next;
    }
    Some(t)
}

/// Affix on curve `maps.line()` for line parameter `t`: intersection with the
/// characteristic `q = t` (unstarred) or `p = t` (starred).
///
/// Unstarred/starred characteristics: AB `x−y=t` / `x+y=t`; AD `y−x=t` /
/// `x+y=t`; BC `x+y=1+t` / `x−y=1−t`.
pub fn affix(t: f64, starred: bool, maps: &CharMaps) -> Result<Point> {
    let line = maps.line();
    if !(-1e-12..=1.0 + 1e-12).contains(&t) {
        return Err(Error::NoIntersection {
            curve: line.index(),
            t,
        });
    }
    let t = t.clamp(0.0, 1.0);
    let (lp, lq) = if starred {
        (t, maps.upsilon(t)?)
    } else {
        (maps.rho(t)?, t)
    };
    Ok(line.from_local(lp, lq))
}

const EDGE_TOL: f64 = 1e-14;

pub fn classify(p: Point, curves: &[TypeChangeCurve; 3]) -> Location {
    let Point { x, y } = p;
    if !p.is_finite() {
        return Location::Outside;
    }
    let on = |v: f64, c: f64| (v - c).abs() <= EDGE_TOL;
    let within = |v: f64| (-EDGE_TOL..=1.0 + EDGE_TOL).contains(&v);
    if (on(y, 0.0) && within(x)) || ((on(x, 0.0) || on(x, 1.0)) && within(y)) {
        return Location::OnInterface;
    }
    let open = |v: f64| v > 0.0 && v < 1.0;
    if open(x) && open(y) {
        return Location::Subdomain(SubdomainId::Omega0);
    }
    if open(x) && y < 0.0 && y > -curves[0].gamma(x) {
        return Location::Subdomain(SubdomainId::Omega1);
    }
    if open(y) && x < 0.0 && x > -curves[1].gamma(y) {
        return Location::Subdomain(SubdomainId::Omega2);
    }
    if open(y) && x > 1.0 && x < curves[2].gamma(y) {
        return Location::Subdomain(SubdomainId::Omega3);
    }
    Location::Outside
}
