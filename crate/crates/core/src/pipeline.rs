//! End-to-end solve, residual verification and refinement studies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{affix, classify, to_char, CharMaps, Line, Location, Point, SubdomainId, TypeChangeCurve};
use crate::hyperbolic::{compute_a, dalembert_u, dalembert_xy_grad, frame_source};
use crate::parabolic::{HeatData, KernelConfig, Side};
use crate::source::SourceTerm;
use crate::trace::TraceFn;
use crate::traces::{build_e, integrate_deriv, recover_nu, solve_tau1, solve_volterra, Sigma, MIN_GRID};

pub const DEFAULT_GRID: usize = 256;
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Residuals at or below this are treated as exact; their orders are `None`.
pub const EOC_FLOOR: f64 = 1e-9;

/// Interface samples stay this far from the vertices, where the solution
/// has corner layers.
pub const INTERFACE_MARGIN: f64 = 0.1;
pub const INTERFACE_SAMPLES: usize = 17;
pub const NONLOCAL_SAMPLES: usize = 101;
pub const PDE_PROBES: usize = 11;

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub sigma: Sigma,
    /// Curves bounding Ω1, Ω2, Ω3, in this order.
    pub curves: [TypeChangeCurve; 3],
    pub source: SourceTerm,
    pub grid_m: usize,
    pub kernel: KernelConfig,
    pub quad_tol: f64,
}

impl ProblemSpec {
    pub fn new(sigma: Sigma, curves: [TypeChangeCurve; 3], source: SourceTerm) -> Self {
        ProblemSpec {
            sigma,
            curves,
            source,
            grid_m: DEFAULT_GRID,
            kernel: KernelConfig::default(),
            quad_tol: DEFAULT_QUAD_TOL,
        }
    }

    /// Bump curves `c·t(1 − t)` on all three lines.
    pub fn with_bumps(sigma: Sigma, c: f64, source: SourceTerm) -> Result<Self> {
        let curves = [
            TypeChangeCurve::bump(Line::AB, c)?,
            TypeChangeCurve::bump(Line::AD, c)?,
            TypeChangeCurve::bump(Line::BC, c)?,
        ];
        Ok(Self::new(sigma, curves, source))
    }

    pub fn with_grid(mut self, m: usize) -> Self {
        self.grid_m = m;
        self
    }

    pub fn curve(&self, line: Line) -> &TypeChangeCurve {
        &self.curves[line.index() as usize - 1]
    }

    pub fn validate(&self) -> Result<()> {
        self.sigma.validate()?;
        for (line, curve) in Line::ALL.iter().zip(&self.curves) {
            if curve.line() != *line {
                return Err(Error::InvalidCurve {
                    curve: line.index(),
                    reason: format!("expected the curve of {line}, got the curve of {}", curve.line()),
                });
            }
            curve.check_strictly_interior()?;
        }
        if self.grid_m < MIN_GRID {
            return Err(Error::InvalidParameter(format!(
                "grid M must be at least {MIN_GRID}, got {}",
                self.grid_m
            )));
        }
        if !(self.quad_tol > 0.0 && self.quad_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "quad tolerance must be positive, got {}",
                self.quad_tol
            )));
        }
        self.kernel.validate()
    }

    fn maps(&self) -> Result<[CharMaps; 3]> {
        Ok([
            CharMaps::build(&self.curves[0])?,
            CharMaps::build(&self.curves[1])?,
            CharMaps::build(&self.curves[2])?,
        ])
    }
}

/// Traces `τ` and normal derivatives `ν` on AB, AD, BC (arc parameter `x`
/// on AB, `y` on AD and BC).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    pub tau: [TraceFn; 3],
    pub nu: [TraceFn; 3],
}

impl TraceSet {
    pub fn tau(&self, line: Line) -> &TraceFn {
        &self.tau[line.index() as usize - 1]
    }

    pub fn nu(&self, line: Line) -> &TraceFn {
        &self.nu[line.index() as usize - 1]
    }

    pub fn with_tau(mut self, line: Line, tau: TraceFn) -> Self {
        self.tau[line.index() as usize - 1] = tau;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionMetadata {
    pub grid_m: usize,
    pub quad_tol: f64,
    pub kernel: KernelConfig,
    pub sigma: Sigma,
    pub conventions: Vec<String>,
    /// Largest violation of the discrete Volterra equations, when solved here.
    pub volterra_backsub_residual: Option<f64>,
}

fn conventions() -> Vec<String> {
    [
        "nu1 = u_y on AB, nu2 = -u_x on AD, nu3 = u_x on BC",
        "traces on AD and BC are parametrized by y",
        "local frames (p, q): AB (xi, eta), AD (xi, -eta), BC (1 - eta, xi - 1); u_pq = orientation * f1",
        "orientation = +1 on AB, -1 on AD and BC; source double integral enters as -orientation * f1",
        "nu integral enters as -orientation/2 * int nu",
        "heat representation in Duhamel form with boundary step responses",
        "Volterra: c2 a + int a N(0;0) - int b N(0;1) = E1, c3 b + int b N(1;1) - int a N(1;0) = E2",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

#[derive(Debug, Clone)]
pub struct Solution {
    spec: ProblemSpec,
    traces: TraceSet,
    maps: [CharMaps; 3],
    metadata: SolutionMetadata,
}

impl Solution {
    /// Wraps given traces without solving; used for controls and reloads.
    pub fn from_traces(spec: ProblemSpec, traces: TraceSet) -> Result<Self> {
        spec.validate()?;
        let maps = spec.maps()?;
        let metadata = SolutionMetadata {
            grid_m: traces.tau[0].intervals(),
            quad_tol: spec.quad_tol,
            kernel: spec.kernel,
            sigma: spec.sigma,
            conventions: conventions(),
            volterra_backsub_residual: None,
        };
        Ok(Solution {
            spec,
            traces,
            maps,
            metadata,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn traces(&self) -> &TraceSet {
        &self.traces
    }

    pub fn maps(&self, line: Line) -> &CharMaps {
        &self.maps[line.index() as usize - 1]
    }

    pub fn metadata(&self) -> &SolutionMetadata {
        &self.metadata
    }

    pub fn heat(&self) -> HeatData<'_> {
        HeatData::new(
            self.traces.tau(Line::AB),
            self.traces.tau(Line::AD),
            self.traces.tau(Line::BC),
            &self.spec.source,
            self.spec.kernel,
        )
    }

    /// The D'Alembert representation of `line`, anywhere in its closed
    /// characteristic triangle.
    pub fn hyperbolic_u(&self, line: Line, p: Point) -> Result<f64> {
        dalembert_u(
            line,
            self.traces.tau(line),
            self.traces.nu(line),
            &self.spec.source,
            to_char(p),
            self.spec.quad_tol,
        )
    }

    pub fn hyperbolic_grad(&self, line: Line, p: Point) -> Result<(f64, f64)> {
        dalembert_xy_grad(
            line,
            self.traces.tau(line),
            self.traces.nu(line),
            &self.spec.source,
            to_char(p),
            self.spec.quad_tol,
        )
    }

    pub fn evaluate(&self, p: Point) -> Result<f64> {
        match classify(p, &self.spec.curves) {
            Location::Subdomain(SubdomainId::Omega0) => self.heat().u(p),
            Location::Subdomain(id) => self.hyperbolic_u(id.line().expect("hyperbolic subdomain"), p),
            Location::OnInterface => {
                let t = 1e-14;
                if p.y.abs() <= t {
                    Ok(self.traces.tau(Line::AB).eval(p.x.clamp(0.0, 1.0)))
                } else if p.x.abs() <= t {
                    Ok(self.traces.tau(Line::AD).eval(p.y.clamp(0.0, 1.0)))
                } else {
                    Ok(self.traces.tau(Line::BC).eval(p.y.clamp(0.0, 1.0)))
                }
            }
            Location::Outside => Err(Error::OutOfRegion {
                x: p.x,
                y: p.y,
                region: "the mixed domain",
            }),
        }
    }

    /// `n × n` parametric grid in each subdomain: cell centres of the square,
    /// and in Ω1..Ω3 points `t` along the line at fractions `s` of the way to
    /// the curve.
    pub fn sample_points(&self, n: usize) -> Vec<(SubdomainId, Point)> {
        let c = |i: usize| (i as f64 + 0.5) / n as f64;
        let mut pts = Vec::with_capacity(4 * n * n);
        for i in 0..n {
            for j in 0..n {
                pts.push((SubdomainId::Omega0, Point::new(c(i), c(j))));
            }
        }
        for line in Line::ALL {
            let curve = self.spec.curve(line);
            for i in 0..n {
                let t = c(i);
                let d = curve.deviation(t);
                for j in 0..n {
                    let s = c(j);
                    pts.push((line.subdomain(), line.from_local(t - s * d, t + s * d)));
                }
            }
        }
        pts
    }

    /// Solution values on [`Solution::sample_points`], in order.
    pub fn sample_field(&self, n: usize) -> Result<Vec<(SubdomainId, Point, f64)>> {
        self.sample_points(n)
            .into_par_iter()
            .map(|(id, p)| {
                let u = match id.line() {
                    None => self.heat().u(p)?,
                    Some(line) => self.hyperbolic_u(line, p)?,
                };
                Ok((id, p, u))
            })
            .collect()
    }
}

fn nodes(m: usize) -> Vec<f64> {
    (0..=m).map(|k| k as f64 / m as f64).collect()
}

/// Solves in construction order: `τ1` on AB, the Volterra system for
/// `τ2'`, `τ3'`, then every `ν` from its relation.
pub fn solve(spec: &ProblemSpec) -> Result<Solution> {
    spec.validate()?;
    let maps = spec.maps()?;
    let (m, tol, sig, src) = (spec.grid_m, spec.quad_tol, spec.sigma, &spec.source);

    let a1 = |t: f64| compute_a(Line::AB, t, sig.s1, src, &maps[0], tol);
    let f_ab = |x: f64| src.value(x, 0.0);
    let tau1 = solve_tau1(&sig, &f_ab, &a1, m)?;

    let ts = nodes(m);
    let a_nodes: Vec<[f64; 3]> = ts
        .par_iter()
        .map(|&t| {
            Ok([
                compute_a(Line::AB, t, sig.s1, src, &maps[0], tol)?,
                compute_a(Line::AD, t, sig.s2, src, &maps[1], tol)?,
                compute_a(Line::BC, t, sig.s3, src, &maps[2], tol)?,
            ])
        })
        .collect::<Result<_>>()?;
    let column = |i: usize| -> Vec<f64> { a_nodes.iter().map(|a| a[i]).collect() };
    let (a1n, a2n, a3n) = (column(0), column(1), column(2));

    let zero = TraceFn::zeros(m)?;
    let heat = HeatData::new(&tau1, &zero, &zero, src, spec.kernel);
    let rhs: Vec<(f64, f64)> = ts
        .par_iter()
        .enumerate()
        .map(|(k, &y)| {
            Ok((
                build_e(y, Side::Left, &sig, &heat, a2n[k])?,
                build_e(y, Side::Right, &sig, &heat, a3n[k])?,
            ))
        })
        .collect::<Result<_>>()?;
    let (e1, e2): (Vec<f64>, Vec<f64>) = rhs.into_iter().unzip();

    let grid = solve_volterra(&sig, &e1, &e2, &spec.kernel)?;
    let d2 = TraceFn::from_values(grid.tau2_deriv.clone())?;
    let d3 = TraceFn::from_values(grid.tau3_deriv.clone())?;
    let tau2 = integrate_deriv(&d2, tau1.eval(0.0))?;
    let tau3 = integrate_deriv(&d3, tau1.eval(1.0))?;

    let d1 = TraceFn::from_values(tau1.deriv_values().to_vec())?;
    let nu1 = recover_nu(Line::AB, &d1, &a1n, sig.s1)?;
    let nu2 = recover_nu(Line::AD, &d2, &a2n, sig.s2)?;
    let nu3 = recover_nu(Line::BC, &d3, &a3n, sig.s3)?;

    let traces = TraceSet {
        tau: [tau1, tau2, tau3],
        nu: [nu1, nu2, nu3],
    };
    for tr in traces.tau.iter().chain(&traces.nu) {
        if !tr.is_finite() {
            return Err(Error::NonFinite("assembling the traces".into()));
        }
    }
    let mut sol = Solution::from_traces(spec.clone(), traces)?;
    sol.metadata.volterra_backsub_residual = Some(grid.backsub_residual);
    Ok(sol)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stat {
    pub max: f64,
    /// Root mean square over the probes.
    pub l2: f64,
}

impl Stat {
    fn from_samples(v: &[f64]) -> Stat {
        if v.is_empty() {
            return Stat::default();
        }
        let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let l2 = (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
        Stat { max, l2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerSubdomain<T> {
    pub omega0: T,
    pub omega1: T,
    pub omega2: T,
    pub omega3: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerLine<T> {
    pub ab: T,
    pub ad: T,
    pub bc: T,
}

impl<T> PerLine<T> {
    pub fn get(&self, line: Line) -> &T {
        match line {
            Line::AB => &self.ab,
            Line::AD => &self.ad,
            Line::BC => &self.bc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jump {
    pub u: f64,
    /// Jump of the normal derivative.
    pub grad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VertexResidual {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EocEntry {
    pub quantity: String,
    pub values: Vec<f64>,
    /// One order per refinement pair; `None` when the finer value is at the floor.
    pub orders: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub grid_m: usize,
    pub probe_m: usize,
    pub quad_tol: f64,
    pub kernel: KernelConfig,
    pub sigma: Sigma,
    pub volterra_backsub_residual: Option<f64>,
    pub conventions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub pde_residual: PerSubdomain<Stat>,
    pub nonlocal_residual: PerLine<f64>,
    pub vertex_residual: VertexResidual,
    pub interface_jump: PerLine<Jump>,
    #[serde(default)]
    pub eoc: Vec<EocEntry>,
    pub metadata: ReportMetadata,
}

impl ResidualReport {
    /// Every scalar residual with a dotted name, in a fixed order.
    pub fn metrics(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        let p = &self.pde_residual;
        for (name, s) in [("omega0", p.omega0), ("omega1", p.omega1), ("omega2", p.omega2), ("omega3", p.omega3)] {
            out.push((format!("pde.{name}.max"), s.max));
            out.push((format!("pde.{name}.l2"), s.l2));
        }
        for line in Line::ALL {
            out.push((format!("nonlocal.{line}"), *self.nonlocal_residual.get(line)));
        }
        out.push(("vertex.A".into(), self.vertex_residual.a));
        out.push(("vertex.B".into(), self.vertex_residual.b));
        for line in Line::ALL {
            let j = self.interface_jump.get(line);
            out.push((format!("jump.{line}.u"), j.u));
            out.push((format!("jump.{line}.grad"), j.grad));
        }
        out
    }

    pub fn residual_max(&self) -> f64 {
        self.metrics().iter().fold(0.0, |m, (_, v)| m.max(*v))
    }

    pub fn max_nonlocal(&self) -> f64 {
        let n = &self.nonlocal_residual;
        n.ab.max(n.ad).max(n.bc)
    }

    pub fn is_finite(&self) -> bool {
        self.metrics().iter().all(|(_, v)| v.is_finite() && *v >= 0.0)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Checks the defining conditions on probe grids with finite-difference
/// step `1/probe_m`.
pub fn verify(sol: &Solution, probe_m: usize) -> Result<ResidualReport> {
    if probe_m < 2 {
        return Err(Error::InvalidParameter(format!("probe_M must be at least 2, got {probe_m}")));
    }
    let h = 1.0 / probe_m as f64;
    let spec = sol.spec();
    let heat = sol.heat();

    // heat equation in the square
    let margin = (2.0 * h).max(0.05);
    let grid = linspace(margin, 1.0 - margin, PDE_PROBES);
    let probes: Vec<Point> = grid.iter().flat_map(|&x| grid.iter().map(move |&y| Point::new(x, y))).collect();
    let r0: Vec<f64> = probes
        .par_iter()
        .map(|&p| {
            let u = |dx: f64, dy: f64| heat.u(Point::new(p.x + dx, p.y + dy));
            let c = u(0.0, 0.0)?;
            let uxx = (u(h, 0.0)? - 2.0 * c + u(-h, 0.0)?) / (h * h);
            let uy = (u(0.0, h)? - u(0.0, -h)?) / (2.0 * h);
            Ok(uxx - uy - spec.source.eval(p)?)
        })
        .collect::<Result<_>>()?;

    // wave equation, mixed difference in each local frame
    let hyper = |line: Line| -> Result<Vec<f64>> {
        let curve = spec.curve(line);
        let mut pts = Vec::new();
        for t in linspace(INTERFACE_MARGIN, 1.0 - INTERFACE_MARGIN, PDE_PROBES) {
            let d = curve.deviation(t);
            for s in [0.25, 0.5, 0.75] {
                pts.push((t - s * d, t + s * d));
            }
        }
        pts.par_iter()
            .map(|&(lp, lq)| {
                let k = h.min(0.5 * (lq - lp)).min(lp).min(1.0 - lq);
                let u = |a: f64, b: f64| sol.hyperbolic_u(line, line.from_local(lp + a, lq + b));
                let upq = (u(k, k)? - u(k, -k)? - u(-k, k)? + u(-k, -k)?) / (4.0 * k * k);
                let g = frame_source(line, &spec.source, lp, lq);
                Ok(4.0 * (upq - g))
            })
            .collect()
    };
    let pde_residual = PerSubdomain {
        omega0: Stat::from_samples(&r0),
        omega1: Stat::from_samples(&hyper(Line::AB)?),
        omega2: Stat::from_samples(&hyper(Line::AD)?),
        omega3: Stat::from_samples(&hyper(Line::BC)?),
    };

    // nonlocal conditions at the affixes
    let nonlocal = |line: Line| -> Result<f64> {
        let sigma = spec.sigma.get(line);
        let maps = sol.maps(line);
        let r: Vec<f64> = (0..NONLOCAL_SAMPLES)
            .into_par_iter()
            .map(|i| {
                let t = i as f64 / (NONLOCAL_SAMPLES - 1) as f64;
                let (gx, gy) = sol.hyperbolic_grad(line, affix(t, false, maps)?)?;
                let (sx, sy) = sol.hyperbolic_grad(line, affix(t, true, maps)?)?;
                Ok(match line {
                    Line::AB | Line::AD => (gx - gy) - sigma * (sx + sy),
                    Line::BC => (gx + gy) - sigma * (sx - sy),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Stat::from_samples(&r).max)
    };
    let nonlocal_residual = PerLine {
        ab: nonlocal(Line::AB)?,
        ad: nonlocal(Line::AD)?,
        bc: nonlocal(Line::BC)?,
    };

    // vertices
    let tr = sol.traces();
    let vertex = |p: Point, lines: [Line; 2], trace_vals: [f64; 2]| -> Result<f64> {
        let mut r = sol.evaluate(p)?.abs().max(heat.u(p)?.abs());
        for (line, v) in lines.iter().zip(trace_vals) {
            r = r.max(sol.hyperbolic_u(*line, p)?.abs()).max(v.abs());
        }
        Ok(r)
    };
    let vertex_residual = VertexResidual {
        a: vertex(Point::A, [Line::AB, Line::AD], [tr.tau(Line::AB).eval(0.0), tr.tau(Line::AD).eval(0.0)])?,
        b: vertex(Point::B, [Line::AB, Line::BC], [tr.tau(Line::AB).eval(1.0), tr.tau(Line::BC).eval(0.0)])?,
    };

    // interfaces
    let ts = linspace(INTERFACE_MARGIN, 1.0 - INTERFACE_MARGIN, INTERFACE_SAMPLES);
    let jump = |line: Line| -> Result<Jump> {
        let rows: Vec<(f64, f64)> = ts
            .par_iter()
            .map(|&t| {
                let p = line.point_at(t);
                let du = heat.u(p)? - sol.hyperbolic_u(line, p)?;
                let (hx, hy) = sol.hyperbolic_grad(line, p)?;
                let dn = match line {
                    Line::AB => {
                        // step h² keeps the stencil clear of the corner layer at B
                        let d = h * h;
                        let u = |y: f64| heat.u(Point::new(t, y));
                        let uy = (-3.0 * u(0.0)? + 4.0 * u(d)? - u(2.0 * d)?) / (2.0 * d);
                        uy - hy
                    }
                    Line::AD => heat.ux_boundary(Side::Left, t)? - hx,
                    Line::BC => heat.ux_boundary(Side::Right, t)? - hx,
                };
                Ok((du, dn))
            })
            .collect::<Result<_>>()?;
        let (du, dn): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
        Ok(Jump {
            u: Stat::from_samples(&du).max,
            grad: Stat::from_samples(&dn).max,
        })
    };
    let interface_jump = PerLine {
        ab: jump(Line::AB)?,
        ad: jump(Line::AD)?,
        bc: jump(Line::BC)?,
    };

    let md = sol.metadata();
    let report = ResidualReport {
        pde_residual,
        nonlocal_residual,
        vertex_residual,
        interface_jump,
        eoc: Vec::new(),
        metadata: ReportMetadata {
            grid_m: md.grid_m,
            probe_m,
            quad_tol: md.quad_tol,
            kernel: md.kernel,
            sigma: md.sigma,
            volterra_backsub_residual: md.volterra_backsub_residual,
            conventions: md.conventions.clone(),
        },
    };
    if !report.is_finite() {
        return Err(Error::NonFinite("verifying the solution".into()));
    }
    Ok(report)
}

/// Order between two refinement levels; `None` when either residual is at
/// the floor.
pub fn eoc(coarse: f64, fine: f64, m_coarse: usize, m_fine: usize) -> Option<f64> {
    if coarse <= EOC_FLOOR || fine <= EOC_FLOOR {
        return None;
    }
    Some((coarse / fine).ln() / (m_fine as f64 / m_coarse as f64).ln())
}

/// A refinement pair passes when the finer residual is at the floor or the
/// order reaches `min_order`.
pub fn eoc_passes(coarse: f64, fine: f64, m_coarse: usize, m_fine: usize, min_order: f64) -> bool {
    fine <= EOC_FLOOR || eoc(coarse, fine, m_coarse, m_fine).is_some_and(|e| e >= min_order)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub m: usize,
    pub residual_max: f64,
    /// Order against the previous row.
    pub eoc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// One report per level; the last carries the per-quantity orders.
    pub reports: Vec<ResidualReport>,
}

impl ConvergenceTable {
    pub fn levels(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.m).collect()
    }

    pub fn final_eoc(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.eoc)
    }
}

/// Per-quantity orders across a sequence of reports.
pub fn quantity_eocs(levels: &[usize], reports: &[ResidualReport]) -> Vec<EocEntry> {
    let all: Vec<Vec<(String, f64)>> = reports.iter().map(|r| r.metrics()).collect();
    let Some(first) = all.first() else {
        return Vec::new();
    };
    (0..first.len())
        .map(|i| {
            let values: Vec<f64> = all.iter().map(|m| m[i].1).collect();
            let orders = (1..values.len())
                .map(|k| eoc(values[k - 1], values[k], levels[k - 1], levels[k]))
                .collect();
            EocEntry {
                quantity: first[i].0.clone(),
                values,
                orders,
            }
        })
        .collect()
}

/// Solves and verifies at each `M` in `levels` (probe step `1/M`).
pub fn convergence_study(spec: &ProblemSpec, levels: &[usize]) -> Result<ConvergenceTable> {
    if levels.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "a convergence study needs at least 3 levels, got {}",
            levels.len()
        )));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("levels must be strictly increasing".into()));
    }
    let mut reports = Vec::with_capacity(levels.len());
    for &m in levels {
        let sol = solve(&spec.clone().with_grid(m))?;
        reports.push(verify(&sol, m)?);
    }
    let rows = levels
        .iter()
        .zip(&reports)
        .enumerate()
        .map(|(k, (&m, r))| ConvergenceRow {
            m,
            residual_max: r.residual_max(),
            eoc: (k > 0).then(|| eoc(reports[k - 1].residual_max(), r.residual_max(), levels[k - 1], m)).flatten(),
        })
        .collect();
    let orders = quantity_eocs(levels, &reports);
    if let Some(last) = reports.last_mut() {
        last.eoc = orders;
    }
    Ok(ConvergenceTable { rows, reports })
}
