//! Sampled one-dimensional functions on a uniform grid over `[0, 1]`.
//!
//! Values and first derivatives are stored per node and joined by cubic
//! Hermite pieces, so the interpolant is C¹ and integrates in closed form.
//! When derivatives are not known they are estimated with fourth-order
//! finite differences.

use crate::error::{Error, Result};

/// Smallest admissible number of grid intervals.
pub const MIN_INTERVALS: usize = 8;

#[derive(Debug, Clone)]
pub struct TraceFn {
    h: f64,
    values: Vec<f64>,
    derivs: Vec<f64>,
    exact_derivs: bool,
    /// cumulative integral from 0 to each node
    cumulative: Vec<f64>,
}

/// Equal when the node data agree, whatever the origin of the derivatives.
impl PartialEq for TraceFn {
    fn eq(&self, other: &Self) -> bool {
        self.h == other.h && self.values == other.values && self.derivs == other.derivs
    }
}

impl TraceFn {
    /// Builds from node values only; derivatives are estimated.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let m = check_len(values.len())?;
        let h = 1.0 / m as f64;
        let derivs = fd_derivatives(&values, h);
        Ok(Self::assemble(h, values, derivs, false))
    }

    pub fn from_values_and_derivs(values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        let m = check_len(values.len())?;
        if derivs.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "trace has {} values but {} derivatives",
                values.len(),
                derivs.len()
            )));
        }
        Ok(Self::assemble(1.0 / m as f64, values, derivs, true))
    }

    /// Samples `f` (and `df`, when given) on `m` uniform intervals.
    pub fn sample(m: usize, f: impl Fn(f64) -> f64, df: Option<&dyn Fn(f64) -> f64>) -> Result<Self> {
        check_len(m + 1)?;
        let nodes: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
        let values = nodes.iter().map(|&t| f(t)).collect();
        match df {
            Some(df) => Self::from_values_and_derivs(values, nodes.iter().map(|&t| df(t)).collect()),
            None => Self::from_values(values),
        }
    }

    pub fn zeros(m: usize) -> Result<Self> {
        Self::from_values_and_derivs(vec![0.0; m + 1], vec![0.0; m + 1])
    }

    fn assemble(h: f64, values: Vec<f64>, derivs: Vec<f64>, exact_derivs: bool) -> Self {
        let mut cumulative = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for k in 0..values.len() - 1 {
            acc += 0.5 * h * (values[k] + values[k + 1]) + h * h / 12.0 * (derivs[k] - derivs[k + 1]);
            cumulative.push(acc);
        }
        TraceFn {
            h,
            values,
            derivs,
            exact_derivs,
            cumulative,
        }
    }

    /// Number of grid intervals.
    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn node(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| self.node(k)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn deriv_values(&self) -> &[f64] {
        &self.derivs
    }

    pub fn has_exact_derivs(&self) -> bool {
        self.exact_derivs
    }

    /// Cell index and local coordinate in `[0, 1]`. Arguments slightly outside
    /// `[0, 1]` extend the end cell polynomials.
    #[inline]
    fn locate(&self, t: f64) -> (usize, f64) {
        let m = self.intervals();
        let x = t / self.h;
        let k = (x.floor().max(0.0) as usize).min(m - 1);
        (k, x - k as f64)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (k, s) = self.locate(t);
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.derivs[k] * self.h, self.derivs[k + 1] * self.h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * v0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * v1 + (s3 - s2) * d1
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let (k, s) = self.locate(t);
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.derivs[k], self.derivs[k + 1]);
        let s2 = s * s;
        (6.0 * s2 - 6.0 * s) * (v0 - v1) / self.h + (3.0 * s2 - 4.0 * s + 1.0) * d0 + (3.0 * s2 - 2.0 * s) * d1
    }

    pub fn second_deriv(&self, t: f64) -> f64 {
        let (k, s) = self.locate(t);
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.derivs[k], self.derivs[k + 1]);
        ((12.0 * s - 6.0) * (v0 - v1) / self.h + (6.0 * s - 4.0) * d0 + (6.0 * s - 2.0) * d1) / self.h
    }

    /// Exact integral of the interpolant from 0 to `t`.
    pub fn antiderivative(&self, t: f64) -> f64 {
        let (k, s) = self.locate(t);
        let h = self.h;
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.derivs[k] * h, self.derivs[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let part = v0 * (0.5 * s4 - s3 + s)
            + d0 * (0.25 * s4 - 2.0 / 3.0 * s3 + 0.5 * s2)
            + v1 * (-0.5 * s4 + s3)
            + d1 * (0.25 * s4 - s3 / 3.0);
        self.cumulative[k] + h * part
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.antiderivative(b) - self.antiderivative(a)
    }

    /// Node-wise scaling of values and derivatives.
    pub fn scaled(&self, factor: f64) -> Self {
        let values = self.values.iter().map(|v| v * factor).collect();
        let derivs = self.derivs.iter().map(|d| d * factor).collect();
        Self::assemble(self.h, values, derivs, self.exact_derivs)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().chain(&self.derivs).all(|v| v.is_finite())
    }
}

fn check_len(len: usize) -> Result<usize> {
    if len < MIN_INTERVALS + 1 {
        return Err(Error::InvalidParameter(format!(
            "trace grid needs at least {} intervals, got {}",
            MIN_INTERVALS,
            len.saturating_sub(1)
        )));
    }
    Ok(len - 1)
}

/// Fourth-order finite-difference derivative estimates on a uniform grid.
fn fd_derivatives(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n];
    for k in 0..n {
        d[k] = if k >= 2 && k + 2 < n {
            (v[k - 2] - 8.0 * v[k - 1] + 8.0 * v[k + 1] - v[k + 2]) / (12.0 * h)
        } else if k < 2 {
            let o = k;
            let w = one_sided(o);
            (0..5).map(|j| w[j] * v[j]).sum::<f64>() / h
        } else {
            let o = n - 1 - k;
            let w = one_sided(o);
            -(0..5).map(|j| w[j] * v[n - 1 - j]).sum::<f64>() / h
        };
    }
    d
}

/// Five-point weights for the derivative at node `o` of `0..5`.
fn one_sided(o: usize) -> [f64; 5] {
    match o {
        0 => [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25],
        _ => [-0.25, -5.0 / 6.0, 1.5, -0.5, 1.0 / 12.0],
    }
}
