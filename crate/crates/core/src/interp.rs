//! Interpolants for user-tabulated data: shape-preserving cubics for curve
//! tables and bilinear patches for source grids.

use crate::error::{Error, Result};

/// Piecewise cubic Hermite interpolant with Fritsch–Butland slopes (PCHIP).
/// Monotone data stay monotone and local extrema are not overshot.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidParameter(
                "monotone cubic needs at least two (x, y) pairs".into(),
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) || xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "table abscissae must be finite and strictly increasing".into(),
            ));
        }
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
        let mut ds = vec![0.0; n];
        if n == 2 {
            ds[0] = del[0];
            ds[1] = del[0];
        } else {
            for k in 1..n - 1 {
                if del[k - 1] * del[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    ds[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
                }
            }
            ds[0] = end_slope(h[0], h[1], del[0], del[1]);
            ds[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        }
        Ok(MonotoneCubic { xs, ys, ds })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    fn cell(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.xs.len() - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.cell(x);
        let h = self.xs[k + 1] - self.xs[k];
        let s = (x - self.xs[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.ys[k]
            + (s3 - 2.0 * s2 + s) * h * self.ds[k]
            + (-2.0 * s3 + 3.0 * s2) * self.ys[k + 1]
            + (s3 - s2) * h * self.ds[k + 1]
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let k = self.cell(x);
        let h = self.xs[k + 1] - self.xs[k];
        let s = (x - self.xs[k]) / h;
        let s2 = s * s;
        (6.0 * s2 - 6.0 * s) * (self.ys[k] - self.ys[k + 1]) / h
            + (3.0 * s2 - 4.0 * s + 1.0) * self.ds[k]
            + (3.0 * s2 - 2.0 * s) * self.ds[k + 1]
    }
}

// Three-point end formula, limited so the end slope keeps the data's shape.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

/// Bilinear interpolation on a rectilinear grid, values row-major in `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    values: Vec<f64>,
}

impl BilinearTable {
    /// Builds from scattered `(x, y, f)` rows that must cover a full grid.
    pub fn from_rows(rows: &[(f64, f64, f64)]) -> Result<Self> {
        let mut xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        if xs.len() < 2 || ys.len() < 2 || xs.len() * ys.len() != rows.len() {
            return Err(Error::InvalidParameter(format!(
                "source table must be a full rectilinear grid ({} rows for {}x{} axes)",
                rows.len(),
                xs.len(),
                ys.len()
            )));
        }
        let mut values = vec![f64::NAN; xs.len() * ys.len()];
        for &(x, y, f) in rows {
            let i = xs.binary_search_by(|p| p.total_cmp(&x)).unwrap();
            let j = ys.binary_search_by(|p| p.total_cmp(&y)).unwrap();
            values[j * xs.len() + i] = f;
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "source table has duplicate or non-finite entries".into(),
            ));
        }
        Ok(BilinearTable { xs, ys, values })
    }

    /// `None` outside the tabulated rectangle.
    pub fn eval(&self, x: f64, y: f64) -> Option<f64> {
        let (i, sx) = bracket(&self.xs, x)?;
        let (j, sy) = bracket(&self.ys, y)?;
        let nx = self.xs.len();
        let v = |i: usize, j: usize| self.values[j * nx + i];
        Some(
            (1.0 - sx) * (1.0 - sy) * v(i, j)
                + sx * (1.0 - sy) * v(i + 1, j)
                + (1.0 - sx) * sy * v(i, j + 1)
                + sx * sy * v(i + 1, j + 1),
        )
    }
}

fn bracket(axis: &[f64], x: f64) -> Option<(usize, f64)> {
    let (lo, hi) = (axis[0], *axis.last().unwrap());
    let slack = 1e-12 * (hi - lo);
    if !(x >= lo - slack && x <= hi + slack) {
        return None;
    }
    let x = x.clamp(lo, hi);
    let i = match axis.binary_search_by(|p| p.total_cmp(&x)) {
        Ok(i) => i.min(axis.len() - 2),
        Err(i) => (i - 1).min(axis.len() - 2),
    };
    Some((i, (x - axis[i]) / (axis[i + 1] - axis[i])))
}
