//! The right-hand side `f(x, y)` and its characteristic form `f1`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{from_char, CharPoint, Point};
use crate::interp::BilinearTable;

type SourceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum SourceKind {
    Expr(Expr),
    Table(BilinearTable),
    Fn(SourceFn),
}

#[derive(Clone)]
pub struct SourceTerm {
    kind: SourceKind,
    constant: Option<f64>,
    smoothness_claim: bool,
}

impl fmt::Debug for SourceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            SourceKind::Expr(e) => format!("Expr({e})"),
            SourceKind::Table(_) => "Table".to_string(),
            SourceKind::Fn(_) => "Fn".to_string(),
        };
        f.debug_struct("SourceTerm")
            .field("kind", &kind)
            .field("smoothness_claim", &self.smoothness_claim)
            .finish()
    }
}

impl SourceTerm {
    pub fn from_expr(expr: Expr) -> Self {
        let constant = expr.constant_value();
        SourceTerm {
            kind: SourceKind::Expr(expr),
            constant,
            smoothness_claim: true,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::from_expr(Expr::parse(text)?))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::from_expr(Expr::Num(c))
    }

    /// Arbitrary closure; treated as non-constant even if it is.
    pub fn from_fn(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        SourceTerm {
            kind: SourceKind::Fn(Arc::new(f)),
            constant: None,
            smoothness_claim: true,
        }
    }

    pub fn from_table(table: BilinearTable) -> Self {
        SourceTerm {
            kind: SourceKind::Table(table),
            constant: None,
            smoothness_claim: false,
        }
    }

    /// Reads a CSV with header `x,y,f` covering a full rectilinear grid.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let headers = reader
            .headers()
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?
            .clone();
        let names: Vec<&str> = headers.iter().map(str::trim).collect();
        if names != ["x", "y", "f"] {
            return Err(Error::InvalidParameter(format!(
                "{}: expected header 'x,y,f', found '{}'",
                path.display(),
                names.join(",")
            )));
        }
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let field = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "{}: row {} column {} is not a finite number",
                            path.display(),
                            line + 2,
                            i + 1
                        ))
                    })
            };
            rows.push((field(0)?, field(1)?, field(2)?));
        }
        Ok(Self::from_table(BilinearTable::from_rows(&rows)?))
    }

    pub fn with_smoothness_claim(mut self, claim: bool) -> Self {
        self.smoothness_claim = claim;
        self
    }

    /// Whether the caller vouches for `f ∈ C²`; recorded, never checked.
    pub fn smoothness_claim(&self) -> bool {
        self.smoothness_claim
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.constant
    }

    pub fn is_zero(&self) -> bool {
        self.constant == Some(0.0)
    }

    pub fn eval(&self, p: Point) -> Result<f64> {
        let v = match &self.kind {
            SourceKind::Expr(e) => return e.eval(p.x, p.y),
            SourceKind::Table(t) => t.eval(p.x, p.y).ok_or_else(|| Error::Domain {
                x: p.x,
                y: p.y,
                reason: "outside the tabulated grid".into(),
            })?,
            SourceKind::Fn(f) => f(p.x, p.y),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain {
                x: p.x,
                y: p.y,
                reason: "non-finite value".into(),
            })
        }
    }

    /// Infallible evaluation for quadrature loops: NaN where `eval` fails,
    /// so failures surface as non-finite results.
    #[inline]
    pub fn value(&self, x: f64, y: f64) -> f64 {
        if let Some(c) = self.constant {
            return c;
        }
        self.eval(Point::new(x, y)).unwrap_or(f64::NAN)
    }

    /// `f1(xi, eta) = f((xi + eta)/2, (xi − eta)/2) / 4`.
    pub fn f1_eval(&self, cp: CharPoint) -> Result<f64> {
        let p = from_char(cp);
        if !in_domain_hull(p) {
            return Err(Error::Domain {
                x: p.x,
                y: p.y,
                reason: "outside the closure of the mixed domain".into(),
            });
        }
        Ok(0.25 * self.eval(p)?)
    }
}

const HULL_TOL: f64 = 1e-12;

/// Unit square plus the three characteristic triangles on AB, AD, BC: the
/// largest region any admissible set of curves can enclose.
pub fn in_domain_hull(p: Point) -> bool {
    let Point { x, y } = p;
    let t = HULL_TOL;
    let square = (-t..=1.0 + t).contains(&x) && (-t..=1.0 + t).contains(&y);
    let below = y <= t && y >= -x - t && y >= x - 1.0 - t;
    let left = x <= t && x >= -y - t && x >= y - 1.0 - t;
    let right = x >= 1.0 - t && x <= 1.0 + y + t && x <= 2.0 - y + t;
    p.is_finite() && (square || below || left || right)
}
