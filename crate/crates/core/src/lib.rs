//! Solver for a nonlocal boundary problem of the mixed equation
//!
//! ```text
//! u_xx − u_y  = f   in the unit square Ω0 (heat),
//! u_xx − u_yy = f   in Ω1, Ω2, Ω3 below AB, left of AD, right of BC (wave),
//! ```
//!
//! with nonlocal conditions linking derivatives at pairs of points on the
//! curves that close Ω1..Ω3, and `u(A) = u(B) = 0`.
//!
//! [`pipeline::solve`] builds the traces on the three type-changing lines
//! and returns a [`Solution`] that evaluates `u` anywhere in the domain;
//! [`pipeline::verify`] measures how well it satisfies the problem.

pub mod error;
pub mod expr;
pub mod geometry;
pub mod hyperbolic;
pub mod interp;
pub mod parabolic;
pub mod pipeline;
pub mod quad;
pub mod source;
pub mod trace;
pub mod traces;

pub use error::{Error, ParseError, Result};
pub use expr::Expr;
pub use geometry::{
    affix, classify, from_char, to_char, CharMaps, CharPoint, CurveShape, Line, Location, Point, SubdomainId,
    TypeChangeCurve,
};
pub use parabolic::{KernelConfig, Side};
pub use pipeline::{
    convergence_study, solve, verify, ConvergenceRow, ConvergenceTable, ProblemSpec, ResidualReport, Solution,
    TraceSet,
};
pub use source::SourceTerm;
pub use trace::TraceFn;
pub use traces::{Sigma, VolterraGrid};
