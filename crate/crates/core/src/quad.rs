//! Gauss–Legendre quadrature: fixed rules, tolerance-driven panel
//! subdivision, and piecewise rules over caller-supplied breakpoints.
//!
//! The piecewise helpers are what the kernel integrals are built on.

use std::sync::OnceLock;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    #[inline]
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * z);
        }
        sum * half
    }
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

const MAX_CACHED: usize = 64;

/// Cached rule for `n` nodes (`1 <= n <= 64`).
pub fn rule(n: usize) -> &'static GaussRule {
    static RULES: [OnceLock<GaussRule>; MAX_CACHED + 1] = [const { OnceLock::new() }; MAX_CACHED + 1];
    assert!((1..=MAX_CACHED).contains(&n), "unsupported Gauss rule size {n}");
    RULES[n].get_or_init(|| GaussRule::new(n))
}

/// Adaptive Gauss–Legendre: compares the 8- and 16-point rules on each panel
/// and bisects until they agree to `tol` (split evenly between halves).
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    adaptive_rec(&mut f, a, b, tol.max(1e-15), 0)
}

fn adaptive_rec<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let coarse = rule(8).integrate(a, b, &mut *f);
    let fine = rule(16).integrate(a, b, &mut *f);
    if (fine - coarse).abs() <= tol || depth >= 30 || !fine.is_finite() {
        return fine;
    }
    let mid = 0.5 * (a + b);
    adaptive_rec(f, a, mid, 0.5 * tol, depth + 1) + adaptive_rec(f, mid, b, 0.5 * tol, depth + 1)
}

/// Sorts and deduplicates breakpoints, clipped to `[a, b]`, endpoints included.
pub fn breakpoints(a: f64, b: f64, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = extra.into_iter().filter(|t| *t > a && *t < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|l, r| l.total_cmp(r));
    let span = (b - a).abs().max(1e-300);
    pts.dedup_by(|next, prev| (*next - *prev).abs() <= 1e-14 * span);
    pts
}

/// Composite `n`-point Gauss over consecutive breakpoints.
pub fn piecewise<F: FnMut(f64) -> f64>(breaks: &[f64], n: usize, mut f: F) -> f64 {
    let rule = rule(n);
    breaks
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], &mut f))
        .sum()
}

/// Breakpoints that resolve a heat-kernel peak of width `sigma` centred at
/// `center`, intersected with `[0, 1]`.
pub fn gaussian_breaks(center: f64, sigma: f64) -> impl Iterator<Item = f64> {
    const W: [f64; 7] = [0.5, 1.0, 2.0, 3.0, 4.5, 7.0, 11.0];
    W.into_iter()
        .flat_map(move |w| [center - w * sigma, center + w * sigma])
        .chain(std::iter::once(center))
}
