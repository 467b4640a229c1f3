//! Adaptive panel Gauss–Legendre quadrature and the entropy functional
//! built on it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tolerances and budget for every quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Absolute tolerance on entropy-type integrals, in nats.
    pub abs_tol: f64,
    /// Relative tolerance; also the normalization tolerance of densities.
    pub rel_tol: f64,
    /// Noise standard deviations kept beyond the input support.
    pub tail_sigma: f64,
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-6, rel_tol: 1e-8, tail_sigma: 8.0, max_panels: 1 << 19 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return domain("quadrature tolerances must be positive");
        }
        if !(self.tail_sigma >= 6.0) {
            return domain(format!("tail_sigma must be at least 6, got {}", self.tail_sigma));
        }
        if self.max_panels < 16 {
            return domain(format!("max_panels must be at least 16, got {}", self.max_panels));
        }
        Ok(())
    }
}

/// Closed interval `[lo, hi]`; `hi` may be `+inf` for a half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }
}

const GL_ORDER: usize = 10;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence. `n >= 2`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "Gauss-Legendre order must be at least 2");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

#[inline]
fn gl_panel<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> [f64; N] {
    let (nodes, weights) = gl_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = [0.0; N];
    for (x, w) in nodes.iter().zip(weights) {
        let v = f(mid + half * x);
        for k in 0..N {
            acc[k] += w * v[k];
        }
    }
    acc.map(|s| s * half)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub panels: usize,
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    left: [f64; N],
    right: [f64; N],
    error: [f64; N],
    score: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.score == other.score
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score.total_cmp(&other.score)
    }
}

fn make_panel<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: &F,
    a: f64,
    b: f64,
    whole: [f64; N],
    tols: &[f64; N],
) -> Panel<N> {
    let m = 0.5 * (a + b);
    let left = gl_panel(f, a, m);
    let right = gl_panel(f, m, b);
    let mut error = [0.0; N];
    let mut score: f64 = 0.0;
    for k in 0..N {
        error[k] = (whole[k] - left[k] - right[k]).abs();
        score = score.max(error[k] / tols[k]);
    }
    Panel { a, b, left, right, error, score }
}

/// Globally adaptive integration of a vector-valued integrand over the
/// panels delimited by `breakpoints` (sorted, finite).
///
/// Each panel is estimated by 10-point Gauss–Legendre on its two halves; the
/// difference from the whole-panel rule is its error estimate. The worst
/// panel is bisected until the summed error of every component is below its
/// tolerance.
pub fn integrate_adaptive<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: F,
    breakpoints: &[f64],
    tols: [f64; N],
    max_panels: usize,
) -> Result<Integral<N>> {
    let mut heap: BinaryHeap<Panel<N>> = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let whole = gl_panel(&f, a, b);
        heap.push(make_panel(&f, a, b, whole, &tols));
    }
    let total_error = |heap: &BinaryHeap<Panel<N>>| {
        let mut e = [0.0; N];
        for p in heap.iter() {
            for k in 0..N {
                e[k] += p.error[k];
            }
        }
        e
    };
    let within = |e: &[f64; N]| e.iter().zip(&tols).all(|(e, t)| e <= t);

    let mut err = total_error(&heap);
    let mut splits = 0usize;
    while !within(&err) {
        if heap.len() >= max_panels {
            let worst = err.iter().zip(&tols).map(|(e, t)| e / t).fold(0.0, f64::max);
            return Err(Error::QuadratureBudget { max_panels, error_estimate: worst });
        }
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) || p.score == 0.0 {
            // unsplittable in floating point; nothing more to gain
            heap.push(Panel { score: 0.0, ..p });
            break;
        }
        let l = make_panel(&f, p.a, m, p.left, &tols);
        let r = make_panel(&f, m, p.b, p.right, &tols);
        for k in 0..N {
            err[k] += l.error[k] + r.error[k] - p.error[k];
        }
        heap.push(l);
        heap.push(r);
        splits += 1;
        // refresh the running sum periodically to avoid drift
        if splits.is_multiple_of(256) || err.iter().any(|e| *e < 0.0) {
            err = total_error(&heap);
        }
    }
    let err = total_error(&heap);
    let mut value = [0.0; N];
    // sum in position order for reproducibility
    let mut panels: Vec<Panel<N>> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    for p in &panels {
        for k in 0..N {
            value[k] += p.left[k] + p.right[k];
        }
    }
    Ok(Integral { value, error: err, panels: panels.len() })
}

/// Scalar convenience wrapper around [`integrate_adaptive`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], tol: f64, max_panels: usize) -> Result<(f64, f64)> {
    let r = integrate_adaptive(|x| [f(x)], breakpoints, [tol], max_panels)?;
    Ok((r.value[0], r.error[0]))
}

/// Breakpoints that grade geometrically from every anchor: panels start at
/// width `base` next to each anchor and double towards the middle of each gap.
pub fn graded_breakpoints(anchors: &[f64], base: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = anchors.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut out = Vec::with_capacity(pts.len() * 4);
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        out.push(a);
        let mid = 0.5 * (a + b);
        let mut left = Vec::new();
        let mut step = base;
        while a + step < mid {
            left.push(a + step);
            step *= 2.0;
        }
        let mut right = Vec::new();
        let mut step = base;
        while b - step > mid {
            right.push(b - step);
            step *= 2.0;
        }
        out.extend(left);
        if b - a > 2.0 * base {
            out.push(mid);
        }
        out.extend(right.into_iter().rev());
    }
    if let Some(&last) = pts.last() {
        out.push(last);
    }
    out.dedup();
    out
}

/// `-p ln p` with the `0 ln 0 = 0` convention.
#[inline]
pub(crate) fn neg_p_log_p(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

/// Differential entropy `-∫ p ln p` (nats) together with the integrated mass,
/// over explicit breakpoints. Fails when the mass is off by more than
/// `10 rel_tol`.
pub(crate) fn entropy_over<F: Fn(f64) -> f64>(density: F, breakpoints: &[f64], spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let r = integrate_adaptive(
        |x| {
            let p = density(x);
            [neg_p_log_p(p), p]
        },
        breakpoints,
        [spec.abs_tol, spec.rel_tol],
        spec.max_panels,
    )?;
    let mass = r.value[1];
    let tolerance = 10.0 * spec.rel_tol;
    if (mass - 1.0).abs() > tolerance {
        return Err(Error::InconsistentDensity { mass, tolerance });
    }
    Ok((r.value[0], r.error[0]))
}

/// Differential entropy (nats) of a density supported on a union of
/// intervals. Half-lines are integrated in doubling chunks until a chunk
/// carries negligible mass.
pub fn entropy_quadrature<F: Fn(f64) -> f64>(density: F, support: &[Interval], spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let mut entropy = 0.0;
    let mut mass = 0.0;
    let chunk_tol = |len: usize| spec.abs_tol / (len as f64 + 1.0);
    for iv in support {
        if !(iv.hi > iv.lo) || !iv.lo.is_finite() {
            return domain(format!("support interval [{}, {}] is not a valid interval", iv.lo, iv.hi));
        }
        if iv.hi.is_finite() {
            let bps = graded_breakpoints(&[iv.lo, iv.hi], (iv.hi - iv.lo) / 64.0);
            let r = integrate_adaptive(
                |x| {
                    let p = density(x);
                    [neg_p_log_p(p), p]
                },
                &bps,
                [chunk_tol(support.len()), spec.rel_tol],
                spec.max_panels,
            )?;
            entropy += r.value[0];
            mass += r.value[1];
        } else {
            let mut a = iv.lo;
            let mut width = 1.0;
            for _ in 0..200 {
                let b = a + width;
                let bps = graded_breakpoints(&[a, b], width / 64.0);
                let r = integrate_adaptive(
                    |x| {
                        let p = density(x);
                        [neg_p_log_p(p), p]
                    },
                    &bps,
                    [chunk_tol(support.len()) * 1e-2, spec.rel_tol * 1e-2],
                    spec.max_panels,
                )?;
                entropy += r.value[0];
                mass += r.value[1];
                a = b;
                width *= 2.0;
                if r.value[1] < 1e-17 && r.value[0].abs() < 1e-15 && density(a) < 1e-300 {
                    break;
                }
                if r.value[1].abs() < 1e-18 && mass > 1.0 - 1e-14 {
                    break;
                }
            }
        }
    }
    let tolerance = 10.0 * spec.rel_tol;
    if (mass - 1.0).abs() > tolerance {
        return Err(Error::InconsistentDensity { mass, tolerance });
    }
    Ok(entropy)
}
