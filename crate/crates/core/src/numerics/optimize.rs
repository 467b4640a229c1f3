//! Bracketing root finder and a golden-section maximizer with a coarse
//! pre-scan.

use crate::error::{domain, Error, Result};

/// Bisection on a sign-changing bracket. Returns the midpoint of the final
/// bracket, whose width is at most `tol`.
pub fn bisect_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) || !(lo < hi) {
        return domain(format!("bisection needs lo < hi and tol > 0 (lo={lo}, hi={hi}, tol={tol})"));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::Bracket { lo, hi, f_lo: fa, f_hi: fb });
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Result of [`golden_max`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub fx: f64,
}

const PRESCAN_POINTS: usize = 33;

/// Maximize `f` on `[lo, hi]`.
///
/// A uniform pre-scan of 33 points picks the best cell; golden-section search
/// then refines inside the two neighbouring cells. The best point seen over
/// both phases is returned, so a non-unimodal `f` still yields the best probe.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Maximum> {
    if !(lo < hi) || !(tol > 0.0) {
        return domain(format!("golden_max needs lo < hi and tol > 0 (lo={lo}, hi={hi}, tol={tol})"));
    }
    let step = (hi - lo) / (PRESCAN_POINTS - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..PRESCAN_POINTS)
        .map(|i| {
            let x = if i + 1 == PRESCAN_POINTS { hi } else { lo + step * i as f64 };
            (x, f(x))
        })
        .collect();
    golden_refine(&f, &grid, tol)
}

/// Golden-section refinement around the best point of an evaluated grid.
pub(crate) fn golden_refine<F: Fn(f64) -> f64>(f: &F, grid: &[(f64, f64)], tol: f64) -> Result<Maximum> {
    let best_idx = grid
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.1.is_nan())
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Domain("objective is NaN on the whole pre-scan grid".into()))?;
    let mut best = Maximum { x: grid[best_idx].0, fx: grid[best_idx].1 };
    let mut a = grid[best_idx.saturating_sub(1)].0;
    let mut b = grid[(best_idx + 1).min(grid.len() - 1)].0;

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let consider = |x: f64, fx: f64, best: &mut Maximum| {
        if fx > best.fx {
            *best = Maximum { x, fx };
        }
    };
    consider(c, fc, &mut best);
    consider(d, fd, &mut best);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
            consider(c, fc, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
            consider(d, fd, &mut best);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_simple_roots() {
        let r = bisect_root(|x| x - 1.0, 0.0, 2.0, 1e-9).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
        let r = bisect_root(|x| x * x - 2.0, 1.0, 2.0, 1e-10).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-8);
    }

    #[test]
    fn bisect_requires_sign_change() {
        assert!(matches!(
            bisect_root(|x| x * x + 1.0, -1.0, 1.0, 1e-6),
            Err(Error::Bracket { .. })
        ));
        assert!(bisect_root(|x| x, 1.0, 0.0, 1e-6).is_err());
        assert!(bisect_root(|x| x, -1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn golden_on_parabola_and_sine() {
        let m = golden_max(|x| -(x - 3.0) * (x - 3.0), 0.0, 10.0, 1e-8).unwrap();
        assert!((m.x - 3.0).abs() < 1e-6);
        assert!(m.fx.abs() < 1e-10);
        let m = golden_max(f64::sin, 0.0, std::f64::consts::PI, 1e-9).unwrap();
        assert!((m.x - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    }

    #[test]
    fn golden_finds_global_peak_of_bimodal() {
        // narrow taller peak at 8, broad lower one at 2
        let f = |x: f64| (-(x - 2.0) * (x - 2.0)).exp() + 1.5 * (-4.0 * (x - 8.0) * (x - 8.0)).exp();
        let m = golden_max(f, 0.0, 10.0, 1e-8).unwrap();
        assert!((m.x - 8.0).abs() < 1e-4);
    }

    #[test]
    fn golden_validates() {
        assert!(golden_max(|x| x, 1.0, 1.0, 1e-3).is_err());
        assert!(golden_max(|x| x, 0.0, 1.0, -1.0).is_err());
    }
}
