//! Rate-region polytopes: halfspace and corner representations, conversion in
//! two dimensions, dominated hulls and containment checks.
//!
//! All rates are in nats and every region implicitly includes `R >= 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub coeffs: Vec<f64>,
    pub bound: f64,
    pub label: String,
}

/// Intersection of halfspaces `coeffs . R <= bound` with the nonnegative orthant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HRegion {
    pub dim: usize,
    pub halfspaces: Vec<Halfspace>,
    /// Non-fatal notes, e.g. a negative coefficient in a slanted constraint.
    pub diagnostics: Vec<String>,
}

impl HRegion {
    pub fn new(dim: usize) -> Self {
        Self { dim, halfspaces: Vec::new(), diagnostics: Vec::new() }
    }

    pub fn push(&mut self, coeffs: Vec<f64>, bound: f64, label: impl Into<String>) -> Result<()> {
        if coeffs.len() != self.dim {
            return Err(Error::Arity { expected: self.dim, got: coeffs.len() });
        }
        if !bound.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Region(format!("non-finite constraint {coeffs:?} <= {bound}")));
        }
        self.halfspaces.push(Halfspace { coeffs, bound, label: label.into() });
        Ok(())
    }

    /// Bound of the first halfspace with exactly these coefficients.
    pub fn bound_of(&self, coeffs: &[f64]) -> Option<f64> {
        self.halfspaces.iter().find(|h| h.coeffs == coeffs).map(|h| h.bound)
    }

    pub fn bound_by_label(&self, label: &str) -> Option<f64> {
        self.halfspaces.iter().find(|h| h.label == label).map(|h| h.bound)
    }

    /// Largest constraint violation at `x`, counting `x_i >= 0` as constraints.
    pub fn violation(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Arity { expected: self.dim, got: x.len() });
        }
        let mut worst = x.iter().map(|v| -v).fold(f64::NEG_INFINITY, f64::max);
        for h in &self.halfspaces {
            let lhs: f64 = h.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            worst = worst.max(lhs - h.bound);
        }
        Ok(worst)
    }
}

/// Region given as the dominated convex hull of its corners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VRegion {
    pub dim: usize,
    pub corners: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl VRegion {
    /// Corners not dominated by any other corner.
    pub fn pareto_frontier(&self) -> Vec<Vec<f64>> {
        let dominated = |p: &Vec<f64>, q: &Vec<f64>| q != p && q.iter().zip(p).all(|(a, b)| a >= b);
        self.corners.iter().filter(|p| !self.corners.iter().any(|q| dominated(p, q))).cloned().collect()
    }
}

/// Corner points produced by an achievability construction, each tagged with
/// the construction that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerSet {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    /// Accumulated numerical error bound of the coordinates, in nats.
    pub est_error: f64,
    pub warnings: Vec<String>,
}

impl CornerSet {
    pub fn new(est_error: f64) -> Self {
        Self { points: Vec::new(), labels: Vec::new(), est_error, warnings: Vec::new() }
    }

    /// Add a point; negative coordinates are clamped to zero with a warning.
    pub fn push(&mut self, mut point: Vec<f64>, label: impl Into<String>) {
        let label = label.into();
        for (i, v) in point.iter_mut().enumerate() {
            if *v < 0.0 {
                self.warnings.push(format!("{label}: coordinate {} = {v:e} clamped to 0", i + 1));
                *v = 0.0;
            }
        }
        self.points.push(point);
        self.labels.push(label);
    }

    pub fn to_vregion(&self) -> VRegion {
        let dim = self.points.first().map_or(0, |p| p.len());
        VRegion { dim, corners: self.points.clone(), labels: self.labels.clone() }
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Drop repeated and collinear vertices of a closed polygon.
fn simplify(poly: Vec<[f64; 2]>, scale: f64) -> Vec<[f64; 2]> {
    let eps = 1e-12 * scale.max(1e-300);
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(poly.len());
    for p in poly {
        if pts.last().is_none_or(|q: &[f64; 2]| (q[0] - p[0]).abs() > eps || (q[1] - p[1]).abs() > eps) {
            pts.push(p);
        }
    }
    while pts.len() > 1 {
        let (a, b) = (pts[0], pts[pts.len() - 1]);
        if (a[0] - b[0]).abs() <= eps && (a[1] - b[1]).abs() <= eps {
            pts.pop();
        } else {
            break;
        }
    }
    let mut changed = true;
    while changed && pts.len() > 2 {
        changed = false;
        for i in 0..pts.len() {
            let n = pts.len();
            let (prev, cur, next) = (pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]);
            if cross(prev, cur, next).abs() <= eps * scale {
                pts.remove(i);
                changed = true;
                break;
            }
        }
    }
    pts
}

/// Rotate so the vertex closest to the origin comes first.
fn start_at_origin(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    if let Some(k) = (0..pts.len()).min_by(|&i, &j| (pts[i][0] + pts[i][1]).total_cmp(&(pts[j][0] + pts[j][1]))) {
        pts.rotate_left(k);
    }
    pts
}

/// Corners of a two-dimensional H-region, counterclockwise from the origin:
/// `(0,0)`, along the `R1` axis, over the frontier, back down the `R2` axis.
pub fn corners_from_hrep_2d(h: &HRegion) -> Result<VRegion> {
    if h.dim != 2 {
        return Err(Error::Arity { expected: 2, got: h.dim });
    }
    let scale = h.halfspaces.iter().map(|s| s.bound.abs()).fold(1.0, f64::max);
    let big = 1e9 * scale;
    let mut poly = vec![[0.0, 0.0], [big, 0.0], [big, big], [0.0, big]];
    for s in &h.halfspaces {
        let (a, b, c) = (s.coeffs[0], s.coeffs[1], s.bound);
        let inside = |p: &[f64; 2]| a * p[0] + b * p[1] <= c;
        let mut out = Vec::with_capacity(poly.len() + 1);
        for i in 0..poly.len() {
            let cur = poly[i];
            let prev = poly[(i + poly.len() - 1) % poly.len()];
            let (ci, pi) = (inside(&cur), inside(&prev));
            if ci != pi {
                let fp = a * prev[0] + b * prev[1] - c;
                let fc = a * cur[0] + b * cur[1] - c;
                let t = fp / (fp - fc);
                out.push([prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])]);
            }
            if ci {
                out.push(cur);
            }
        }
        poly = out;
        if poly.is_empty() {
            return Err(Error::Region(format!("constraint '{}' leaves the region empty", s.label)));
        }
    }
    if poly.iter().any(|p| p[0] >= 0.5 * big || p[1] >= 0.5 * big) {
        return Err(Error::Region("region is unbounded".into()));
    }
    // exact vertices: feasible pairwise intersections of the boundary lines
    let mut lines: Vec<(f64, f64, f64)> = h.halfspaces.iter().map(|s| (s.coeffs[0], s.coeffs[1], s.bound)).collect();
    lines.push((-1.0, 0.0, 0.0));
    lines.push((0.0, -1.0, 0.0));
    let tol = 1e-12 * scale;
    let feasible = |p: [f64; 2]| lines.iter().all(|(a, b, c)| a * p[0] + b * p[1] <= c + tol);
    let mut verts: Vec<[f64; 2]> = Vec::new();
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            let (a1, b1, c1) = lines[i];
            let (a2, b2, c2) = lines[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() <= 1e-14 * (a1.abs() + b1.abs()) * (a2.abs() + b2.abs()) {
                continue;
            }
            let p = [(c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det];
            if feasible(p) && !verts.iter().any(|q| (q[0] - p[0]).abs() <= tol && (q[1] - p[1]).abs() <= tol) {
                verts.push(p);
            }
        }
    }
    if verts.is_empty() {
        return Err(Error::Region("region is empty".into()));
    }
    let cx = verts.iter().map(|p| p[0]).sum::<f64>() / verts.len() as f64;
    let cy = verts.iter().map(|p| p[1]).sum::<f64>() / verts.len() as f64;
    verts.sort_by(|p, q| (p[1] - cy).atan2(p[0] - cx).total_cmp(&(q[1] - cy).atan2(q[0] - cx)));
    let pts = start_at_origin(simplify(verts, scale));
    let corners: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0].max(0.0), p[1].max(0.0)]).collect();
    let labels = (0..corners.len()).map(|i| format!("v{i}")).collect();
    Ok(VRegion { dim: 2, corners, labels })
}

/// Dominated convex hull of nonnegative points: the convex hull of the points,
/// their projections on both axes and the origin, counterclockwise from the
/// origin. Collinear and repeated vertices are removed.
pub fn dominated_hull_2d(points: &[Vec<f64>]) -> Result<VRegion> {
    let mut cloud: Vec<[f64; 2]> = vec![[0.0, 0.0]];
    for p in points {
        if p.len() != 2 {
            return Err(Error::Arity { expected: 2, got: p.len() });
        }
        if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Region(format!("point {p:?} is not a finite nonnegative rate pair")));
        }
        cloud.push([p[0], p[1]]);
        cloud.push([p[0], 0.0]);
        cloud.push([0.0, p[1]]);
    }
    cloud.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    cloud.dedup();
    let scale = cloud.iter().map(|p| p[0].max(p[1])).fold(1.0, f64::max);
    let eps = 1e-12 * scale * scale;
    // Andrew's monotone chain, counterclockwise
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &cloud {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in cloud.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    let pts = start_at_origin(lower);
    let corners: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0], p[1]]).collect();
    let labels = corners
        .iter()
        .map(|c| {
            points
                .iter()
                .position(|p| p == c)
                .map_or_else(|| "hull".to_string(), |i| format!("p{i}"))
        })
        .collect();
    Ok(VRegion { dim: 2, corners, labels })
}

/// Halfspaces of a two-dimensional V-region's dominated hull, one per
/// frontier edge, normalized so the largest coefficient is 1.
pub fn hrep_from_vrep_2d(v: &VRegion) -> Result<HRegion> {
    if v.dim != 2 {
        return Err(Error::Arity { expected: 2, got: v.dim });
    }
    let hull = dominated_hull_2d(&v.corners)?;
    let mut frontier = hull.pareto_frontier();
    frontier.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut h = HRegion::new(2);
    let Some(first) = frontier.first().cloned() else {
        return Ok(h);
    };
    let last = frontier.last().cloned().expect("nonempty");
    h.push(vec![0.0, 1.0], first[1], "R2")?;
    for (k, w) in frontier.windows(2).enumerate() {
        let (p, q) = (&w[0], &w[1]);
        let (a, b) = (p[1] - q[1], q[0] - p[0]);
        let m = a.max(b);
        h.push(vec![a / m, b / m], (a * p[0] + b * p[1]) / m, format!("edge{k}"))?;
    }
    h.push(vec![1.0, 0.0], last[0], "R1")?;
    Ok(h)
}

/// True iff `x` satisfies every constraint of `h` and `x >= -slack`, up to `slack`.
pub fn point_in_hrep(h: &HRegion, x: &[f64], slack: f64) -> Result<bool> {
    Ok(h.violation(x)? <= slack)
}

/// Test every corner of `v` against `h`. Since `h` is convex and closed under
/// domination, this decides containment of the whole dominated hull.
pub fn vrep_in_hrep(v: &VRegion, h: &HRegion, slack: f64) -> Result<(bool, f64)> {
    if v.dim != h.dim {
        return Err(Error::Arity { expected: h.dim, got: v.dim });
    }
    let mut worst = f64::NEG_INFINITY;
    for c in &v.corners {
        worst = worst.max(h.violation(c)?);
    }
    Ok((worst <= slack, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pentagon(c1: f64, c2: f64, cs: f64) -> HRegion {
        let mut h = HRegion::new(2);
        h.push(vec![1.0, 0.0], c1, "R1").unwrap();
        h.push(vec![0.0, 1.0], c2, "R2").unwrap();
        h.push(vec![1.0, 1.0], cs, "R1+R2").unwrap();
        h
    }

    fn close(a: &[Vec<f64>], b: &[[f64; 2]]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(p, q)| (p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12)
    }

    #[test]
    fn pentagon_corners() {
        let v = corners_from_hrep_2d(&pentagon(1.0, 1.0, 1.5)).unwrap();
        assert!(close(&v.corners, &[[0.0, 0.0], [1.0, 0.0], [1.0, 0.5], [0.5, 1.0], [0.0, 1.0]]), "{:?}", v.corners);
    }

    #[test]
    fn slack_sum_gives_rectangle() {
        let v = corners_from_hrep_2d(&pentagon(1.0, 1.0, 3.0)).unwrap();
        assert!(close(&v.corners, &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]));
    }

    #[test]
    fn diagonal_edge_has_unit_slope() {
        let v = corners_from_hrep_2d(&pentagon(2.0, 1.5, 3.0)).unwrap();
        let (p, q) = (&v.corners[2], &v.corners[3]);
        assert!(((q[1] - p[1]) / (q[0] - p[0]) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_and_empty_regions_are_rejected() {
        let mut h = HRegion::new(2);
        h.push(vec![1.0, 0.0], 1.0, "R1").unwrap();
        assert!(matches!(corners_from_hrep_2d(&h), Err(Error::Region(_))));
        let mut h = pentagon(1.0, 1.0, 1.5);
        h.push(vec![1.0, 1.0], -1.0, "bad").unwrap();
        assert!(matches!(corners_from_hrep_2d(&h), Err(Error::Region(_))));
        assert!(matches!(corners_from_hrep_2d(&HRegion::new(3)), Err(Error::Arity { .. })));
    }

    #[test]
    fn zero_region_collapses_to_origin() {
        let v = corners_from_hrep_2d(&pentagon(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(v.corners, vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn time_sharing_segment() {
        let v = dominated_hull_2d(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(v.corners.len(), 3);
        let h = hrep_from_vrep_2d(&v).unwrap();
        assert!(point_in_hrep(&h, &[0.5, 0.5], 1e-12).unwrap());
        assert!(!point_in_hrep(&h, &[0.6, 0.5], 1e-12).unwrap());
    }

    #[test]
    fn collinear_points_are_dropped() {
        let v = dominated_hull_2d(&[vec![2.0, 0.0], vec![1.0, 1.0], vec![0.0, 2.0]]).unwrap();
        assert_eq!(v.corners.len(), 3);
        assert!(!v.corners.contains(&vec![1.0, 1.0]));
    }

    #[test]
    fn hull_keeps_pentagon_vertices() {
        let pts = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![2.0, 1.0], vec![1.2, 1.6], vec![0.0, 1.7]];
        let v = dominated_hull_2d(&pts).unwrap();
        assert_eq!(v.corners.len(), 5);
        for p in &pts {
            assert!(v.corners.contains(p));
        }
        assert_eq!(v.pareto_frontier().len(), 3);
    }

    #[test]
    fn membership_basics() {
        let h = pentagon(1.0, 1.0, 1.5);
        assert!(point_in_hrep(&h, &[0.0, 0.0], 0.0).unwrap());
        assert!(!point_in_hrep(&h, &[1.0 + 1e-6, 0.0], 1e-9).unwrap());
        assert!(point_in_hrep(&h, &[1.0 + 1e-6, 0.0], 1e-5).unwrap());
        assert!(!point_in_hrep(&h, &[-0.1, 0.0], 1e-3).unwrap());
        assert!(matches!(point_in_hrep(&h, &[0.0], 0.0), Err(Error::Arity { .. })));
    }

    #[test]
    fn corner_set_clamps_with_warning() {
        let mut c = CornerSet::new(1e-6);
        c.push(vec![-1e-9, 0.3], "test");
        assert_eq!(c.points[0], vec![0.0, 0.3]);
        assert_eq!(c.warnings.len(), 1);
        assert_eq!(c.labels.len(), c.points.len());
    }

    prop_compose! {
        fn arb_pentagon()(c1 in 0.1f64..5.0, c2 in 0.1f64..5.0, f in 0.0f64..1.0) -> HRegion {
            let lo = c1.max(c2);
            pentagon(c1, c2, lo + f * (c1 + c2 - lo))
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_idempotent(h in arb_pentagon()) {
            let v = corners_from_hrep_2d(&h).unwrap();
            let h2 = hrep_from_vrep_2d(&v).unwrap();
            let v2 = corners_from_hrep_2d(&h2).unwrap();
            prop_assert_eq!(v.corners.len(), v2.corners.len());
            for (a, b) in v.corners.iter().zip(&v2.corners) {
                prop_assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
            }
        }

        #[test]
        fn frontier_has_no_dominated_corner(pts in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..12)) {
            let pts: Vec<Vec<f64>> = pts.into_iter().map(|(a, b)| vec![a, b]).collect();
            let v = dominated_hull_2d(&pts).unwrap();
            let f = v.pareto_frontier();
            for p in &f {
                for q in &f {
                    prop_assert!(p == q || !(q[0] >= p[0] && q[1] >= p[1]));
                }
            }
            // every input point lies in the hull
            let h = hrep_from_vrep_2d(&v).unwrap();
            for p in &pts {
                prop_assert!(point_in_hrep(&h, p, 1e-9).unwrap());
            }
        }

        #[test]
        fn containment_is_order_invariant(h in arb_pentagon(), seed in 0u64..1000) {
            let mut v = corners_from_hrep_2d(&h).unwrap();
            v.corners.iter_mut().for_each(|c| c.iter_mut().for_each(|x| *x *= 1.01));
            let (a, wa) = vrep_in_hrep(&v, &h, 0.0).unwrap();
            let n = v.corners.len();
            v.corners.rotate_left((seed as usize) % n);
            v.corners.reverse();
            let (b, wb) = vrep_in_hrep(&v, &h, 0.0).unwrap();
            prop_assert_eq!(a, b);
            prop_assert_eq!(wa, wb);
        }
    }
}
