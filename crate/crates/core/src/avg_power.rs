//! Bounds under per-user average-power constraints: the single-user sandwich,
//! two-user outer, inner and high-SNR regions, their K-user extensions, the
//! symmetric sum-capacity gap and the comparison of independent exponential
//! inputs with inputs whose sum is exponential.
//!
//! Every function takes optical SNRs (`E / sigma`, linear). Mutual
//! information is scale invariant, so numeric values are computed at unit
//! noise scale.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{make_basic, make_geometric_spaced, BasicLaw, ErlangLaw};
use crate::error::{domain, Error, Result};
use crate::mutual_information::{mi_awgn, Method, MiResult};
use crate::numerics::optimize::golden_refine;
use crate::numerics::quadrature::QuadratureSpec;
use crate::numerics::special::{digamma_int, ln_factorial, E_OVER_2PI};
use crate::region::{CornerSet, HRegion};

/// Default cap on the number of users for K-user enumerations.
pub const DEFAULT_MAX_USERS: usize = 6;

/// Largest geometric lattice the I^G search will build.
const MAX_GEOMETRIC_ATOMS: f64 = 2e5;

/// Search window for `ln(ell / sigma)`.
const LOG_ELL_RANGE: (f64, f64) = (-6.0, 6.0);

const PRESCAN_POINTS: usize = 33;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApOperatingPoint {
    /// Per-user optical SNR `E_i / sigma`.
    pub snr: Vec<f64>,
    pub sigma: f64,
}

impl ApOperatingPoint {
    pub fn new(snr: Vec<f64>, sigma: f64) -> Result<Self> {
        if snr.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return domain(format!("SNR values must be finite and nonnegative, got {snr:?}"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return domain(format!("noise scale must be positive, got {sigma}"));
        }
        Ok(Self { snr, sigma })
    }

    /// Unit noise scale.
    pub fn unit(snr: Vec<f64>) -> Result<Self> {
        Self::new(snr, 1.0)
    }

    pub fn users(&self) -> usize {
        self.snr.len()
    }

    fn two(&self) -> Result<(f64, f64)> {
        match self.snr[..] {
            [a, b] => Ok((a, b)),
            _ => Err(Error::Arity { expected: 2, got: self.snr.len() }),
        }
    }
}

fn check_snr(snr: f64) -> Result<()> {
    if snr.is_finite() && snr >= 0.0 {
        Ok(())
    } else {
        domain(format!("SNR must be finite and nonnegative, got {snr}"))
    }
}

/// `½ ln((e/2pi)(snr + 2)^2)`.
pub fn ap_single_upper(snr: f64) -> Result<f64> {
    check_snr(snr)?;
    Ok(0.5 * (E_OVER_2PI * (snr + 2.0) * (snr + 2.0)).ln())
}

/// `½ ln(1 + (e/2pi) snr^2)`.
pub fn closed_form_lower(snr: f64) -> f64 {
    0.5 * (E_OVER_2PI * snr * snr).ln_1p()
}

/// `½ ln((e/2pi) snr^2)`, the common high-SNR asymptote.
pub fn asymptotic_capacity(snr: f64) -> f64 {
    0.5 * (E_OVER_2PI * snr * snr).ln()
}

/// Mutual information of an exponential input of mean `snr` at unit noise.
pub fn ie(snr: f64, spec: &QuadratureSpec) -> Result<MiResult> {
    check_snr(snr)?;
    if snr == 0.0 {
        return Ok(MiResult { value: 0.0, method: Method::ClosedForm, est_error: 0.0 });
    }
    mi_awgn(&make_basic(BasicLaw::Exponential { mean: snr })?, 1.0, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpLower {
    pub numeric: MiResult,
    pub closed_form: f64,
}

/// Exponential-input lower bound, numeric and closed form.
pub fn ap_single_lower_exp(snr: f64, spec: &QuadratureSpec) -> Result<ExpLower> {
    Ok(ExpLower { numeric: ie(snr, spec)?, closed_form: closed_form_lower(snr) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoLower {
    pub value: MiResult,
    /// Maximizing lattice spacing, in units of `sigma`.
    pub best_ell: f64,
    /// The maximizer sits in the first or last pre-scan cell.
    pub boundary_hit: bool,
}

fn geometric_mi(snr: f64, log_ell: f64, spec: &QuadratureSpec) -> Result<MiResult> {
    mi_awgn(&make_geometric_spaced(snr, log_ell.exp())?, 1.0, spec)
}

/// Geometric-lattice lower bound: the best lattice spacing for mean `snr`.
///
/// The spacing is searched over `ln ell` in `[-6, 6]`, narrowed from below so
/// the truncated lattice stays under 2e5 atoms.
pub fn ap_single_lower_geo(snr: f64, spec: &QuadratureSpec) -> Result<GeoLower> {
    check_snr(snr)?;
    if snr == 0.0 {
        return domain("the geometric lower bound needs snr > 0");
    }
    let ell_min = snr * (27.64 / MAX_GEOMETRIC_ATOMS).exp_m1();
    let lo = LOG_ELL_RANGE.0.max(ell_min.ln());
    let hi = LOG_ELL_RANGE.1;
    let step = (hi - lo) / (PRESCAN_POINTS - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..PRESCAN_POINTS)
        .into_par_iter()
        .map(|i| {
            let u = if i + 1 == PRESCAN_POINTS { hi } else { lo + step * i as f64 };
            geometric_mi(snr, u, spec).map(|r| (u, r.value))
        })
        .collect::<Result<_>>()?;
    let objective = |u: f64| geometric_mi(snr, u, spec).map_or(f64::NEG_INFINITY, |r| r.value);
    let best = golden_refine(&objective, &grid, 1e-3)?;
    let best_idx = grid.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).map_or(0, |(i, _)| i);
    let est_error = crate::mutual_information::EST_ERROR_FACTOR * spec.abs_tol;
    Ok(GeoLower {
        value: MiResult { value: best.fx, method: Method::Quadrature, est_error },
        best_ell: best.x.exp(),
        boundary_hit: best_idx == 0 || best_idx + 1 == grid.len(),
    })
}

fn subset_label(mask: usize, k: usize) -> String {
    (0..k).filter(|i| mask >> i & 1 == 1).map(|i| format!("R{}", i + 1)).collect::<Vec<_>>().join("+")
}

fn subset_sum(snr: &[f64], mask: usize) -> f64 {
    let mut s = 0.0;
    for (i, v) in snr.iter().enumerate() {
        if mask >> i & 1 == 1 {
            s += v;
        }
    }
    s
}

fn check_users(k: usize, limit: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Arity { expected: 1, got: 0 });
    }
    if k > limit {
        return Err(Error::Size { users: k, limit });
    }
    Ok(())
}

/// Two-user outer bound: single-user upper bounds and the upper bound at the
/// summed SNR.
pub fn ap_outer_2u(pt: &ApOperatingPoint) -> Result<HRegion> {
    let (s1, s2) = pt.two()?;
    let mut h = HRegion::new(2);
    h.push(vec![1.0, 0.0], ap_single_upper(s1)?, "R1")?;
    h.push(vec![0.0, 1.0], ap_single_upper(s2)?, "R2")?;
    h.push(vec![1.0, 1.0], ap_single_upper(s1 + s2)?, "R1+R2")?;
    Ok(h)
}

/// The five corners of the geometric/exponential inner region:
/// the origin, each user alone with a geometric input, and both successive
/// decoding orders with an exponential input for one user and the matching
/// mixture for the other, so that the sum is exponential.
pub fn ap_inner_corners_2u(pt: &ApOperatingPoint, spec: &QuadratureSpec) -> Result<CornerSet> {
    let (s1, s2) = pt.two()?;
    if !(s1 > 0.0 && s2 > 0.0) {
        return domain("inner corners need both SNRs positive");
    }
    let (g1, g2) = rayon::join(|| ap_single_lower_geo(s1, spec), || ap_single_lower_geo(s2, spec));
    let (g1, g2) = (g1?, g2?);
    let sums = [s1, s2, s1 + s2];
    let vals: Vec<MiResult> = sums.par_iter().map(|s| ie(*s, spec)).collect::<Result<_>>()?;
    let (e1, e2, e12) = (vals[0].value, vals[1].value, vals[2].value);
    let err = vals.iter().map(|v| v.est_error).fold(0.0, f64::max).max(g1.value.est_error);
    let mut c = CornerSet::new(2.0 * err);
    c.push(vec![0.0, 0.0], "origin");
    c.push(vec![g1.value.value, 0.0], "geometric-1");
    c.push(vec![e1, e12 - e1], "exponential-1/mixture-2");
    c.push(vec![e12 - e2, e2], "mixture-1/exponential-2");
    c.push(vec![0.0, g2.value.value], "geometric-2");
    Ok(c)
}

/// Closed-form two-user inner bound.
pub fn ap_inner_hrep_2u(pt: &ApOperatingPoint) -> Result<HRegion> {
    let (s1, s2) = pt.two()?;
    let mut h = HRegion::new(2);
    h.push(vec![1.0, 0.0], closed_form_lower(s1), "R1")?;
    h.push(vec![0.0, 1.0], closed_form_lower(s2), "R2")?;
    h.push(vec![1.0, 1.0], closed_form_lower(s1 + s2), "R1+R2")?;
    Ok(h)
}

/// Bounds on the rate of user `second` while the other user decodes at its
/// exponential-input rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondUserBounds {
    /// 1-based index of the second user.
    pub user: usize,
    pub lower: f64,
    pub upper: f64,
    /// `ln(1 + snr_second / snr_first)`.
    pub asymptotic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRegion {
    pub region: HRegion,
    pub corners: CornerSet,
    pub second_user: Vec<SecondUserBounds>,
}

/// High-SNR region: `R_i <= ½ ln((e/2pi) s_i^2)` and the same at the summed SNR.
pub fn ap_asymptotic_region_2u(pt: &ApOperatingPoint) -> Result<AsymptoticRegion> {
    let (s1, s2) = pt.two()?;
    if !(s1 > 0.0 && s2 > 0.0) {
        return domain("the asymptotic region needs both SNRs positive");
    }
    let (c1, c2, cs) = (asymptotic_capacity(s1), asymptotic_capacity(s2), asymptotic_capacity(s1 + s2));
    let mut region = HRegion::new(2);
    region.push(vec![1.0, 0.0], c1, "R1")?;
    region.push(vec![0.0, 1.0], c2, "R2")?;
    region.push(vec![1.0, 1.0], cs, "R1+R2")?;
    let mut corners = CornerSet::new(0.0);
    corners.push(vec![0.0, 0.0], "origin");
    corners.push(vec![c1, 0.0], "user-1-alone");
    corners.push(vec![c1, (s2 / s1).ln_1p()], "user-1-first");
    corners.push(vec![(s1 / s2).ln_1p(), c2], "user-2-first");
    corners.push(vec![0.0, c2], "user-2-alone");
    let bounds = |si: f64, other: usize, so: f64| SecondUserBounds {
        user: other,
        lower: 0.5 * ((E_OVER_2PI * (s1 + s2) * (s1 + s2)).ln_1p() - (E_OVER_2PI * (si + 2.0) * (si + 2.0)).ln()),
        upper: 0.5 * ((E_OVER_2PI * (s1 + s2 + 2.0) * (s1 + s2 + 2.0)).ln() - (E_OVER_2PI * si * si).ln_1p()),
        asymptotic: (so / si).ln_1p(),
    };
    let second_user = vec![bounds(s1, 2, s2), bounds(s2, 1, s1)];
    Ok(AsymptoticRegion { region, corners, second_user })
}

/// K-user outer bound: one halfspace per nonempty subset, subsets ordered by
/// bitmask (`{1}, {2}, {1,2}, {3}, ...`).
pub fn ap_kuser_outer(pt: &ApOperatingPoint) -> Result<HRegion> {
    ap_kuser_outer_with_limit(pt, DEFAULT_MAX_USERS)
}

pub fn ap_kuser_outer_with_limit(pt: &ApOperatingPoint, limit: usize) -> Result<HRegion> {
    let k = pt.users();
    check_users(k, limit)?;
    let mut h = HRegion::new(k);
    for mask in 1..(1usize << k) {
        let coeffs = (0..k).map(|i| (mask >> i & 1) as f64).collect();
        h.push(coeffs, ap_single_upper(subset_sum(&pt.snr, mask))?, subset_label(mask, k))?;
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerForm {
    /// `½ ln(1 + (e/2pi)(sum s)^2)` per subset.
    ClosedForm,
    /// Numeric exponential-input rate at the subset's summed SNR.
    IeNumeric,
}

/// K-user inner bound in halfspace form.
pub fn ap_kuser_inner_hrep(pt: &ApOperatingPoint, form: InnerForm, spec: &QuadratureSpec) -> Result<HRegion> {
    let k = pt.users();
    check_users(k, DEFAULT_MAX_USERS)?;
    let masks: Vec<usize> = (1..(1usize << k)).collect();
    let bounds: Vec<f64> = match form {
        InnerForm::ClosedForm => masks.iter().map(|m| closed_form_lower(subset_sum(&pt.snr, *m))).collect(),
        InnerForm::IeNumeric => masks.par_iter().map(|m| ie(subset_sum(&pt.snr, *m), spec).map(|r| r.value)).collect::<Result<_>>()?,
    };
    let mut h = HRegion::new(k);
    for (mask, b) in masks.into_iter().zip(bounds) {
        let coeffs = (0..k).map(|i| (mask >> i & 1) as f64).collect();
        h.push(coeffs, b, subset_label(mask, k))?;
    }
    Ok(h)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Corners of the K-user inner region for one active set (0-based user
/// indices). A singleton uses the geometric bound; otherwise every ordering
/// of the active users gives a corner, with the `m`-th user in the order
/// receiving `I^E(s_(1) + .. + s_(m)) - I^E(s_(1) + .. + s_(m-1))`. Sums run
/// over active users only; inactive users get rate 0.
pub fn ap_kuser_inner_corners(pt: &ApOperatingPoint, active: &[usize], spec: &QuadratureSpec) -> Result<CornerSet> {
    let k = pt.users();
    check_users(k, DEFAULT_MAX_USERS)?;
    if active.is_empty() {
        return domain("active set must be nonempty");
    }
    let mut set: Vec<usize> = active.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.len() != active.len() || set.iter().any(|&i| i >= k) {
        return domain(format!("active set {active:?} is not a set of users of 0..{k}"));
    }
    if set.iter().any(|&i| !(pt.snr[i] > 0.0)) {
        return domain("active users need positive SNR");
    }
    if let [only] = set[..] {
        let g = ap_single_lower_geo(pt.snr[only], spec)?;
        let mut c = CornerSet::new(g.value.est_error);
        let mut p = vec![0.0; k];
        p[only] = g.value.value;
        c.push(p, format!("geometric-{}", only + 1));
        return Ok(c);
    }
    let perms = permutations(&set);
    // every prefix sum that any order needs, keyed by its bit pattern
    let mut sums: Vec<f64> = Vec::new();
    for perm in &perms {
        let mut acc = 0.0;
        for &u in perm {
            acc += pt.snr[u];
            sums.push(acc);
        }
    }
    sums.sort_by(f64::total_cmp);
    sums.dedup();
    let values: Vec<MiResult> = sums.par_iter().map(|s| ie(*s, spec)).collect::<Result<_>>()?;
    let table: HashMap<u64, MiResult> = sums.iter().map(|s| s.to_bits()).zip(values.iter().copied()).collect();
    let err = values.iter().map(|v| v.est_error).fold(0.0, f64::max);
    let mut c = CornerSet::new(2.0 * err);
    for perm in &perms {
        let mut p = vec![0.0; k];
        let mut acc = 0.0;
        let mut prev = 0.0;
        for &u in perm {
            acc += pt.snr[u];
            let cur = table[&acc.to_bits()].value;
            p[u] = cur - prev;
            prev = cur;
        }
        let order = perm.iter().map(|u| (u + 1).to_string()).collect::<Vec<_>>().join(">");
        c.push(p, format!("order {order}"));
    }
    Ok(c)
}

/// Union of the corner sets of every nonempty active subset.
pub fn ap_kuser_inner_all(pt: &ApOperatingPoint, spec: &QuadratureSpec) -> Result<CornerSet> {
    let k = pt.users();
    check_users(k, DEFAULT_MAX_USERS)?;
    let parts: Vec<CornerSet> = (1..(1usize << k))
        .into_par_iter()
        .map(|mask| {
            let active: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
            ap_kuser_inner_corners(pt, &active, spec)
        })
        .collect::<Result<_>>()?;
    let mut all = CornerSet::new(0.0);
    all.push(vec![0.0; k], "origin");
    for part in parts {
        all.est_error = all.est_error.max(part.est_error);
        all.warnings.extend(part.warnings);
        for (p, l) in part.points.into_iter().zip(part.labels) {
            all.push(p, l);
        }
    }
    Ok(all)
}

/// Gap between the outer and exponential-input sum-rate bounds with `K`
/// users at SNR `snr` each: `½ ln((e/2pi)(K snr + 2)^2) - I^E(K snr)`.
pub fn ap_sum_gap_symmetric(k: usize, snr: f64, spec: &QuadratureSpec) -> Result<MiResult> {
    if k == 0 || !(snr > 0.0) {
        return domain("sum gap needs K >= 1 and snr > 0");
    }
    let total = k as f64 * snr;
    let inner = ie(total, spec)?;
    Ok(MiResult { value: ap_single_upper(total)? - inner.value, method: inner.method, est_error: inner.est_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeComparison {
    /// Independent inputs whose sum is exponential with mean `K snr`.
    pub sum_rate_type1: MiResult,
    /// Independent exponential inputs; their sum is Erlang.
    pub sum_rate_type2: MiResult,
    /// High-SNR limit of `type1 - type2`.
    pub asymptotic_gap: f64,
}

/// `(K-1) psi(K) - ((K-1) + ln((K-1)!) - ln K)`: the entropy deficit of an
/// Erlang sum relative to an exponential of the same mean.
pub fn type_asymptotic_gap(k: usize) -> Result<f64> {
    if k == 0 {
        return domain("K must be at least 1");
    }
    let km1 = (k - 1) as f64;
    Ok(km1 * digamma_int(k as u64)? - (km1 + ln_factorial(k as u64 - 1) - (k as f64).ln()))
}

pub fn ap_type_compare(k: usize, snr: f64, spec: &QuadratureSpec) -> Result<TypeComparison> {
    let asymptotic_gap = type_asymptotic_gap(k)?;
    if !(snr > 0.0) {
        return domain("type comparison needs snr > 0");
    }
    let shape = u32::try_from(k).map_err(|_| Error::Domain(format!("K = {k} is too large")))?;
    let (t1, t2) = rayon::join(
        || ie(k as f64 * snr, spec),
        || make_basic(BasicLaw::Erlang(ErlangLaw { shape, scale: snr })).and_then(|d| mi_awgn(&d, 1.0, spec)),
    );
    Ok(TypeComparison { sum_rate_type1: t1?, sum_rate_type2: t2?, asymptotic_gap })
}
