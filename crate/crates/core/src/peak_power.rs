//! Bounds under per-user peak-power constraints: the McKellips and TKB upper
//! bounds, the uniform-input lower bound, the uniform-noise capacity with a
//! noninteger peak ratio, the two-user outer and inner regions and the
//! high-PNR gap analysis.
//!
//! All functions take optical PNRs (`A / sigma`, linear) and work at unit
//! noise scale. A peak-limited AWGN channel with `|X| <= A'` maps to this
//! channel with `PNR = 2 A' / sigma`.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity_solver::{solve_peak_capacity, DEFAULT_GRID_POINTS, DEFAULT_TOL};
use crate::distributions::{density_convolve, make_basic, make_maxmass_discrete, BasicLaw, InputDistribution, OriginStyle};
use crate::error::{domain, Error, Result};
use crate::mutual_information::{mi_awgn, Method, MiResult};
use crate::numerics::optimize::bisect_root;
use crate::numerics::quadrature::QuadratureSpec;
use crate::numerics::special::{binary_entropy, q_unchecked, SQRT_2PI_E};
use crate::region::{CornerSet, HRegion};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpOperatingPoint {
    /// Per-user optical PNR `A_i / sigma`.
    pub pnr: Vec<f64>,
    pub sigma: f64,
}

impl PpOperatingPoint {
    pub fn new(pnr: Vec<f64>, sigma: f64) -> Result<Self> {
        if pnr.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return domain(format!("PNR values must be finite and nonnegative, got {pnr:?}"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return domain(format!("noise scale must be positive, got {sigma}"));
        }
        Ok(Self { pnr, sigma })
    }

    pub fn unit(pnr: Vec<f64>) -> Result<Self> {
        Self::new(pnr, 1.0)
    }

    fn two(&self) -> Result<(f64, f64)> {
        match self.pnr[..] {
            [a, b] => Ok((a, b)),
            _ => Err(Error::Arity { expected: 2, got: self.pnr.len() }),
        }
    }
}

fn check_pnr(pnr: f64) -> Result<()> {
    if pnr.is_finite() && pnr >= 0.0 {
        Ok(())
    } else {
        domain(format!("PNR must be finite and nonnegative, got {pnr}"))
    }
}

/// `min{ln(1 + p/sqrt(2 pi e)), ½ ln(1 + p^2/4)}`.
pub fn pp_mckellips(pnr: f64) -> Result<f64> {
    check_pnr(pnr)?;
    let a = (pnr / SQRT_2PI_E).ln_1p();
    let b = 0.5 * (0.25 * pnr * pnr).ln_1p();
    Ok(a.min(b))
}

fn tkb_validity(pnr: f64) -> f64 {
    0.5 - q_unchecked(pnr) - pnr / (pnr + SQRT_2PI_E)
}

/// `H2(½ - Q(p)) + (½ - Q(p)) ln(p / sqrt(2 pi e))`, present only where
/// `½ - Q(p) >= p / (p + sqrt(2 pi e))`.
pub fn pp_tkb(pnr: f64) -> Result<Option<f64>> {
    check_pnr(pnr)?;
    if pnr == 0.0 {
        return Ok(Some(0.0));
    }
    if tkb_validity(pnr) < 0.0 {
        return Ok(None);
    }
    let q = 0.5 - q_unchecked(pnr);
    Ok(Some(binary_entropy(q) + q * (pnr / SQRT_2PI_E).ln()))
}

/// Root of `½ - Q(p) = p / (p + sqrt(2 pi e))` on `[1, 10]`, about 4.1324.
pub fn pp_pnr_star() -> f64 {
    static ROOT: OnceLock<f64> = OnceLock::new();
    *ROOT.get_or_init(|| bisect_root(tkb_validity, 1.0, 10.0, 1e-12).expect("the validity margin changes sign on [1, 10]"))
}

/// Combined upper bound: the smaller of McKellips and TKB up to the
/// threshold PNR, McKellips above it.
pub fn pp_single_upper(pnr: f64) -> Result<f64> {
    let m = pp_mckellips(pnr)?;
    if pnr <= pp_pnr_star() {
        if let Some(t) = pp_tkb(pnr)? {
            return Ok(m.min(t));
        }
    }
    Ok(m)
}

/// `½ ln(1 + p^2 / (2 pi e))`.
pub fn uniform_closed_form(pnr: f64) -> f64 {
    0.5 * (pnr * pnr / (SQRT_2PI_E * SQRT_2PI_E)).ln_1p()
}

/// Mutual information of a uniform input on `[0, pnr]` at unit noise.
pub fn iu(pnr: f64, spec: &QuadratureSpec) -> Result<MiResult> {
    check_pnr(pnr)?;
    if pnr == 0.0 {
        return Ok(MiResult { value: 0.0, method: Method::ClosedForm, est_error: 0.0 });
    }
    mi_awgn(&make_basic(BasicLaw::Uniform { peak: pnr })?, 1.0, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformLower {
    pub numeric: MiResult,
    pub closed_form: f64,
}

pub fn pp_single_lower_uniform(pnr: f64, spec: &QuadratureSpec) -> Result<UniformLower> {
    Ok(UniformLower { numeric: iu(pnr, spec)?, closed_form: uniform_closed_form(pnr) })
}

/// Capacity of the uniform-noise channel whose peak-to-noise-width ratio
/// is `a`: `ln(n+1) - (n-a) ln((n+1)/n)`, `n = ceil(a)`.
pub fn pp_lemma5_capacity(a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return domain(format!("peak ratio must be positive and finite, got {a}"));
    }
    let n = a.ceil();
    // weights of the convex combination of ln(n+1) and ln n, kept exact as a -> 0
    let w = a - (n - 1.0);
    Ok(w * (n + 1.0).ln() + if n > 1.0 { (1.0 - w) * n.ln() } else { 0.0 })
}

/// Two-user outer bound from the combined single-user upper bound.
pub fn pp_outer_2u(pt: &PpOperatingPoint) -> Result<HRegion> {
    let (p1, p2) = pt.two()?;
    outer_from(p1, p2, pp_single_upper)
}

/// Outer bound with each single-user bound replaced by the numerical
/// capacity, widened by the solver bracket.
pub fn pp_outer_2u_refined(pt: &PpOperatingPoint, grid_points: usize, tol: f64) -> Result<HRegion> {
    let (p1, p2) = pt.two()?;
    let solve = |p: f64| -> Result<f64> {
        if p == 0.0 {
            return Ok(0.0);
        }
        let r = solve_peak_capacity(p, grid_points, tol)?;
        Ok(r.capacity + r.bracket_width)
    };
    let vals: Vec<f64> = [p1, p2, p1 + p2].par_iter().map(|p| solve(*p)).collect::<Result<_>>()?;
    let mut h = HRegion::new(2);
    h.push(vec![1.0, 0.0], vals[0], "R1")?;
    h.push(vec![0.0, 1.0], vals[1], "R2")?;
    h.push(vec![1.0, 1.0], vals[2], "R1+R2")?;
    Ok(h)
}

fn outer_from(p1: f64, p2: f64, bound: impl Fn(f64) -> Result<f64>) -> Result<HRegion> {
    let mut h = HRegion::new(2);
    h.push(vec![1.0, 0.0], bound(p1)?, "R1")?;
    h.push(vec![0.0, 1.0], bound(p2)?, "R2")?;
    h.push(vec![1.0, 1.0], bound(p1 + p2)?, "R1+R2")?;
    Ok(h)
}

/// Where a single-user capacity value came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacitySource {
    Solver,
    /// Midpoint of the uniform lower bound and the combined upper bound.
    SandwichMidpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityValue {
    pub value: f64,
    /// Half-width of the interval known to contain the capacity.
    pub uncertainty: f64,
    pub source: CapacitySource,
}

/// Single-user capacity at `pnr`, from the solver or the sandwich midpoint.
pub fn single_capacity(pnr: f64, source: CapacitySource, spec: &QuadratureSpec) -> Result<CapacityValue> {
    check_pnr(pnr)?;
    if pnr == 0.0 {
        return Ok(CapacityValue { value: 0.0, uncertainty: 0.0, source });
    }
    match source {
        CapacitySource::Solver => {
            let r = solve_peak_capacity(pnr, DEFAULT_GRID_POINTS, DEFAULT_TOL)?;
            Ok(CapacityValue { value: r.capacity, uncertainty: r.bracket_width, source })
        }
        CapacitySource::SandwichMidpoint => {
            let lo = iu(pnr, spec)?.value;
            let hi = pp_single_upper(pnr)?.max(lo);
            Ok(CapacityValue { value: 0.5 * (lo + hi), uncertainty: 0.5 * (hi - lo), source })
        }
    }
}

/// Uniform on `[0, other]` plus the max-mass discrete law of ratio
/// `own / other` on spacing `other`.
pub fn uniform_plus_discrete(own: f64, other: f64) -> Result<InputDistribution> {
    if !(own > 0.0 && other > 0.0) {
        return domain("both peak amplitudes must be positive");
    }
    let u = make_basic(BasicLaw::Uniform { peak: other })?;
    let d = make_maxmass_discrete(own / other, other, OriginStyle::ShiftedNonneg)?;
    density_convolve(&u, &d)
}

/// Sum-rate of a uniform input for the user with PNR `other` and the
/// matching discrete input for the user with PNR `own`.
pub fn iu_plus(own: f64, other: f64, spec: &QuadratureSpec) -> Result<MiResult> {
    mi_awgn(&uniform_plus_discrete(own, other)?, 1.0, spec)
}

/// The five corners of the uniform/discrete inner region. `capacity` holds
/// the single-user capacities placed on the axes.
pub fn pp_inner_corners_2u(pt: &PpOperatingPoint, capacity: [CapacityValue; 2], spec: &QuadratureSpec) -> Result<CornerSet> {
    let (p1, p2) = pt.two()?;
    if !(p1 > 0.0 && p2 > 0.0) {
        return domain("inner corners need both PNRs positive");
    }
    let jobs: [(f64, f64, bool); 4] = [(p1, 0.0, false), (p2, 0.0, false), (p1, p2, true), (p2, p1, true)];
    let vals: Vec<MiResult> = jobs
        .par_iter()
        .map(|&(own, other, plus)| if plus { iu_plus(own, other, spec) } else { iu(own, spec) })
        .collect::<Result<_>>()?;
    let (u1, u2, up1, up2) = (vals[0].value, vals[1].value, vals[2].value, vals[3].value);
    let mi_err = vals.iter().map(|v| v.est_error).fold(0.0, f64::max);
    let cap_err = capacity[0].uncertainty.max(capacity[1].uncertainty);
    let mut c = CornerSet::new((2.0 * mi_err).max(cap_err));
    for (i, cv) in capacity.iter().enumerate() {
        if cv.source == CapacitySource::SandwichMidpoint {
            c.warnings.push(format!("user {} capacity is a sandwich midpoint (half-width {:e})", i + 1, cv.uncertainty));
        }
    }
    c.push(vec![0.0, 0.0], "origin");
    c.push(vec![capacity[0].value, 0.0], "capacity-1");
    c.push(vec![u1, up2 - u1], "uniform-1/discrete-2");
    c.push(vec![up1 - u2, u2], "discrete-1/uniform-2");
    c.push(vec![0.0, capacity[1].value], "capacity-2");
    Ok(c)
}

/// Closed-form sum-rate lower bound when the user with PNR `own` sends the
/// discrete companion of the other user's uniform input:
/// `½ ln(1 + (n/(n+1))^{2(n-a)} (n+1)^2 other^2 / (2 pi e))`, `a = own/other`.
pub fn cross_lower(own: f64, other: f64) -> Result<f64> {
    if !(own > 0.0 && other > 0.0) {
        return domain("both PNRs must be positive");
    }
    let a = own / other;
    let n = a.ceil();
    let ratio = (n / (n + 1.0)).powf(2.0 * (n - a));
    Ok(0.5 * (ratio * (n + 1.0) * (n + 1.0) * other * other / (SQRT_2PI_E * SQRT_2PI_E)).ln_1p())
}

/// Closed-form inner bound: a box from the uniform lower bounds and one
/// slanted constraint through the two closed-form corners. Negative slanted
/// coefficients are kept and noted in `diagnostics`.
pub fn pp_inner_hrep_2u(pt: &PpOperatingPoint) -> Result<HRegion> {
    let (p1, p2) = pt.two()?;
    if !(p1 > 0.0 && p2 > 0.0) {
        return domain("closed-form inner bound needs both PNRs positive");
    }
    let (c1, c2) = (uniform_closed_form(p1), uniform_closed_form(p2));
    let c12 = cross_lower(p2, p1)?;
    let c21 = cross_lower(p1, p2)?;
    let alpha = c1 + c2 - c12;
    let beta = c1 + c2 - c21;
    let mut h = HRegion::new(2);
    h.push(vec![1.0, 0.0], c1, "R1")?;
    h.push(vec![0.0, 1.0], c2, "R2")?;
    h.push(vec![alpha, beta], c1 * c21 + c2 * c12 - c12 * c21, "slanted")?;
    for (name, v) in [("R1", alpha), ("R2", beta)] {
        if v < 0.0 {
            h.diagnostics.push(format!("slanted constraint has negative {name} coefficient {v:e}"));
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapProfile {
    pub n: u64,
    pub lambda: f64,
    pub gap_nats: f64,
}

/// High-PNR gap `ln((1 - lambda/(n+1)) (1 + 1/n)^lambda)` between the outer
/// bound and the uniform/discrete corner, with `lambda = n - a`.
pub fn pp_asymptotic_gap(n: u64, lambda: f64) -> Result<GapProfile> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    if !(0.0..1.0).contains(&lambda) {
        return domain(format!("lambda must lie in [0, 1), got {lambda}"));
    }
    let nf = n as f64;
    let gap = (-lambda / (nf + 1.0)).ln_1p() + lambda * (1.0 / nf).ln_1p();
    Ok(GapProfile { n, lambda, gap_nats: gap.max(0.0) })
}

/// Gap profiles for both orientations `a_i = A_i / A_other`, user 1 first.
pub fn pp_orientation_gaps(pt: &PpOperatingPoint) -> Result<[GapProfile; 2]> {
    let (p1, p2) = pt.two()?;
    if !(p1 > 0.0 && p2 > 0.0) {
        return domain("gap profiles need both PNRs positive");
    }
    let profile = |a: f64| {
        let n = a.ceil();
        pp_asymptotic_gap(n as u64, n - a)
    };
    Ok([profile(p1 / p2)?, profile(p2 / p1)?])
}

/// `lambda = 2 - log2 e`, where the `n = 1` gap peaks.
pub fn worst_gap_lambda() -> f64 {
    2.0 - std::f64::consts::LOG2_E
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricAsymptotics {
    pub c_individual: f64,
    pub c_sum: f64,
    pub sum_minus_individual_bits: f64,
}

/// High-PNR asymptotes `ln(p / sqrt(2 pi e))` and `ln(2p / sqrt(2 pi e))`.
pub fn pp_symmetric_asymptotics(pnr: f64) -> Result<SymmetricAsymptotics> {
    if !(pnr > 0.0 && pnr.is_finite()) {
        return domain(format!("PNR must be positive, got {pnr}"));
    }
    let c_individual = (pnr / SQRT_2PI_E).ln();
    let c_sum = (2.0 * pnr / SQRT_2PI_E).ln();
    Ok(SymmetricAsymptotics { c_individual, c_sum, sum_minus_individual_bits: (c_sum - c_individual) / std::f64::consts::LN_2 })
}

/// Upper bound at `2 pnr` minus the uniform rate at `pnr`, in bits.
pub fn pp_symmetric_bound_difference(pnr: f64, spec: &QuadratureSpec) -> Result<f64> {
    let upper = pp_single_upper(2.0 * pnr)?;
    let lower = iu(pnr, spec)?.value;
    Ok((upper - lower) / std::f64::consts::LN_2)
}
