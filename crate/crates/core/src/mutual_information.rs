//! Mutual information `I(X; X + Z)` for Gaussian and uniform noise.
//!
//! The Gaussian engine evaluates the exact output density (a Gaussian mixture
//! over the atoms plus the smoothed continuous components) and integrates
//! `-p ln p` with the shared adaptive rule. No binning is involved.

use serde::{Deserialize, Serialize};

use crate::distributions::{Component, InputDistribution, Kind, Shape};
use crate::error::{domain, Error, Result};
use crate::numerics::quadrature::{entropy_over, graded_breakpoints, integrate, integrate_adaptive, neg_p_log_p, QuadratureSpec};
use crate::numerics::special::{erfcx, q_unchecked, std_normal_pdf};

/// Safety factor applied to `abs_tol` when reporting quadrature error.
pub const EST_ERROR_FACTOR: f64 = 4.0;

/// Largest atom count for which atoms become quadrature breakpoints.
const MAX_ATOM_BREAKPOINTS: usize = 20_000;

/// Tail probability below which continuous components are truncated.
const TAIL_EPS: f64 = 1e-17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    MonteCarlo,
    ClosedForm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte_carlo",
            Method::ClosedForm => "closed_form",
        }
    }
}

/// A mutual-information value in nats with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiResult {
    pub value: f64,
    pub method: Method,
    pub est_error: f64,
}

/// A continuous component prepared for repeated Gaussian smoothing.
#[derive(Debug, Clone)]
struct Smoothed {
    weight: f64,
    component: Component,
    lo: f64,
    hi: f64,
    breakpoints: Vec<f64>,
}

impl Smoothed {
    fn new(weight: f64, component: Component) -> Self {
        let lo = component.support().lo;
        let hi = component.effective_hi(TAIL_EPS);
        let breakpoints = component.breakpoints();
        Self { weight, component, lo, hi, breakpoints }
    }

    /// Density at `y` of the component plus Gaussian noise of scale `sigma`.
    fn density(&self, y: f64, sigma: f64, tail: f64) -> f64 {
        let u = y - self.component.offset;
        match self.component.shape {
            Shape::Uniform { width } => {
                let u1 = u / sigma;
                let u2 = (u - width) / sigma;
                // difference of the two tails taken on the side where both are small
                let p = if u1 + u2 >= 0.0 { q_unchecked(u2) - q_unchecked(u1) } else { q_unchecked(-u1) - q_unchecked(-u2) };
                p.max(0.0) / width
            }
            Shape::Exponential { mean } => {
                let t = sigma / mean - u / sigma;
                let p = if t > 5.0 {
                    0.5 * erfcx(t / std::f64::consts::SQRT_2) * (-0.5 * (u / sigma) * (u / sigma)).exp()
                } else {
                    (0.5 * (sigma / mean) * (sigma / mean) - u / mean).exp() * q_unchecked(t)
                };
                p / mean
            }
            _ => self.numeric_density(y, sigma, tail),
        }
    }

    fn numeric_density(&self, y: f64, sigma: f64, tail: f64) -> f64 {
        let lo = self.lo.max(y - tail * sigma);
        let hi = self.hi.min(y + tail * sigma);
        if !(hi > lo) {
            return 0.0;
        }
        let mut pts = vec![lo, hi];
        pts.extend(self.breakpoints.iter().copied().filter(|p| *p > lo && *p < hi));
        if y > lo && y < hi {
            pts.push(y);
        }
        pts.sort_by(f64::total_cmp);
        let mut bps = Vec::with_capacity(pts.len() * 4);
        for w in pts.windows(2) {
            let pieces = ((w[1] - w[0]) / sigma).ceil().max(1.0) as usize;
            for k in 0..pieces {
                bps.push(w[0] + (w[1] - w[0]) * k as f64 / pieces as f64);
            }
        }
        bps.push(hi);
        let scale = sigma.max(self.component.scale());
        let tol = 1e-13 / scale;
        integrate(|x| self.component.pdf(x) * std_normal_pdf((y - x) / sigma) / sigma, &bps, tol, 1 << 14)
            .map(|r| r.0.max(0.0))
            .unwrap_or(f64::NAN)
    }
}

/// Density of `Y = X + Z` with `Z ~ N(0, sigma^2)`.
#[derive(Debug, Clone)]
pub(crate) struct GaussianOutput {
    locations: Vec<f64>,
    masses: Vec<f64>,
    smoothed: Vec<Smoothed>,
    sigma: f64,
    tail: f64,
}

impl GaussianOutput {
    /// `tail` is the number of standard deviations beyond which atom and
    /// component contributions are ignored.
    pub(crate) fn new(dist: &InputDistribution, sigma: f64, tail: f64) -> Self {
        Self {
            locations: dist.atoms().iter().map(|a| a.location).collect(),
            masses: dist.atoms().iter().map(|a| a.mass).collect(),
            smoothed: dist.components().iter().map(|w| Smoothed::new(w.weight, w.component.clone())).collect(),
            sigma,
            tail,
        }
    }

    pub(crate) fn pdf(&self, y: f64) -> f64 {
        let reach = self.tail * self.sigma;
        let start = self.locations.partition_point(|x| *x < y - reach);
        let end = self.locations.partition_point(|x| *x <= y + reach);
        let mut p = 0.0;
        for i in start..end {
            p += self.masses[i] * std_normal_pdf((y - self.locations[i]) / self.sigma);
        }
        p /= self.sigma;
        for s in &self.smoothed {
            p += s.weight * s.density(y, self.sigma, self.tail);
        }
        p
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        domain(format!("noise scale must be positive and finite, got {sigma}"))
    }
}

/// Quadrature panels for the output entropy of a Gaussian channel.
fn output_breakpoints(dist: &InputDistribution, sigma: f64, tail: f64) -> Vec<f64> {
    let support = dist.effective_support(TAIL_EPS);
    let mut anchors = vec![support.lo - tail * sigma, support.hi + tail * sigma];
    let atoms = dist.atoms();
    if atoms.len() <= MAX_ATOM_BREAKPOINTS && dist.min_atom_spacing() >= 0.25 * sigma {
        anchors.extend(atoms.iter().map(|a| a.location));
    } else if let (Some(first), Some(last)) = (atoms.first(), atoms.last()) {
        anchors.push(first.location);
        anchors.push(last.location);
    }
    for w in dist.components() {
        anchors.extend(w.component.breakpoints());
    }
    graded_breakpoints(&anchors, 0.5 * sigma)
}

/// `I(X; X + Z)` in nats for `Z ~ N(0, sigma^2)`, as `h(Y) - ½ ln(2 pi e sigma^2)`.
///
/// Values are clamped at zero; the reported `est_error` is `4 abs_tol`.
pub fn mi_awgn(dist: &InputDistribution, sigma: f64, spec: &QuadratureSpec) -> Result<MiResult> {
    check_sigma(sigma)?;
    spec.validate()?;
    let est_error = EST_ERROR_FACTOR * spec.abs_tol;
    if dist.kind() == Kind::Discrete && dist.atoms().len() == 1 {
        return Ok(MiResult { value: 0.0, method: Method::Quadrature, est_error });
    }
    let out = GaussianOutput::new(dist, sigma, spec.tail_sigma);
    let bps = output_breakpoints(dist, sigma, spec.tail_sigma);
    let (h, _) = entropy_over(|y| out.pdf(y), &bps, spec)?;
    let h_noise = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma * sigma).ln();
    Ok(MiResult { value: (h - h_noise).max(0.0), method: Method::Quadrature, est_error })
}

/// `I(X; X + Z)` in nats for `Z` uniform on `[-half_width, half_width]`.
///
/// Discrete inputs give a piecewise-constant output density that is
/// integrated exactly; bounded continuous parts are smoothed through their
/// CDF and integrated numerically.
pub fn mi_uniform_noise(dist: &InputDistribution, half_width: f64) -> Result<MiResult> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return domain(format!("half_width must be positive and finite, got {half_width}"));
    }
    for w in dist.components() {
        if !w.component.is_bounded() || w.component.cdf(0.0).is_none() {
            return Err(Error::Unsupported(
                "uniform-noise mutual information needs bounded continuous parts with a closed-form CDF".into(),
            ));
        }
    }
    let width = 2.0 * half_width;
    let h_noise = width.ln();
    let atoms = dist.atoms();

    // edges where the atom part of the output density jumps
    let mut edges: Vec<(f64, f64)> = Vec::with_capacity(2 * atoms.len());
    for a in atoms {
        edges.push((a.location - half_width, a.mass / width));
        edges.push((a.location + half_width, -a.mass / width));
    }
    edges.sort_by(|x, y| x.0.total_cmp(&y.0));

    if dist.components().is_empty() {
        let mut h = 0.0;
        let mut level = 0.0;
        for i in 0..edges.len() {
            level += edges[i].1;
            if i + 1 < edges.len() {
                let len = edges[i + 1].0 - edges[i].0;
                if len > 0.0 && level > 0.0 {
                    h += len * neg_p_log_p(level);
                }
            }
        }
        return Ok(MiResult { value: (h - h_noise).max(0.0), method: Method::ClosedForm, est_error: 1e-12 * (1.0 + h.abs()) });
    }

    let density = |y: f64| {
        let mut p: f64 = atoms.iter().filter(|a| (y - a.location).abs() <= half_width).map(|a| a.mass).sum::<f64>() / width;
        for w in dist.components() {
            let c = &w.component;
            let f = c.cdf(y + half_width).unwrap_or(0.0) - c.cdf(y - half_width).unwrap_or(0.0);
            p += w.weight * f.max(0.0) / width;
        }
        p
    };
    let mut bps: Vec<f64> = edges.iter().map(|e| e.0).collect();
    for w in dist.components() {
        for b in w.component.breakpoints() {
            bps.push(b - half_width);
            bps.push(b + half_width);
        }
    }
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let r = integrate_adaptive(
        |y| {
            let p = density(y);
            [neg_p_log_p(p), p]
        },
        &bps,
        [1e-10, 1e-12],
        1 << 18,
    )?;
    let mass = r.value[1];
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::InconsistentDensity { mass, tolerance: 1e-9 });
    }
    Ok(MiResult { value: (r.value[0] - h_noise).max(0.0), method: Method::Quadrature, est_error: 4.0 * r.error[0].max(1e-10) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_aen_mix, make_basic, make_maxmass_discrete, Atom, BasicLaw, ErlangLaw, OriginStyle};
    use crate::numerics::special::{EULER_GAMMA, E_OVER_2PI, SQRT_2PI_E};
    use rand::{Rng, SeedableRng};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    // direct convolution of a component density with the Gaussian kernel
    fn brute_smooth(c: &Component, y: f64, sigma: f64) -> f64 {
        let s = c.support();
        let lo = s.lo.max(y - 12.0 * sigma);
        let hi = c.effective_hi(1e-18).min(y + 12.0 * sigma);
        if hi <= lo {
            return 0.0;
        }
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        // composite Simpson
        let f = |x: f64| c.pdf(x) * std_normal_pdf((y - x) / sigma) / sigma;
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            let x = lo + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        acc * h / 3.0
    }

    #[test]
    fn smoothing_closed_forms_match_brute_force() {
        let sigma = 1.3;
        for comp in [
            Component::new(Shape::Exponential { mean: 0.05 }, 0.0),
            Component::new(Shape::Exponential { mean: 7.0 }, 2.0),
            Component::new(Shape::Uniform { width: 3.0 }, 1.0),
            Component::new(Shape::Erlang { shape: 3, scale: 0.8 }, 0.0),
        ] {
            let s = Smoothed::new(1.0, comp.clone());
            for i in 0..40 {
                let y = -6.0 + i as f64 * 0.7;
                let a = s.density(y, sigma, 12.0);
                let b = brute_smooth(&comp, y, sigma);
                assert!((a - b).abs() < 1e-9, "{comp:?} y={y}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn exponential_smoothing_deep_tail_is_finite() {
        let s = Smoothed::new(1.0, Component::new(Shape::Exponential { mean: 1e-3 }, 0.0));
        for y in [-7.0, -3.0, 0.0, 2.0, 6.0] {
            let p = s.density(y, 1.0, 8.0);
            assert!(p.is_finite() && p >= 0.0);
            // a near-degenerate exponential behaves like a point mass at its mean
            assert!((p / std_normal_pdf(y - 1e-3) - 1.0).abs() < 1e-4, "y = {y}");
        }
    }

    #[test]
    fn exponential_input_is_sandwiched() {
        let d = make_basic(BasicLaw::Exponential { mean: 10.0 }).unwrap();
        let r = mi_awgn(&d, 1.0, &spec()).unwrap();
        let lo = 0.5 * (1.0 + E_OVER_2PI * 100.0).ln();
        let hi = 0.5 * (E_OVER_2PI * 144.0).ln();
        assert!(r.value >= lo && r.value <= hi, "{}", r.value);
        assert_eq!(r.method, Method::Quadrature);
    }

    #[test]
    fn point_mass_carries_no_information() {
        for c in [0.0, 3.5, 100.0] {
            let r = mi_awgn(&InputDistribution::point_mass(c), 1.0, &spec()).unwrap();
            assert!(r.value.abs() < 1e-8);
        }
    }

    #[test]
    fn uniform_input_beats_closed_form() {
        let d = make_basic(BasicLaw::Uniform { peak: 10.0 }).unwrap();
        let r = mi_awgn(&d, 1.0, &spec()).unwrap();
        let bound = 0.5 * (1.0 + 100.0 / (SQRT_2PI_E * SQRT_2PI_E)).ln();
        assert!((bound - 0.9625).abs() < 1e-4);
        assert!(r.value >= bound);
    }

    #[test]
    fn sigma_scaling_invariance() {
        let d = make_basic(BasicLaw::Exponential { mean: 3.0 }).unwrap();
        let a = mi_awgn(&d, 1.0, &spec()).unwrap().value;
        let b = mi_awgn(&d.scaled(4.0).unwrap(), 4.0, &spec()).unwrap().value;
        assert!((a - b).abs() < 4e-6);
    }

    #[test]
    fn two_point_input_matches_direct_integral() {
        // I for equiprobable ±d/2 through unit noise, by a fine Simpson rule
        let d = InputDistribution::discrete(vec![Atom { location: 0.0, mass: 0.5 }, Atom { location: 3.0, mass: 0.5 }]).unwrap();
        let r = mi_awgn(&d, 1.0, &spec()).unwrap();
        let p = |y: f64| 0.5 * std_normal_pdf(y) + 0.5 * std_normal_pdf(y - 3.0);
        let (lo, hi, n) = (-14.0, 17.0, 400_000);
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let y = lo + i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * neg_p_log_p(p(y));
        }
        let hy = acc * h / 3.0;
        let oracle = hy - 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        assert!((r.value - oracle).abs() < 1e-7, "{} vs {}", r.value, oracle);
    }

    #[test]
    fn erlang_high_snr_entropy_gap() {
        // at high SNR, h(Y) -> h(X), so I ~ h(Erlang) - h(N)
        let e = 2000.0;
        let d = make_basic(BasicLaw::Erlang(ErlangLaw { shape: 2, scale: e })).unwrap();
        let r = mi_awgn(&d, 1.0, &spec()).unwrap();
        let hx = 2.0 + e.ln() - (1.0 - EULER_GAMMA);
        let approx = hx - 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        assert!((r.value - approx).abs() < 1e-3);
    }

    #[test]
    fn mi_awgn_validates() {
        let d = make_basic(BasicLaw::Exponential { mean: 1.0 }).unwrap();
        assert!(mi_awgn(&d, 0.0, &spec()).is_err());
        let bad = QuadratureSpec { tail_sigma: 2.0, ..spec() };
        assert!(mi_awgn(&d, 1.0, &bad).is_err());
    }

    #[test]
    fn monotone_along_grids() {
        let s = spec();
        for family in 0..3 {
            let mut prev = -1.0;
            for i in 0..20 {
                let x = 0.2 * 1.35f64.powi(i);
                let d = match family {
                    0 => make_basic(BasicLaw::Exponential { mean: x }).unwrap(),
                    1 => make_basic(BasicLaw::Uniform { peak: x }).unwrap(),
                    _ => make_aen_mix(x, 1.0).unwrap(),
                };
                let v = mi_awgn(&d, 1.0, &s).unwrap().value;
                assert!(v >= prev - 1e-9, "family {family}, point {i}");
                assert!(v >= -1e-9);
                prev = v;
            }
        }
    }

    fn lemma5_capacity(a: f64) -> f64 {
        let n = a.ceil();
        (n + 1.0).ln() - (n - a) * ((n + 1.0) / n).ln()
    }

    #[test]
    fn uniform_noise_reaches_closed_form() {
        for a in [1.0, 2.0, 3.0, 4.0, 4.7] {
            let d = make_maxmass_discrete(a, 1.0, OriginStyle::SymmetricPm).unwrap();
            let r = mi_uniform_noise(&d, 1.0).unwrap();
            assert!((r.value - lemma5_capacity(a)).abs() < 1e-10, "a = {a}");
        }
        let d = make_maxmass_discrete(4.7, 1.0, OriginStyle::SymmetricPm).unwrap();
        assert!((mi_uniform_noise(&d, 1.0).unwrap().value - 1.7371).abs() < 1e-4);
        assert_eq!(mi_uniform_noise(&InputDistribution::point_mass(0.0), 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn uniform_noise_piecewise_oracle() {
        // direct midpoint-sum of -p ln p over a fine grid
        let d = make_maxmass_discrete(4.7, 1.0, OriginStyle::SymmetricPm).unwrap();
        let n = 2_000_000;
        let (lo, hi) = (-5.7, 5.7);
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let y = lo + (i as f64 + 0.5) * h;
            let p: f64 = d.atoms().iter().filter(|a| (y - a.location).abs() <= 1.0).map(|a| a.mass).sum::<f64>() / 2.0;
            acc += neg_p_log_p(p) * h;
        }
        let oracle = acc - 2f64.ln();
        assert!((mi_uniform_noise(&d, 1.0).unwrap().value - oracle).abs() < 1e-5);
    }

    #[test]
    fn uniform_noise_scaling() {
        let d = make_maxmass_discrete(2.5, 1.0, OriginStyle::SymmetricPm).unwrap();
        let a = mi_uniform_noise(&d, 1.0).unwrap().value;
        let b = mi_uniform_noise(&d.scaled(3.0).unwrap(), 3.0).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn uniform_noise_with_continuous_part() {
        // uniform input on [0, 2] plus uniform noise on [-1, 1]: trapezoid output
        let d = make_basic(BasicLaw::Uniform { peak: 2.0 }).unwrap();
        let r = mi_uniform_noise(&d, 1.0).unwrap();
        // h(trapezoid with flat top 0 and ramps of width 2) = ½ + ln 2 for triangular with base 4
        let oracle = 0.5 + 2f64.ln() - 2f64.ln();
        assert!((r.value - oracle).abs() < 1e-8, "{}", r.value);
        let e = make_basic(BasicLaw::Exponential { mean: 1.0 }).unwrap();
        assert!(matches!(mi_uniform_noise(&e, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn lemma5_input_beats_perturbations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(428);
        for a in [1.0, 2.0, 3.0, 4.7] {
            let best = mi_uniform_noise(&make_maxmass_discrete(a, 1.0, OriginStyle::SymmetricPm).unwrap(), 1.0).unwrap().value;
            let base = make_maxmass_discrete(a, 1.0, OriginStyle::SymmetricPm).unwrap();
            for _ in 0..16 {
                let atoms: Vec<Atom> = base
                    .atoms()
                    .iter()
                    .map(|at| Atom { location: (at.location + rng.random_range(-0.3..0.3)).clamp(-a, a), mass: at.mass * rng.random_range(0.7..1.3) })
                    .collect();
                let total: f64 = atoms.iter().map(|x| x.mass).sum();
                let atoms = atoms.into_iter().map(|x| Atom { mass: x.mass / total, ..x }).collect();
                let d = InputDistribution::discrete(atoms).unwrap();
                assert!(mi_uniform_noise(&d, 1.0).unwrap().value < best + 1e-12, "a = {a}");
            }
        }
    }
}
