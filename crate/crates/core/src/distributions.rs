//! Input laws: exponential, uniform, Erlang, the exponential-noise
//! capacity-achieving mixture, geometric lattices, the max-mass discrete laws
//! of the uniform-noise channel, and exact convolution of independent inputs.
//!
//! A law is a finite set of atoms plus a weighted list of continuous
//! components. Every component knows its own density, support, breakpoints
//! and (when available) its CDF, so the mutual-information engines can work
//! without any binning.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::quadrature::{graded_breakpoints, integrate, Interval};
use crate::numerics::special::{digamma_int, ln_factorial};

/// Mass tolerance for the normalization invariant.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Retained probability of a truncated geometric lattice.
pub const GEOMETRIC_RETAINED_MASS: f64 = 1.0 - 1e-12;

/// Upper limit on the number of lattice atoms a geometric law may carry.
pub const MAX_LATTICE_ATOMS: usize = 4_000_000;

/// A point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// Continuous building blocks, each anchored at the origin before `offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Exponential { mean: f64 },
    Uniform { width: f64 },
    Erlang { shape: u32, scale: f64 },
    /// Density of the independent sum of two components.
    Convolution(Box<Component>, Box<Component>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub shape: Shape,
    pub offset: f64,
}

fn erlang_log_pdf(u: f64, k: u32, scale: f64) -> f64 {
    if u <= 0.0 {
        return if k == 1 && u == 0.0 { -scale.ln() } else { f64::NEG_INFINITY };
    }
    (k as f64 - 1.0) * u.ln() - u / scale - k as f64 * scale.ln() - ln_factorial(k as u64 - 1)
}

/// `ln P(S > x)` for `S ~ Erlang(k, scale)`.
fn erlang_log_survival(x: f64, k: u32, scale: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let u = x / scale;
    let ln_u = u.ln();
    let logs: Vec<f64> = (0..k).map(|j| j as f64 * ln_u - ln_factorial(j as u64)).collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = logs.iter().map(|l| (l - m).exp()).sum();
    -u + m + s.ln()
}

impl Component {
    pub fn new(shape: Shape, offset: f64) -> Self {
        Self { shape, offset }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let u = x - self.offset;
        match &self.shape {
            Shape::Exponential { mean } => {
                if u < 0.0 {
                    0.0
                } else {
                    (-u / mean).exp() / mean
                }
            }
            Shape::Uniform { width } => {
                if (0.0..=*width).contains(&u) {
                    1.0 / width
                } else {
                    0.0
                }
            }
            Shape::Erlang { shape, scale } => erlang_log_pdf(u, *shape, *scale).exp(),
            Shape::Convolution(a, b) => convolution_pdf(a, b, u),
        }
    }

    /// Closed-form CDF where one exists.
    pub fn cdf(&self, x: f64) -> Option<f64> {
        let u = x - self.offset;
        match &self.shape {
            Shape::Exponential { mean } => Some(if u <= 0.0 { 0.0 } else { -(-u / mean).exp_m1() }),
            Shape::Uniform { width } => Some((u / width).clamp(0.0, 1.0)),
            Shape::Erlang { shape, scale } => Some(-erlang_log_survival(u, *shape, *scale).exp_m1()),
            Shape::Convolution(..) => None,
        }
    }

    /// Exact support; the upper end may be infinite.
    pub fn support(&self) -> Interval {
        let (lo, hi) = match &self.shape {
            Shape::Exponential { .. } | Shape::Erlang { .. } => (0.0, f64::INFINITY),
            Shape::Uniform { width } => (0.0, *width),
            Shape::Convolution(a, b) => {
                let (sa, sb) = (a.support(), b.support());
                (sa.lo + sb.lo, sa.hi + sb.hi)
            }
        };
        Interval::new(lo + self.offset, hi + self.offset)
    }

    /// Point beyond which the component carries less than `eps` probability.
    pub fn effective_hi(&self, eps: f64) -> f64 {
        let local = match &self.shape {
            Shape::Exponential { mean } => -mean * eps.ln(),
            Shape::Uniform { width } => *width,
            Shape::Erlang { shape, scale } => {
                let target = eps.ln();
                let mut hi = *shape as f64 * scale;
                while erlang_log_survival(hi, *shape, *scale) > target {
                    hi *= 2.0;
                }
                let (mut lo, mut h) = (0.0, hi);
                for _ in 0..80 {
                    let m = 0.5 * (lo + h);
                    if erlang_log_survival(m, *shape, *scale) > target {
                        lo = m;
                    } else {
                        h = m;
                    }
                }
                h
            }
            Shape::Convolution(a, b) => a.effective_hi(eps) + b.effective_hi(eps),
        };
        local + self.offset
    }

    /// Points where the density or one of its derivatives jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        let local = match &self.shape {
            Shape::Exponential { .. } | Shape::Erlang { .. } => vec![0.0],
            Shape::Uniform { width } => vec![0.0, *width],
            Shape::Convolution(a, b) => {
                let mut out = Vec::new();
                for p in a.breakpoints() {
                    for q in b.breakpoints() {
                        out.push(p + q);
                    }
                }
                out
            }
        };
        let mut pts: Vec<f64> = local.into_iter().map(|p| p + self.offset).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn mean(&self) -> f64 {
        self.offset
            + match &self.shape {
                Shape::Exponential { mean } => *mean,
                Shape::Uniform { width } => 0.5 * width,
                Shape::Erlang { shape, scale } => *shape as f64 * scale,
                Shape::Convolution(a, b) => a.mean() + b.mean(),
            }
    }

    /// Characteristic width, used to size quadrature panels.
    pub fn scale(&self) -> f64 {
        match &self.shape {
            Shape::Exponential { mean } => *mean,
            Shape::Uniform { width } => *width,
            Shape::Erlang { shape, scale } => scale * (*shape as f64).sqrt(),
            Shape::Convolution(a, b) => a.scale().min(b.scale()),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.support().hi.is_finite()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.offset
            + match &self.shape {
                Shape::Exponential { mean } => Exp::new(1.0 / mean).expect("positive mean").sample(rng),
                Shape::Uniform { width } => width * rng.random::<f64>(),
                Shape::Erlang { shape, scale } => {
                    let e = Exp::new(1.0 / scale).expect("positive scale");
                    (0..*shape).map(|_| e.sample(rng)).sum()
                }
                Shape::Convolution(a, b) => a.sample(rng) + b.sample(rng),
            }
    }
}

fn convolution_pdf(a: &Component, b: &Component, y: f64) -> f64 {
    let eps = 1e-18;
    let (sa, sb) = (a.support(), b.support());
    let lo = sa.lo.max(y - b.effective_hi(eps));
    let hi = a.effective_hi(eps).min(y - sb.lo);
    if !(hi > lo) {
        return 0.0;
    }
    let mut anchors = vec![lo, hi];
    anchors.extend(a.breakpoints().into_iter().filter(|p| *p > lo && *p < hi));
    anchors.extend(b.breakpoints().into_iter().map(|q| y - q).filter(|p| *p > lo && *p < hi));
    let width = a.scale().min(b.scale()).min(hi - lo);
    let bps = graded_breakpoints(&anchors, width / 8.0);
    let tol = 1e-13 / (a.scale() + b.scale());
    integrate(|x| a.pdf(x) * b.pdf(y - x), &bps, tol, 1 << 14).map(|r| r.0).unwrap_or(f64::NAN)
}

/// A continuous component with its probability weight inside a law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weighted {
    pub weight: f64,
    pub component: Component,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    Continuous,
    Discrete,
    Mixed,
}

/// A probability law on the real line: atoms plus weighted continuous parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDistribution {
    atoms: Vec<Atom>,
    continuous: Vec<Weighted>,
}

impl InputDistribution {
    /// Build a law, merging atoms closer than `1e-12` and checking the
    /// normalization invariant.
    pub fn from_parts(atoms: Vec<Atom>, continuous: Vec<Weighted>) -> Result<Self> {
        Self::with_merge_tolerance(atoms, continuous, 1e-12)
    }

    fn with_merge_tolerance(mut atoms: Vec<Atom>, continuous: Vec<Weighted>, merge_tol: f64) -> Result<Self> {
        for a in &atoms {
            if !a.location.is_finite() || !(a.mass > 0.0 && a.mass <= 1.0 + MASS_TOLERANCE) {
                return domain(format!("invalid atom {a:?}"));
            }
        }
        for w in &continuous {
            if !(w.weight > 0.0 && w.weight <= 1.0 + MASS_TOLERANCE) {
                return domain(format!("invalid component weight {}", w.weight));
            }
        }
        atoms.sort_by(|x, y| x.location.total_cmp(&y.location));
        let atoms = merge_atoms(atoms, merge_tol);
        let total: f64 = atoms.iter().map(|a| a.mass).sum::<f64>() + continuous.iter().map(|w| w.weight).sum::<f64>();
        if (total - 1.0).abs() > MASS_TOLERANCE * (1.0 + atoms.len() as f64).sqrt() {
            return domain(format!("total probability {total} differs from 1"));
        }
        Ok(Self { atoms, continuous })
    }

    pub fn point_mass(location: f64) -> Self {
        Self { atoms: vec![Atom { location, mass: 1.0 }], continuous: Vec::new() }
    }

    pub fn discrete(atoms: Vec<Atom>) -> Result<Self> {
        Self::from_parts(atoms, Vec::new())
    }

    pub fn kind(&self) -> Kind {
        match (self.atoms.is_empty(), self.continuous.is_empty()) {
            (true, false) => Kind::Continuous,
            (false, true) => Kind::Discrete,
            _ => Kind::Mixed,
        }
    }

    /// Atoms sorted by location.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn components(&self) -> &[Weighted] {
        &self.continuous
    }

    /// Density of the continuous part (excluding atoms).
    pub fn density(&self, x: f64) -> f64 {
        self.continuous.iter().map(|w| w.weight * w.component.pdf(x)).sum()
    }

    pub fn continuous_mass(&self) -> f64 {
        self.continuous.iter().map(|w| w.weight).sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass * a.location).sum::<f64>()
            + self.continuous.iter().map(|w| w.weight * w.component.mean()).sum::<f64>()
    }

    pub fn support(&self) -> Interval {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in &self.atoms {
            lo = lo.min(a.location);
            hi = hi.max(a.location);
        }
        for w in &self.continuous {
            let s = w.component.support();
            lo = lo.min(s.lo);
            hi = hi.max(s.hi);
        }
        Interval::new(lo, hi)
    }

    /// Support truncated where the continuous tails fall below `eps`.
    pub fn effective_support(&self, eps: f64) -> Interval {
        let s = self.support();
        let mut hi = self.atoms.iter().map(|a| a.location).fold(f64::NEG_INFINITY, f64::max);
        for w in &self.continuous {
            hi = hi.max(w.component.effective_hi(eps));
        }
        Interval::new(s.lo, hi)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.support().lo >= 0.0
    }

    pub fn is_bounded(&self) -> bool {
        self.continuous.iter().all(|w| w.component.is_bounded())
    }

    /// Sum of atom masses and component weights.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>() + self.continuous_mass()
    }

    /// Smallest gap between neighbouring atoms (`inf` with fewer than two).
    pub fn min_atom_spacing(&self) -> f64 {
        self.atoms.windows(2).map(|w| w[1].location - w[0].location).fold(f64::INFINITY, f64::min)
    }

    /// Scale the law by `c > 0` (the law of `c X`).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return domain("scale factor must be positive");
        }
        let atoms = self.atoms.iter().map(|a| Atom { location: c * a.location, mass: a.mass }).collect();
        let continuous = self.continuous.iter().map(|w| Weighted { weight: w.weight, component: scale_component(&w.component, c) }).collect();
        Ok(Self { atoms, continuous })
    }
}

fn scale_component(comp: &Component, c: f64) -> Component {
    let shape = match &comp.shape {
        Shape::Exponential { mean } => Shape::Exponential { mean: mean * c },
        Shape::Uniform { width } => Shape::Uniform { width: width * c },
        Shape::Erlang { shape, scale } => Shape::Erlang { shape: *shape, scale: scale * c },
        Shape::Convolution(a, b) => Shape::Convolution(Box::new(scale_component(a, c)), Box::new(scale_component(b, c))),
    };
    Component { shape, offset: comp.offset * c }
}

/// Merge sorted atoms whose locations differ by at most `tol`.
fn merge_atoms(sorted: Vec<Atom>, tol: f64) -> Vec<Atom> {
    let mut out: Vec<Atom> = Vec::with_capacity(sorted.len());
    for a in sorted {
        match out.last_mut() {
            Some(last) if (a.location - last.location).abs() <= tol => {
                let m = last.mass + a.mass;
                last.location = (last.location * last.mass + a.location * a.mass) / m;
                last.mass = m;
            }
            _ => out.push(a),
        }
    }
    out
}

/// Parameters of the basic continuous laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BasicLaw {
    Exponential { mean: f64 },
    Uniform { peak: f64 },
    Erlang(ErlangLaw),
}

/// Erlang law: sum of `shape` independent exponentials of mean `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErlangLaw {
    pub shape: u32,
    pub scale: f64,
}

impl ErlangLaw {
    pub fn new(shape: u32, scale: f64) -> Result<Self> {
        if shape == 0 || !(scale > 0.0) || !scale.is_finite() {
            return domain(format!("Erlang law needs shape >= 1 and scale > 0 (got {shape}, {scale})"));
        }
        Ok(Self { shape, scale })
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be positive and finite, got {v}"))
    }
}

/// Exponential, uniform on `[0, peak]`, or Erlang. Erlang is built from its
/// closed-form density, never by repeated convolution.
pub fn make_basic(law: BasicLaw) -> Result<InputDistribution> {
    let component = match law {
        BasicLaw::Exponential { mean } => {
            positive("mean", mean)?;
            Component::new(Shape::Exponential { mean }, 0.0)
        }
        BasicLaw::Uniform { peak } => {
            positive("peak", peak)?;
            Component::new(Shape::Uniform { width: peak }, 0.0)
        }
        BasicLaw::Erlang(e) => {
            let e = ErlangLaw::new(e.shape, e.scale)?;
            Component::new(Shape::Erlang { shape: e.shape, scale: e.scale }, 0.0)
        }
    };
    Ok(InputDistribution { atoms: Vec::new(), continuous: vec![Weighted { weight: 1.0, component }] })
}

/// Capacity-achieving input of the additive exponential noise channel with
/// signal mean `es` and noise mean `en`: a point mass at zero plus an
/// exponential of mean `es + en`.
pub fn make_aen_mix(es: f64, en: f64) -> Result<InputDistribution> {
    positive("signal mean", es)?;
    positive("noise mean", en)?;
    let total = es + en;
    let atom_mass = en / total;
    let weight = es / total;
    Ok(InputDistribution {
        atoms: vec![Atom { location: 0.0, mass: atom_mass }],
        continuous: vec![Weighted { weight, component: Component::new(Shape::Exponential { mean: total }, 0.0) }],
    })
}

/// Geometric lattice law with atoms at `m * ell` and mean `mean`, truncated
/// once the retained mass reaches `1 - 1e-12` and renormalized.
pub fn make_geometric_spaced(mean: f64, ell: f64) -> Result<InputDistribution> {
    positive("mean", mean)?;
    positive("spacing", ell)?;
    let p0 = ell / (ell + mean);
    let ln_q = (mean / (ell + mean)).ln();
    // number of atoms so that q^M <= 1e-12
    let count = ((1.0 - GEOMETRIC_RETAINED_MASS).ln() / ln_q).ceil().max(1.0);
    if !(count <= MAX_LATTICE_ATOMS as f64) {
        return Err(Error::Domain(format!(
            "geometric lattice with mean {mean} and spacing {ell} needs {count} atoms (limit {MAX_LATTICE_ATOMS})"
        )));
    }
    let count = count as usize;
    let mut atoms = Vec::with_capacity(count);
    let mut retained = 0.0;
    for m in 0..count {
        let mass = p0 * (m as f64 * ln_q).exp();
        retained += mass;
        atoms.push(Atom { location: m as f64 * ell, mass });
    }
    for a in &mut atoms {
        a.mass /= retained;
    }
    Ok(InputDistribution { atoms, continuous: Vec::new() })
}

/// Placement of the max-mass discrete law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OriginStyle {
    /// Atoms at `±(a - 2m) spacing`: input of the uniform-noise channel on `[-spacing, spacing]`.
    SymmetricPm,
    /// Atoms at `(a - m) spacing` and `m spacing`: the discrete companion of a
    /// uniform input on `[0, spacing]`.
    ShiftedNonneg,
}

/// The discrete law with masses `(n - m) / (n (n + 1))`, `n = ceil(a)`,
/// placed per `style`. Atoms within `1e-9 spacing` are merged.
pub fn make_maxmass_discrete(a: f64, spacing: f64, style: OriginStyle) -> Result<InputDistribution> {
    positive("a", a)?;
    positive("spacing", spacing)?;
    let n = a.ceil() as u64;
    let denom = (n * (n + 1)) as f64;
    let mut atoms = Vec::with_capacity(2 * n as usize);
    for m in 0..n {
        let mass = (n - m) as f64 / denom;
        let (x1, x2) = match style {
            OriginStyle::SymmetricPm => ((a - 2.0 * m as f64) * spacing, (-a + 2.0 * m as f64) * spacing),
            OriginStyle::ShiftedNonneg => ((a - m as f64) * spacing, m as f64 * spacing),
        };
        atoms.push(Atom { location: x1, mass });
        atoms.push(Atom { location: x2, mass });
    }
    InputDistribution::with_merge_tolerance(atoms, Vec::new(), 1e-9 * spacing)
}

/// Law of the independent sum of two nonnegative inputs.
pub fn density_convolve(d1: &InputDistribution, d2: &InputDistribution) -> Result<InputDistribution> {
    if !d1.is_nonnegative() || !d2.is_nonnegative() {
        return domain("convolution operands must be nonnegative");
    }
    let mut atoms = Vec::with_capacity(d1.atoms.len() * d2.atoms.len());
    for a in &d1.atoms {
        for b in &d2.atoms {
            atoms.push(Atom { location: a.location + b.location, mass: a.mass * b.mass });
        }
    }
    let mut continuous = Vec::new();
    let shift = |atom: &Atom, w: &Weighted| Weighted {
        weight: atom.mass * w.weight,
        component: Component { shape: w.component.shape.clone(), offset: w.component.offset + atom.location },
    };
    for a in &d1.atoms {
        for w in &d2.continuous {
            continuous.push(shift(a, w));
        }
    }
    for b in &d2.atoms {
        for w in &d1.continuous {
            continuous.push(shift(b, w));
        }
    }
    for w1 in &d1.continuous {
        for w2 in &d2.continuous {
            continuous.push(Weighted {
                weight: w1.weight * w2.weight,
                component: Component::new(Shape::Convolution(Box::new(w1.component.clone()), Box::new(w2.component.clone())), 0.0),
            });
        }
    }
    let scale = d1.support().hi.abs().max(d2.support().hi.abs()).max(1.0);
    let merge_tol = if scale.is_finite() { 1e-12 * scale } else { 1e-12 };
    InputDistribution::with_merge_tolerance(atoms, continuous, merge_tol)
}

/// Differential entropy (nats) of an Erlang law:
/// `K + ln((K-1)!) + ln E + (1 - K) psi(K)`.
pub fn erlang_entropy(law: ErlangLaw) -> Result<f64> {
    let law = ErlangLaw::new(law.shape, law.scale)?;
    let k = law.shape as u64;
    Ok(k as f64 + ln_factorial(k - 1) + law.scale.ln() + (1.0 - k as f64) * digamma_int(k)?)
}
