//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use oimac::avg_power::{
    ap_inner_corners_2u, ap_inner_hrep_2u, ap_kuser_inner_corners, ap_kuser_inner_hrep, ap_kuser_outer, ap_outer_2u, ap_single_upper, ap_type_compare,
    closed_form_lower, ie, type_asymptotic_gap, ApOperatingPoint, InnerForm,
};
use oimac::capacity_solver::solve_peak_capacity;
use oimac::distributions::{
    density_convolve, make_aen_mix, make_basic, make_geometric_spaced, make_maxmass_discrete, Atom, BasicLaw, ErlangLaw, InputDistribution, OriginStyle,
};
use oimac::mutual_information::{mi_awgn, mi_uniform_noise};
use oimac::numerics::{entropy_quadrature, mc_mi_estimate, Interval, QuadratureSpec, DEFAULT_MC_SAMPLES, DEFAULT_SEED, EULER_GAMMA};
use oimac::peak_power::{
    cross_lower, iu, iu_plus, pp_asymptotic_gap, pp_inner_corners_2u, pp_lemma5_capacity, pp_outer_2u, pp_single_upper, pp_symmetric_asymptotics,
    pp_symmetric_bound_difference, uniform_closed_form, uniform_plus_discrete, CapacitySource, CapacityValue, PpOperatingPoint,
};
use oimac::region::point_in_hrep;
use oimac_cli::{run_scenario, Payload, Scenario, ScenarioConfig};

type Check = Result<String, String>;
type Criterion = (u32, Option<Duration>, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn c01_pnr_star() -> Check {
    let doc = run_scenario(&ScenarioConfig::defaults(Scenario::PnrStar)).map_err(|e| e.to_string())?;
    let Some(Payload::Report { rows }) = doc.section("report") else { return Err("no report section".into()) };
    let v = rows.iter().find(|r| r.name == "pnr_star").ok_or("no pnr_star row")?.value;
    ensure((v - 4.1324).abs() <= 1e-3, || format!("library value {v}"))?;
    let out = Command::new(env!("CARGO_BIN_EXE_oimac")).arg("pnr-star").output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("binary exit {:?}", out.status))?;
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let bin = json["sections"][0]["payload"]["rows"][0]["value"].as_f64().ok_or("binary output lacks the value")?;
    ensure((bin - 4.1324).abs() <= 1e-3, || format!("binary value {bin}"))?;
    Ok(format!("PNR* = {v:.6}"))
}

fn c02_worst_gap() -> Check {
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..10_000 {
        let lambda = i as f64 * 1e-4;
        let g = pp_asymptotic_gap(1, lambda).map_err(|e| e.to_string())?.gap_nats;
        if g > best.1 {
            best = (lambda, g);
        }
    }
    let bits = best.1 / std::f64::consts::LN_2;
    ensure((bits - 0.0861).abs() <= 1e-4, || format!("max gap {bits} bits"))?;
    ensure((best.0 - 0.5573).abs() <= 1e-3, || format!("argmax {}", best.0))?;
    Ok(format!("max {bits:.6} bits at lambda {:.4}", best.0))
}

fn c03_symmetric_gap_zero() -> Check {
    let g = pp_asymptotic_gap(1, 0.0).map_err(|e| e.to_string())?.gap_nats;
    ensure(g == 0.0, || format!("gap {g:e}"))?;
    Ok("Delta(1,0) = 0".into())
}

fn c04_lemma5() -> Check {
    let mut worst: f64 = 0.0;
    for a in [1.0, 2.0, 3.0, 4.0, 4.7] {
        let input = make_maxmass_discrete(a, 1.0, OriginStyle::SymmetricPm).map_err(|e| e.to_string())?;
        let mi = mi_uniform_noise(&input, 1.0).map_err(|e| e.to_string())?.value;
        let c = pp_lemma5_capacity(a).map_err(|e| e.to_string())?;
        worst = worst.max((mi - c).abs());
        ensure((mi - c).abs() <= 1e-5, || format!("a={a}: {mi} vs {c}"))?;
    }
    Ok(format!("max deviation {worst:.2e} nats"))
}

fn c05_aen_identity() -> Check {
    let mut worst: f64 = 0.0;
    for (es, en) in [(1.0, 1.0), (3.0, 0.5), (0.2, 2.0)] {
        let mix = make_aen_mix(es, en).map_err(|e| e.to_string())?;
        let noise = make_basic(BasicLaw::Exponential { mean: en }).map_err(|e| e.to_string())?;
        let sum = density_convolve(&mix, &noise).map_err(|e| e.to_string())?;
        let mean = es + en;
        for i in 1..=1000 {
            let x = 15.0 * mean * i as f64 / 1000.0;
            let expect = (-x / mean).exp() / mean;
            let r = (sum.density(x) - expect).abs();
            worst = worst.max(r);
            ensure(r < 1e-8, || format!("({es},{en}) at x={x}: residual {r:e}"))?;
        }
    }
    Ok(format!("max residual {worst:.2e}"))
}

fn c06_average_sandwich() -> Check {
    let s = spec();
    for snr in [1.0, 3.0, 10.0, 31.6, 100.0, 1000.0] {
        let e = ie(snr, &s).map_err(|e| e.to_string())?;
        let lo = closed_form_lower(snr);
        let hi = ap_single_upper(snr).map_err(|e| e.to_string())?;
        ensure(lo <= e.value + e.est_error && e.value <= hi + e.est_error, || format!("snr {snr}: {lo} <= {} <= {hi} fails", e.value))?;
    }
    let outer = ap_single_upper(2000.0).map_err(|e| e.to_string())?;
    let inner = ie(2000.0, &s).map_err(|e| e.to_string())?.value;
    let gap = outer - inner;
    ensure(gap < 0.01, || format!("sum-rate gap at 1000 is {gap}"))?;
    Ok(format!("sum-rate gap at SNR 1000: {gap:.5} nats"))
}

fn c07_containment() -> Check {
    let s = spec();
    let mut worst_margin = f64::INFINITY;
    for snr in [[10.0, 5.0], [1000.0, 500.0]] {
        let pt = ApOperatingPoint::unit(snr.to_vec()).map_err(|e| e.to_string())?;
        let inner = ap_inner_corners_2u(&pt, &s).map_err(|e| e.to_string())?;
        let outer = ap_outer_2u(&pt).map_err(|e| e.to_string())?;
        for p in &inner.points {
            ensure(point_in_hrep(&outer, p, 3.0 * inner.est_error).unwrap(), || format!("average {snr:?}: {p:?} outside"))?;
            worst_margin = worst_margin.min(-outer.violation(p).unwrap());
        }
    }
    for db in [[30.0, 25.0], [10.0, 5.0]] {
        let pnr: Vec<f64> = db.iter().map(|d| 10f64.powf(d / 10.0)).collect();
        let pt = PpOperatingPoint::unit(pnr.clone()).map_err(|e| e.to_string())?;
        let caps: Vec<CapacityValue> = pnr
            .iter()
            .map(|p| {
                solve_peak_capacity(*p, 513, 1e-4).map(|r| CapacityValue { value: r.capacity, uncertainty: r.bracket_width, source: CapacitySource::Solver })
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let inner = pp_inner_corners_2u(&pt, [caps[0], caps[1]], &s).map_err(|e| e.to_string())?;
        let outer = pp_outer_2u(&pt).map_err(|e| e.to_string())?;
        for p in &inner.points {
            ensure(point_in_hrep(&outer, p, 3.0 * inner.est_error).unwrap(), || format!("peak {db:?} dB: {p:?} outside"))?;
            worst_margin = worst_margin.min(-outer.violation(p).unwrap());
        }
    }
    Ok(format!("smallest margin {worst_margin:.2e} nats"))
}

fn c08_epi_chain() -> Check {
    let s = spec();
    let a1 = 10.0;
    let mut worst: f64 = 0.0;
    for a in [0.4427, 1.0, 1.7, 3.0] {
        let numeric = iu_plus(a * a1, a1, &s).map_err(|e| e.to_string())?;
        let closed = cross_lower(a * a1, a1).map_err(|e| e.to_string())?;
        ensure(numeric.value + numeric.est_error >= closed, || format!("a={a}: numeric {} < closed form {closed}", numeric.value))?;
        let d = uniform_plus_discrete(a * a1, a1).map_err(|e| e.to_string())?;
        let mut bps: Vec<f64> = d.components().iter().flat_map(|w| w.component.breakpoints()).collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        let ivs: Vec<Interval> = bps.windows(2).map(|w| Interval::new(w[0], w[1])).collect();
        let h = entropy_quadrature(|x| d.density(x), &ivs, &s).map_err(|e| e.to_string())?;
        let expect = pp_lemma5_capacity(a).map_err(|e| e.to_string())? + a1.ln();
        worst = worst.max((h - expect).abs());
        ensure((h - expect).abs() <= 1e-4, || format!("a={a}: entropy {h} vs {expect}"))?;
    }
    Ok(format!("entropy identity max deviation {worst:.2e}"))
}

fn c09_one_bit() -> Check {
    let formula = pp_symmetric_asymptotics(1e4).map_err(|e| e.to_string())?.sum_minus_individual_bits;
    ensure((formula - 1.0).abs() < 1e-12, || format!("formula difference {formula}"))?;
    let d = pp_symmetric_bound_difference(1e4, &spec()).map_err(|e| e.to_string())?;
    ensure((0.98..=1.02).contains(&d), || format!("bound-based difference {d} bits"))?;
    Ok(format!("bound-based difference {d:.5} bits"))
}

/// Entropy of Erlang(2, 1) by direct quadrature of `x e^{-x} (x - ln x)`,
/// after `x = e^t`, composite Simpson on a fine grid.
fn erlang2_entropy_direct() -> f64 {
    let (lo, hi, n) = (-45.0f64, 4.5f64, 400_000usize);
    let h = (hi - lo) / n as f64;
    let f = |t: f64| {
        let x = t.exp();
        x * x * (-x).exp() * (x - t)
    };
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        acc += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

fn c10_type_comparison() -> Check {
    let g1 = type_asymptotic_gap(1).map_err(|e| e.to_string())?;
    ensure(g1 == 0.0, || format!("K=1 gap {g1}"))?;
    let g2 = type_asymptotic_gap(2).map_err(|e| e.to_string())?;
    // exponential of mean 2 minus Erlang(2, 1)
    let oracle = 1.0 + 2f64.ln() - erlang2_entropy_direct();
    ensure((g2 - oracle).abs() <= 1e-9, || format!("K=2 gap {g2} vs oracle {oracle}"))?;
    ensure((g2 - (2f64.ln() - EULER_GAMMA)).abs() <= 1e-9, || format!("K=2 gap {g2} vs ln 2 - gamma"))?;
    let mut prev = g2;
    for k in [4, 8, 16, 32, 64, 128] {
        let g = type_asymptotic_gap(k).map_err(|e| e.to_string())?;
        ensure(g > prev, || format!("gap not increasing at K={k}"))?;
        prev = g;
    }
    let cmp = ap_type_compare(2, 1e3, &spec()).map_err(|e| e.to_string())?;
    let finite = cmp.sum_rate_type1.value - cmp.sum_rate_type2.value;
    ensure((finite - g2).abs() <= 0.02, || format!("finite-SNR difference {finite} vs {g2}"))?;
    Ok(format!("K=2 gap {g2:.10}, finite-SNR {finite:.5}"))
}

fn c11_kuser() -> Check {
    let s = spec();
    let pt2 = ApOperatingPoint::unit(vec![10.0, 5.0]).map_err(|e| e.to_string())?;
    ensure(ap_kuser_outer(&pt2).unwrap() == ap_outer_2u(&pt2).unwrap(), || "K=2 outer differs".into())?;
    ensure(ap_kuser_inner_hrep(&pt2, InnerForm::ClosedForm, &s).unwrap() == ap_inner_hrep_2u(&pt2).unwrap(), || "K=2 inner H-rep differs".into())?;
    let two = ap_inner_corners_2u(&pt2, &s).map_err(|e| e.to_string())?;
    let k2 = ap_kuser_inner_corners(&pt2, &[0, 1], &s).map_err(|e| e.to_string())?;
    for p in k2.points.iter().filter(|p| p.iter().any(|v| *v != 0.0)) {
        ensure(two.points.iter().any(|q| q.iter().zip(p).all(|(a, b)| a.to_bits() == b.to_bits())), || format!("K=2 corner {p:?} not bit-identical"))?;
    }
    let pt3 = ApOperatingPoint::unit(vec![10.0, 5.0, 3.0]).map_err(|e| e.to_string())?;
    let corners = ap_kuser_inner_corners(&pt3, &[0, 1, 2], &s).map_err(|e| e.to_string())?;
    let total = ie(18.0, &s).map_err(|e| e.to_string())?.value;
    let outer = ap_kuser_outer(&pt3).map_err(|e| e.to_string())?;
    let slack = 3.0 * corners.est_error;
    let mut perms = 0;
    for (p, l) in corners.points.iter().zip(&corners.labels) {
        if l.starts_with("order") {
            perms += 1;
            let sum: f64 = p.iter().sum();
            ensure((sum - total).abs() <= slack, || format!("{l}: sum {sum} vs {total}"))?;
        }
        ensure(point_in_hrep(&outer, p, slack).unwrap(), || format!("{l} outside the outer region"))?;
    }
    ensure(perms == 6, || format!("{perms} permutation corners"))?;
    Ok(format!("{} K=3 corners checked", corners.points.len()))
}

fn c12_solver() -> Check {
    let tol = 1e-4;
    let s = spec();
    let mut prev = 0.0;
    let mut caps = Vec::new();
    for p in [0.5, 1.0, 2.0, 4.0, 10.0, 31.6] {
        let r = solve_peak_capacity(p, 513, tol).map_err(|e| e.to_string())?;
        let lower = uniform_closed_form(p);
        let numeric = iu(p, &s).map_err(|e| e.to_string())?;
        let upper = pp_single_upper(p).map_err(|e| e.to_string())?;
        ensure(r.capacity + r.bracket_width >= lower, || format!("pnr {p}: below closed-form lower"))?;
        ensure(r.capacity + r.bracket_width >= numeric.value - numeric.est_error, || format!("pnr {p}: below uniform rate"))?;
        ensure(r.capacity - r.bracket_width <= upper, || format!("pnr {p}: {} above upper {upper}", r.capacity))?;
        ensure(r.capacity >= prev, || format!("pnr {p}: not monotone"))?;
        prev = r.capacity;
        caps.push((p, r.capacity));
    }
    let mut worst: f64 = 0.0;
    for p in [1.0, 4.0, 10.0] {
        let coarse = caps.iter().find(|c| c.0 == p).unwrap().1;
        let fine = solve_peak_capacity(p, 1025, tol).map_err(|e| e.to_string())?.capacity;
        worst = worst.max((fine - coarse).abs());
        ensure((fine - coarse).abs() < 5.0 * tol, || format!("pnr {p}: refinement moved {}", fine - coarse))?;
    }
    Ok(format!("largest refinement change {worst:.2e} nats"))
}

fn mc_suite() -> Result<Vec<(&'static str, InputDistribution)>, oimac::Error> {
    let xd = make_maxmass_discrete(0.4427, 3.0, OriginStyle::ShiftedNonneg)?;
    Ok(vec![
        ("exponential(1)", make_basic(BasicLaw::Exponential { mean: 1.0 })?),
        ("exponential(10)", make_basic(BasicLaw::Exponential { mean: 10.0 })?),
        ("uniform(1)", make_basic(BasicLaw::Uniform { peak: 1.0 })?),
        ("uniform(10)", make_basic(BasicLaw::Uniform { peak: 10.0 })?),
        ("aen(2,1)", make_aen_mix(2.0, 1.0)?),
        ("geometric(3,1.5)", make_geometric_spaced(3.0, 1.5)?),
        ("maxmass(1.7,2)", make_maxmass_discrete(1.7, 2.0, OriginStyle::ShiftedNonneg)?),
        ("uniform(3)+maxmass(0.4427)", density_convolve(&make_basic(BasicLaw::Uniform { peak: 3.0 })?, &xd)?),
        ("erlang(2,2)", make_basic(BasicLaw::Erlang(ErlangLaw::new(2, 2.0)?))?),
        ("two-point{0,3}", InputDistribution::discrete(vec![Atom { location: 0.0, mass: 0.5 }, Atom { location: 3.0, mass: 0.5 }])?),
    ])
}

fn c13_oracle_equivalence() -> Check {
    let s = spec();
    let suite = mc_suite().map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (name, d) in &suite {
        let q = mi_awgn(d, 1.0, &s).map_err(|e| e.to_string())?;
        let mc = mc_mi_estimate(d, 1.0, DEFAULT_MC_SAMPLES, DEFAULT_SEED).map_err(|e| e.to_string())?;
        let z = (q.value - mc.mean).abs() / mc.std_error;
        worst = worst.max(z);
        ensure(z <= 3.0, || format!("{name}: quadrature {} vs MC {} +- {}", q.value, mc.mean, mc.std_error))?;
    }
    let d = &suite[7].1;
    let a = mc_mi_estimate(d, 1.0, DEFAULT_MC_SAMPLES, DEFAULT_SEED).map_err(|e| e.to_string())?;
    let b = mc_mi_estimate(d, 1.0, DEFAULT_MC_SAMPLES, DEFAULT_SEED).map_err(|e| e.to_string())?;
    ensure(a.mean.to_bits() == b.mean.to_bits() && a.std_error.to_bits() == b.std_error.to_bits(), || "MC not deterministic".into())?;
    Ok(format!("largest deviation {worst:.2} standard errors"))
}

fn main() {
    let criteria: [Criterion; 13] = [
        (1, Some(Duration::from_secs(1)), c01_pnr_star),
        (2, Some(Duration::from_secs(1)), c02_worst_gap),
        (3, None, c03_symmetric_gap_zero),
        (4, Some(Duration::from_secs(10)), c04_lemma5),
        (5, None, c05_aen_identity),
        (6, Some(Duration::from_secs(30)), c06_average_sandwich),
        (7, Some(Duration::from_secs(60)), c07_containment),
        (8, None, c08_epi_chain),
        (9, None, c09_one_bit),
        (10, Some(Duration::from_secs(60)), c10_type_comparison),
        (11, Some(Duration::from_secs(120)), c11_kuser),
        (12, Some(Duration::from_secs(300)), c12_solver),
        (13, None, c13_oracle_equivalence),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (n, limit, check) in criteria {
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if elapsed > l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS ({detail}) [{elapsed:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("criterion {n}: FAIL ({why}) [{elapsed:.2?}]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
