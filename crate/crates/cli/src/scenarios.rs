//! Scenario presets. Each builds a [`Document`] in nats; conversion and
//! rounding happen at emission.

use oimac::avg_power::{
    ap_asymptotic_region_2u, ap_inner_corners_2u, ap_inner_hrep_2u, ap_kuser_inner_all, ap_kuser_inner_hrep, ap_kuser_outer, ap_outer_2u,
    ap_single_lower_geo, ap_single_upper, ap_sum_gap_symmetric, ap_type_compare, closed_form_lower, ie, type_asymptotic_gap, ApOperatingPoint, InnerForm,
};
use oimac::capacity_solver::{solve_peak_capacity, DEFAULT_GRID_POINTS};
use oimac::distributions::{make_basic, make_maxmass_discrete, BasicLaw, OriginStyle};
use oimac::mutual_information::{mi_uniform_noise, Method};
use oimac::numerics::{mc_mi_estimate, QuadratureSpec, DEFAULT_MC_SAMPLES};
use oimac::peak_power::{
    iu, pp_inner_corners_2u, pp_inner_hrep_2u, pp_lemma5_capacity, pp_mckellips, pp_orientation_gaps, pp_outer_2u, pp_outer_2u_refined, pp_pnr_star,
    pp_single_upper, pp_tkb, single_capacity, uniform_closed_form, CapacitySource, PpOperatingPoint,
};
use oimac::region::{corners_from_hrep_2d, dominated_hull_2d, vrep_in_hrep, HRegion, VRegion};
use oimac::report::BoundReport;
use rayon::prelude::*;

use crate::config::{db_to_linear, linear_to_db, Grid, InnerChoice, Scenario, ScenarioConfig};
use crate::emit::{corner_payload, CurveRow, Document, Payload, Quantity, ReportRow, SegmentRow};
use crate::CliError;

/// Default two-user average-power point; not an operating point of any
/// published figure.
pub const DEFAULT_AVG_SNR_DB: [f64; 2] = [15.0, 10.0];
pub const DEFAULT_PEAK_PNR_DB: [f64; 2] = [30.0, 25.0];
pub const DEFAULT_KUSER_SNR_DB: [f64; 3] = [10.0, 5.0, 3.0];
pub const DEFAULT_JOINT_PNR_DB: [f64; 2] = [10.0, 5.0];
pub const DEFAULT_EA_RATIO: f64 = 0.2;
pub const DEFAULT_LEMMA5_A: f64 = 4.7;
pub const DEFAULT_GAP_MAX_K: usize = 5;
pub const DEFAULT_SNR_GRID: Grid = Grid { lo: 0.0, hi: 40.0, steps: 9 };
pub const DEFAULT_PNR_GRID: Grid = Grid { lo: -10.0, hi: 30.0, steps: 21 };

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Document, CliError> {
    match cfg.scenario {
        Scenario::AvgRegion => avg_region(cfg),
        Scenario::PeakRegion => peak_region(cfg),
        Scenario::KuserRegion => kuser_region(cfg),
        Scenario::GapVsK => gap_vs_k(cfg),
        Scenario::TypeCompare => type_compare(cfg),
        Scenario::SingleUserPeak => single_user_peak(cfg),
        Scenario::Lemma5Dist => lemma5_dist(cfg),
        Scenario::PnrStar => pnr_star(),
        Scenario::JointOuter => joint_outer(cfg),
    }
}

fn two_users(db: &[f64], flag: &str) -> Result<[f64; 2], CliError> {
    match db {
        [a, b] => Ok([db_to_linear(*a), db_to_linear(*b)]),
        _ => Err(CliError::Usage(format!("{flag} needs exactly two values for this scenario, got {}", db.len()))),
    }
}

fn point(names: &str, db: &[f64]) -> Vec<(String, f64)> {
    db.iter().enumerate().map(|(i, v)| (format!("{names}{}_db", i + 1), *v)).collect()
}

fn row(name: &str, value: f64, quantity: Quantity, method: &str, est_error: f64, source: &str) -> ReportRow {
    ReportRow { name: name.into(), value, quantity, method: method.into(), est_error, source: source.into() }
}

fn hull_payload(points: &[Vec<f64>], est_error: f64, method: &str) -> Result<Payload, CliError> {
    let hull = dominated_hull_2d(points)?;
    Ok(with_method(&hull, method, est_error))
}

fn with_method(v: &VRegion, method: &str, est_error: f64) -> Payload {
    let mut p = Payload::from(v);
    if let Payload::Corners { rows, .. } = &mut p {
        for r in rows {
            r.method = method.into();
            r.est_error = est_error;
        }
    }
    p
}

fn containment_row(name: &str, points: &[Vec<f64>], outer: &HRegion, est_error: f64) -> Result<ReportRow, CliError> {
    let v = VRegion { dim: outer.dim, corners: points.to_vec(), labels: vec![String::new(); points.len()] };
    let (_, worst) = vrep_in_hrep(&v, outer, 3.0 * est_error)?;
    Ok(row(name, worst, Quantity::Rate, "closed_form", 3.0 * est_error, "largest constraint violation of the inner corners"))
}

fn avg_region(cfg: &ScenarioConfig) -> Result<Document, CliError> {
    let spec = cfg.quadrature();
    let db = cfg.snr_db.clone().unwrap_or(DEFAULT_AVG_SNR_DB.to_vec());
    let [s1, s2] = two_users(&db, "--snr-db")?;
    let mut doc = Document::new("avg-region", point("snr", &db));
    if cfg.snr_db.is_none() {
        doc.notes.push("default operating point (15 dB, 10 dB) chosen for illustration; pass --snr-db to select another".into());
    }
    let pt = ApOperatingPoint::unit(vec![s1, s2])?;
    let outer = ap_outer_2u(&pt)?;
    doc.push("outer", (&outer).into());
    doc.push("outer_corners", (&corners_from_hrep_2d(&outer)?).into());

    let (inner_points, inner_err) = match cfg.inner_form {
        InnerChoice::Ge => {
            let c = ap_inner_corners_2u(&pt, &spec)?;
            doc.push("inner_corners", corner_payload(&c, Method::Quadrature.as_str()));
            (c.points, c.est_error)
        }
        InnerChoice::Hrep => {
            let h = ap_inner_hrep_2u(&pt)?;
            let v = corners_from_hrep_2d(&h)?;
            doc.push("inner", (&h).into());
            doc.push("inner_corners", (&v).into());
            (v.corners, 0.0)
        }
        InnerChoice::IeHrep => {
            let h = ap_kuser_inner_hrep(&pt, InnerForm::IeNumeric, &spec)?;
            let v = corners_from_hrep_2d(&h)?;
            let err = 2.0 * oimac::mutual_information::EST_ERROR_FACTOR * spec.abs_tol;
            doc.push("inner", (&h).into());
            doc.push("inner_corners", with_method(&v, Method::Quadrature.as_str(), err));
            (v.corners, err)
        }
    };
    doc.push("inner_hull", hull_payload(&inner_points, inner_err, Method::Quadrature.as_str())?);

    let asym = ap_asymptotic_region_2u(&pt)?;
    if asym.corners.warnings.is_empty() {
        doc.push("asymptotic_corners", corner_payload(&asym.corners, Method::ClosedForm.as_str()));
    } else {
        doc.notes.push("high-SNR corners omitted: the asymptotic rates are negative at this SNR".into());
    }

    let mut report = BoundReport::new(doc.operating_point.clone());
    let (g1, g2) = (ap_single_lower_geo(s1, &spec)?, ap_single_lower_geo(s2, &spec)?);
    for (i, s, g) in [(1, s1, &g1), (2, s2, &g2)] {
        report.push(&format!("upper_{i}"), ap_single_upper(s)?, "closed_form", 0.0, "average-power upper bound");
        report.push(&format!("lower_closed_form_{i}"), closed_form_lower(s), "closed_form", 0.0, "exponential-input closed-form lower bound");
        let e = ie(s, &spec)?;
        report.push(&format!("exponential_{i}"), e.value, e.method.as_str(), e.est_error, "exponential-input rate");
        report.push(&format!("geometric_{i}"), g.value.value, g.value.method.as_str(), g.value.est_error, "geometric-lattice rate");
        let mc = mc_mi_estimate(&make_basic(BasicLaw::Exponential { mean: s })?, 1.0, DEFAULT_MC_SAMPLES, cfg.seed)?;
        report.push(&format!("exponential_{i}_monte_carlo"), mc.mean, Method::MonteCarlo.as_str(), 3.0 * mc.std_error, "Monte-Carlo check of the exponential-input rate");
    }
    for b in &asym.second_user {
        report.push(&format!("second_user_{}_lower", b.user), b.lower, "closed_form", 0.0, "second-user rate, lower bound");
        report.push(&format!("second_user_{}_upper", b.user), b.upper, "closed_form", 0.0, "second-user rate, upper bound");
        report.push(&format!("second_user_{}_asymptotic", b.user), b.asymptotic, "closed_form", 0.0, "second-user rate, high-SNR limit");
    }
    let Payload::Report { mut rows } = Payload::from(&report) else { unreachable!() };
    for (i, g) in [(1, &g1), (2, &g2)] {
        rows.push(row(&format!("geometric_{i}_spacing"), g.best_ell, Quantity::Linear, "golden_section", 0.0, "optimal lattice spacing in noise units"));
    }
    rows.push(containment_row("inner_in_outer_violation", &inner_points, &outer, inner_err)?);
    doc.push("report", Payload::Report { rows });
    Ok(doc)
}

fn peak_region(cfg: &ScenarioConfig) -> Result<Document, CliError> {
    let spec = cfg.quadrature();
    let db = cfg.pnr_db.clone().unwrap_or(DEFAULT_PEAK_PNR_DB.to_vec());
    let [p1, p2] = two_users(&db, "--pnr-db")?;
    let mut doc = Document::new("peak-region", point("pnr", &db));
    let pt = PpOperatingPoint::unit(vec![p1, p2])?;
    let outer = if cfg.refined_outer { pp_outer_2u_refined(&pt, DEFAULT_GRID_POINTS, cfg.solver_tol())? } else { pp_outer_2u(&pt)? };
    doc.push("outer", (&outer).into());
    doc.push("outer_corners", (&corners_from_hrep_2d(&outer)?).into());

    let source = if cfg.midpoint_capacity { CapacitySource::SandwichMidpoint } else { CapacitySource::Solver };
    let caps = if cfg.midpoint_capacity {
        [single_capacity(p1, source, &spec)?, single_capacity(p2, source, &spec)?]
    } else {
        let solve = |p: f64| -> Result<_, oimac::Error> {
            let r = solve_peak_capacity(p, DEFAULT_GRID_POINTS, cfg.solver_tol())?;
            Ok(oimac::peak_power::CapacityValue { value: r.capacity, uncertainty: r.bracket_width, source })
        };
        let (a, b) = rayon::join(|| solve(p1), || solve(p2));
        [a?, b?]
    };
    let inner = pp_inner_corners_2u(&pt, caps, &spec)?;
    doc.push("inner_corners", corner_payload(&inner, Method::Quadrature.as_str()));
    doc.push("inner_hull", hull_payload(&inner.points, inner.est_error, Method::Quadrature.as_str())?);

    let closed = pp_inner_hrep_2u(&pt)?;
    doc.push("closed_form_inner", (&closed).into());
    match corners_from_hrep_2d(&closed) {
        Ok(v) => doc.push("closed_form_inner_corners", (&v).into()),
        Err(e) => doc.notes.push(format!("closed-form inner bound has no corners: {e}")),
    }

    let mut rows = Vec::new();
    for (i, p) in [(1, p1), (2, p2)] {
        rows.push(row(&format!("mckellips_{i}"), pp_mckellips(p)?, Quantity::Rate, "closed_form", 0.0, "McKellips upper bound"));
        if let Some(t) = pp_tkb(p)? {
            rows.push(row(&format!("tkb_{i}"), t, Quantity::Rate, "closed_form", 0.0, "TKB upper bound"));
        }
        rows.push(row(&format!("upper_{i}"), pp_single_upper(p)?, Quantity::Rate, "closed_form", 0.0, "combined peak-power upper bound"));
        let u = iu(p, &spec)?;
        rows.push(row(&format!("uniform_{i}"), u.value, Quantity::Rate, u.method.as_str(), u.est_error, "uniform-input rate"));
        rows.push(row(&format!("uniform_closed_form_{i}"), uniform_closed_form(p), Quantity::Rate, "closed_form", 0.0, "uniform-input closed-form lower bound"));
        let c = caps[i - 1];
        let method = if cfg.midpoint_capacity { "sandwich_midpoint" } else { "blahut_arimoto" };
        rows.push(row(&format!("capacity_{i}"), c.value, Quantity::Rate, method, c.uncertainty, "single-user capacity"));
    }
    for (i, g) in pp_orientation_gaps(&pt)?.iter().enumerate() {
        let i = i + 1;
        rows.push(row(&format!("gap_orientation_{i}"), g.gap_nats, Quantity::Rate, "closed_form", 0.0, "high-PNR gap with user i's peak ratio"));
        rows.push(row(&format!("gap_orientation_{i}_n"), g.n as f64, Quantity::Count, "closed_form", 0.0, "ceiling of the peak ratio"));
        rows.push(row(&format!("gap_orientation_{i}_lambda"), g.lambda, Quantity::Linear, "closed_form", 0.0, "n minus the peak ratio"));
    }
    rows.push(containment_row("inner_in_outer_violation", &inner.points, &outer, inner.est_error)?);
    doc.push("report", Payload::Report { rows });
    Ok(doc)
}

fn kuser_region(cfg: &ScenarioConfig) -> Result<Document, CliError> {
    let spec = cfg.quadrature();
    let mut db = cfg.snr_db.clone().unwrap_or(DEFAULT_KUSER_SNR_DB.to_vec());
    if let (Some(k), [only]) = (cfg.k, &db[..]) {
        db = vec![*only; k];
    } else if let Some(k) = cfg.k {
        if k != db.len() {
            return Err(CliError::Usage(format!("--k {k} disagrees with {} SNR values", db.len())));
        }
    }
    let mut doc = Document::new("kuser-region", point("snr", &db));
    if cfg.snr_db.is_none() {
        doc.notes.push("default operating point (10, 5, 3) dB chosen for illustration".into());
    }
    let pt = ApOperatingPoint::unit(db.iter().map(|v| db_to_linear(*v)).collect())?;
    let outer = ap_kuser_outer(&pt)?;
    doc.push("outer", (&outer).into());
    let corners = ap_kuser_inner_all(&pt, &spec)?;
    doc.push("inner_corners", corner_payload(&corners, Method::Quadrature.as_str()));
    match cfg.inner_form {
        InnerChoice::Ge => {}
        InnerChoice::Hrep => doc.push("inner", (&ap_kuser_inner_hrep(&pt, InnerForm::ClosedForm, &spec)?).into()),
        InnerChoice::IeHrep => doc.push("inner", (&ap_kuser_inner_hrep(&pt, InnerForm::IeNumeric, &spec)?).into()),
    }
    let rows = vec![containment_row("inner_in_outer_violation", &corners.points, &outer, corners.est_error)?];
    doc.push("report", Payload::Report { rows });
    Ok(doc)
}

fn curve<T: Send>(xs: &[f64], f: impl Fn(f64) -> Result<T, oimac::Error> + Sync, to_row: impl Fn(f64, T) -> CurveRow) -> Result<Vec<CurveRow>, CliError> {
    let vals: Vec<T> = xs.par_iter().map(|x| f(*x)).collect::<Result<_, _>>()?;
    Ok(xs.iter().zip(vals).map(|(x, v)| to_row(*x, v)).collect())
}

fn mi_row(x: f64, value: f64, method: Method, est_error: f64) -> CurveRow {
    CurveRow { x, value, lower: None, upper: None, method: method.as_str().into(), est_error }
}

fn gap_vs_k(cfg: &ScenarioConfig) -> Result<Document, CliError> {
    let spec = cfg.quadrature();
    let max_k = cfg.k.unwrap_or(DEFAULT_GAP_MAX_K);
    if max_k < 2 {
        return Err(CliError::Usage("--k must be at least 2 for gap-vs-k".into()));
    }
    let xs = cfg.grid.unwrap_or(DEFAULT_SNR_GRID).points();
    let mut doc = Document::new("gap-vs-k", vec![("max_k".into(), max_k as f64)]);
    for k in 2..=max_k {
        let rows = curve(&xs, |x| ap_sum_gap_symmetric(k, db_to_linear(x), &spec), |x, r| mi_row(x, r.value, r.method, r.est_error))?;
        doc.push(&format!("k{k}"), Payload::Curve { x_name: "snr_db".into(), quantity: Quantity::Rate, rows });
    }
    Ok(doc)
}

fn type_compare(cfg: &ScenarioConfig) -> Result<Document, CliError> {
    let spec = cfg.quadrature();
    let k = cfg.k.unwrap_or(2);
    let mut doc = Document::new("type-compare", vec![("k".into(), k as f64)]);
    let ks: Vec<f64> = (0..8).map(|i| (1u32 << i) as f64).collect();
    let rows = curve(&ks, |x| type_asymptotic_gap(x as usize), |x, v| mi_row(x, v, Method::ClosedForm, 0.0))?;
    doc.push("asymptotic_gap", Payload::Curve { x_name: "k".into(), quantity: Quantity::Rate, rows });

    let xs = cfg.grid.unwrap_or(DEFAULT_SNR_GRID).points();
    let cmp: Vec<_> = xs.par_iter().map(|x| ap_type_compare(k, db_to_linear(*x), &spec)).collect::<Result<_, _>>()?;
    let pick = |f: &dyn Fn(&oimac::avg_power::TypeComparison) -> CurveRow| cmp.iter().map(f).collect::<Vec<_>>();
    let t1 = pick(&|c| mi_row(0.0, c.sum_rate_type1.value, c.sum_rate_type1.method, c.sum_rate_type1.est_error));
    let t2 = pick(&|c| mi_row(0.0, c.sum_rate_type2.value, c.sum_rate_type2.method, c.sum_rate_type2.est_error));
    let diff = pick(&|c| CurveRow {
        x: 0.0,
        value: c.sum_rate_type1.value - c.sum_rate_type2.value,
        lower: None,
        upper: Some(c.asymptotic_gap),
        method: Method::Quadrature.as_str().into(),
        est_error: c.sum_rate_type1.est_error + c.sum_rate_type2.est_error,
    });
    for (name, mut rows) in [("sum_rate_type1", t1), ("sum_rate_type2", t2), ("difference", diff)] {
        for (r, x) in rows.iter_mut().zip(&xs) {
            r.x = *x;
        }
        doc.push(name, Payload::Curve { x_name: "snr_db".into(), quantity: Quantity::Rate, rows });
    }
    doc.notes.push("difference.upper holds the high-SNR limit of type1 - type2".into());
    Ok(doc)
}

fn single_user_peak(cfg: &ScenarioConfig) -> Result<Document, CliError> {
    let spec: QuadratureSpec = cfg.quadrature();
    let xs = cfg.grid.unwrap_or(DEFAULT_PNR_GRID).points();
    let mut doc = Document::new("single-user-peak", vec![("pnr_star".into(), pp_pnr_star())]);
    let closed = |f: fn(f64) -> Result<f64, oimac::Error>| curve(&xs, |x| f(db_to_linear(x)), |x, v| mi_row(x, v, Method::ClosedForm, 0.0));
    doc.push("mckellips", Payload::Curve { x_name: "pnr_db".into(), quantity: Quantity::Rate, rows: closed(pp_mckellips)? });
    let tkb: Vec<CurveRow> = closed(|p| pp_tkb(p).map(|t| t.unwrap_or(f64::NAN)))?.into_iter().filter(|r| !r.value.is_nan()).collect();
    doc.push("tkb", Payload::Curve { x_name: "pnr_db".into(), quantity: Quantity::Rate, rows: tkb });
    doc.push("combined_upper", Payload::Curve { x_name: "pnr_db".into(), quantity: Quantity::Rate, rows: closed(pp_single_upper)? });
    let uniform = curve(&xs, |x| iu(db_to_linear(x), &spec), |x, r| CurveRow {
        x,
        value: r.value,
        lower: Some(uniform_closed_form(db_to_linear(x))),
        upper: None,
        method: r.method.as_str().into(),
        est_error: r.est_error,
    })?;
    doc.push("uniform_lower", Payload::Curve { x_name: "pnr_db".into(), quantity: Quantity::Rate, rows: uniform });
    let tol = cfg.solver_tol();
    let cap = curve(&xs, |x| solve_peak_capacity(db_to_linear(x), DEFAULT_GRID_POINTS, tol), |x, r| CurveRow {
        x,
        value: r.capacity,
        lower: Some(r.capacity),
        upper: Some(r.capacity + r.bracket_width),
        method: "blahut_arimoto".into(),
        est_error: r.bracket_width,
    })?;
    doc.push("capacity", Payload::Curve { x_name: "pnr_db".into(), quantity: Quantity::Rate, rows: cap });
    doc.notes.push("capacity.lower and capacity.upper bracket the grid-restricted capacity".into());
    Ok(doc)
}

fn lemma5_dist(cfg: &ScenarioConfig) -> Result<Document, CliError> {
    let a = cfg.a.unwrap_or(DEFAULT_LEMMA5_A);
    let mut doc = Document::new("lemma5-dist", vec![("a".into(), a)]);
    let input = make_maxmass_discrete(a, 1.0, OriginStyle::SymmetricPm)?;
    doc.push(
        "input",
        Payload::Atoms { rows: input.atoms().iter().map(|at| crate::emit::AtomRow { location: at.location, mass: at.mass }).collect() },
    );
    // output density for noise uniform on [-1, 1]
    let mut cuts: Vec<f64> = input.atoms().iter().flat_map(|at| [at.location - 1.0, at.location + 1.0]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let segments: Vec<SegmentRow> = cuts
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let density = input.atoms().iter().filter(|at| (mid - at.location).abs() < 1.0).map(|at| 0.5 * at.mass).sum();
            SegmentRow { lo: w[0], hi: w[1], density }
        })
        .collect();
    doc.push("output", Payload::Segments { rows: segments });
    let mi = mi_uniform_noise(&input, 1.0)?;
    let rows = vec![
        row("capacity", pp_lemma5_capacity(a)?, Quantity::Rate, "closed_form", 0.0, "uniform-noise channel capacity"),
        row("input_rate", mi.value, Quantity::Rate, mi.method.as_str(), mi.est_error, "rate of the optimal discrete input"),
    ];
    doc.push("report", Payload::Report { rows });
    Ok(doc)
}

fn pnr_star() -> Result<Document, CliError> {
    let p = pp_pnr_star();
    let mut doc = Document::new("pnr-star", Vec::new());
    let rows = vec![
        row("pnr_star", p, Quantity::Linear, "bisection", 1e-12, "threshold PNR of the TKB bound"),
        row("pnr_star_db", linear_to_db(p), Quantity::Db, "bisection", 0.0, "threshold PNR of the TKB bound"),
    ];
    doc.push("report", Payload::Report { rows });
    Ok(doc)
}

fn joint_outer(cfg: &ScenarioConfig) -> Result<Document, CliError> {
    let db = cfg.pnr_db.clone().unwrap_or(DEFAULT_JOINT_PNR_DB.to_vec());
    let [p1, p2] = two_users(&db, "--pnr-db")?;
    let alpha = cfg.ea_ratio.unwrap_or(DEFAULT_EA_RATIO);
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(CliError::Usage(format!("--ea-ratio must be positive, got {alpha}")));
    }
    let mut op = point("pnr", &db);
    op.push(("ea_ratio".into(), alpha));
    let mut doc = Document::new("joint-outer", op);
    doc.notes.push("average-power outer bound evaluated at SNR_i = (E_i/A_i) PNR_i; the peak-power outer bound is listed for reference".into());
    let avg = ap_outer_2u(&ApOperatingPoint::unit(vec![alpha * p1, alpha * p2])?)?;
    doc.push("outer", (&avg).into());
    doc.push("outer_corners", (&corners_from_hrep_2d(&avg)?).into());
    let peak = pp_outer_2u(&PpOperatingPoint::unit(vec![p1, p2])?)?;
    doc.push("peak_outer", (&peak).into());
    doc.push("peak_outer_corners", (&corners_from_hrep_2d(&peak)?).into());
    Ok(doc)
}
