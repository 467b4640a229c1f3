//! Command-line arguments and the validated scenario configuration.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use oimac::numerics::QuadratureSpec;
use oimac::report::Units;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Two-user average-power outer, inner and high-SNR regions.
    AvgRegion,
    /// Two-user peak-power outer and inner regions.
    PeakRegion,
    /// K-user average-power outer bound and permutation corners.
    KuserRegion,
    /// Symmetric outer-minus-inner sum-rate gap against SNR, one curve per K.
    GapVsK,
    /// Independent exponential inputs against inputs with an exponential sum.
    TypeCompare,
    /// Single-user peak-power bounds and numerical capacity against PNR.
    SingleUserPeak,
    /// Optimal input and output of the uniform-noise channel.
    Lemma5Dist,
    /// Threshold PNR where the TKB bound stops applying.
    PnrStar,
    /// Average-power outer bound reused under a joint average and peak limit.
    JointOuter,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::AvgRegion => "avg-region",
            Scenario::PeakRegion => "peak-region",
            Scenario::KuserRegion => "kuser-region",
            Scenario::GapVsK => "gap-vs-k",
            Scenario::TypeCompare => "type-compare",
            Scenario::SingleUserPeak => "single-user-peak",
            Scenario::Lemma5Dist => "lemma5-dist",
            Scenario::PnrStar => "pnr-star",
            Scenario::JointOuter => "joint-outer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerChoice {
    /// Geometric and exponential-input corners, evaluated numerically.
    Ge,
    /// Closed-form inner H-representation.
    Hrep,
    /// H-representation with numeric exponential-input rates.
    IeHrep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum UnitsArg {
    Bits,
    Nats,
}

#[derive(Debug, Parser)]
#[command(name = "oimac", version, about = "Capacity-region bounds for the optical intensity multiple access channel")]
pub struct Args {
    #[arg(value_enum)]
    pub scenario: Scenario,
    /// Per-user optical SNR in dB, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub snr_db: Option<Vec<f64>>,
    /// Per-user optical PNR in dB, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub pnr_db: Option<Vec<f64>>,
    /// Number of users (largest K for gap-vs-k).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value = "nats")]
    pub units: UnitsArg,
    /// Sweep in dB as `lo:hi:steps`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Quadrature absolute tolerance and solver bracket tolerance, in nats.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = oimac::numerics::DEFAULT_SEED)]
    pub seed: u64,
    /// Output directory (CSV) or file (JSON); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to JSON for pnr-star and CSV otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Replace single-user upper bounds by solver capacities in the peak outer bound.
    #[arg(long)]
    pub refined_outer: bool,
    #[arg(long, value_enum, default_value = "ge")]
    pub inner_form: InnerChoice,
    /// Use sandwich midpoints instead of the solver for peak inner corners.
    #[arg(long)]
    pub midpoint_capacity: bool,
    /// Peak ratio for lemma5-dist.
    #[arg(long)]
    pub a: Option<f64>,
    /// Average-to-peak ratio E/A for joint-outer.
    #[arg(long)]
    pub ea_ratio: Option<f64>,
}

/// A sweep of `steps` equally spaced values from `lo` to `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Grid {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || CliError::Usage(format!("grid must be lo:hi:steps, got '{s}'"));
        let [lo, hi, steps] = parts[..] else { return Err(bad()) };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let steps: usize = steps.trim().parse().map_err(|_| bad())?;
        if steps == 0 || !lo.is_finite() || !hi.is_finite() || (steps > 1 && hi < lo) {
            return Err(bad());
        }
        Ok(Self { lo, hi, steps })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        (0..self.steps).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64).collect()
    }
}

/// `10^(dB/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub snr_db: Option<Vec<f64>>,
    pub pnr_db: Option<Vec<f64>>,
    pub k: Option<usize>,
    pub units: Units,
    pub grid: Option<Grid>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub refined_outer: bool,
    pub inner_form: InnerChoice,
    pub midpoint_capacity: bool,
    pub a: Option<f64>,
    pub ea_ratio: Option<f64>,
}

impl ScenarioConfig {
    pub fn from_args(args: Args) -> Result<Self, CliError> {
        let grid = args.grid.as_deref().map(Grid::parse).transpose()?;
        if let Some(t) = args.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
            }
        }
        for v in args.snr_db.iter().chain(&args.pnr_db).flatten() {
            if !v.is_finite() {
                return Err(CliError::Usage("dB values must be finite".into()));
            }
        }
        let format = args.format.unwrap_or(if args.scenario == Scenario::PnrStar { Format::Json } else { Format::Csv });
        Ok(Self {
            scenario: args.scenario,
            snr_db: args.snr_db,
            pnr_db: args.pnr_db,
            k: args.k,
            units: match args.units {
                UnitsArg::Bits => Units::Bits,
                UnitsArg::Nats => Units::Nats,
            },
            grid,
            tol: args.tol,
            seed: args.seed,
            format,
            out: args.out,
            refined_outer: args.refined_outer,
            inner_form: args.inner_form,
            midpoint_capacity: args.midpoint_capacity,
            a: args.a,
            ea_ratio: args.ea_ratio,
        })
    }

    /// Default configuration for a scenario, as if run with no flags.
    pub fn defaults(scenario: Scenario) -> Self {
        Self::from_args(Args::parse_from(["oimac", scenario.name()])).expect("defaults are valid")
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        let mut spec = QuadratureSpec::default();
        if let Some(t) = self.tol {
            spec.abs_tol = t;
        }
        spec
    }

    pub fn solver_tol(&self) -> f64 {
        self.tol.unwrap_or(oimac::capacity_solver::DEFAULT_TOL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = Grid::parse("-10:30:5").unwrap();
        assert_eq!(g.points(), vec![-10.0, 0.0, 10.0, 20.0, 30.0]);
        assert_eq!(Grid::parse("3:3:1").unwrap().points(), vec![3.0]);
        assert!(Grid::parse("1:2").is_err());
        assert!(Grid::parse("2:1:3").is_err());
        assert!(Grid::parse("0:1:0").is_err());
    }

    #[test]
    fn db_convention() {
        assert_eq!(db_to_linear(30.0), 1000.0);
        assert!((db_to_linear(25.0) - 10f64.powf(2.5)).abs() < 1e-12);
        assert!((linear_to_db(db_to_linear(-7.3)) + 7.3).abs() < 1e-12);
    }

    #[test]
    fn negative_db_lists_parse() {
        let a = Args::parse_from(["oimac", "avg-region", "--snr-db", "-100,-100"]);
        assert_eq!(a.snr_db, Some(vec![-100.0, -100.0]));
    }

    #[test]
    fn pnr_star_defaults_to_json() {
        assert_eq!(ScenarioConfig::defaults(Scenario::PnrStar).format, Format::Json);
        assert_eq!(ScenarioConfig::defaults(Scenario::AvgRegion).format, Format::Csv);
    }
}
