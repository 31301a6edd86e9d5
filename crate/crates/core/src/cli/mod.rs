//! Batch workloads behind the `uavcov` binary: single points, parameter
//! sweeps and Monte Carlo validation, plus CSV and text output.

mod config;
mod output;

pub use config::{
    load_config, ChannelSection, NetworkSection, QuadratureSection, Scenario, ScenarioFile, SweepSection,
    DEFAULT_AOI_RADIUS_M, DEFAULT_SCENARIO_TOML,
};
pub use output::{emit_csv, emit_report, write_csv, CSV_HEADER};

use rayon::prelude::*;

use crate::analytic::{coverage_probability, NetworkConfig};
use crate::error::{Error, Result};
use crate::montecarlo::{estimate_coverage, wilson_interval, z_for_confidence};

/// Cartesian grid of deployment parameters. Each axis is sorted ascending
/// with duplicates removed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub heights: Vec<f64>,
    pub densities_per_km2: Vec<f64>,
    pub thresholds_db: Vec<f64>,
    pub antenna_configs: Vec<(u32, u32)>,
}

fn normalize(name: &str, mut v: Vec<f64>) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::Usage(format!("{name} grid is empty")));
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::Usage(format!("{name} grid contains {x}")));
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

impl SweepSpec {
    pub fn new(
        heights: Vec<f64>,
        densities_per_km2: Vec<f64>,
        thresholds_db: Vec<f64>,
        mut antenna_configs: Vec<(u32, u32)>,
    ) -> Result<Self> {
        let heights = normalize("height", heights)?;
        let densities_per_km2 = normalize("density", densities_per_km2)?;
        let thresholds_db = normalize("threshold", thresholds_db)?;
        if heights[0] < 0.0 {
            return Err(Error::Usage(format!("negative height {} in grid", heights[0])));
        }
        if densities_per_km2[0] <= 0.0 {
            return Err(Error::Usage(format!(
                "non-positive density {} in grid",
                densities_per_km2[0]
            )));
        }
        if antenna_configs.is_empty() {
            return Err(Error::Usage("antenna grid is empty".into()));
        }
        if antenna_configs.iter().any(|&(a, b)| a == 0 || b == 0) {
            return Err(Error::Usage("antenna arrays need at least one element".into()));
        }
        antenna_configs.sort_unstable();
        antenna_configs.dedup();
        Ok(SweepSpec {
            heights,
            densities_per_km2,
            thresholds_db,
            antenna_configs,
        })
    }

    pub fn len(&self) -> usize {
        self.heights.len() * self.densities_per_km2.len() * self.thresholds_db.len() * self.antenna_configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in output order: threshold, then height, then density,
    /// then antenna configuration.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::with_capacity(self.len());
        for &gamma_db in &self.thresholds_db {
            for &height_m in &self.heights {
                for &lambda_per_km2 in &self.densities_per_km2 {
                    for &(n_uav, n_ue) in &self.antenna_configs {
                        out.push(GridPoint {
                            gamma_db,
                            height_m,
                            lambda_per_km2,
                            n_uav,
                            n_ue,
                        });
                    }
                }
            }
        }
        out
    }
}

impl Default for SweepSpec {
    fn default() -> Self {
        Scenario::default().sweep
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub gamma_db: f64,
    pub height_m: f64,
    pub lambda_per_km2: f64,
    pub n_uav: u32,
    pub n_ue: u32,
}

impl GridPoint {
    pub fn of(network: &NetworkConfig) -> Self {
        GridPoint {
            gamma_db: network.threshold_db(),
            height_m: network.h,
            lambda_per_km2: network.lambda_per_km2(),
            n_uav: network.n_uav,
            n_ue: network.n_ue,
        }
    }

    /// `base` with this point's parameters substituted.
    pub fn apply(&self, base: &NetworkConfig) -> Result<NetworkConfig> {
        let n = base
            .with_height(self.height_m)
            .with_density_per_km2(self.lambda_per_km2)
            .with_antennas(self.n_uav, self.n_ue)
            .with_threshold_db(self.gamma_db)?;
        n.validate()?;
        Ok(n)
    }
}

/// Monte Carlo columns of a result row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McColumns {
    pub pcov: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_realizations: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub point: GridPoint,
    pub pcov_analytic: Option<f64>,
    pub mc: Option<McColumns>,
    /// Set when the analytic value could not be computed.
    pub failure: Option<String>,
    /// Analytic value missing or outside the MC interval.
    pub flagged: bool,
}

impl ResultRow {
    fn analytic(point: GridPoint, value: Result<f64>) -> Self {
        let (pcov_analytic, failure) = match value {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        ResultRow {
            point,
            pcov_analytic,
            mc: None,
            failure,
            flagged: false,
        }
    }
}

/// Analytic coverage at the scenario's nominal network point.
pub fn run_analyze(scenario: &Scenario) -> Result<ResultRow> {
    let v = coverage_probability(&scenario.channel, &scenario.network, &scenario.quadrature)?;
    Ok(ResultRow::analytic(GridPoint::of(&scenario.network), Ok(v)))
}

fn analytic_at(scenario: &Scenario, point: &GridPoint) -> Result<f64> {
    let network = point.apply(&scenario.network)?;
    coverage_probability(&scenario.channel, &network, &scenario.quadrature)
}

/// Analytic coverage over the full sweep grid. A point whose integral fails
/// is recorded in its row; the remaining points are still evaluated.
pub fn run_sweep(scenario: &Scenario) -> Result<Vec<ResultRow>> {
    let points = scenario.sweep.points();
    for p in &points {
        p.apply(&scenario.network)?;
    }
    Ok(points
        .par_iter()
        .map(|p| ResultRow::analytic(*p, analytic_at(scenario, p)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub realizations: u64,
    pub seed: u64,
    /// Confidence level of the Wilson interval used for flagging.
    pub confidence: f64,
    /// Largest tolerated fraction of flagged points.
    pub max_flagged: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            realizations: 1000,
            seed: 0,
            confidence: 0.95,
            max_flagged: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationSummary {
    pub points: usize,
    pub flagged: usize,
    pub failed: usize,
    pub max_flagged: f64,
}

impl ValidationSummary {
    pub fn flagged_fraction(&self) -> f64 {
        self.flagged as f64 / self.points as f64
    }

    pub fn bound_exceeded(&self) -> bool {
        self.flagged_fraction() > self.max_flagged
    }

    /// 1 when the flagged fraction exceeds the bound, else 0.
    pub fn exit_code(&self) -> i32 {
        self.bound_exceeded() as i32
    }
}

/// Seed of grid point `index`, derived from the master seed with the
/// splitmix64 finalizer so neighbouring points get unrelated streams.
pub fn point_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sweep plus a Monte Carlo estimate per point. Rows whose analytic value is
/// missing or lies outside the MC interval are flagged.
pub fn run_validate(scenario: &Scenario, opts: &ValidateOptions) -> Result<(Vec<ResultRow>, ValidationSummary)> {
    if opts.realizations == 0 {
        return Err(Error::Usage("--realizations must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&opts.max_flagged) {
        return Err(Error::Usage(format!(
            "flagged-fraction bound {} outside [0, 1]",
            opts.max_flagged
        )));
    }
    let z = z_for_confidence(opts.confidence).map_err(|_| {
        Error::Usage(format!("confidence level {} outside (0, 1)", opts.confidence))
    })?;
    let points = scenario.sweep.points();
    for p in &points {
        p.apply(&scenario.network)?;
    }
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| -> Result<ResultRow> {
            let mut row = ResultRow::analytic(*p, analytic_at(scenario, p));
            let seed = point_seed(opts.seed, i as u64);
            let est = estimate_coverage(&scenario.channel, &p.apply(&scenario.network)?, opts.realizations, seed)?;
            let (ci_low, ci_high) = wilson_interval(est.covered, est.n, z);
            row.mc = Some(McColumns {
                pcov: est.p_hat,
                ci_low,
                ci_high,
                n_realizations: est.n,
                seed,
            });
            row.flagged = row.pcov_analytic.is_none_or(|a| a < ci_low || a > ci_high);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = ValidationSummary {
        points: rows.len(),
        flagged: rows.iter().filter(|r| r.flagged).count(),
        failed: rows.iter().filter(|r| r.failure.is_some()).count(),
        max_flagged: opts.max_flagged,
    };
    Ok((rows, summary))
}
