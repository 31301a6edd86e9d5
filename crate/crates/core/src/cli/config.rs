//! Scenario files.
//!
//! A scenario is a TOML document with `[channel]`, `[network]`, `[sweep]` and
//! `[quadrature]` tables. Every dimensioned key carries its unit as a suffix
//! (`ptx_dbm`, `height_m`, `lambda_per_km2`, ...) and is converted to linear
//! SI units exactly once, here.

use std::fmt;
use std::path::Path;

use serde::Serialize;
use toml::{Table, Value};

use crate::analytic::NetworkConfig;
use crate::channel::{ChannelParams, LosModel};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSettings;
use crate::special::{db_to_linear, dbm_to_watt, NakagamiParams};

use super::SweepSpec;

/// The scenario shipped with the tool: urban 28 GHz channel and the
/// reference network grid.
pub const DEFAULT_SCENARIO_TOML: &str = include_str!("../../config/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSection {
    pub los_sigmoid_c: f64,
    pub los_sigmoid_y_per_deg: f64,
    pub los_intercept_log10: f64,
    pub nlos_intercept_log10: f64,
    pub los_exponent: f64,
    pub nlos_exponent: f64,
    pub los_nakagami_m: u32,
    pub los_nakagami_omega: f64,
    pub nlos_nakagami_m: u32,
    pub nlos_nakagami_omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSection {
    pub ptx_dbm: f64,
    pub n_uav: u32,
    pub n_ue: u32,
    pub noise_figure_db: f64,
    pub noise_dbm: f64,
    pub lambda_per_km2: f64,
    pub height_m: f64,
    pub threshold_db: f64,
    pub aoi_radius_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSection {
    pub heights_m: Vec<f64>,
    pub lambdas_per_km2: Vec<f64>,
    pub thresholds_db: Vec<f64>,
    pub antenna_configs: Vec<[u32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureSection {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max_m: Option<f64>,
}

/// A scenario file as written, in the file's own units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioFile {
    pub channel: ChannelSection,
    pub network: NetworkSection,
    pub sweep: SweepSection,
    pub quadrature: QuadratureSection,
}

/// A validated scenario in linear SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub channel: ChannelParams,
    pub network: NetworkConfig,
    pub sweep: SweepSpec,
    pub quadrature: QuadratureSettings,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        ScenarioFile {
            channel: ChannelSection {
                los_sigmoid_c: 9.6117,
                los_sigmoid_y_per_deg: 0.1581,
                los_intercept_log10: -6.14,
                nlos_intercept_log10: -7.2,
                los_exponent: 2.0,
                nlos_exponent: 2.92,
                los_nakagami_m: 3,
                los_nakagami_omega: 1.0,
                nlos_nakagami_m: 2,
                nlos_nakagami_omega: 1.0,
            },
            network: NetworkSection {
                ptx_dbm: 20.0,
                n_uav: 8,
                n_ue: 8,
                noise_figure_db: 5.0,
                noise_dbm: -84.0,
                lambda_per_km2: 5.0,
                height_m: 200.0,
                threshold_db: 0.0,
                aoi_radius_m: DEFAULT_AOI_RADIUS_M,
            },
            sweep: SweepSection {
                heights_m: (0..=20).map(|i| i as f64 * 50.0).collect(),
                lambdas_per_km2: vec![1.0, 5.0, 10.0, 15.0, 25.0],
                thresholds_db: vec![-5.0, 0.0, 5.0],
                antenna_configs: vec![[8, 4], [8, 8], [64, 4], [256, 4], [256, 8]],
            },
            quadrature: QuadratureSection {
                abs_tol: 1e-10,
                rel_tol: 1e-10,
                max_depth: 40,
                r_max_m: None,
            },
        }
    }
}

pub const DEFAULT_AOI_RADIUS_M: f64 = 2000.0;

const UNIT_SUFFIXES: &[&str] = &[
    "_dbm", "_db", "_dbw", "_w", "_mw", "_per_km2", "_per_m2", "_km", "_m", "_log10", "_linear", "_per_deg",
    "_per_rad",
];

fn stem(key: &str) -> &str {
    UNIT_SUFFIXES
        .iter()
        .find_map(|s| key.strip_suffix(s))
        .unwrap_or(key)
}

/// Accepted interval for a numeric key.
#[derive(Clone, Copy)]
struct Range {
    lo: f64,
    lo_open: bool,
    hi: f64,
}

impl Range {
    const fn closed(lo: f64, hi: f64) -> Self {
        Range {
            lo,
            lo_open: false,
            hi,
        }
    }

    const fn positive(hi: f64) -> Self {
        Range {
            lo: 0.0,
            lo_open: true,
            hi,
        }
    }

    fn contains(&self, v: f64) -> bool {
        v.is_finite() && v <= self.hi && if self.lo_open { v > self.lo } else { v >= self.lo }
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_open { '(' } else { '[' };
        write!(f, "{open}{}, {}]", self.lo, self.hi)
    }
}

struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
}

impl<'a> Section<'a> {
    fn new(root: &'a Table, name: &'static str, known: &[&str], required: bool) -> Result<Self> {
        let table = match root.get(name) {
            None if required => return Err(Error::config(name, "missing table")),
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => return Err(Error::config(name, "expected a table")),
        };
        if let Some(t) = table {
            for key in t.keys() {
                if known.contains(&key.as_str()) {
                    continue;
                }
                let path = format!("{name}.{key}");
                if let Some(expected) = known.iter().find(|k| stem(k) == stem(key)) {
                    return Err(Error::config(
                        path,
                        format!("unit-suffix mismatch; this setting is read as `{name}.{expected}`"),
                    ));
                }
                return Err(Error::config(path, format!("unknown key; accepted keys: {}", known.join(", "))));
            }
        }
        Ok(Section { name, table })
    }

    fn path(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn raw(&self, key: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn number(&self, key: &str, v: &Value) -> Result<f64> {
        match v {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(Error::config(self.path(key), "expected a number")),
        }
    }

    fn checked(&self, key: &str, v: f64, range: Range) -> Result<f64> {
        if range.contains(v) {
            Ok(v)
        } else {
            Err(Error::config(self.path(key), format!("value {v} outside accepted range {range}")))
        }
    }

    fn f64_or(&self, key: &str, default: Option<f64>, range: Range) -> Result<f64> {
        match (self.raw(key), default) {
            (Some(v), _) => self.checked(key, self.number(key, v)?, range),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(Error::config(self.path(key), format!("missing key (accepted range {range})"))),
        }
    }

    fn f64(&self, key: &str, range: Range) -> Result<f64> {
        self.f64_or(key, None, range)
    }

    fn opt_f64(&self, key: &str, range: Range) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| self.checked(key, self.number(key, v)?, range))
            .transpose()
    }

    fn integer(&self, key: &str, v: &Value, lo: u32, hi: u32) -> Result<u32> {
        match v {
            Value::Integer(i) if (lo as i64..=hi as i64).contains(i) => Ok(*i as u32),
            Value::Integer(i) => Err(Error::config(
                self.path(key),
                format!("value {i} outside accepted range [{lo}, {hi}]"),
            )),
            _ => Err(Error::config(self.path(key), format!("expected an integer in [{lo}, {hi}]"))),
        }
    }

    fn u32_or(&self, key: &str, default: Option<u32>, lo: u32, hi: u32) -> Result<u32> {
        match (self.raw(key), default) {
            (Some(v), _) => self.integer(key, v, lo, hi),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(Error::config(
                self.path(key),
                format!("missing key (accepted range [{lo}, {hi}])"),
            )),
        }
    }

    fn f64_list(&self, key: &str, default: &[f64], range: Range) -> Result<Vec<f64>> {
        let Some(v) = self.raw(key) else {
            return Ok(default.to_vec());
        };
        let Value::Array(items) = v else {
            return Err(Error::config(self.path(key), "expected an array of numbers"));
        };
        if items.is_empty() {
            return Err(Error::config(self.path(key), "list must not be empty"));
        }
        items
            .iter()
            .map(|item| self.checked(key, self.number(key, item)?, range))
            .collect()
    }

    fn antenna_list(&self, key: &str, default: &[[u32; 2]]) -> Result<Vec<[u32; 2]>> {
        let Some(v) = self.raw(key) else {
            return Ok(default.to_vec());
        };
        let Value::Array(items) = v else {
            return Err(Error::config(self.path(key), "expected an array of [n_uav, n_ue] pairs"));
        };
        if items.is_empty() {
            return Err(Error::config(self.path(key), "list must not be empty"));
        }
        items
            .iter()
            .map(|item| match item {
                Value::Array(pair) if pair.len() == 2 => Ok([
                    self.integer(key, &pair[0], 1, MAX_ELEMENTS)?,
                    self.integer(key, &pair[1], 1, MAX_ELEMENTS)?,
                ]),
                _ => Err(Error::config(self.path(key), "expected [n_uav, n_ue] pairs")),
            })
            .collect()
    }
}

const MAX_ELEMENTS: u32 = 1 << 16;

mod ranges {
    use super::Range;
    pub const SIGMOID_C: Range = Range::positive(100.0);
    pub const SIGMOID_Y: Range = Range::positive(10.0);
    pub const INTERCEPT_LOG10: Range = Range::closed(-20.0, 0.0);
    pub const LOS_EXPONENT: Range = Range::closed(2.0, 10.0);
    pub const NLOS_EXPONENT: Range = Range::closed(2.0, 10.0);
    pub const OMEGA: Range = Range::positive(100.0);
    pub const PTX_DBM: Range = Range::closed(-50.0, 80.0);
    pub const NOISE_FIGURE_DB: Range = Range::closed(0.0, 30.0);
    pub const NOISE_DBM: Range = Range::closed(-200.0, 0.0);
    pub const LAMBDA_PER_KM2: Range = Range::positive(1e4);
    pub const HEIGHT_M: Range = Range::closed(0.0, 1e4);
    pub const THRESHOLD_DB: Range = Range::closed(-50.0, 50.0);
    pub const AOI_RADIUS_M: Range = Range::positive(1e6);
    pub const TOLERANCE: Range = Range::positive(1e-2);
    pub const R_MAX_M: Range = Range::positive(1e8);
}

impl ScenarioFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let root: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<document>", e.to_string()))?;
        for key in root.keys() {
            if !["channel", "network", "sweep", "quadrature"].contains(&key.as_str()) {
                return Err(Error::config(
                    key.as_str(),
                    "unknown table; accepted tables: channel, network, sweep, quadrature",
                ));
            }
        }
        let d = ScenarioFile::default();
        use ranges::*;

        let c = Section::new(
            &root,
            "channel",
            &[
                "los_sigmoid_c",
                "los_sigmoid_y_per_deg",
                "los_intercept_log10",
                "nlos_intercept_log10",
                "los_exponent",
                "nlos_exponent",
                "los_nakagami_m",
                "los_nakagami_omega",
                "nlos_nakagami_m",
                "nlos_nakagami_omega",
            ],
            true,
        )?;
        let channel = ChannelSection {
            los_sigmoid_c: c.f64("los_sigmoid_c", SIGMOID_C)?,
            los_sigmoid_y_per_deg: c.f64("los_sigmoid_y_per_deg", SIGMOID_Y)?,
            los_intercept_log10: c.f64("los_intercept_log10", INTERCEPT_LOG10)?,
            nlos_intercept_log10: c.f64("nlos_intercept_log10", INTERCEPT_LOG10)?,
            los_exponent: c.f64("los_exponent", LOS_EXPONENT)?,
            nlos_exponent: c.f64("nlos_exponent", NLOS_EXPONENT)?,
            los_nakagami_m: c.u32_or("los_nakagami_m", None, 1, 100)?,
            los_nakagami_omega: c.f64("los_nakagami_omega", OMEGA)?,
            nlos_nakagami_m: c.u32_or("nlos_nakagami_m", None, 1, 100)?,
            nlos_nakagami_omega: c.f64("nlos_nakagami_omega", OMEGA)?,
        };
        if channel.nlos_intercept_log10 >= channel.los_intercept_log10 {
            return Err(Error::config(
                "channel.nlos_intercept_log10",
                "must be below channel.los_intercept_log10",
            ));
        }
        if channel.nlos_exponent <= channel.los_exponent {
            return Err(Error::config("channel.nlos_exponent", "must exceed channel.los_exponent"));
        }

        let n = Section::new(
            &root,
            "network",
            &[
                "ptx_dbm",
                "n_uav",
                "n_ue",
                "noise_figure_db",
                "noise_dbm",
                "lambda_per_km2",
                "height_m",
                "threshold_db",
                "aoi_radius_m",
            ],
            true,
        )?;
        let network = NetworkSection {
            ptx_dbm: n.f64("ptx_dbm", PTX_DBM)?,
            n_uav: n.u32_or("n_uav", None, 1, MAX_ELEMENTS)?,
            n_ue: n.u32_or("n_ue", None, 1, MAX_ELEMENTS)?,
            noise_figure_db: n.f64("noise_figure_db", NOISE_FIGURE_DB)?,
            noise_dbm: n.f64("noise_dbm", NOISE_DBM)?,
            lambda_per_km2: n.f64("lambda_per_km2", LAMBDA_PER_KM2)?,
            height_m: n.f64("height_m", HEIGHT_M)?,
            threshold_db: n.f64("threshold_db", THRESHOLD_DB)?,
            aoi_radius_m: n.f64_or("aoi_radius_m", Some(DEFAULT_AOI_RADIUS_M), AOI_RADIUS_M)?,
        };

        let s = Section::new(
            &root,
            "sweep",
            &["heights_m", "lambdas_per_km2", "thresholds_db", "antenna_configs"],
            false,
        )?;
        let sweep = SweepSection {
            heights_m: s.f64_list("heights_m", &d.sweep.heights_m, HEIGHT_M)?,
            lambdas_per_km2: s.f64_list("lambdas_per_km2", &d.sweep.lambdas_per_km2, LAMBDA_PER_KM2)?,
            thresholds_db: s.f64_list("thresholds_db", &d.sweep.thresholds_db, THRESHOLD_DB)?,
            antenna_configs: s.antenna_list("antenna_configs", &d.sweep.antenna_configs)?,
        };

        let q = Section::new(&root, "quadrature", &["abs_tol", "rel_tol", "max_depth", "r_max_m"], false)?;
        let quadrature = QuadratureSection {
            abs_tol: q.f64_or("abs_tol", Some(d.quadrature.abs_tol), TOLERANCE)?,
            rel_tol: q.f64_or("rel_tol", Some(d.quadrature.rel_tol), TOLERANCE)?,
            max_depth: q.u32_or("max_depth", Some(d.quadrature.max_depth), 1, 60)?,
            r_max_m: q.opt_f64("r_max_m", R_MAX_M)?,
        };
        if let Some(r) = quadrature.r_max_m {
            let top = sweep.heights_m.iter().copied().fold(network.height_m, f64::max);
            if r <= top {
                return Err(Error::config(
                    "quadrature.r_max_m",
                    format!("must exceed every configured altitude (max {top} m)"),
                ));
            }
        }

        Ok(ScenarioFile {
            channel,
            network,
            sweep,
            quadrature,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Convert to linear SI units.
    pub fn resolve(&self) -> Result<Scenario> {
        let c = &self.channel;
        let channel = ChannelParams {
            los: LosModel::Sigmoid {
                c: c.los_sigmoid_c,
                y: c.los_sigmoid_y_per_deg,
            },
            cl: 10f64.powf(c.los_intercept_log10),
            cn: 10f64.powf(c.nlos_intercept_log10),
            al: c.los_exponent,
            an: c.nlos_exponent,
            nakagami_los: NakagamiParams::new(c.los_nakagami_m, c.los_nakagami_omega)?,
            nakagami_nlos: NakagamiParams::new(c.nlos_nakagami_m, c.nlos_nakagami_omega)?,
        };
        channel.validate()?;

        let n = &self.network;
        let network = NetworkConfig {
            ptx: dbm_to_watt(n.ptx_dbm)?,
            n_uav: n.n_uav,
            n_ue: n.n_ue,
            nf: db_to_linear(n.noise_figure_db)?,
            noise: dbm_to_watt(n.noise_dbm)?,
            lambda: n.lambda_per_km2 / 1e6,
            h: n.height_m,
            gamma: db_to_linear(n.threshold_db)?,
            aoi_radius: n.aoi_radius_m,
        };
        network.validate()?;

        let sweep = SweepSpec::new(
            self.sweep.heights_m.clone(),
            self.sweep.lambdas_per_km2.clone(),
            self.sweep.thresholds_db.clone(),
            self.sweep.antenna_configs.iter().map(|&[a, b]| (a, b)).collect(),
        )?;

        let q = &self.quadrature;
        let quadrature = QuadratureSettings {
            abs_tol: q.abs_tol,
            rel_tol: q.rel_tol,
            max_depth: q.max_depth,
            r_max: q.r_max_m,
        };
        quadrature.validate()?;

        Ok(Scenario {
            channel,
            network,
            sweep,
            quadrature,
        })
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        ScenarioFile::from_toml_str(text)?.resolve()
    }
}

impl Default for Scenario {
    fn default() -> Self {
        ScenarioFile::default().resolve().expect("default scenario is valid")
    }
}

/// Read, validate and convert a scenario file.
pub fn load_config(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Scenario::from_toml_str(&text)
}
