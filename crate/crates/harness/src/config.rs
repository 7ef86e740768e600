//! Flat key-value experiment configuration with grid expansion.
//!
//! Any scalar key given as an array becomes a sweep axis; list-valued keys
//! (`methods`, `feature_columns`, `region_lower`, `region_upper`,
//! `gp_point`) become axes when given as an array of arrays.

use postadc_core::adc::{Algorithm, GpUcbConfig, TpeConfig};
use postadc_core::candidates::side_length_for_dim;
use postadc_core::selective::Method;
use postadc_core::target::TargetRule;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::objective::Family;
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    Gpucb,
    Tpe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    HighLow,
    TopN,
    WinnerRunnerUp,
    FixedRegion,
    GpMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: AlgorithmKind,
    pub rule: RuleKind,
    pub family: Family,
    pub a: f64,
    pub d: usize,
    /// Target candidate count; the grid uses `round(grid_size^{1/d})` points
    /// per axis unless `m_per_axis` is set.
    pub grid_size: usize,
    pub m_per_axis: Option<usize>,
    pub n_init: usize,
    pub n_steps: usize,
    pub sigma2: f64,
    pub alpha: f64,
    pub ci_alpha: f64,
    pub kappa: f64,
    pub kernel_variance: f64,
    pub length_scale: Option<f64>,
    pub gamma: f64,
    pub bandwidth: f64,
    /// One-dimensional window side; the side in `d` dimensions is
    /// `side_base^{1/d}`.
    pub side_base: f64,
    pub top_n: usize,
    pub region_lower: Vec<f64>,
    pub region_upper: Vec<f64>,
    pub gp_point: Vec<f64>,
    pub tau2: f64,
    pub replicates: usize,
    pub master_seed: u64,
    pub methods: Vec<String>,
    pub data_path: Option<String>,
    pub feature_columns: Vec<String>,
    pub response_column: Option<String>,
    pub max_candidates: usize,
    pub workers: usize,
    pub timing: bool,
    pub instances: usize,
    pub scan_points: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithm: AlgorithmKind::Gpucb,
            rule: RuleKind::HighLow,
            family: Family::Sinc,
            a: 0.0,
            d: 1,
            grid_size: 64,
            m_per_axis: None,
            n_init: 5,
            n_steps: 15,
            sigma2: 1.0,
            alpha: 0.05,
            ci_alpha: 0.10,
            kappa: 2.0,
            kernel_variance: 1.0,
            length_scale: None,
            gamma: 0.2,
            bandwidth: 0.1,
            side_base: 0.2,
            top_n: 1,
            region_lower: Vec::new(),
            region_upper: Vec::new(),
            gp_point: Vec::new(),
            tau2: 0.0,
            replicates: 1000,
            master_seed: 0,
            methods: ["post_adc", "naive", "bonferroni", "wo_eta", "wo_T"]
                .map(String::from)
                .to_vec(),
            data_path: None,
            feature_columns: Vec::new(),
            response_column: None,
            max_candidates: 1024,
            workers: 0,
            timing: false,
            instances: 100,
            scan_points: 2001,
        }
    }
}

impl ExperimentConfig {
    pub fn from_table(table: &Table) -> Result<Self, HarnessError> {
        Value::Table(table.clone())
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Config(e.message().to_string()))
    }

    pub fn points_per_axis(&self) -> usize {
        self.m_per_axis
            .unwrap_or_else(|| postadc_core::candidates::points_per_axis_for_dim(self.d, self.grid_size))
    }

    pub fn method_list(&self) -> Result<Vec<Method>, HarnessError> {
        self.methods
            .iter()
            .map(|m| Method::parse(m).ok_or_else(|| HarnessError::Config(format!("unknown method '{m}'"))))
            .collect()
    }

    pub fn algorithm_for_dim(&self, dim: usize) -> Algorithm<f64> {
        match self.algorithm {
            AlgorithmKind::Gpucb => Algorithm::GpUcb(GpUcbConfig {
                kernel_variance: self.kernel_variance,
                length_scale: self.length_scale.unwrap_or(0.1 * (dim as f64).sqrt()),
                noise_variance: self.sigma2,
                kappa: self.kappa,
            }),
            AlgorithmKind::Tpe => Algorithm::Tpe(TpeConfig {
                gamma: self.gamma,
                bandwidth: self.bandwidth,
            }),
        }
    }

    pub fn rule_for_dim(&self, dim: usize) -> TargetRule<f64> {
        match self.rule {
            RuleKind::HighLow => TargetRule::HighLow {
                side: side_length_for_dim(dim, self.side_base),
            },
            RuleKind::TopN => TargetRule::TopN { n: self.top_n },
            RuleKind::WinnerRunnerUp => TargetRule::WinnerRunnerUp,
            RuleKind::FixedRegion => TargetRule::FixedRegion {
                lower: self.region_lower.clone(),
                upper: self.region_upper.clone(),
            },
            RuleKind::GpMean => TargetRule::GpMean {
                point: self.gp_point.clone(),
                gp: match self.algorithm_for_dim(dim) {
                    Algorithm::GpUcb(g) => g,
                    _ => GpUcbConfig {
                        kernel_variance: self.kernel_variance,
                        length_scale: self.length_scale.unwrap_or(0.1 * (dim as f64).sqrt()),
                        noise_variance: self.sigma2,
                        kappa: self.kappa,
                    },
                },
            },
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.d == 0 {
            return bad("d must be at least 1");
        }
        if self.n_init == 0 {
            return bad("n_init must be at least 1");
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1");
        }
        if !(self.sigma2 > 0.0) {
            return bad("sigma2 must be positive");
        }
        for (name, v) in [("alpha", self.alpha), ("ci_alpha", self.ci_alpha)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(HarnessError::Config(format!("{name} must lie in (0, 1)")));
            }
        }
        if !(self.side_base > 0.0 && self.side_base < 1.0) {
            return bad("side_base must lie in (0, 1)");
        }
        if !(self.tau2 >= 0.0) {
            return bad("tau2 must be nonnegative");
        }
        if !(self.a >= 0.0) {
            return bad("amplitude a must be nonnegative");
        }
        let methods = self.method_list()?;
        if methods.is_empty() {
            return bad("methods must not be empty");
        }
        if methods.contains(&Method::Randomized) && !(self.tau2 > 0.0) {
            return bad("the randomized method needs tau2 > 0");
        }
        if self.data_path.is_some() && (self.feature_columns.is_empty() || self.response_column.is_none()) {
            return bad("real data needs feature_columns and response_column");
        }
        Ok(())
    }
}

const LIST_KEYS: [&str; 5] = ["methods", "feature_columns", "region_lower", "region_upper", "gp_point"];

fn is_axis(key: &str, value: &Value) -> bool {
    match value {
        Value::Array(items) if LIST_KEYS.contains(&key) => !items.is_empty() && items.iter().all(|v| v.is_array()),
        Value::Array(_) => true,
        _ => false,
    }
}

pub fn parse_config(text: &str) -> Result<Table, HarnessError> {
    text.parse::<Table>()
        .map_err(|e| HarnessError::Config(format!("config parse error: {}", e.message())))
}

fn parse_value(raw: &str) -> Value {
    let raw = raw.trim();
    if let Ok(mut t) = format!("v = {raw}").parse::<Table>() {
        if let Some(v) = t.remove("v") {
            return v;
        }
    }
    if raw.contains(',') {
        return Value::Array(raw.split(',').map(parse_value).collect());
    }
    Value::String(raw.to_string())
}

/// Applies `key=value` overrides; values are read as TOML, falling back to
/// comma-separated lists and bare strings.
pub fn apply_overrides(table: &mut Table, overrides: &[String]) -> Result<(), HarnessError> {
    for o in overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("override '{o}' is not key=value")))?;
        let key = key.trim();
        let mut value = parse_value(value);
        if LIST_KEYS.contains(&key) && !value.is_array() {
            value = Value::Array(vec![value]);
        }
        table.insert(key.to_string(), value);
    }
    Ok(())
}

/// One point of a configuration grid.
#[derive(Debug, Clone)]
pub struct GridPoint {
    pub id: usize,
    /// Values of the sweep axes at this point, in axis order.
    pub axes: Vec<(String, String)>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct ConfigGrid {
    /// Defaults overlaid with the user table.
    pub effective: Table,
    pub axis_keys: Vec<String>,
    pub points: Vec<GridPoint>,
}

impl ConfigGrid {
    /// Effective configuration as `# key = value` lines.
    /// Effective configuration as comment lines, leaving out `workers`,
    /// which cannot change any output.
    pub fn header_lines(&self) -> Vec<String> {
        self.effective
            .iter()
            .filter(|(k, _)| k.as_str() != "workers")
            .map(|(k, v)| format!("# {k} = {}", display_value(v)))
            .collect()
    }
}

pub fn display_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn expand_grid(user: &Table) -> Result<ConfigGrid, HarnessError> {
    let mut effective =
        Table::try_from(ExperimentConfig::default()).map_err(|e| HarnessError::Config(e.to_string()))?;
    for (k, v) in user {
        effective.insert(k.clone(), v.clone());
    }
    let axis_keys: Vec<String> = effective
        .iter()
        .filter(|(k, v)| is_axis(k, v))
        .map(|(k, _)| k.clone())
        .collect();
    let mut combos: Vec<Vec<(String, Value)>> = vec![Vec::new()];
    for key in &axis_keys {
        let values = effective[key].as_array().cloned().unwrap_or_default();
        if values.is_empty() {
            return Err(HarnessError::Config(format!("sweep axis '{key}' has no values")));
        }
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut next = c.clone();
                    next.push((key.clone(), v.clone()));
                    next
                })
            })
            .collect();
    }
    let mut points = Vec::with_capacity(combos.len());
    for (id, combo) in combos.into_iter().enumerate() {
        let mut table = effective.clone();
        for (k, v) in &combo {
            table.insert(k.clone(), v.clone());
        }
        let config = ExperimentConfig::from_table(&table)?;
        config.validate()?;
        points.push(GridPoint {
            id,
            axes: combo.iter().map(|(k, v)| (k.clone(), display_value(v))).collect(),
            config,
        });
    }
    Ok(ConfigGrid {
        effective,
        axis_keys,
        points,
    })
}
