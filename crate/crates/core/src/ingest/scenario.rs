use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::model::DEFAULT_DISPATCH_EPSILON;
use crate::solver::SolverOptions;

/// How storage components may be sized relative to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StorageMode {
    /// Charger = discharger, store = ratio × discharger for every technology.
    FixedEp,
    /// Components sized freely, except shared converters.
    VariableEp,
    /// Like `VariableEp`, and hub members at one hub share a single store.
    H2Hub,
}

impl StorageMode {
    pub const ALL: [StorageMode; 3] = [StorageMode::FixedEp, StorageMode::VariableEp, StorageMode::H2Hub];

    pub fn as_str(self) -> &'static str {
        match self {
            StorageMode::FixedEp => "fixed_ep",
            StorageMode::VariableEp => "variable_ep",
            StorageMode::H2Hub => "h2_hub",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fixed_ep" => Some(StorageMode::FixedEp),
            "variable_ep" => Some(StorageMode::VariableEp),
            "h2_hub" => Some(StorageMode::H2Hub),
            _ => None,
        }
    }
}

impl fmt::Display for StorageMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub storage_mode: StorageMode,
    /// tCO2 over the represented period; `None` leaves emissions free.
    pub co2_cap: Option<f64>,
    /// Share of its own demand each country must generate; 0 disables.
    pub equity_fraction: f64,
    /// Allowed growth of Σ capacity × length over existing; `None` disables.
    pub line_volume_expansion_frac: Option<f64>,
    /// EUR/MWh on storage charge and discharge when a technology sets none.
    pub epsilon_cost: f64,
    pub solver: SolverOptions,
    /// Report filters.
    pub min_mpi_mw: f64,
    pub min_flh: f64,
    /// MW a component must reach to pass the threshold rule.
    pub threshold_mw: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            storage_mode: StorageMode::FixedEp,
            co2_cap: None,
            equity_fraction: 0.8,
            line_volume_expansion_frac: Some(0.25),
            epsilon_cost: DEFAULT_DISPATCH_EPSILON,
            solver: SolverOptions::default(),
            min_mpi_mw: 1.0,
            min_flh: 80.0,
            threshold_mw: 1000.0,
        }
    }
}

impl ScenarioConfig {
    pub fn with_mode(mode: StorageMode) -> Self {
        Self { storage_mode: mode, ..Self::default() }
    }

    /// The flat `key = value` form read by [`parse_scenario`].
    pub fn to_config_string(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| x.to_string());
        let s = &self.solver;
        format!(
            "storage_mode = {}\nco2_cap = {}\nequity_fraction = {}\nline_volume_expansion_frac = {}\n\
             epsilon_cost = {}\nfeasibility_tol = {}\noptimality_tol = {}\npivot_tol = {}\n\
             max_iterations = {}\nanti_cycling = {}\nstall_window = {}\nscaling = {}\n\
             refactor_interval = {}\nmin_mpi_mw = {}\nmin_flh = {}\nthreshold_mw = {}\n",
            self.storage_mode,
            opt(self.co2_cap),
            self.equity_fraction,
            opt(self.line_volume_expansion_frac),
            self.epsilon_cost,
            s.feasibility_tol,
            s.optimality_tol,
            s.pivot_tol,
            s.max_iterations,
            s.anti_cycling,
            s.stall_window,
            s.scaling,
            s.refactor_interval,
            self.min_mpi_mw,
            self.min_flh,
            self.threshold_mw,
        )
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: malformed key or value `{text}`")]
    MalformedKey { line: usize, text: String },
    #[error("{key} = {value} is out of range ({rule})")]
    OutOfRange { key: String, value: String, rule: &'static str },
}

pub fn parse_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let mut cfg = ScenarioConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let malformed = || ScenarioError::MalformedKey { line: line_no, text: raw.trim().to_string() };
        let (key, value) = line.split_once('=').ok_or_else(malformed)?;
        let (key, value) = (key.trim(), value.trim());
        let out_of_range = |rule| ScenarioError::OutOfRange { key: key.to_string(), value: value.to_string(), rule };
        let num = || -> Result<f64, ScenarioError> {
            let v: f64 = value.parse().map_err(|_| malformed())?;
            if v.is_nan() {
                return Err(malformed());
            }
            Ok(v)
        };
        let opt_num = || -> Result<Option<f64>, ScenarioError> {
            if value.eq_ignore_ascii_case("none") {
                Ok(None)
            } else {
                num().map(Some)
            }
        };
        let count = || -> Result<usize, ScenarioError> { value.parse().map_err(|_| malformed()) };
        let flag = || -> Result<bool, ScenarioError> { value.parse().map_err(|_| malformed()) };
        let positive = |v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(out_of_range("must be > 0"))
            }
        };
        let non_negative = |v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(out_of_range("must be >= 0"))
            }
        };
        match key {
            "storage_mode" => cfg.storage_mode = StorageMode::parse(value).ok_or_else(malformed)?,
            "co2_cap" => cfg.co2_cap = opt_num()?.map(non_negative).transpose()?,
            "equity_fraction" => {
                let v = num()?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(out_of_range("must be within [0, 1]"));
                }
                cfg.equity_fraction = v;
            }
            "line_volume_expansion_frac" => {
                cfg.line_volume_expansion_frac = opt_num()?.map(non_negative).transpose()?
            }
            "epsilon_cost" => cfg.epsilon_cost = non_negative(num()?)?,
            "feasibility_tol" => cfg.solver.feasibility_tol = positive(num()?)?,
            "optimality_tol" => cfg.solver.optimality_tol = positive(num()?)?,
            "pivot_tol" => cfg.solver.pivot_tol = positive(num()?)?,
            "max_iterations" => cfg.solver.max_iterations = count()?,
            "anti_cycling" => cfg.solver.anti_cycling = flag()?,
            "stall_window" => cfg.solver.stall_window = count()?,
            "scaling" => cfg.solver.scaling = flag()?,
            "refactor_interval" => {
                let v = count()?;
                if v == 0 {
                    return Err(out_of_range("must be >= 1"));
                }
                cfg.solver.refactor_interval = v;
            }
            "min_mpi_mw" => cfg.min_mpi_mw = non_negative(num()?)?,
            "min_flh" => cfg.min_flh = non_negative(num()?)?,
            "threshold_mw" => cfg.threshold_mw = non_negative(num()?)?,
            _ => return Err(malformed()),
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_mode_gives_defaults() {
        let c = parse_scenario_str("storage_mode = fixed_ep\n").unwrap();
        assert_eq!(c, ScenarioConfig::default());
        assert_eq!(c.equity_fraction, 0.8);
        assert_eq!(c.line_volume_expansion_frac, Some(0.25));
        assert_eq!(c.epsilon_cost, 0.01);
    }

    #[test]
    fn equity_above_one_is_out_of_range() {
        let e = parse_scenario_str("equity_fraction = 1.5").unwrap_err();
        assert!(matches!(e, ScenarioError::OutOfRange { ref key, .. } if key == "equity_fraction"));
    }

    #[test]
    fn hub_config_with_zero_cap() {
        let c = parse_scenario_str("# hub run\nstorage_mode = h2_hub\nco2_cap = 0 # full reduction\n").unwrap();
        assert_eq!(c.storage_mode, StorageMode::H2Hub);
        assert_eq!(c.co2_cap, Some(0.0));
    }

    #[test]
    fn unknown_key_and_bad_value() {
        assert!(matches!(parse_scenario_str("colour = red"), Err(ScenarioError::MalformedKey { line: 1, .. })));
        assert!(matches!(parse_scenario_str("\nco2_cap = lots"), Err(ScenarioError::MalformedKey { line: 2, .. })));
        assert!(matches!(parse_scenario_str("storage_mode fixed_ep"), Err(ScenarioError::MalformedKey { .. })));
        assert!(matches!(parse_scenario_str("co2_cap = -1"), Err(ScenarioError::OutOfRange { .. })));
    }

    #[test]
    fn config_string_round_trip() {
        let mut c = ScenarioConfig::with_mode(StorageMode::VariableEp);
        c.co2_cap = Some(12.5);
        c.line_volume_expansion_frac = None;
        c.solver.max_iterations = 77;
        assert_eq!(parse_scenario_str(&c.to_config_string()).unwrap(), c);
    }
}
