//! Experiment configuration files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crowdsense::{ComparatorWeights, PolicyKind, ScenarioSpec, SweepParam};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_POLICIES: [&str; 5] = [
    "diversity_ucb",
    "old_ucb",
    "epsilon_greedy:0.1",
    "epsilon_greedy:0.5",
    "random",
];

/// Budgets of the default regret grid, as multiples of the cheapest selection cost.
pub const DEFAULT_BUDGET_MULTIPLIERS: [f64; 8] = [32.0, 64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0];

/// What the file says, before defaults are filled in.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<toml::Value>,
    policies: Option<Vec<String>>,
    seeds: Option<Vec<u64>>,
    #[serde(default)]
    sweep: BTreeMap<String, Vec<f64>>,
    output_path: Option<PathBuf>,
    scenario_per_seed: Option<bool>,
    regret: Option<RawRegret>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegret {
    alpha: Option<f64>,
    budgets: Option<Vec<f64>>,
    budget_multipliers: Option<Vec<f64>>,
    comparator: Option<String>,
}

/// Where the scenario comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ScenarioSource {
    Spec(ScenarioSpec),
    File { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretSettings {
    pub alpha: f64,
    /// Absolute budgets; when empty, `budget_multipliers` scale the cheapest selection cost.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub budgets: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub budget_multipliers: Vec<f64>,
    pub comparator: String,
}

impl RegretSettings {
    pub fn comparator_weights(&self) -> ComparatorWeights {
        match self.comparator.as_str() {
            "own_trajectory" => ComparatorWeights::OwnTrajectory,
            _ => ComparatorWeights::LearnerTrajectory,
        }
    }
}

/// Fully resolved configuration, echoed into every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub policies: Vec<String>,
    pub seeds: Vec<u64>,
    /// Not echoed, so moving the output does not change its bytes.
    #[serde(skip)]
    pub output_path: PathBuf,
    /// Build a fresh synthetic or trace scenario for every seed.
    pub scenario_per_seed: bool,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub sweep: BTreeMap<String, Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regret: Option<RegretSettings>,
    pub scenario: ScenarioSource,
}

/// Which command the configuration is resolved for; they differ in defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Run,
    Regret,
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn parse_raw(path: Option<&Path>) -> Result<RawConfig, CliError> {
    let Some(path) = path else {
        return Ok(RawConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| validation(format!("{}: {e}", path.display())))
}

/// Reads a scenario spec for `generate`: either a `[scenario]` table or a bare spec file.
pub fn load_spec(path: Option<&Path>) -> Result<ScenarioSpec, CliError> {
    let Some(path) = path else {
        return Ok(ScenarioSpec::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut table: toml::Table = toml::from_str(&text).map_err(|e| validation(format!("{}: {e}", path.display())))?;
    let value = match table.remove("scenario") {
        Some(toml::Value::Table(t)) => toml::Value::Table(t),
        Some(_) => return Err(validation("`scenario` must be a table of spec fields to generate from")),
        None => toml::Value::Table(table),
    };
    spec_from_value(value)
}

fn spec_from_value(value: toml::Value) -> Result<ScenarioSpec, CliError> {
    let spec: ScenarioSpec = value
        .try_into()
        .map_err(|e: toml::de::Error| validation(format!("scenario: {e}")))?;
    spec.validate().map_err(|e| validation(e.to_string()))?;
    Ok(spec)
}

pub fn load(path: Option<&Path>, purpose: Purpose, seed_override: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let raw = parse_raw(path)?;
    let scenario = match raw.scenario {
        None => ScenarioSource::Spec(ScenarioSpec {
            workers_per_round: Some(ScenarioSpec::default().k()),
            ..ScenarioSpec::default()
        }),
        Some(toml::Value::String(file)) => ScenarioSource::File { file: file.into() },
        Some(v @ toml::Value::Table(_)) => {
            let mut spec = spec_from_value(v)?;
            spec.workers_per_round = Some(spec.k());
            ScenarioSource::Spec(spec)
        }
        Some(_) => return Err(validation("`scenario` must be a table or a scenario file path")),
    };

    let default_policies: &[&str] = match purpose {
        Purpose::Regret => &["diversity_ucb"],
        _ => &DEFAULT_POLICIES,
    };
    let policies = raw
        .policies
        .unwrap_or_else(|| default_policies.iter().map(|s| s.to_string()).collect());
    if policies.is_empty() {
        return Err(validation("at least one policy is required"));
    }
    for p in &policies {
        p.parse::<PolicyKind>().map_err(|e| validation(e.to_string()))?;
    }
    let mut seeds = raw.seeds.unwrap_or_else(|| (0..10).collect());
    if let Some(s) = seed_override {
        seeds = vec![s];
    }
    if seeds.is_empty() {
        return Err(validation("at least one seed is required"));
    }
    for (name, values) in &raw.sweep {
        name.parse::<SweepParam>().map_err(|e| validation(e.to_string()))?;
        if values.is_empty() {
            return Err(validation(format!("sweep over `{name}` has no values")));
        }
    }
    if purpose == Purpose::Regret && !raw.sweep.is_empty() {
        return Err(validation("regret experiments sweep the budget themselves; remove `sweep`"));
    }

    let regret = match purpose {
        Purpose::Regret => {
            let r = raw.regret.unwrap_or_default();
            let alpha = r.alpha.unwrap_or(0.5);
            if !(0.0..=1.0).contains(&alpha) {
                return Err(validation(format!("regret.alpha = {alpha} not in [0, 1]")));
            }
            let comparator = r.comparator.unwrap_or_else(|| "learner_trajectory".into());
            if !matches!(comparator.as_str(), "learner_trajectory" | "own_trajectory") {
                return Err(validation(format!(
                    "regret.comparator must be learner_trajectory or own_trajectory, got `{comparator}`"
                )));
            }
            let (budgets, budget_multipliers) = match (r.budgets, r.budget_multipliers) {
                (Some(_), Some(_)) => {
                    return Err(validation("give either regret.budgets or regret.budget_multipliers"))
                }
                (Some(b), None) => (b, Vec::new()),
                (None, Some(m)) => (Vec::new(), m),
                (None, None) => (Vec::new(), DEFAULT_BUDGET_MULTIPLIERS.to_vec()),
            };
            if budgets.is_empty() && budget_multipliers.is_empty() {
                return Err(validation("the regret budget grid is empty"));
            }
            if budgets.iter().chain(&budget_multipliers).any(|&b| !(b > 0.0 && b.is_finite())) {
                return Err(validation("regret budgets must be positive"));
            }
            Some(RegretSettings {
                alpha,
                budgets,
                budget_multipliers,
                comparator,
            })
        }
        _ => None,
    };

    let default_out = match purpose {
        Purpose::Run => "results.csv",
        Purpose::Regret => "regret.csv",
    };
    Ok(ExperimentConfig {
        policies,
        seeds,
        output_path: raw.output_path.unwrap_or_else(|| default_out.into()),
        scenario_per_seed: raw.scenario_per_seed.unwrap_or(true),
        sweep: raw.sweep,
        regret,
        scenario,
    })
}

impl ExperimentConfig {
    pub fn policy_kinds(&self) -> Vec<PolicyKind> {
        self.policies.iter().map(|p| p.parse().expect("validated on load")).collect()
    }

    pub fn sweep_grid(&self) -> BTreeMap<SweepParam, Vec<f64>> {
        self.sweep
            .iter()
            .map(|(k, v)| (k.parse().expect("validated on load"), v.clone()))
            .collect()
    }

    /// The configuration as TOML, each line prefixed with `# `.
    pub fn echo(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        let mut out = String::new();
        for line in text.lines() {
            out.push('#');
            if !line.is_empty() {
                out.push(' ');
                out.push_str(line);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, purpose: Purpose) -> Result<ExperimentConfig, CliError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, text).unwrap();
        load(Some(&path), purpose, None)
    }

    #[test]
    fn minimal_config_resolves_defaults() {
        let cfg = parse("policies = [\"random\"]\nseeds = [1, 2]\noutput_path = \"x.csv\"\n", Purpose::Run).unwrap();
        let ScenarioSource::Spec(spec) = &cfg.scenario else { panic!() };
        assert_eq!(spec.k(), 17);
        assert_eq!(spec.budget, 850.0);
        assert!(cfg.scenario_per_seed);
        assert!(cfg.echo().lines().all(|l| l.starts_with('#')));
        assert!(cfg.echo().contains("kappa = 0.4"));
    }

    #[test]
    fn bad_configs() {
        assert!(matches!(parse("policies = []", Purpose::Run), Err(CliError::Validation(_))));
        assert!(matches!(parse("policies = [\"ucb9\"]", Purpose::Run), Err(CliError::Validation(_))));
        assert!(matches!(parse("[sweep]\nlambda = [1.0]", Purpose::Run), Err(CliError::Validation(_))));
        assert!(matches!(parse("[scenario]\nN = 5\nK = 6", Purpose::Run), Err(CliError::Validation(_))));
        assert!(matches!(parse("colour = 1", Purpose::Run), Err(CliError::Validation(_))));
        assert!(matches!(parse("[regret]\nalpha = 2.0", Purpose::Regret), Err(CliError::Validation(_))));
    }

    #[test]
    fn seed_override_replaces_seeds() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, "seeds = [1, 2, 3]").unwrap();
        assert_eq!(load(Some(&path), Purpose::Run, Some(42)).unwrap().seeds, vec![42]);
    }

    #[test]
    fn regret_defaults() {
        let cfg = parse("[scenario]\nM = 8\nN = 5\nK = 2\noption_size_range = [2, 4]", Purpose::Regret).unwrap();
        assert_eq!(cfg.policies, vec!["diversity_ucb"]);
        let r = cfg.regret.unwrap();
        assert_eq!(r.alpha, 0.5);
        assert_eq!(r.budget_multipliers.len(), 8);
        assert_eq!(r.comparator_weights(), ComparatorWeights::LearnerTrajectory);
    }
}
