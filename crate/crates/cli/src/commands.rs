use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crowdsense::stats::{fit_log, LogFit};
use crowdsense::{
    build_from_trace, check_enumerable, expand_grid, min_selection_cost, parse_trace, regret_curve, summarize, sweep,
    GridPoint, Hyperparameters, RegretPoint, Scenario, ScenarioSpec, SweepParam, TracePoint,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{self, ExperimentConfig, Purpose, ScenarioSource};
use crate::CliError;

pub const RUN_COLUMNS: &str =
    "run_id,policy,seed,B,K,kappa,gamma,lambda,r,rounds,total_weighted_quality,normalized_entropy,status";
pub const REGRET_COLUMNS: &str = "policy,B,budget_multiplier,runs,mean_regret,std_regret,mean_rounds";

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `results.csv` -> `results.summary.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

fn pretty_json(value: &impl Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    text
}

pub fn generate(
    config: Option<&Path>,
    trace: Option<&Path>,
    out: Option<&Path>,
    seed_override: Option<u64>,
) -> Result<PathBuf, CliError> {
    let mut spec = config::load_spec(config)?;
    if let Some(t) = trace {
        spec.source = t.to_string_lossy().into_owned();
    }
    if let Some(s) = seed_override {
        spec.seed = s;
    }
    let scenario = spec.build()?;
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| "scenario.json".into());
    write_file(&out, &scenario.to_json()?)?;
    Ok(out)
}

/// Builds scenarios for grid points, from a spec, a trace or a fixed file.
struct ScenarioFactory {
    base: Base,
    per_seed: bool,
}

enum Base {
    Synthetic(ScenarioSpec),
    Trace(ScenarioSpec, Vec<TracePoint>),
    Fixed(Scenario),
}

impl ScenarioFactory {
    fn new(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let base = match &cfg.scenario {
            ScenarioSource::Spec(spec) if spec.source == "synthetic" => Base::Synthetic(spec.clone()),
            ScenarioSource::Spec(spec) => Base::Trace(spec.clone(), parse_trace(Path::new(&spec.source))?),
            ScenarioSource::File { file } => {
                let text =
                    fs::read_to_string(file).map_err(|e| CliError::Io(format!("{}: {e}", file.display())))?;
                Base::Fixed(Scenario::from_json(&text)?)
            }
        };
        Ok(Self {
            base,
            per_seed: cfg.scenario_per_seed,
        })
    }

    fn spec_for(spec: &ScenarioSpec, point: &GridPoint) -> crowdsense::Result<ScenarioSpec> {
        let mut spec = spec.clone();
        for &(param, value) in point {
            spec = spec.with_param(param, value)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    fn hyper_for(h: &Hyperparameters, point: &GridPoint) -> crowdsense::Result<Hyperparameters> {
        let mut h = *h;
        for &(param, value) in point {
            let whole = || {
                (value >= 0.0 && value.fract() == 0.0).then_some(value as usize).ok_or_else(|| {
                    crowdsense::Error::InvalidParameter {
                        name: "sweep",
                        reason: format!("{param} = {value} is not a whole number"),
                    }
                })
            };
            match param {
                SweepParam::Budget => h.budget = value,
                SweepParam::Kappa => h.kappa = value,
                SweepParam::Gamma => h.gamma = value,
                SweepParam::K => h.k = whole()?,
                SweepParam::R => h.r = whole()?,
                SweepParam::N | SweepParam::M => {
                    return Err(crowdsense::Error::InvalidParameter {
                        name: "sweep",
                        reason: format!("{param} cannot be swept over a fixed scenario file"),
                    })
                }
            }
        }
        Ok(h)
    }

    /// Checks every grid point before any run starts.
    fn validate(&self, points: &[GridPoint]) -> Result<(), CliError> {
        for p in points {
            match &self.base {
                Base::Synthetic(spec) | Base::Trace(spec, _) => {
                    Self::spec_for(spec, p)?;
                }
                Base::Fixed(s) => {
                    s.with_hyperparameters(Self::hyper_for(s.hyper(), p)?)?;
                }
            }
        }
        Ok(())
    }

    fn build(&self, point: &GridPoint, seed: u64) -> crowdsense::Result<Scenario> {
        let seeded = |spec: &ScenarioSpec| -> crowdsense::Result<ScenarioSpec> {
            let mut spec = Self::spec_for(spec, point)?;
            if self.per_seed {
                spec.seed = seed;
            }
            Ok(spec)
        };
        match &self.base {
            Base::Synthetic(spec) => crowdsense::build_synthetic(&seeded(spec)?),
            Base::Trace(spec, points) => build_from_trace(points, &seeded(spec)?),
            Base::Fixed(s) => s.with_hyperparameters(Self::hyper_for(s.hyper(), point)?),
        }
    }
}

fn csv_field(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

fn describe_point(point: &GridPoint) -> String {
    if point.is_empty() {
        return "base scenario".into();
    }
    point.iter().map(|(p, v)| format!("{p}={v}")).collect::<Vec<_>>().join(" ")
}

/// Outcome of `run`: where results went and how many runs failed.
pub struct RunReport {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub failures: usize,
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let factory = ScenarioFactory::new(cfg)?;
    let points = expand_grid(&cfg.sweep_grid());
    factory.validate(&points)?;
    let policies = cfg.policy_kinds();

    let mut outcomes = sweep(&points, &policies, &cfg.seeds, |p, s| factory.build(p, s));
    outcomes.sort_by_key(|o| (o.cell, o.policy, o.seed));

    let mut csv = String::from("# crowdsense run\n");
    csv.push_str(&cfg.echo());
    for (i, p) in points.iter().enumerate() {
        writeln!(csv, "# cell {i}: {}", describe_point(p)).unwrap();
    }
    csv.push_str(RUN_COLUMNS);
    csv.push('\n');
    let mut failures = 0;
    for (run_id, o) in outcomes.iter().enumerate() {
        let policy = &cfg.policies[o.policy];
        let hyper = o.scenario.as_ref().map(|s| *s.hyper());
        let h = |f: fn(&Hyperparameters) -> String| hyper.as_ref().map(f).unwrap_or_default();
        let (rounds, total, entropy, status) = match &o.result {
            Ok(r) => (
                r.rounds.to_string(),
                r.total_weighted_quality.to_string(),
                r.normalized_entropy.to_string(),
                "ok".to_string(),
            ),
            Err(e) => {
                failures += 1;
                (String::new(), String::new(), String::new(), format!("failed: {}", csv_field(e)))
            }
        };
        writeln!(
            csv,
            "{run_id},{policy},{},{},{},{},{},{},{},{rounds},{total},{entropy},{status}",
            o.seed,
            h(|h| h.budget.to_string()),
            h(|h| h.k.to_string()),
            h(|h| h.kappa.to_string()),
            h(|h| h.gamma.to_string()),
            h(|h| h.lambda.to_string()),
            h(|h| h.r.to_string()),
        )
        .unwrap();
    }

    let cells: Vec<serde_json::Value> = summarize(&outcomes, &policies)
        .into_iter()
        .map(|c| {
            let params: serde_json::Map<String, serde_json::Value> =
                points[c.cell].iter().map(|(p, v)| (p.to_string(), json!(v))).collect();
            json!({ "params": params, "summary": c })
        })
        .collect();
    let summary = json!({ "config": cfg, "cells": cells, "failures": failures });

    let out = &cfg.output_path;
    let summary_out = summary_path(out);
    write_file(out, &csv)?;
    write_file(&summary_out, &pretty_json(&summary))?;
    Ok(RunReport {
        csv: out.clone(),
        summary: summary_out,
        failures,
    })
}

#[derive(Serialize)]
struct PolicyCurve {
    policy: String,
    points: Vec<RegretPoint>,
    fit: Option<LogFit>,
    fit_omitted: bool,
}

pub fn regret(cfg: &ExperimentConfig) -> Result<(PathBuf, PathBuf), CliError> {
    let settings = cfg.regret.as_ref().expect("regret settings resolved");
    let scenario = match &cfg.scenario {
        ScenarioSource::Spec(spec) => spec.build()?,
        ScenarioSource::File { file } => {
            let text = fs::read_to_string(file).map_err(|e| CliError::Io(format!("{}: {e}", file.display())))?;
            Scenario::from_json(&text)?
        }
    };
    let k = scenario.hyper().k;
    check_enumerable(&scenario, k)?;

    let c_star = min_selection_cost(&scenario, k);
    let (budgets, multipliers): (Vec<f64>, Vec<Option<f64>>) = if settings.budgets.is_empty() {
        settings.budget_multipliers.iter().map(|&m| (m * c_star, Some(m))).unzip()
    } else {
        settings.budgets.iter().map(|&b| (b, None)).unzip()
    };

    let mut csv = String::from("# crowdsense regret\n");
    csv.push_str(&cfg.echo());
    writeln!(csv, "# alpha = {}, cheapest K-selection cost = {c_star}", settings.alpha).unwrap();
    csv.push_str(REGRET_COLUMNS);
    csv.push('\n');
    let mut curves = Vec::new();
    for (name, kind) in cfg.policies.iter().zip(cfg.policy_kinds()) {
        let points = regret_curve(
            &scenario,
            kind,
            &budgets,
            &cfg.seeds,
            settings.alpha,
            settings.comparator_weights(),
        )?;
        for (p, m) in points.iter().zip(&multipliers) {
            writeln!(
                csv,
                "{name},{},{},{},{},{},{}",
                p.budget,
                m.map(|m| m.to_string()).unwrap_or_default(),
                p.runs,
                p.mean_regret,
                p.std_regret,
                p.mean_rounds
            )
            .unwrap();
        }
        let ys: Vec<f64> = points.iter().map(|p| p.mean_regret).collect();
        let fit = fit_log(&budgets, &ys);
        curves.push(PolicyCurve {
            policy: name.clone(),
            points,
            fit,
            fit_omitted: fit.is_none(),
        });
    }
    for c in &curves {
        match &c.fit {
            Some(f) => writeln!(
                csv,
                "# fit {}: mean_regret = a + b ln B with a = {}, b = {}, r_squared = {}",
                c.policy, f.intercept, f.slope, f.r_squared
            ),
            None => writeln!(csv, "# fit {}: omitted, fewer than two budget points", c.policy),
        }
        .unwrap();
    }

    let summary = json!({
        "config": cfg,
        "cheapest_selection_cost": c_star,
        "curves": curves,
    });
    let out = &cfg.output_path;
    let summary_out = summary_path(out);
    write_file(out, &csv)?;
    write_file(&summary_out, &pretty_json(&summary))?;
    Ok((out.clone(), summary_out))
}

/// Loads the config for `purpose`, applying the `--out` override.
pub fn resolve(
    path: Option<&Path>,
    purpose: Purpose,
    out: Option<&Path>,
    seed_override: Option<u64>,
) -> Result<ExperimentConfig, CliError> {
    let mut cfg = config::load(path, purpose, seed_override)?;
    if let Some(o) = out {
        cfg.output_path = o.to_path_buf();
    }
    Ok(cfg)
}
