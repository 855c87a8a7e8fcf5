use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn crowdsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crowdsense")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

const SMALL_REGRET: &str = "seeds = [0, 1]\n[scenario]\nM = 8\nN = 5\nK = 2\noptions_per_worker = 2\n\
                            option_size_range = [2, 4]\nplane_size_m = 600.0\n";

#[test]
fn minimal_config_runs_every_policy_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "policies = [\"diversity_ucb\", \"old_ucb\", \"epsilon_greedy:0.1\", \"random\"]\n\
         [scenario]\nM = 100\nN = 15\nplane_size_m = 3000.0\n",
    );
    let out = dir.path().join("r.csv");
    let o = crowdsense(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|r| r.ends_with(",ok")));
    assert!(csv.lines().any(|l| l == "run_id,policy,seed,B,K,kappa,gamma,lambda,r,rounds,total_weighted_quality,normalized_entropy,status"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["cells"].as_array().unwrap().len(), 4);
    assert_eq!(summary["failures"], 0);
}

#[test]
fn seed_override_replaces_the_seed_list() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "policies = [\"random\"]\nseeds = [1, 2, 3]\n[scenario]\nM = 50\nN = 6\n");
    let out = dir.path().join("r.csv");
    let o = crowdsense(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed-override", "42"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(&out).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("0,random,42,"));
}

#[test]
fn validation_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_k = write(dir.path(), "k.toml", "[scenario]\nN = 5\nK = 6\n");
    let out = dir.path().join("x.csv");
    for cmd in ["run", "generate", "regret"] {
        let o = crowdsense(&[cmd, "--config", &bad_k, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
    }
    let unknown = write(dir.path(), "u.toml", "colour = \"red\"\n");
    assert_eq!(crowdsense(&["run", "--config", &unknown]).status.code(), Some(2));
    assert_eq!(crowdsense(&["summon"]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn missing_config_exits_with_1() {
    let o = crowdsense(&["run", "--config", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn oversized_regret_instance_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("regret.csv");
    let o = crowdsense(&["regret", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("too large to enumerate"));
    assert!(!out.exists());
}

#[test]
fn single_budget_regret_omits_the_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.toml", &format!("{SMALL_REGRET}[regret]\nbudgets = [20.0]\n"));
    let out = dir.path().join("regret.csv");
    let o = crowdsense(&["regret", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(data_rows(&csv).len(), 1);
    assert!(csv.contains("omitted, fewer than two budget points"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("regret.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["curves"][0]["fit_omitted"], true);
    assert!(summary["curves"][0]["fit"].is_null());
}

#[test]
fn regret_reports_a_fit_over_the_multiplier_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.toml", &format!("{SMALL_REGRET}[regret]\nbudget_multipliers = [32.0, 64.0, 128.0]\n"));
    let out = dir.path().join("regret.csv");
    assert!(crowdsense(&["regret", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let csv = fs::read_to_string(&out).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("diversity_ucb,") && rows[0].contains(",32,2,"));
    assert!(csv.contains("# fit diversity_ucb: mean_regret = a + b ln B"));
}

#[test]
fn generated_scenario_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.toml", "M = 40\nN = 6\nK = 2\nbudget = 60.0\nplane_size_m = 2000.0\n");
    let scenario = dir.path().join("scenario.json");
    assert!(crowdsense(&["generate", "--config", &spec, "--out", scenario.to_str().unwrap()]).status.success());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&scenario).unwrap()).unwrap();
    assert_eq!(json["tasks"].as_array().unwrap().len(), 40);

    let cfg = write(
        dir.path(),
        "c.toml",
        &format!("policies = [\"diversity_ucb\"]\nseeds = [0]\nscenario = {:?}\n[sweep]\nbudget = [30.0, 60.0]\n", scenario),
    );
    let out = dir.path().join("r.csv");
    let o = crowdsense(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains(",30,2,") && rows[1].contains(",60,2,"));

    let sweep_n = write(
        dir.path(),
        "n.toml",
        &format!("scenario = {:?}\n[sweep]\nN = [3.0]\n", scenario),
    );
    assert_eq!(crowdsense(&["run", "--config", &sweep_n]).status.code(), Some(2));
}

#[test]
fn reruns_into_other_directories_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "seeds = [5, 6]\n[scenario]\nM = 60\nN = 9\n[sweep]\nkappa = [0.1, 0.9]\n");
    let a = dir.path().join("a/out.csv");
    let b = dir.path().join("b/c/out.csv");
    for (p, jobs) in [(&a, "1"), (&b, "3")] {
        assert!(crowdsense(&["run", "--config", &cfg, "--out", p.to_str().unwrap(), "--jobs", jobs]).status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(
        fs::read(a.with_extension("summary.json")).unwrap(),
        fs::read(b.with_extension("summary.json")).unwrap()
    );
}
