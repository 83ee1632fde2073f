use std::path::Path;
use std::process::{Command, Output};

fn teamsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teamsim")).args(args).output().expect("binary runs")
}

fn run_into(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--quiet", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    teamsim(&args)
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

const SMALL: [&str; 12] =
    ["--rounds", "4", "--periods", "20", "--k", "3", "--structure", "random", "--tau", "inf,10,1", "--prob", "0,1"];

#[test]
fn single_scenario_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("one");
    let res = run_into(
        &out,
        &["--mode", "lateral", "--tau", "1", "--k", "3", "--structure", "block", "--prob", "0.5", "--rounds", "5", "--rounds-csv"],
    );
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = lines(&out.join("summary.csv"));
    assert_eq!(
        summary[0],
        "scenario_id,mode,k,structure,tau,prob,rounds,mean_perf,mean_ci,final_perf,final_ci"
    );
    assert_eq!(summary.len(), 2);
    assert!(summary[1].starts_with("lateral-k3-block-tau1-p0.5,lateral,3,block,1,0.5,5,"));
    let periods = lines(&out.join("periods.csv"));
    assert_eq!(periods[0], "scenario_id,period,mean_norm_perf");
    assert_eq!(periods.len(), 101);
    let rounds = lines(&out.join("rounds.csv"));
    assert_eq!(rounds[0], "scenario_id,round,mean_perf,final_perf");
    assert_eq!(rounds.len(), 6);
    assert!(out.join("manifest.toml").exists());
}

#[test]
fn default_grid_has_one_row_per_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let res = run_into(tmp.path(), &["--grid", "default", "--rounds", "10", "--seed", "42"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(lines(&tmp.path().join("summary.csv")).len(), 1 + 1584);
}

#[test]
fn reruns_and_manifest_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    assert!(run_into(&a, &SMALL).status.success());
    let mut more = SMALL.to_vec();
    more.extend(["--workers", "3"]);
    assert!(run_into(&b, &more).status.success());
    let manifest = a.join("manifest.toml");
    assert!(run_into(&c, &["--config", manifest.to_str().unwrap()]).status.success());
    for name in ["summary.csv", "periods.csv"] {
        let reference = std::fs::read(a.join(name)).unwrap();
        assert_eq!(reference, std::fs::read(b.join(name)).unwrap(), "{name} vs 3 workers");
        assert_eq!(reference, std::fs::read(c.join(name)).unwrap(), "{name} vs manifest rerun");
    }
}

#[test]
fn invalid_config_names_the_constraint_and_leaves_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bad");
    let res = run_into(&out, &["--structure", "block", "--k", "4", "--rounds", "2"]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("block"), "{err}");
    assert!(!out.exists());

    let res = run_into(&out, &["--prob", "1.5"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());

    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "rounds = 3\nnot_a_key = 1\n").unwrap();
    let res = run_into(&out, &["--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("not_a_key"));
    assert!(!out.exists());
}

#[test]
fn config_file_with_dotted_grid_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(
        &cfg,
        "rounds = 3\nperiods = 10\ngrid.mode = [\"sequential\", \"liaison\"]\ngrid.k = [5]\n\
         grid.structure = [\"local\"]\ngrid.tau = [\"inf\", 1]\ngrid.prob = [0.2]\n",
    )
    .unwrap();
    let out = tmp.path().join("o");
    let res = run_into(&out, &["--config", cfg.to_str().unwrap(), "--rounds", "2"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = lines(&out.join("summary.csv"));
    assert_eq!(summary.len(), 5);
    assert!(summary[1].starts_with("sequential-k5-local-tauinf-p0.2,"));
    assert!(summary.iter().skip(1).all(|l| l.contains(",2,")));
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("env-out");
    let res = Command::new(env!("CARGO_BIN_EXE_teamsim"))
        .args(["run", "--quiet", "--mode", "sequential", "--k", "3", "--structure", "local", "--tau", "1"])
        .args(["--prob", "0", "--rounds", "2", "--periods", "5"])
        .env("TEAMSIM_OUT", &out)
        .output()
        .unwrap();
    assert!(res.status.success());
    assert!(out.join("summary.csv").exists());
}

#[test]
fn report_presets_have_the_table_shapes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("r");
    let mut args = vec!["--rounds", "3", "--periods", "10", "--structure", "random,local", "--prob", "0,0.5,1"];
    args.extend(["--tau", "inf,10,1"]);
    assert!(run_into(&out, &args).status.success());
    let summary = out.join("summary.csv");
    let res = teamsim(&["report", summary.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let t2 = lines(&out.join("table2.csv"));
    assert_eq!(t2[0], "tau,mode,scenarios,rounds,mean_perf,mean_ci,final_perf,final_ci");
    assert_eq!(t2.len(), 1 + 3 * 4);
    assert!(t2[1].starts_with("inf,fully_autonomous,12,36,"));
    assert!(t2[12].starts_with("1,lateral,"));
    let t3 = lines(&out.join("table3.csv"));
    assert_eq!(t3.len(), 1 + 3 * 4 * 2);
    let fig = lines(&out.join("fig3.csv"));
    assert_eq!(fig[0], "tau,mode,prob,scenarios,rounds,mean_perf,mean_ci,final_perf,final_ci");
    assert_eq!(fig.len(), 1 + 3 * 4 * 3);
}

#[test]
fn report_rejects_missing_columns_and_empty_input() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("summary.csv");
    std::fs::write(&bad, "scenario_id,mode,k,structure,tau,prob,rounds,mean_perf,final_perf\n").unwrap();
    let res = teamsim(&["report", bad.to_str().unwrap(), "--preset", "table2"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("mean_ci"));

    let empty_dir = tmp.path().join("empty");
    std::fs::create_dir(&empty_dir).unwrap();
    let empty = empty_dir.join("summary.csv");
    std::fs::write(&empty, "scenario_id,mode,k,structure,tau,prob,rounds,mean_perf,mean_ci,final_perf,final_ci\n").unwrap();
    let res = teamsim(&["report", empty.to_str().unwrap()]);
    assert_ne!(res.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(&empty_dir).unwrap().count(), 1);

    let res = teamsim(&["report", empty.to_str().unwrap(), "--preset", "table7"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn oracle_checks() {
    let res = teamsim(&["oracle", "block-decomposability", "--seed", "7"]);
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stdout).starts_with("PASS block-decomposability"));
    assert!(teamsim(&["oracle", "k0-single-peak"]).status.success());
    let res = teamsim(&["oracle", "unknown-name"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("argmax-equivalence"));
}
