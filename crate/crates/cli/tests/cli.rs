use std::process::{Command, Output};

fn modpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modpc")).args(args).output().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn clean_campaign_exits_zero() {
    let o = modpc(&["lemma71", "--n", "2", "--trials", "5", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["aggregate"]["passed"], 5);
}

#[test]
fn sequential_and_parallel_reports_agree() {
    let strip = |mut v: serde_json::Value| {
        v.as_object_mut().unwrap().remove("timing");
        v
    };
    let a = strip(json(&modpc(&["run", "--statement", "lemma23", "--trials", "6"])));
    let b = strip(json(&modpc(&["run", "--statement", "lemma23", "--trials", "6", "--sequential"])));
    assert_eq!(a, b);
}

#[test]
fn mutation_exits_one() {
    let o = modpc(&["run", "--statement", "transfer24", "--trials", "3", "--mutate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(json(&o)["aggregate"]["falsifications"].as_u64().unwrap() > 0);
}

#[test]
fn invalid_config_exits_two() {
    let o = modpc(&["lemma71", "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid configuration"));
    assert_eq!(modpc(&["run", "--statement", "nope"]).status.code(), Some(2));
}

#[test]
fn config_file_and_csv() {
    let dir = std::env::temp_dir().join(format!("modpc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    let csv = dir.join("out.csv");
    std::fs::write(&cfg, r#"{"statement":"prop74","n":1,"trials":4,"seed":9}"#).unwrap();
    let o = modpc(&["run", "--config", cfg.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(table.starts_with("trial,valuation,threshold,margin,pass"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn constants_subcommand() {
    let o = modpc(&["constants", "--beta", "0", "--M", "4", "--M1", "16", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["c"], "1/16");
}

#[test]
fn cosets_subcommand_counts() {
    let o = modpc(&["cosets", "--n", "1", "--p", "3", "--exponent", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &json(&o)["report"];
    assert_eq!(r["distinct_keys"], 9);
    assert_eq!(r["predicted"], 9);
}
