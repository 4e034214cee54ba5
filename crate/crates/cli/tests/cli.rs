mod common;

use std::path::Path;
use std::process::{Command, Output};

use botlint_core::dsl;
use serde_json::Value;

const FIG1: &str = "mcore \"mBot\" {[on_flag; move_timed(fwd,50,1); move_timed(fwd,50,1); led_on(255,0,0)]}";
const FIG1_HINT: &str = "The LEDs on your robot are still turned on after the program has stopped. Add an LED Off block at the end of your program.";

fn botlint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_botlint"))
        .args(args)
        .env_remove("BOTLINT_LANG")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_project(dir: &Path, name: &str, src: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(&dsl::to_json(src).unwrap()).unwrap()).unwrap();
    path.display().to_string()
}

#[test]
fn check_prints_fig1_hint_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_project(dir.path(), "fig1.json", FIG1);
    let out = botlint(&["check", &path, "--format", "text"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains(FIG1_HINT), "{}", stdout(&out));
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let clean = write_project(dir.path(), "clean.json", "mcore{[on_flag; wait(1)]}");
    assert_eq!(botlint(&["check", &clean]).status.code(), Some(0));
    let missing = dir.path().join("nope.json").display().to_string();
    let out = botlint(&["check", &missing]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));
    // perfumes only: the missing LED off is not reported, so no bug
    let fig1 = write_project(dir.path(), "fig1.json", FIG1);
    assert_eq!(botlint(&["check", &fig1, "--include", "perfumes"]).status.code(), Some(0));
}

#[test]
fn check_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let fig1 = write_project(dir.path(), "fig1.json", FIG1);
    let out = botlint(&["check", &fig1, "--format", "json", "--include", "bugs"]);
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["schema"], "botlint-report-1");
    assert_eq!(report["metrics"]["block_count"], 4);
    let issues = report["issues"].as_array().unwrap();
    assert_eq!(issues.len(), 1);
    assert_eq!(issues[0]["pattern_id"], "led-off-missing");
    assert_eq!(issues[0]["category"], "BUG");
    assert_eq!(issues[0]["hint"], FIG1_HINT);

    let out = botlint(&["check", &fig1, "--format", "csv"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("project,actor,script,pattern_id,category,block_ids,hint"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn language_flag_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let fig1 = write_project(dir.path(), "fig1.json", FIG1);
    let en = stdout(&botlint(&["check", &fig1, "--include", "bugs"]));
    let de = stdout(&botlint(&["check", &fig1, "--include", "bugs", "--lang", "de"]));
    assert_ne!(en, de);
    let env = Command::new(env!("CARGO_BIN_EXE_botlint"))
        .args(["check", &fig1, "--include", "bugs"])
        .env("BOTLINT_LANG", "de")
        .output()
        .unwrap();
    assert_eq!(stdout(&env), de);
    // unknown language falls back to English
    assert_eq!(stdout(&botlint(&["check", &fig1, "--include", "bugs", "--lang", "xx"])), en);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let fig1 = write_project(dir.path(), "fig1.json", FIG1);
    let target = dir.path().join("report.json");
    let out = botlint(&["check", &fig1, "--format", "json", "--output", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert!(!report["issues"].as_array().unwrap().is_empty());
}

#[test]
fn corpus_counts_instances_and_projects() {
    let dir = tempfile::tempdir().unwrap();
    // one and two missing LED offs, plus a clean project
    write_project(dir.path(), "a.json", "mcore{[on_flag; led_on(1,2,3)]}");
    write_project(dir.path(), "b.json", "mcore{[on_flag; forever[if(button())[led_on(1,2,3)] else [led_on(3,2,1)]]]}");
    write_project(dir.path(), "c.json", "mcore{[on_flag; wait(1)]}");
    let out = botlint(&["corpus", dir.path().to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let table: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(table["projects_analyzed"], 3);
    let row = table["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["pattern_id"] == "led-off-missing")
        .unwrap();
    assert_eq!(row["instance_count"], 3);
    assert_eq!(row["project_count"], 2);
    // WMC 1 for a, 3 for b
    assert_eq!(row["mean_wmc_of_affected"], 2.0);
}

#[test]
fn corpus_of_empty_dir_is_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = botlint(&["corpus", dir.path().to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 47 + 3 + 1);
    for line in text.lines().skip(1) {
        assert!(line.ends_with(",0,0,"), "{line}");
    }
}

#[test]
fn filter_robot_code_skips_projects_without_robot_scripts() {
    let dir = tempfile::tempdir().unwrap();
    write_project(dir.path(), "robot.json", "mcore{[on_flag; led_on(1,2,3)]}");
    write_project(dir.path(), "sprite.json", "sprite{[on_flag; wait(1)]} mcore{}");
    let d = dir.path().to_str().unwrap();
    let all: Value = serde_json::from_str(&stdout(&botlint(&["corpus", d, "--format", "json"]))).unwrap();
    let filtered: Value =
        serde_json::from_str(&stdout(&botlint(&["corpus", d, "--format", "json", "--filter-robot-code"]))).unwrap();
    assert_eq!(all["projects_analyzed"], 2);
    assert_eq!(filtered["projects_analyzed"], 1);
    assert_eq!(filtered["projects_skipped"], 1);
}

#[test]
fn metrics_for_file_and_directory() {
    let dir = tempfile::tempdir().unwrap();
    let fig1 = write_project(dir.path(), "fig1.json", FIG1);
    write_project(dir.path(), "other.json", "mcore{[on_flag; forever[wait(1)]]}");
    let out = botlint(&["metrics", &fig1, "--format", "csv"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "project,block_count,script_count,wmc,longest_script,most_complex_script");
    assert!(lines[1].ends_with(",4,1,1,4,1"), "{}", lines[1]);
    let out = botlint(&["metrics", dir.path().to_str().unwrap(), "--format", "json"]);
    let rows: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert_eq!(rows[1]["wmc"], 2);
}

#[test]
fn compare_identical_and_empty_corpora() {
    let corpus = common::corpus_dir();
    let c = corpus.to_str().unwrap();
    let out = botlint(&["compare", c, c, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let rows: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 8);
    for row in rows.as_array().unwrap() {
        assert_eq!(row["a12"], 0.5, "{row}");
    }
    let empty = tempfile::tempdir().unwrap();
    let out = botlint(&["compare", c, empty.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no analyzable project"));
}

#[test]
fn compare_per_block_and_metric_selection() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (k, n) in [1, 2, 3].into_iter().enumerate() {
        let body = vec!["wait(1)"; n].join("; ");
        write_project(a.path(), &format!("{k}.json"), &format!("mcore{{[on_flag; {body}]}}"));
        let body = vec!["wait(1)"; n + 10].join("; ");
        write_project(b.path(), &format!("{k}.json"), &format!("mcore{{[on_flag; {body}]}}"));
    }
    let out = botlint(&[
        "compare",
        a.path().to_str().unwrap(),
        b.path().to_str().unwrap(),
        "--metric",
        "block_count,bugs",
        "--per-block",
        "--format",
        "csv",
    ]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "metric,n1,n2,mean_a,mean_b,u_statistic,p_value,a12");
    assert!(lines[1].starts_with("block_count,3,3,"));
    assert!(lines[1].ends_with(",0.0"), "{}", lines[1]);
    assert!(lines[2].starts_with("bugs/block,"));
    let out = botlint(&["compare", a.path().to_str().unwrap(), b.path().to_str().unwrap(), "--metric", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}
