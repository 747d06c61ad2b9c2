mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use botlens::ingest::{parse_account_file, write_account_file, ParseMode};
use botlens::report::{read_manifest, RunStatus, MANIFEST_FILE};
use botlens::{Label, LabeledDataset};

use common::{blank, population, write_experiment, Population};

fn botlens(args: &[&str], config: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_botlens"));
    cmd.args(args);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn small_experiment(dir: &Path, extra: &str) -> std::path::PathBuf {
    let (bots, humans) = population(&Population::default());
    write_experiment(dir, "synthetic", &bots, &humans, extra)
}

/// Files in `dir`, manifest excluded, relative names.
fn files_on_disk(dir: &Path) -> BTreeSet<String> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != MANIFEST_FILE)
        .collect()
}

#[test]
fn ingest_prints_five_threshold_columns() {
    let dir = tempfile::tempdir().unwrap();
    let (bots, humans) = population(&Population {
        min_len: 50,
        max_len: 450,
        ..Population::default()
    });
    write_experiment(dir.path(), "x", &bots, &humans, "");
    let out = botlens(&["ingest", dir.path().join("bots.jsonl").to_str().unwrap()], None);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "dataset,label,posts>=0,posts>=100,posts>=200,posts>=300,posts>=400"
    );
    assert_eq!(lines.len(), 3);
    let bot_row: Vec<usize> = lines[1].split(',').skip(2).map(|c| c.parse().unwrap()).collect();
    assert_eq!(bot_row[0], 60);
    assert!(bot_row.windows(2).all(|w| w[0] >= w[1]));
    let oracle = bots.accounts().iter().filter(|a| a.timeline.len() >= 200).count();
    assert_eq!(bot_row[2], oracle);
}

#[test]
fn ingest_from_config_lists_both_sources() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_experiment(dir.path(), "");
    let out = botlens(&["ingest", "--format", "md"], Some(&config));
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("| dataset | label |"));
    assert_eq!(text.lines().count(), 2 + 4);
}

#[test]
fn strict_ingest_reports_line_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    let ds = LabeledDataset::new("bad", vec![blank(1, Label::Bot)]);
    write_account_file(&ds, &path).unwrap();
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("{\"id\": 2, \"oops\": true}\n");
    std::fs::write(&path, text).unwrap();

    let strict = botlens(&["ingest", "--strict", path.to_str().unwrap()], None);
    assert_eq!(strict.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&strict.stderr).contains("line 2"));

    let lenient = botlens(&["ingest", path.to_str().unwrap()], None);
    assert!(lenient.status.success());
    assert!(String::from_utf8_lossy(&lenient.stderr).contains("warning"));
    assert!(stdout(&lenient).contains("bad,bot,1,0,0,0,0"));
}

#[test]
fn empty_dataset_gives_zero_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.jsonl");
    std::fs::write(&path, "").unwrap();
    let out = botlens(&["ingest", path.to_str().unwrap()], None);
    assert!(out.status.success());
    assert!(stdout(&out).contains("empty,bot,0,0,0,0,0"));
    assert!(stdout(&out).contains("empty,human,0,0,0,0,0"));
}

#[test]
fn unknown_algorithm_fails_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_experiment(dir.path(), r#""algorithms": ["knn", "svm"], "out": "results""#);
    let out = botlens(&["evaluate"], Some(&config));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("svm"));
    assert!(!dir.path().join("results").exists());
}

#[test]
fn missing_config_file_is_validation_error() {
    let out = botlens(&["evaluate", "--config", "/nonexistent/config.json"], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn evaluate_writes_grid_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_experiment(
        dir.path(),
        r#""k": 5, "min_posts": 10, "window": 20, "algorithms": ["naive_bayes", "knn"], "out": "results""#,
    );
    let out = botlens(&["evaluate", "--format", "md"], Some(&config));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let results = dir.path().join("results");
    let metrics = std::fs::read_to_string(results.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 1 + 4 * 2);
    assert!(
        metrics.starts_with("training_set,feature_set,algorithm,bal_accuracy,precision,recall,mcc,pr_auc,roc_auc\n")
    );
    // rounded cells carry exactly three decimals
    for line in metrics.lines().skip(1) {
        for cell in line.split(',').skip(3) {
            assert_eq!(cell.split('.').nth(1).map(str::len), Some(3), "{cell}");
        }
    }
    let md = stdout(&out);
    assert!(md.contains("### CAP_UNI*") && md.contains("### Twitter client"));
    assert!(md.contains("| IBk |"));

    let manifest = read_manifest(&results).unwrap();
    assert_eq!(manifest.status, RunStatus::Ok);
    assert_eq!(manifest.seed, 1);
    let listed: BTreeSet<String> = manifest.files.into_iter().collect();
    assert_eq!(listed, files_on_disk(&results));
    assert!(listed.contains("curves.csv") && listed.contains("metrics_raw.csv") && listed.contains("metrics.md"));
}

#[test]
fn cli_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_experiment(dir.path(), r#""min_posts": 10, "window": 20, "algorithms": ["knn"]"#);
    let out_dir = dir.path().join("override");
    let out = botlens(
        &[
            "evaluate",
            "--k",
            "3",
            "--seed",
            "99",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        Some(&config),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = read_manifest(&out_dir).unwrap();
    assert_eq!(manifest.config.k, 3);
    assert_eq!(manifest.seed, 99);
}

#[test]
fn failing_cell_flushes_partial_results() {
    let dir = tempfile::tempdir().unwrap();
    // min_posts larger than every timeline leaves no accounts
    let config = small_experiment(
        dir.path(),
        r#""min_posts": 1000, "algorithms": ["knn"], "out": "results""#,
    );
    let out = botlens(&["evaluate"], Some(&config));
    assert_eq!(out.status.code(), Some(2));
    let results = dir.path().join("results");
    let manifest = read_manifest(&results).unwrap();
    assert_eq!(manifest.status, RunStatus::Failed);
    assert!(manifest.error.is_some());
    let listed: BTreeSet<String> = manifest.files.into_iter().collect();
    assert_eq!(listed, files_on_disk(&results));
    let metrics = std::fs::read_to_string(results.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 1);
}

#[test]
fn threshold_table_shape() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_experiment(
        dir.path(),
        r#""min_posts": 10, "window": 20, "k": 5, "algorithms": ["naive_bayes", "random_forest"]"#,
    );
    let out = botlens(&["threshold"], Some(&config));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "training_set,model,threshold,bal_accuracy,precision,recall");
    let rule: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(rule[..2], ["synthetic", "Rule-based"]);
    assert!((0.0..=1.0).contains(&rule[2].parse::<f64>().unwrap()));
    assert!(lines[2].starts_with("synthetic,") && lines[2].contains(",-,"));
}

#[test]
fn perfectly_separating_cap_gives_perfect_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (mut bots, mut humans) = population(&Population::default());
    let set_cap = |ds: &mut LabeledDataset, cap: f64| {
        let accounts = ds
            .accounts()
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, mut a)| {
                a.botometer_cap_uni = Some(cap + i as f64 * 1e-3);
                a
            })
            .collect();
        *ds = LabeledDataset::new(ds.name.clone(), accounts);
    };
    set_cap(&mut bots, 0.8);
    set_cap(&mut humans, 0.1);
    let config = write_experiment(
        dir.path(),
        "clean",
        &bots,
        &humans,
        r#""min_posts": 10, "k": 5, "cap": {"domain_prior": 0.15}, "algorithms": ["naive_bayes", "knn"]"#,
    );
    let out = botlens(&["threshold"], Some(&config));
    assert!(out.status.success());
    for line in stdout(&out).lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[3..], ["1.000", "1.000", "1.000"], "{line}");
    }
}

#[test]
fn threshold_without_cap_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let (bots, mut humans) = population(&Population::default());
    let accounts = humans
        .accounts()
        .iter()
        .cloned()
        .map(|mut a| {
            a.botometer_cap_uni = None;
            a
        })
        .collect();
    humans = LabeledDataset::new("humans", accounts);
    let config = write_experiment(
        dir.path(),
        "nocap",
        &bots,
        &humans,
        r#""min_posts": 10, "require_cap": false"#,
    );
    let out = botlens(&["threshold"], Some(&config));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).to_lowercase().contains("cap"));
}

#[test]
fn rank_puts_class_identical_feature_first() {
    let dir = tempfile::tempdir().unwrap();
    let (bots, humans) = population(&Population::default());
    let listed = |ds: &LabeledDataset, n: u64| {
        let accounts = ds
            .accounts()
            .iter()
            .cloned()
            .map(|mut a| {
                a.listed_count = n;
                a
            })
            .collect();
        LabeledDataset::new(ds.name.clone(), accounts)
    };
    let config = write_experiment(
        dir.path(),
        "ranked",
        &listed(&bots, 0),
        &listed(&humans, 4),
        r#""min_posts": 10, "window": 20, "feature_sets": ["class_a", "class_b"], "rank_top": 3"#,
    );
    let out = botlens(&["rank", "--format", "md"], Some(&config));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("| 1 | (1.000) belongs_to_list |"), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("out/rank.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
}

#[test]
fn sensitivity_emits_four_rows_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let (bots, humans) = population(&Population {
        min_len: 400,
        max_len: 420,
        bots: 30,
        humans: 30,
        ..Population::default()
    });
    let config = write_experiment(
        dir.path(),
        "sens",
        &bots,
        &humans,
        r#""k": 3, "feature_sets": ["class_b", "client"], "algorithms": ["naive_bayes"]"#,
    );
    let out = botlens(&["sensitivity"], Some(&config));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 2 * 4);
    let windows: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(windows[..4], ["100", "200", "300", "400"]);
}

#[test]
fn subsample_writes_rebalanced_file() {
    let dir = tempfile::tempdir().unwrap();
    let bots = LabeledDataset::new("b", (0..217).map(|i| blank(i, Label::Bot)).collect());
    let humans = LabeledDataset::new("h", (1000..2919).map(|i| blank(i, Label::Human)).collect());
    let config = write_experiment(dir.path(), "Vendor+Verified", &bots, &humans, r#""min_posts": 0"#);
    let out = botlens(&["subsample"], Some(&config));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let written = parse_account_file(
        &dir.path().join("out/Vendor_Verified_subsampled.jsonl"),
        ParseMode::Strict,
    )
    .unwrap();
    assert_eq!(written.dataset.bot_count(), 217);
    assert_eq!(written.dataset.human_count(), 325);
    assert!(stdout(&out).contains("Vendor+Verified,217,1919,217,325,"));
}
