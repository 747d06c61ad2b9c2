use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::eval::{
    cross_validate_matrix, info_gain_ranking, min_posts_sensitivity, spread_subsample, threshold_rule_sweep, CvResult,
    MetricsBundle,
};
use crate::exec::Execution;
use crate::features::{build_feature_matrix_with, FeatureParams, FeatureSet};
use crate::ingest::{
    assemble_training_set, filter_min_posts, parse_account_file, write_accounts, Label, LabeledDataset, ParseMode,
};
use crate::learners::{Algorithm, LearnerSpec};

use super::manifest::RunOutput;
use super::render::{fmt3, OutputFormat, Table};
use super::{CommandReport, ExperimentConfig, ReportError};

/// Minimum-posts levels of the dataset summary.
pub const INGEST_THRESHOLDS: [usize; 5] = [0, 100, 200, 300, 400];

/// A training-set recipe with both files parsed.
#[derive(Debug, Clone)]
pub struct Source {
    pub name: String,
    pub bots: LabeledDataset,
    pub humans: LabeledDataset,
}

impl Source {
    fn assemble(&self, config: &ExperimentConfig) -> Result<LabeledDataset, ReportError> {
        Ok(assemble_training_set(
            &self.name,
            &self.bots,
            &self.humans,
            config.require_cap,
            config.min_posts,
        )?)
    }
}

fn parse_mode(strict: bool) -> ParseMode {
    if strict {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    }
}

fn parse_file(path: &Path, strict: bool, warnings: &mut Vec<String>) -> Result<LabeledDataset, ReportError> {
    let outcome = parse_account_file(path, parse_mode(strict))
        .map_err(|e| ReportError::Validation(format!("{}: {e}", path.display())))?;
    warnings.extend(outcome.errors.iter().map(|e| format!("{}: {e}", path.display())));
    Ok(outcome.dataset)
}

/// Parses every training set named in the config. Returns the sources and
/// the per-line diagnostics of a lenient parse.
pub fn load_sources(config: &ExperimentConfig) -> Result<(Vec<Source>, Vec<String>), ReportError> {
    let mut warnings = Vec::new();
    let mut sources = Vec::with_capacity(config.training_sets.len());
    for recipe in &config.training_sets {
        sources.push(Source {
            name: recipe.name.clone(),
            bots: parse_file(&recipe.bots, config.strict, &mut warnings)?,
            humans: parse_file(&recipe.humans, config.strict, &mut warnings)?,
        });
    }
    Ok((sources, warnings))
}

fn num(x: f64, raw: bool) -> String {
    if raw {
        x.to_string()
    } else {
        fmt3(x)
    }
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn with_context(context: &str, e: impl Into<ReportError>) -> ReportError {
    match e.into() {
        ReportError::Validation(m) => ReportError::Validation(format!("{context}: {m}")),
        ReportError::Runtime(m) => ReportError::Runtime(format!("{context}: {m}")),
    }
}

/// Writes `<stem>.csv` (rounded), `<stem>_raw.csv` and, for markdown
/// output, `<stem>.md`. Returns what belongs on stdout.
fn emit(
    out: &mut RunOutput,
    stem: &str,
    rounded: &Table,
    raw: &Table,
    markdown: String,
    format: OutputFormat,
) -> Result<String, ReportError> {
    out.write(&format!("{stem}.csv"), rounded.to_csv().as_bytes())?;
    out.write(&format!("{stem}_raw.csv"), raw.to_csv().as_bytes())?;
    Ok(match format {
        OutputFormat::Csv => rounded.to_csv(),
        OutputFormat::Md => {
            out.write(&format!("{stem}.md"), markdown.as_bytes())?;
            markdown
        }
    })
}

fn finish(out: RunOutput, mut report: CommandReport) -> Result<CommandReport, ReportError> {
    report.files = out.finish(report.failure.as_ref())?;
    Ok(report)
}

/// Accounts per label with at least each number of posts.
pub fn ingest_counts(dataset: &LabeledDataset, thresholds: &[usize]) -> Table {
    let mut headers = vec!["dataset".to_string(), "label".to_string()];
    headers.extend(thresholds.iter().map(|t| format!("posts>={t}")));
    let mut table = Table::new(headers);
    for label in [Label::Bot, Label::Human] {
        let mut row = vec![dataset.name.clone(), label.to_string()];
        for &t in thresholds {
            let kept = filter_min_posts(dataset, t);
            row.push(kept.accounts().iter().filter(|a| a.label == label).count().to_string());
        }
        table.push(row);
    }
    table
}

/// Summarizes account files. Nothing is written to disk.
pub fn run_ingest(paths: &[PathBuf], strict: bool, format: OutputFormat) -> Result<CommandReport, ReportError> {
    if paths.is_empty() {
        return Err(ReportError::Validation("no account files given".into()));
    }
    let mut report = CommandReport::default();
    let mut table: Option<Table> = None;
    let mut seen = BTreeSet::new();
    for path in paths {
        if !seen.insert(path.clone()) {
            continue;
        }
        let ds = parse_file(path, strict, &mut report.warnings)?;
        let counts = ingest_counts(&ds, &INGEST_THRESHOLDS);
        match &mut table {
            Some(t) => t.rows.extend(counts.rows),
            None => table = Some(counts),
        }
    }
    report.stdout = table.expect("at least one file").render(format);
    Ok(report)
}

struct EvalCell {
    training_set: String,
    feature_set: FeatureSet,
    algorithm: Algorithm,
    result: CvResult,
}

const METRIC_HEADERS: [&str; 6] = ["bal_accuracy", "precision", "recall", "mcc", "pr_auc", "roc_auc"];

fn metrics_tables(cells: &[EvalCell]) -> (Table, Table) {
    let headers = ["training_set", "feature_set", "algorithm"]
        .into_iter()
        .chain(METRIC_HEADERS);
    let mut rounded = Table::new(headers.clone());
    let mut raw = Table::new(headers);
    for cell in cells {
        for (table, is_raw) in [(&mut rounded, false), (&mut raw, true)] {
            let mut row = vec![
                cell.training_set.clone(),
                cell.feature_set.as_str().to_string(),
                cell.algorithm.as_str().to_string(),
            ];
            row.extend(cell.result.metrics.values().iter().map(|&v| num(v, is_raw)));
            table.push(row);
        }
    }
    (rounded, raw)
}

fn metrics_markdown(cells: &[EvalCell]) -> String {
    let mut md = String::new();
    let mut last_set: Option<&str> = None;
    let mut i = 0;
    while i < cells.len() {
        let (ts, fs) = (&cells[i].training_set, cells[i].feature_set);
        if last_set != Some(ts.as_str()) {
            let _ = writeln!(md, "## {ts}\n");
            last_set = Some(ts);
        }
        let _ = writeln!(md, "### {}\n", fs.title());
        let mut t = Table::new([
            "Model",
            "Bal. Accuracy",
            "Precision",
            "Recall",
            "MCC",
            "PR-AUC",
            "ROC-AUC",
        ]);
        while i < cells.len() && cells[i].training_set == *ts && cells[i].feature_set == fs {
            let mut row = vec![cells[i].algorithm.title().to_string()];
            row.extend(cells[i].result.metrics.values().iter().map(|&v| fmt3(v)));
            t.push(row);
            i += 1;
        }
        md.push_str(&t.to_markdown());
        md.push('\n');
    }
    md
}

fn curves_table(cells: &[EvalCell]) -> Table {
    let mut t = Table::new(["training_set", "feature_set", "algorithm", "kind", "x", "y"]);
    for cell in cells {
        for series in [&cell.result.roc, &cell.result.pr] {
            for &(x, y) in &series.points {
                t.push(vec![
                    cell.training_set.clone(),
                    cell.feature_set.as_str().to_string(),
                    cell.algorithm.as_str().to_string(),
                    series.kind.to_string(),
                    x.to_string(),
                    y.to_string(),
                ]);
            }
        }
    }
    t
}

/// Cross-validates every (training set × feature set × algorithm) cell.
///
/// Cells run through `exec`; rows come out in config order. When a cell
/// fails, the finished cells are still written and the manifest records the
/// failure.
pub fn run_evaluate(
    config: &ExperimentConfig,
    format: OutputFormat,
    exec: Execution,
) -> Result<CommandReport, ReportError> {
    config.validate()?;
    let feature_sets = config.parsed_feature_sets()?;
    let algorithms = config.parsed_algorithms()?;
    let params = config.feature_params()?;
    let (sources, warnings) = load_sources(config)?;
    let mut out = RunOutput::begin(config, "evaluate")?;
    let mut report = CommandReport {
        warnings,
        ..CommandReport::default()
    };

    let mut cells = Vec::new();
    'sets: for source in &sources {
        let set = match source.assemble(config) {
            Ok(s) => s,
            Err(e) => {
                report.failure = Some(with_context(&source.name, e));
                break;
            }
        };
        let matrices = exec.map_slice(&feature_sets, |&fs| build_feature_matrix_with(&set, fs, &params, exec));
        let grid: Vec<(usize, Algorithm)> = (0..feature_sets.len())
            .flat_map(|f| algorithms.iter().map(move |&a| (f, a)))
            .collect();
        let results = exec.map_slice(&grid, |&(f, alg)| {
            let matrix = matrices[f].as_ref().map_err(|e| ReportError::Runtime(e.to_string()))?;
            let spec = LearnerSpec::new(alg, config.seed);
            cross_validate_matrix(matrix, &spec, config.k, config.seed, exec).map_err(ReportError::from)
        });
        for (&(f, algorithm), result) in grid.iter().zip(results) {
            let feature_set = feature_sets[f];
            match result {
                Ok(result) => cells.push(EvalCell {
                    training_set: source.name.clone(),
                    feature_set,
                    algorithm,
                    result,
                }),
                Err(e) => {
                    report.failure = Some(with_context(&format!("{}/{feature_set}/{algorithm}", source.name), e));
                    break 'sets;
                }
            }
        }
    }

    let (rounded, raw) = metrics_tables(&cells);
    report.stdout = emit(&mut out, "metrics", &rounded, &raw, metrics_markdown(&cells), format)?;
    out.write("curves.csv", curves_table(&cells).to_csv().as_bytes())?;
    finish(out, report)
}

struct ThresholdRow {
    training_set: String,
    model: String,
    threshold: Option<f64>,
    metrics: MetricsBundle,
}

fn threshold_tables(rows: &[ThresholdRow]) -> (Table, Table) {
    let headers = [
        "training_set",
        "model",
        "threshold",
        "bal_accuracy",
        "precision",
        "recall",
    ];
    let mut rounded = Table::new(headers);
    let mut raw = Table::new(headers);
    for r in rows {
        for (table, is_raw) in [(&mut rounded, false), (&mut raw, true)] {
            let m = &r.metrics;
            table.push(vec![
                r.training_set.clone(),
                r.model.clone(),
                r.threshold.map_or_else(|| "-".into(), |t| num(t, is_raw)),
                num(m.balanced_accuracy, is_raw),
                num(m.precision, is_raw),
                num(m.recall, is_raw),
            ]);
        }
    }
    (rounded, raw)
}

/// Compares the CAP* threshold rule with the best learner trained on CAP*
/// alone, per training set.
pub fn run_threshold(
    config: &ExperimentConfig,
    format: OutputFormat,
    exec: Execution,
) -> Result<CommandReport, ReportError> {
    config.validate()?;
    let algorithms = config.parsed_algorithms()?;
    let criterion = config.parsed_criterion()?;
    let params = config.feature_params()?;
    let (sources, warnings) = load_sources(config)?;
    let mut out = RunOutput::begin(config, "threshold")?;
    let mut report = CommandReport {
        warnings,
        ..CommandReport::default()
    };

    let mut rows = Vec::new();
    for source in &sources {
        match threshold_rows(source, config, &params, &algorithms, criterion, exec) {
            Ok(mut r) => rows.append(&mut r),
            Err(e) => {
                report.failure = Some(with_context(&source.name, e));
                break;
            }
        }
    }

    let (rounded, raw) = threshold_tables(&rows);
    let markdown = rounded.to_markdown();
    report.stdout = emit(&mut out, "threshold", &rounded, &raw, markdown, format)?;
    finish(out, report)
}

fn threshold_rows(
    source: &Source,
    config: &ExperimentConfig,
    params: &FeatureParams,
    algorithms: &[Algorithm],
    criterion: crate::eval::Criterion,
    exec: Execution,
) -> Result<Vec<ThresholdRow>, ReportError> {
    let set = source.assemble(config)?;
    let matrix = build_feature_matrix_with(&set, FeatureSet::CapUniStar, params, exec)?;
    let rule = threshold_rule_sweep(&matrix.column(0), &matrix.labels, criterion)?;
    let results = exec.map_slice(algorithms, |&alg| {
        cross_validate_matrix(
            &matrix,
            &LearnerSpec::new(alg, config.seed),
            config.k,
            config.seed,
            exec,
        )
    });
    let mut best: Option<(Algorithm, MetricsBundle)> = None;
    for (&alg, r) in algorithms.iter().zip(results) {
        let m = r?.metrics;
        if best.is_none_or(|(_, b)| m.balanced_accuracy > b.balanced_accuracy) {
            best = Some((alg, m));
        }
    }
    let mut rows = vec![ThresholdRow {
        training_set: source.name.clone(),
        model: "Rule-based".into(),
        threshold: Some(rule.threshold),
        metrics: rule.metrics,
    }];
    if let Some((alg, metrics)) = best {
        rows.push(ThresholdRow {
            training_set: source.name.clone(),
            model: alg.title().into(),
            threshold: None,
            metrics,
        });
    }
    Ok(rows)
}

/// Top-N information-gain ranking of the configured feature sets.
pub fn run_rank(config: &ExperimentConfig, format: OutputFormat) -> Result<CommandReport, ReportError> {
    config.validate()?;
    let feature_sets = config.parsed_feature_sets()?;
    let params = config.feature_params()?;
    let (sources, warnings) = load_sources(config)?;
    let mut out = RunOutput::begin(config, "rank")?;
    let mut report = CommandReport {
        warnings,
        ..CommandReport::default()
    };

    let headers = ["training_set", "rank", "feature", "feature_set", "gain", "normalized"];
    let mut rounded = Table::new(headers);
    let mut raw = Table::new(headers);
    let mut markdown = String::new();
    for source in &sources {
        let ranked = source
            .assemble(config)
            .and_then(|set| Ok(info_gain_ranking(&set, &feature_sets, &params)?));
        let ranked = match ranked {
            Ok(r) => r,
            Err(e) => {
                report.failure = Some(with_context(&source.name, e));
                break;
            }
        };
        let mut md = Table::new(["Rank", "Feature"]);
        for (i, r) in ranked.iter().take(config.rank_top).enumerate() {
            let owner = r.feature_set.map_or("", FeatureSet::as_str).to_string();
            for (table, is_raw) in [(&mut rounded, false), (&mut raw, true)] {
                table.push(vec![
                    source.name.clone(),
                    (i + 1).to_string(),
                    r.name.clone(),
                    owner.clone(),
                    num(r.gain, is_raw),
                    num(r.normalized, is_raw),
                ]);
            }
            md.push(vec![
                (i + 1).to_string(),
                format!("({}) {}", fmt3(r.normalized), r.name),
            ]);
        }
        let _ = writeln!(markdown, "## {}\n\n{}", source.name, md.to_markdown());
    }
    report.stdout = emit(&mut out, "rank", &rounded, &raw, markdown, format)?;
    finish(out, report)
}

/// ROC-AUC per minimum-posts threshold, for each feature set and algorithm.
pub fn run_sensitivity(
    config: &ExperimentConfig,
    format: OutputFormat,
    exec: Execution,
) -> Result<CommandReport, ReportError> {
    config.validate()?;
    let feature_sets = config.parsed_feature_sets()?;
    let algorithms = config.parsed_algorithms()?;
    let params = config.feature_params()?;
    let (sources, warnings) = load_sources(config)?;
    let mut out = RunOutput::begin(config, "sensitivity")?;
    let mut report = CommandReport {
        warnings,
        ..CommandReport::default()
    };

    let headers = [
        "training_set",
        "feature_set",
        "algorithm",
        "min_posts",
        "window",
        "bots",
        "humans",
        "roc_auc",
    ];
    let mut rounded = Table::new(headers);
    let mut raw = Table::new(headers);
    let grid: Vec<(usize, FeatureSet, Algorithm)> = (0..sources.len())
        .flat_map(|s| {
            let algorithms = &algorithms;
            feature_sets
                .iter()
                .flat_map(move |&f| algorithms.iter().map(move |&a| (s, f, a)))
        })
        .collect();
    let results = exec.map_slice(&grid, |&(s, fs, alg)| {
        let src = &sources[s];
        min_posts_sensitivity(
            &src.name,
            &src.bots,
            &src.humans,
            fs,
            &params,
            &LearnerSpec::new(alg, config.seed),
            &config.sensitivity_thresholds,
            config.require_cap,
            config.k,
            config.seed,
        )
    });
    for (&(s, fs, alg), result) in grid.iter().zip(results) {
        let name = &sources[s].name;
        let rows = match result {
            Ok(r) => r,
            Err(e) => {
                report.failure = Some(with_context(&format!("{name}/{fs}/{alg}"), e));
                break;
            }
        };
        for row in rows {
            for (table, is_raw) in [(&mut rounded, false), (&mut raw, true)] {
                table.push(vec![
                    name.clone(),
                    fs.as_str().into(),
                    alg.as_str().into(),
                    row.min_posts.to_string(),
                    row.window.to_string(),
                    row.bots.to_string(),
                    row.humans.to_string(),
                    num(row.roc_auc, is_raw),
                ]);
            }
        }
    }
    let markdown = rounded.to_markdown();
    report.stdout = emit(&mut out, "sensitivity", &rounded, &raw, markdown, format)?;
    finish(out, report)
}

/// Rebalances each training set and writes it in the account file format.
pub fn run_subsample(config: &ExperimentConfig, format: OutputFormat) -> Result<CommandReport, ReportError> {
    config.validate()?;
    let (sources, warnings) = load_sources(config)?;
    let mut out = RunOutput::begin(config, "subsample")?;
    let mut report = CommandReport {
        warnings,
        ..CommandReport::default()
    };

    let mut table = Table::new(["training_set", "bots_before", "humans_before", "bots", "humans", "file"]);
    for source in &sources {
        let result = source
            .assemble(config)
            .and_then(|set| Ok((spread_subsample(&set, config.subsample_ratio, config.seed)?, set)));
        let (sub, set) = match result {
            Ok(r) => r,
            Err(e) => {
                report.failure = Some(with_context(&source.name, e));
                break;
            }
        };
        let name = format!("{}_subsampled.jsonl", file_safe(&source.name));
        let mut buf = Vec::new();
        write_accounts(&sub, &mut buf)?;
        out.write(&name, &buf)?;
        table.push(vec![
            source.name.clone(),
            set.bot_count().to_string(),
            set.human_count().to_string(),
            sub.bot_count().to_string(),
            sub.human_count().to_string(),
            name,
        ]);
    }
    report.stdout = table.render(format);
    finish(out, report)
}
