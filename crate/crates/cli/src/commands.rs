use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use effhmm::classify::{evaluate, split_per_class, train_classifier, EvalReport, ScoreMode};
use effhmm::io::{load_model, model_to_json};
use effhmm::learning::{TrainConfig, TrainReport};
use effhmm::pipelines::iris::{fit_bins, iris_trend_sequence, parse_iris_csv};
use effhmm::pipelines::ratio::{parse_ratio_csv, parse_track_csv, ratio_trend_sequence, Activity};
use effhmm::pipelines::sampler::sample_many;
use effhmm::pipelines::TREND_SYMBOLS;
use effhmm::{ClassLabel, Classifier, EffHmmModel, IrisRecord, LabeledDataset, Variant};

use crate::manifest::{sha256_hex, sidecar, write_json, RunManifest};
use crate::{
    data_error, EvalArgs, InspectArgs, IrisPrepArgs, SampleArgs, TrackMode, TrackPrepArgs,
    TrainArgs,
};

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn text(path: &Path, bytes: &[u8]) -> Result<String> {
    String::from_utf8(bytes.to_vec())
        .map_err(|_| data_error(format!("{} is not UTF-8", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn labels_of(ds: &LabeledDataset) -> Vec<ClassLabel> {
    ds.items().iter().map(|(_, l)| l.clone()).collect()
}

/// Labels double as model file names.
fn check_file_safe(label: &ClassLabel) -> Result<()> {
    let s = label.as_str();
    if s.contains(['/', '\\']) || s.starts_with('.') {
        return Err(data_error(format!(
            "class label {s:?} cannot be used as a file name"
        )));
    }
    Ok(())
}

pub fn iris_prep(args: &IrisPrepArgs) -> Result<()> {
    let bytes = read(&args.input)?;
    let records: Vec<IrisRecord> = parse_iris_csv(&text(&args.input, &bytes)?)
        .with_context(|| format!("in {}", args.input.display()))?;
    let spec = if args.train_only_bins {
        let species: Vec<ClassLabel> = records.iter().map(|r| r.species.clone()).collect();
        let split = split_per_class(&species, args.train_per_class, args.seed);
        let train: Vec<IrisRecord> = split.train.iter().map(|&i| records[i].clone()).collect();
        fit_bins(&train)?
    } else {
        fit_bins(&records)?
    };
    let items = records
        .iter()
        .map(|r| (iris_trend_sequence(r, &spec), r.species.clone()))
        .collect();
    let dataset = LabeledDataset::new(items, TREND_SYMBOLS)?;
    write(&args.output, &dataset.to_text())?;

    let mut manifest = RunManifest::new("iris-prep", args, Some(args.seed));
    manifest.input("input", &args.input, &bytes);
    manifest.artifact(&args.output);
    manifest.write(&sidecar(&args.output))?;

    print!("{spec}");
    println!(
        "{} sequences written to {}",
        dataset.len(),
        args.output.display()
    );
    Ok(())
}

pub fn track_prep(args: &TrackPrepArgs) -> Result<()> {
    let bytes = read(&args.input)?;
    let body = text(&args.input, &bytes)?;
    let activities: Vec<Activity<f64>> = match args.mode {
        TrackMode::Points => parse_track_csv(&body),
        TrackMode::Ratios => parse_ratio_csv(&body),
    }
    .with_context(|| format!("in {}", args.input.display()))?;
    let mut items = Vec::with_capacity(activities.len());
    for (k, act) in activities.iter().enumerate() {
        let seq = ratio_trend_sequence(&act.ratios).map_err(|e| effhmm::Error::At {
            context: format!("activity {} ({})", k + 1, act.label),
            source: Box::new(e),
        })?;
        items.push((seq, act.label.clone()));
    }
    let dataset = LabeledDataset::new(items, TREND_SYMBOLS)?;
    write(&args.output, &dataset.to_text())?;

    let mut manifest = RunManifest::new("track-prep", args, None);
    manifest.input("input", &args.input, &bytes);
    manifest.artifact(&args.output);
    manifest.write(&sidecar(&args.output))?;

    println!(
        "{} sequences written to {}",
        dataset.len(),
        args.output.display()
    );
    Ok(())
}

/// Held-out bookkeeping written by `train` and checked by `eval`.
#[derive(Debug, Serialize, Deserialize)]
struct SplitFile {
    data: String,
    data_sha256: String,
    seed: u64,
    train_per_class: usize,
    /// 1-based line numbers among the sequences of the data file.
    train: Vec<usize>,
    test: Vec<usize>,
    shortfalls: Vec<Shortfall>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Shortfall {
    label: ClassLabel,
    available: usize,
}

#[derive(Debug, Serialize)]
struct TrainSummary<'a> {
    variant: Variant,
    config: &'a TrainConfig,
    classes: &'a BTreeMap<ClassLabel, TrainReport>,
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let config = TrainConfig {
        n_states: args.states,
        convergence_threshold: args.threshold,
        max_iterations: args.max_iters,
        epsilon: args.epsilon,
        seed: args.seed,
        variant: args.variant,
    };
    config.validate()?;
    let bytes = read(&args.data)?;
    let dataset = LabeledDataset::parse(&text(&args.data, &bytes)?, args.symbols)
        .with_context(|| format!("in {}", args.data.display()))?;
    let labels = labels_of(&dataset);
    for label in dataset.labels() {
        check_file_safe(&label)?;
    }

    let split = split_per_class(&labels, args.train_per_class, args.seed);
    for (label, available) in &split.shortfalls {
        eprintln!(
            "warning: class {label} has {available} item(s), fewer than {}; training on all of them",
            args.train_per_class
        );
    }
    let clf: Classifier = train_classifier(&dataset.subset(&split.train), &config)?;

    let models_dir = args.out.join("models");
    fs::create_dir_all(&models_dir)
        .with_context(|| format!("creating {}", models_dir.display()))?;
    let mut manifest = RunManifest::new("train", args, Some(args.seed));
    manifest.input("data", &args.data, &bytes);
    for (label, model) in clf.models() {
        let path = models_dir.join(format!("{label}.json"));
        write(&path, &model_to_json(model))?;
        manifest.artifact(&path);
    }

    let split_path = args.out.join("split.json");
    let split_file = SplitFile {
        data: args.data.display().to_string(),
        data_sha256: sha256_hex(&bytes),
        seed: args.seed,
        train_per_class: args.train_per_class,
        train: split.train.iter().map(|i| i + 1).collect(),
        test: split.test.iter().map(|i| i + 1).collect(),
        shortfalls: split
            .shortfalls
            .iter()
            .map(|(label, available)| Shortfall {
                label: label.clone(),
                available: *available,
            })
            .collect(),
    };
    write_json(&split_path, &split_file)?;
    manifest.artifact(&split_path);

    let report_path = args.out.join("train_report.json");
    write_json(
        &report_path,
        &TrainSummary {
            variant: args.variant,
            config: &config,
            classes: clf.reports(),
        },
    )?;
    manifest.artifact(&report_path);
    manifest.write(&args.out.join("manifest.json"))?;

    for (label, report) in clf.reports() {
        println!(
            "{label}: {} iteration(s), {}, mean log-likelihood {:.6}",
            report.iterations_run,
            if report.converged {
                "converged"
            } else {
                "not converged"
            },
            report
                .log_likelihood_history
                .last()
                .copied()
                .unwrap_or(f64::NAN)
        );
    }
    println!(
        "{} train / {} test items; models in {}",
        split.train.len(),
        split.test.len(),
        models_dir.display()
    );
    Ok(())
}

/// `<label>.json` files of a models directory, sorted by file name.
fn model_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let nested = dir.join("models");
    let dir = if nested.is_dir() {
        nested
    } else {
        dir.to_path_buf()
    };
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(data_error(format!("no model files in {}", dir.display())));
    }
    Ok(files)
}

fn stem_label(path: &Path) -> Result<ClassLabel> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default();
    ClassLabel::new(stem).map_err(|e| data_error(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<(EffHmmModel, Vec<u8>)> {
    let bytes = read(path)?;
    let model = load_model(bytes.as_slice()).with_context(|| format!("in {}", path.display()))?;
    Ok((model, bytes))
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let mut manifest = RunManifest::new("eval", args, None);
    let mut models = BTreeMap::new();
    for path in model_files(&args.models)? {
        let (model, bytes) = load(&path)?;
        let label = stem_label(&path)?;
        manifest.input(&format!("model:{label}"), &path, &bytes);
        models.insert(label, model);
    }
    let clf = Classifier::new(models, TrainConfig::default(), BTreeMap::new())?;

    let split_bytes = read(&args.split)?;
    let split: SplitFile = serde_json::from_slice(&split_bytes)
        .map_err(|e| data_error(format!("{}: {e}", args.split.display())))?;
    let bytes = read(&args.data)?;
    let digest = sha256_hex(&bytes);
    if digest != split.data_sha256 {
        return Err(data_error(format!(
            "{} has digest {digest} but the split was made from data with digest {}",
            args.data.display(),
            split.data_sha256
        )));
    }
    let dataset = LabeledDataset::parse(&text(&args.data, &bytes)?, Some(clf.n_symbols()))
        .with_context(|| format!("in {}", args.data.display()))?;
    let test: Vec<usize> = split
        .test
        .iter()
        .map(|&i| {
            (1..=dataset.len())
                .contains(&i)
                .then(|| i - 1)
                .ok_or_else(|| data_error(format!("split refers to item {i} of {}", dataset.len())))
        })
        .collect::<Result<_>>()?;
    for (obs, _) in dataset.subset(&test).items() {
        obs.check_alphabet(clf.n_symbols())?;
    }
    let mode = if args.normalized {
        ScoreMode::LengthNormalized
    } else {
        ScoreMode::Raw
    };
    let report: EvalReport = evaluate(&clf, &dataset.subset(&test), mode)?;

    let out = args.out.clone().unwrap_or_else(|| {
        let name = if args.normalized {
            "eval_report_normalized.json"
        } else {
            "eval_report.json"
        };
        args.split.with_file_name(name)
    });
    write_json(&out, &report)?;
    manifest.input("data", &args.data, &bytes);
    manifest.input("split", &args.split, &split_bytes);
    manifest.artifact(&out);
    manifest.write(&sidecar(&out))?;

    print!("{}", report.to_table());
    Ok(())
}

pub fn sample(args: &SampleArgs) -> Result<()> {
    let (model, bytes) = load(&args.model)?;
    let label = stem_label(&args.model)?;
    if args.length == 0 || args.count == 0 {
        return Err(crate::fail(
            crate::USAGE,
            "--length and --count must be at least 1",
        ));
    }
    let seqs = sample_many(&model, args.length, args.count, args.seed)?;
    let dataset = LabeledDataset::new(
        seqs.into_iter().map(|s| (s, label.clone())).collect(),
        model.n_symbols(),
    )?;
    write(&args.out, &dataset.to_text())?;

    let mut manifest = RunManifest::new("sample", args, Some(args.seed));
    manifest.input("model", &args.model, &bytes);
    manifest.artifact(&args.out);
    manifest.write(&sidecar(&args.out))?;
    println!(
        "{} sequences written to {}",
        dataset.len(),
        args.out.display()
    );
    Ok(())
}

fn row_line(out: &mut String, name: &str, row: impl IntoIterator<Item = f64>) {
    let row: Vec<f64> = row.into_iter().collect();
    let cells: Vec<String> = row.iter().map(|x| format!("{x:.6}")).collect();
    let sum: f64 = row.iter().sum();
    let _ = writeln!(out, "  {name:<10} {}  (sum {sum:.12})", cells.join(" "));
}

pub fn inspect(args: &InspectArgs) -> Result<()> {
    let (model, _) = match load(&args.model) {
        Ok(m) => m,
        Err(err) => {
            if let Some(effhmm::Error::InvalidModel(report)) = err.downcast_ref::<effhmm::Error>() {
                println!("validation: FAILED");
                for v in &report.violations {
                    println!("  {v}");
                }
            }
            return Err(err);
        }
    };
    let (n, m) = (model.n_states(), model.n_symbols());
    let mut out = String::new();
    let _ = writeln!(out, "model: {}", args.model.display());
    let _ = writeln!(out, "variant: {}", model.variant());
    let _ = writeln!(out, "states: {n}");
    let _ = writeln!(out, "symbols: {m}");
    let _ = writeln!(out, "pi:");
    row_line(&mut out, "", model.initial().iter().copied());
    let _ = writeln!(out, "A:");
    for i in 0..n {
        row_line(
            &mut out,
            &format!("row {}", i + 1),
            (0..n).map(|j| model.a(i, j)),
        );
    }
    let _ = writeln!(out, "B:");
    for i in 0..n {
        row_line(
            &mut out,
            &format!("row {}", i + 1),
            (0..m).map(|k| model.b(i, k)),
        );
    }
    let mut entries: Vec<f64> = model
        .initial()
        .iter()
        .chain(model.transition().iter())
        .chain(model.emission().iter())
        .copied()
        .collect();
    match model.variant() {
        Variant::Standard => {
            let _ = writeln!(out, "C degenerate (baseline mode)");
        }
        Variant::EvidenceFeedForward => {
            for i in 0..n {
                let _ = writeln!(out, "C state {}:", i + 1);
                for h in 0..m {
                    row_line(
                        &mut out,
                        &format!("row {}", h + 1),
                        (0..m).map(|k| model.c(i, h, k)),
                    );
                }
            }
            entries.extend(model.evidence().iter().copied());
        }
    }
    let min = entries.iter().copied().fold(f64::INFINITY, f64::min);
    let max = entries.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let _ = writeln!(out, "min entry: {min:.6}");
    let _ = writeln!(out, "max entry: {max:.6}");
    let _ = writeln!(out, "validation: {}", model.validate());
    print!("{out}");
    Ok(())
}
