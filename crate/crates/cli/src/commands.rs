use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;
use textrait_core::analyze::{self, EvalReport, GroupAttribute};
use textrait_core::lda::{topic_correlations, TopicModel};
use textrait_core::metrics::{pearson, EasyWords, PosLexicon};
use textrait_core::persist::ModelFile;
use textrait_core::pipeline::Featurizer;
use textrait_core::{seed, synth, Corpus, Pipeline, SplitSpec};

use crate::config::{DatasetConfig, RunConfig};
use crate::output::Output;
use crate::{DatasetArgs, UsageError};

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

/// Pick the dataset from the flags or the config and check that it exists.
/// Runs before anything is written so a bad path leaves no partial output.
fn resolve_dataset(args: &DatasetArgs, configured: Option<&DatasetConfig>) -> Result<DatasetConfig> {
    let mut dataset = match (&args.dataset, configured) {
        (Some(path), _) => DatasetConfig {
            path: path.clone(),
            format: None,
        },
        (None, Some(d)) => d.clone(),
        (None, None) => return Err(usage("no dataset given (use --dataset or the config's dataset.path)")),
    };
    if let Some(f) = args.format {
        dataset.format = Some(f.into());
    }
    if !dataset.path.is_file() {
        return Err(usage(format!("dataset {} does not exist", dataset.path.display())));
    }
    Ok(dataset)
}

fn load_corpus(dataset: &DatasetConfig) -> Result<Corpus> {
    let corpus = Corpus::load(&dataset.path, dataset.format())?;
    if corpus.is_empty() {
        return Err(usage(format!("dataset {} has no records", dataset.path.display())));
    }
    log::info!("loaded {} records from {}", corpus.len(), dataset.path.display());
    Ok(corpus)
}

fn split_spec(run: &RunConfig) -> Result<SplitSpec> {
    Ok(SplitSpec::new(run.split.train_fraction, seed::derive(run.seed, "split"))?)
}

fn pipeline_seed(run: &RunConfig) -> u64 {
    seed::derive(run.seed, "pipeline")
}

/// The configuration stored inside a model file. The output directory is
/// left out so that the same run written to two places yields the same model.
fn model_config(run: &RunConfig) -> Result<serde_json::Value> {
    let mut value = serde_json::to_value(run)?;
    if let Some(map) = value.as_object_mut() {
        map.remove("out");
    }
    Ok(value)
}

fn featurizer_params(run: &RunConfig) -> Result<serde_json::Value> {
    let mut value = serde_json::to_value(&run.featurizer)?;
    if let Some(map) = value.as_object_mut() {
        map.remove("kind");
    }
    Ok(value)
}

fn report_for(
    run: &RunConfig,
    kind: &str,
    split: SplitSpec,
    n_train: usize,
    n_test: usize,
    actual: &[f64],
    predicted: &[f64],
) -> Result<EvalReport> {
    let c = pearson(actual, predicted)?;
    let mut report = EvalReport {
        featurizer: kind.to_string(),
        featurizer_params: featurizer_params(run)?,
        forest: run.forest.clone(),
        min_length: run.min_length,
        split,
        seed: pipeline_seed(run),
        n_train,
        n_test,
        r: c.r,
        p: c.p_two_sided,
        fingerprint: String::new(),
        timestamp: analyze::timestamp(),
    };
    report.fingerprint = report.compute_fingerprint();
    Ok(report)
}

fn load_model(path: &Path) -> Result<(ModelFile, RunConfig)> {
    if !path.is_file() {
        return Err(usage(format!("model {} does not exist", path.display())));
    }
    let model = ModelFile::load(path)?;
    let run: RunConfig = serde_json::from_value(model.config.clone())
        .map_err(|e| usage(format!("model {} carries an unreadable config: {e}", path.display())))?;
    Ok((model, run))
}

pub fn ingest(mut run: RunConfig, data: &DatasetArgs, min_length: Option<usize>) -> Result<()> {
    let dataset = resolve_dataset(data, run.dataset.as_ref())?;
    if let Some(m) = min_length {
        run.min_length = m;
    }
    let corpus = load_corpus(&dataset)?;
    let filtered = corpus.filter_min_length(run.min_length);
    let with_targets = filtered.records().iter().filter(|r| r.has_target()).count();
    let targets: Vec<f64> = filtered
        .records()
        .iter()
        .filter_map(|r| r.target_score().ok())
        .collect();
    let words: usize = filtered.records().iter().map(|r| r.word_count()).sum();
    let mut out = Output::create(&run.out, &[&dataset.path])?;
    out.write("dataset.csv", filtered.to_csv_bytes()?)?;
    out.write_json(
        "summary.json",
        &json!({
            "source": dataset.path,
            "records_read": corpus.len(),
            "records_kept": filtered.len(),
            "min_length": run.min_length,
            "with_targets": with_targets,
            "mean_words": if filtered.is_empty() { 0.0 } else { words as f64 / filtered.len() as f64 },
            "mean_target": if targets.is_empty() { None } else { Some(targets.iter().sum::<f64>() / targets.len() as f64) },
        }),
    )?;
    run.dataset = Some(dataset);
    out.write_json("effective_config.json", &run)?;
    println!("kept {} of {} records", filtered.len(), corpus.len());
    out.finish("ingest")
}

pub fn train(mut run: RunConfig, data: &DatasetArgs, min_length: Option<usize>) -> Result<()> {
    let dataset = resolve_dataset(data, run.dataset.as_ref())?;
    if let Some(m) = min_length {
        run.min_length = m;
    }
    run.dataset = Some(dataset.clone());
    let split = split_spec(&run)?;
    let featurizer = Featurizer::from_config(&run.featurizer)?;
    let corpus = load_corpus(&dataset)?;
    let filtered = corpus.filter_min_length(run.min_length);
    let (train, test) = filtered.split(&split)?;
    if train.len() < 2 {
        return Err(usage(format!(
            "min_length {} leaves only {} training records",
            run.min_length,
            train.len()
        )));
    }
    let pipeline = Pipeline::fit(&featurizer, &run.forest, &train, pipeline_seed(&run))?;
    let fitted = pipeline.predict(&train.without_targets())?;
    let actual = train.targets()?;
    let report = report_for(&run, featurizer.kind(), split, train.len(), test.len(), &actual, &fitted)?;

    let config = model_config(&run)?;
    let model = ModelFile {
        pipeline,
        seed: run.seed,
        fingerprint: seed::fingerprint(&serde_json::to_vec(&config)?),
        config,
    };
    let (json, blob) = model.to_bytes()?;
    let mut out = Output::create(&run.out, &[&dataset.path])?;
    out.write("model.json", json)?;
    out.write("model.bin", blob)?;
    out.write_json(
        "split.json",
        &json!({ "train": train.ids(), "test": test.ids() }),
    )?;
    out.write_json("train_report.json", &report)?;
    out.write_json("effective_config.json", &run)?;
    println!(
        "trained {} on {} records (in-sample r = {:.4}); model at {}",
        report.featurizer,
        report.n_train,
        report.r,
        out.path("model.json").display()
    );
    out.finish("train")
}

pub fn evaluate(run: RunConfig, model_path: &Path, data: &DatasetArgs, held_out: bool) -> Result<()> {
    let (model, mut model_run) = load_model(model_path)?;
    let dataset = resolve_dataset(data, model_run.dataset.as_ref())?;
    model_run.out = run.out.clone();
    model_run.dataset = Some(dataset.clone());
    let corpus = load_corpus(&dataset)?;
    let filtered = corpus.filter_min_length(model_run.min_length);
    let split = split_spec(&model_run)?;
    let (n_train, scored) = if held_out {
        let (train, test) = filtered.split(&split)?;
        (train.len(), test)
    } else {
        (0, filtered)
    };
    if scored.is_empty() {
        return Err(usage("no records left to evaluate"));
    }
    let predicted = model.pipeline.predict(&scored.without_targets())?;
    let actual = scored.targets()?;
    let ids: Vec<String> = scored.ids().into_iter().map(str::to_string).collect();
    let report = report_for(
        &model_run,
        model.pipeline.featurizer.kind(),
        split,
        n_train,
        scored.len(),
        &actual,
        &predicted,
    )?;
    let mut out = Output::create(&run.out, &[&dataset.path, model_path])?;
    out.write("predictions.csv", analyze::predictions_csv(&ids, &actual, &predicted)?)?;
    out.write_json("report.json", &report)?;
    out.write("report.txt", report.to_text())?;
    out.write_json("effective_config.json", &model_run)?;
    print!("{}", report.to_text());
    out.finish("evaluate")
}

pub fn grid(mut run: RunConfig, data: &DatasetArgs) -> Result<()> {
    let dataset = resolve_dataset(data, run.dataset.as_ref())?;
    run.dataset = Some(dataset.clone());
    if run.min_lengths.is_empty() {
        return Err(usage("min_lengths is empty"));
    }
    let featurizers = run
        .grid_featurizers()
        .iter()
        .map(Featurizer::from_config)
        .collect::<textrait_core::Result<Vec<_>>>()?;
    let corpus = load_corpus(&dataset)?;
    let grid = analyze::run_grid(
        &corpus,
        &featurizers,
        &run.min_lengths,
        &run.forest,
        run.split.train_fraction,
        seed::derive(run.seed, "grid"),
    )?;
    let mut out = Output::create(&run.out, &[&dataset.path])?;
    out.write("grid.csv", grid.to_csv())?;
    out.write("grid.txt", grid.to_table())?;
    out.write_json("grid.json", &grid)?;
    out.write_json("effective_config.json", &run)?;
    print!("{}", grid.to_table());
    out.finish("grid")
}

pub fn topics(mut run: RunConfig, data: &DatasetArgs, min_length: Option<usize>) -> Result<()> {
    let dataset = resolve_dataset(data, run.dataset.as_ref())?;
    if let Some(m) = min_length {
        run.min_length = m;
    }
    run.dataset = Some(dataset.clone());
    let corpus = load_corpus(&dataset)?.filter_min_length(run.min_length);
    let model = TopicModel::fit_corpus(&corpus, &run.topics.lda, seed::derive(run.seed, "topics"))?;
    let report = topic_correlations(&model, &corpus, run.topics.top_terms)?;

    let mut summary = String::new();
    for (label, topic) in [("most positive", report.most_positive), ("most negative", report.most_negative)] {
        if let Some(t) = topic.and_then(|t| report.topics.iter().find(|x| x.topic == t)) {
            let terms: Vec<&str> = t.top_terms.iter().map(|(w, _)| w.as_str()).collect();
            let r = t.correlation.as_ref().map_or(f64::NAN, |c| c.r);
            writeln!(summary, "{label}: topic {} (r = {r:.4}): {}", t.topic, terms.join(" "))?;
        }
    }
    let mut out = Output::create(&run.out, &[&dataset.path])?;
    out.write("word_cloud.csv", report.word_cloud_csv())?;
    out.write("topic_correlations.csv", report.correlations_csv())?;
    out.write("topics.txt", &summary)?;
    out.write_json("effective_config.json", &run)?;
    print!("{summary}");
    out.finish("topics")
}

pub fn analyze(run: RunConfig, model_path: &Path, data: &DatasetArgs) -> Result<()> {
    let (model, mut model_run) = load_model(model_path)?;
    let dataset = resolve_dataset(data, model_run.dataset.as_ref())?;
    model_run.out = run.out.clone();
    model_run.dataset = Some(dataset.clone());
    model_run.metrics = run.metrics.clone();
    let pos = match &run.metrics.pos_lexicon {
        Some(p) => PosLexicon::load_overrides(p)?,
        None => PosLexicon::default(),
    };
    let easy = match &run.metrics.easy_words {
        Some(p) => EasyWords::load(p)?,
        None => EasyWords::builtin(),
    };
    let corpus = load_corpus(&dataset)?;
    let predicted = model.pipeline.predict(&corpus)?;
    let correlates = analyze::correlate_outputs(&predicted, &corpus, &pos, &easy)?;
    let gender = analyze::group_report(&predicted, &corpus, GroupAttribute::Gender)?;
    let family = analyze::group_report(&predicted, &corpus, GroupAttribute::JobFamily)?;

    let mut text = String::from("correlates of the predicted score\n");
    for row in &correlates.rows {
        let c = &row.correlation;
        writeln!(text, "  {:<18} r = {:>7.4}  p = {:.3e}  n = {}", row.metric, c.r, c.p_two_sided, c.n)?;
    }
    for (metric, why) in &correlates.skipped {
        writeln!(text, "  {metric:<18} skipped: {why}")?;
    }
    write!(text, "\nby gender\n{}\nby job family\n{}", gender.to_text(), family.to_text())?;

    let mut predictions = String::from("id,predicted\n");
    for (id, p) in corpus.ids().iter().zip(&predicted) {
        writeln!(predictions, "{id},{p}")?;
    }
    let mut out = Output::create(&run.out, &[&dataset.path, model_path])?;
    out.write("predictions.csv", predictions)?;
    out.write("correlates.csv", correlates.to_csv())?;
    out.write("groups_gender.csv", gender.to_csv()?)?;
    out.write("groups_job_family.csv", family.to_csv()?)?;
    out.write_json("groups.json", &[&gender, &family])?;
    out.write("analysis.txt", &text)?;
    out.write_json("effective_config.json", &model_run)?;
    print!("{text}");
    out.finish("analyze")
}

#[derive(Serialize)]
struct SynthSummary {
    documents: usize,
    signal_strength: f64,
    oracle_r: f64,
    mean_words: f64,
    signal_words: Vec<String>,
}

pub fn synth(mut run: RunConfig) -> Result<()> {
    run.synth.seed = seed::derive(run.seed, "synth");
    run.synth.validate()?;
    let generated = synth::generate(&run.synth)?;
    let corpus = &generated.corpus;
    let words: usize = corpus.records().iter().map(|r| r.word_count()).sum();
    let summary = SynthSummary {
        documents: corpus.len(),
        signal_strength: run.synth.signal_strength,
        oracle_r: generated.oracle_r,
        mean_words: words as f64 / corpus.len() as f64,
        signal_words: generated.signal_words.clone(),
    };
    let mut out = Output::create(&run.out, &[])?;
    let dataset = out.write("dataset.csv", corpus.to_csv_bytes()?)?;
    out.write("embeddings.txt", generated.embeddings.to_text())?;
    out.write("lexicon.dic", synth::demo_lexicon(&generated).to_dic())?;
    out.write_json("synth_summary.json", &summary)?;
    run.dataset = Some(DatasetConfig {
        path: dataset,
        format: None,
    });
    out.write_json("effective_config.json", &run)?;
    println!(
        "wrote {} documents to {} (oracle r = {:.4})",
        summary.documents,
        out.dir().display(),
        summary.oracle_r
    );
    out.finish("synth")
}

/// Files `report` knows how to summarize, in display order.
const REPORT_FILES: &[&str] = &[
    "synth_summary.json",
    "summary.json",
    "train_report.json",
    "report.json",
    "grid.txt",
    "topics.txt",
    "analysis.txt",
];

pub fn report(run: RunConfig, input: &Path) -> Result<()> {
    if !input.is_dir() {
        return Err(usage(format!("{} is not a directory", input.display())));
    }
    let mut text = String::new();
    for name in REPORT_FILES {
        let path: PathBuf = input.join(name);
        if !path.is_file() {
            continue;
        }
        let content = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let body = if name.ends_with(".json") {
            summarize_json(&serde_json::from_str(&content)?)
        } else {
            content
        };
        writeln!(text, "== {name}\n{}", body.trim_end())?;
    }
    if text.is_empty() {
        return Err(usage(format!("no reports found in {}", input.display())));
    }
    let mut out = Output::create(&run.out, &[])?;
    out.write("summary.txt", &text)?;
    print!("{text}");
    out.finish("report")
}

/// Scalar fields of a JSON object, one per line.
fn summarize_json(value: &serde_json::Value) -> String {
    let mut text = String::new();
    if let Some(map) = value.as_object() {
        for (k, v) in map {
            match v {
                serde_json::Value::Number(_) | serde_json::Value::String(_) | serde_json::Value::Bool(_) => {
                    writeln!(text, "{k:<16} {v}").unwrap();
                }
                _ => {}
            }
        }
    }
    text
}
