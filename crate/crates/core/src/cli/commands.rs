use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::args::{EvalArgs, InferArgs, MfccArgs, MixArgs, SynthArgs, TrainArgs};
use super::config::RunConfig;
use crate::corpus::{Corpus, CorpusManifest, ManifestEntry};
use crate::error::{Error, Result};
use crate::eval::{run_experiment, ExperimentCorpus, InitCondition, TaskGroup};
use crate::features::{
    compute_features, load_wav, read_feature_file, write_wav, AudioSignal, FeatureMatrix,
};
use crate::lvem::{compute_jpm, decode, run_em, DecodePolicy, InferenceReport, InitKind};
use crate::math::derive_seed;
use crate::mixer::{
    enumerate_tasks, interleave_frames, mix, synth_corpus, write_manifest, ManifestRecord, SynthCorpus,
    SynthMode,
};
use crate::models::{train_bank, Family, ModelBank};

/// What a command did, for the terminal.
pub type Summary = String;

/// Writes through a temporary file in the destination directory, then
/// renames it into place.
fn write_atomic_with(path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    write(tmp.path())?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic_with(path, |tmp| std::fs::write(tmp, bytes).map_err(|e| Error::io(tmp, e)))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[derive(Serialize)]
struct Echo<'a, A: Serialize> {
    command: &'a str,
    seed: u64,
    args: &'a A,
    config: &'a RunConfig,
}

fn echo<A: Serialize>(path: &Path, command: &str, args: &A, cfg: &RunConfig) -> Result<()> {
    write_json(
        path,
        &Echo {
            command,
            seed: cfg.seed,
            args,
            config: cfg,
        },
    )
}

/// `foo.lvf` -> `foo.lvf.json`.
fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::CheckFailed(what()))
    }
}

fn is_wav(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
}

/// Features of a WAV or feature file.
fn load_features(path: &Path, cfg: &RunConfig) -> Result<FeatureMatrix> {
    if is_wav(path) {
        compute_features(&load_wav(path)?, &cfg.mfcc)
    } else {
        read_feature_file(path)
    }
}

enum LoadedCorpus {
    Features(Corpus<FeatureMatrix>),
    Waveforms(Corpus<AudioSignal>),
}

fn load_corpus(path: &Path) -> Result<LoadedCorpus> {
    let paths = CorpusManifest::load(path)?.cells()?;
    paths.require_nonempty(1)?;
    let all: Vec<&PathBuf> = paths.cells().iter().flatten().collect();
    let wav = all.iter().filter(|p| is_wav(p)).count();
    if wav == all.len() {
        Ok(LoadedCorpus::Waveforms(paths.try_map(|p| load_wav(p))?))
    } else if wav == 0 {
        Ok(LoadedCorpus::Features(paths.try_map(|p| read_feature_file(p))?))
    } else {
        Err(Error::InvalidArgument(
            "corpus mixes WAV and feature files".into(),
        ))
    }
}

fn corpus_features(corpus: LoadedCorpus, cfg: &RunConfig) -> Result<Corpus<FeatureMatrix>> {
    match corpus {
        LoadedCorpus::Features(c) => Ok(c),
        LoadedCorpus::Waveforms(c) => c.try_map(|a| compute_features(a, &cfg.mfcc)),
    }
}

pub fn cmd_mfcc(args: &MfccArgs, cfg: &RunConfig, verify: bool) -> Result<Summary> {
    let audio = load_wav(&args.input)?;
    let features = compute_features(&audio, &cfg.mfcc)?;
    write_atomic(&args.output, &features.to_bytes())?;
    echo(&sidecar(&args.output), "mfcc", args, cfg)?;
    if verify {
        let back = read_feature_file(&args.output)?;
        check(back == features, || "feature file does not read back identically".into())?;
        check(features.dim() == cfg.mfcc.output_dim(), || {
            format!("dimension {} != configured {}", features.dim(), cfg.mfcc.output_dim())
        })?;
        check(features.as_slice().iter().all(|v| v.is_finite()), || "non-finite feature".into())?;
    }
    Ok(format!(
        "D={} T={}\nwrote {}\n",
        features.dim(),
        features.frames(),
        args.output.display()
    ))
}

pub fn cmd_train(args: &TrainArgs, cfg: &RunConfig, verify: bool) -> Result<Summary> {
    let mut cfg = cfg.clone();
    if let Some(f) = args.family {
        cfg.family = f;
    }
    if let Some(k) = args.components {
        cfg.train.n_components = k;
    }
    let corpus = corpus_features(load_corpus(&args.corpus)?, &cfg)?;
    let bank = train_bank(&corpus, cfg.family, &cfg.train)?;
    let json = bank.to_json()?;
    write_atomic(&args.output, json.as_bytes())?;
    echo(&sidecar(&args.output), "train", args, &cfg)?;
    if verify {
        let back = ModelBank::load(&args.output)?;
        check(back == bank, || "bank JSON does not read back identically".into())?;
        for m in bank.models() {
            let total: f64 = m.components().iter().map(|c| c.weight).sum();
            check((total - 1.0).abs() <= 1e-12, || format!("mixture weights sum to {total}"))?;
            check(m.n_components() == cfg.train.n_components, || {
                format!("model has {} components", m.n_components())
            })?;
            let want_dof = cfg.family == Family::StudentT;
            check(m.components().iter().all(|c| c.dof.is_some() == want_dof), || {
                "dof presence does not match the family".into()
            })?;
        }
    }
    Ok(format!(
        "trained {}x{} {} bank (K={}, D={})\nwrote {}\n",
        bank.n_speakers(),
        bank.n_keywords(),
        bank.family(),
        cfg.train.n_components,
        bank.dim(),
        args.output.display()
    ))
}

pub fn cmd_synth(args: &SynthArgs, cfg: &RunConfig, verify: bool) -> Result<Summary> {
    let mut cfg = cfg.clone();
    if let Some(m) = args.mode {
        cfg.synth_mode = m;
    }
    let s = &mut cfg.synth;
    s.speakers = args.speakers.unwrap_or(s.speakers);
    s.keywords = args.keywords.unwrap_or(s.keywords);
    s.reps = args.reps.unwrap_or(s.reps);
    s.dim = args.dim.unwrap_or(s.dim);

    let out = &args.output;
    let generated = synth_corpus(&cfg.synth, cfg.synth_mode)?;
    let (speakers, keywords, n_utts) = match &generated {
        SynthCorpus::Features { corpus, .. } => (corpus.speakers().to_vec(), corpus.keywords().to_vec(), corpus.cells().iter().flatten().count()),
        SynthCorpus::Waveforms { corpus } => (corpus.speakers().to_vec(), corpus.keywords().to_vec(), corpus.cells().iter().flatten().count()),
    };
    let ext = match cfg.synth_mode {
        SynthMode::Feature => "lvf",
        SynthMode::Waveform => "wav",
    };
    let n = keywords.len();
    let mut entries = Vec::with_capacity(n_utts);
    for k in 0..speakers.len() {
        for l in 0..n {
            for r in 0..cfg.synth.reps {
                entries.push(ManifestEntry {
                    speaker: speakers[k].clone(),
                    keyword: keywords[l].clone(),
                    path: PathBuf::from(format!("utterances/{}_{}_{r:02}.{ext}", speakers[k], keywords[l])),
                });
            }
        }
    }
    entries
        .par_iter()
        .enumerate()
        .try_for_each(|(i, e)| {
            let (cell, r) = (i / cfg.synth.reps, i % cfg.synth.reps);
            let (k, l) = (cell / n, cell % n);
            let path = out.join(&e.path);
            match &generated {
                SynthCorpus::Features { corpus, .. } => write_atomic(&path, &corpus.cell(k, l)[r].to_bytes()),
                SynthCorpus::Waveforms { corpus } => {
                    write_atomic_with(&path, |tmp| write_wav(tmp, &corpus.cell(k, l)[r]))
                }
            }
        })?;
    let manifest = CorpusManifest {
        speakers,
        keywords,
        utterances: entries,
    };
    let manifest_path = out.join("corpus.json");
    write_json(&manifest_path, &manifest)?;
    if let SynthCorpus::Features { bank, .. } = &generated {
        write_atomic(&out.join("generator_bank.json"), bank.to_json()?.as_bytes())?;
    }
    echo(&out.join("config.json"), "synth", args, &cfg)?;
    if verify {
        let reloaded = CorpusManifest::load(&manifest_path)?.cells()?;
        reloaded.require_nonempty(cfg.synth.reps)?;
        check(reloaded.cells().iter().flatten().all(|p| p.exists()), || "missing utterance file".into())?;
    }
    Ok(format!(
        "wrote {n_utts} {} utterances ({}x{} cells, {} reps) to {}\n",
        cfg.synth_mode,
        cfg.synth.speakers,
        cfg.synth.keywords,
        cfg.synth.reps,
        out.display()
    ))
}

pub fn cmd_mix(args: &MixArgs, cfg: &RunConfig, verify: bool) -> Result<Summary> {
    let mut cfg = cfg.clone();
    if let Some(r) = args.rpr {
        cfg.mix.target_rpr_db = r;
    }
    if let Some(o) = args.min_overlap {
        cfg.mix.min_overlap = o;
    }
    let selection = args.tasks.unwrap_or_default();
    let corpus = load_corpus(&args.corpus)?;
    let (speakers, keywords, min_reps) = match &corpus {
        LoadedCorpus::Features(c) => (c.speakers().to_vec(), c.keywords().to_vec(), c.min_reps()),
        LoadedCorpus::Waveforms(c) => (c.speakers().to_vec(), c.keywords().to_vec(), c.min_reps()),
    };
    let m = args.speakers.unwrap_or(speakers.len());
    let n = args.keywords.unwrap_or(keywords.len());
    if m > speakers.len() || n > keywords.len() {
        return Err(Error::InvalidArgument(format!(
            "asked for {m}x{n} but the corpus is {}x{}",
            speakers.len(),
            keywords.len()
        )));
    }
    if args.utterance >= min_reps {
        return Err(Error::InvalidArgument(format!(
            "utterance index {} but some cell has only {min_reps}",
            args.utterance
        )));
    }
    let (different, same) = enumerate_tasks(m, n)?;
    let tasks: Vec<_> = different
        .into_iter()
        .chain(same)
        .filter(|t| selection.includes(t.kind))
        .collect();
    let out = &args.output;
    let records = tasks
        .par_iter()
        .enumerate()
        .map(|(i, task)| {
            let seed = derive_seed(cfg.seed, i as u64);
            let mut spec = task.mix_spec(args.utterance, seed);
            spec.target_rpr_db = cfg.mix.target_rpr_db;
            spec.min_overlap = cfg.mix.min_overlap;
            let id = format!("{}_{i:05}", task.kind.label().to_ascii_lowercase());
            let (a, b) = (spec.source_a, spec.source_b);
            let (path, rpr_db, overlap) = match &corpus {
                LoadedCorpus::Waveforms(c) => {
                    let res = mix(&c.cell(a.speaker, a.keyword)[a.utterance], &c.cell(b.speaker, b.keyword)[b.utterance], &spec)?;
                    let rel = format!("mixtures/{id}.wav");
                    write_atomic_with(&out.join(&rel), |tmp| write_wav(tmp, &res.signal))?;
                    (rel, Some(res.rpr_db), Some(res.overlap))
                }
                LoadedCorpus::Features(c) => {
                    let x = interleave_frames(&c.cell(a.speaker, a.keyword)[a.utterance], &c.cell(b.speaker, b.keyword)[b.utterance])?;
                    let rel = format!("mixtures/{id}.lvf");
                    write_atomic(&out.join(&rel), &x.to_bytes())?;
                    (rel, None, None)
                }
            };
            Ok(ManifestRecord {
                id,
                path,
                task: task.kind,
                truth: task.truth.clone(),
                labels: task
                    .truth
                    .pairs()
                    .iter()
                    .map(|&(k, l)| (speakers[k].clone(), keywords[l].clone()))
                    .collect(),
                sources: [a, b],
                rpr_db,
                overlap,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    write_manifest(&mut buf, &records)?;
    write_atomic(&out.join("manifest.jsonl"), &buf)?;
    echo(&out.join("config.json"), "mix", args, &cfg)?;
    if verify {
        for r in &records {
            check(r.truth.pairs() == [(r.sources[0].speaker, r.sources[0].keyword), (r.sources[1].speaker, r.sources[1].keyword)], || {
                format!("{}: truth does not match its sources", r.id)
            })?;
            if let (Some(rpr), Some(ov)) = (r.rpr_db, r.overlap) {
                check((rpr - cfg.mix.target_rpr_db).abs() <= 0.5, || format!("{}: RPR {rpr} dB", r.id))?;
                check(ov + 1e-12 >= cfg.mix.min_overlap, || format!("{}: overlap {ov}", r.id))?;
            }
        }
    }
    let count = |k| records.iter().filter(|r| r.task == k).count();
    Ok(format!(
        "wrote {} mixtures ({} MSpDKW, {} MSpSKW) to {}\n",
        records.len(),
        count(crate::mixer::TaskKind::DifferentKeywords),
        count(crate::mixer::TaskKind::SameKeyword),
        out.display()
    ))
}

/// Resolves labels or 1-based indices against `labels`.
fn resolve_labels(tokens: &[String], labels: &[String], what: &str) -> Result<Vec<usize>> {
    tokens
        .iter()
        .map(|t| {
            let t = t.trim();
            if let Some(i) = labels.iter().position(|l| l == t) {
                return Ok(i);
            }
            match t.parse::<usize>() {
                Ok(i) if (1..=labels.len()).contains(&i) => Ok(i - 1),
                _ => Err(Error::InvalidArgument(format!("unknown {what} {t:?}"))),
            }
        })
        .collect()
}

pub fn cmd_infer(args: &InferArgs, cfg: &RunConfig, verify: bool) -> Result<Summary> {
    let mut cfg = cfg.clone();
    if let Some(p) = args.policy {
        cfg.policy = p;
    }
    let bank = ModelBank::load(&args.bank)?;
    let x = load_features(&args.input, &cfg)?;
    let init = if !args.oracle_speakers.is_empty() {
        InitKind::OracleSpeakers(resolve_labels(&args.oracle_speakers, bank.speakers(), "speaker")?)
    } else if !args.oracle_keywords.is_empty() {
        InitKind::OracleKeywords(resolve_labels(&args.oracle_keywords, bank.keywords(), "keyword")?)
    } else {
        InitKind::Flat
    };
    let start = init.build(bank.n_speakers(), bank.n_keywords())?;
    let outcome = run_em(&x, &bank, &start, &cfg.em)?;
    let jpm = compute_jpm(&outcome.state);
    let detection = decode(&jpm, &outcome.state, cfg.policy)?;
    let config = serde_json::json!({
        "command": "infer",
        "seed": cfg.seed,
        "args": args,
        "config": &cfg,
    });
    let report = InferenceReport::new(&bank, &outcome, &jpm, &detection, init.to_string(), cfg.policy.to_string(), config);
    if verify {
        outcome.state.check(1e-12)?;
        for w in outcome.log_likelihoods.windows(2) {
            check(w[1] >= w[0] - 1e-8 * w[0].abs(), || format!("log-likelihood fell from {} to {}", w[0], w[1]))?;
        }
        for (k, &b) in outcome.state.beta().iter().enumerate() {
            let row: f64 = jpm.row(k).iter().sum();
            check((row - b).abs() <= 1e-12, || format!("JPM row {k} sums to {row}, beta is {b}"))?;
        }
        let mut seen = detection.speakers();
        seen.dedup();
        check(seen.len() == detection.pairs.len(), || "a speaker was decoded twice".into())?;
        if let InitKind::OracleSpeakers(active) = &init {
            check(detection.speakers().iter().all(|k| active.contains(k)), || {
                "decoded a speaker outside the oracle set".into()
            })?;
        }
        if let DecodePolicy::KnownCount(c) = cfg.policy {
            let nonzero = outcome.state.beta().iter().filter(|&&b| b > 0.0).count();
            check(detection.pairs.len() == c.min(nonzero), || {
                format!("{} pairs decoded under known:{c}", detection.pairs.len())
            })?;
        }
    }
    let mut summary = report.summary();
    match &args.output {
        Some(path) => {
            write_json(path, &report)?;
            let _ = writeln!(summary, "wrote {}", path.display());
        }
        None => {
            summary.push_str(&serde_json::to_string_pretty(&report)?);
            summary.push('\n');
        }
    }
    Ok(summary)
}

pub fn cmd_eval(args: &EvalArgs, cfg: &RunConfig, verify: bool) -> Result<Summary> {
    let mut cfg = cfg.clone();
    if !args.families.is_empty() {
        cfg.eval.families = args.families.clone();
    }
    if !args.inits.is_empty() {
        cfg.eval.inits = args.inits.clone();
    }
    if let Some(t) = args.tasks {
        cfg.eval.tasks = t;
    }
    if !args.folds.is_empty() {
        cfg.eval.folds = Some(args.folds.clone());
    }
    if args.max_tasks.is_some() {
        cfg.eval.max_tasks = args.max_tasks;
    }
    if let Some(p) = args.policy {
        cfg.policy = p;
    }
    let corpus = match load_corpus(&args.corpus)? {
        LoadedCorpus::Features(c) => ExperimentCorpus::Features(c),
        LoadedCorpus::Waveforms(c) => ExperimentCorpus::Waveforms {
            corpus: c,
            mfcc: cfg.mfcc.clone(),
        },
    };
    let experiment = cfg.experiment();
    let report = run_experiment(&corpus, &experiment)?;
    let out = &args.output;
    let text = report.to_text();
    write_atomic(&out.join("results.csv"), report.to_csv().as_bytes())?;
    write_atomic(&out.join("results.txt"), text.as_bytes())?;
    write_json(&out.join("details.json"), &report)?;
    echo(&out.join("config.json"), "eval", args, &cfg)?;
    if verify {
        for row in &report.rows {
            row.metrics.check()?;
            if row.init == InitCondition::OracleSpeakers && cfg.policy == DecodePolicy::KnownCount(2) {
                check(row.metrics.both_speakers == 100.0, || {
                    format!("{} {} oracle speakers found both speakers in only {}%", row.family, row.task, row.metrics.both_speakers)
                })?;
            }
        }
        if let (Some(a), Some(b)) = (
            report.rows.iter().find(|r| r.task == TaskGroup::DifferentKeywords),
            report.rows.iter().find(|r| r.task == TaskGroup::SameKeyword),
        ) {
            let overall = report.rows.iter().find(|r| r.task == TaskGroup::Overall && r.family == a.family && r.init == a.init);
            check(overall.is_none_or(|o| o.metrics.n_utterances == a.metrics.n_utterances + b.metrics.n_utterances), || {
                "pooled row count differs from the sum of its parts".into()
            })?;
        }
    }
    Ok(format!("{text}wrote results.csv, results.txt, details.json to {}\n", out.display()))
}
