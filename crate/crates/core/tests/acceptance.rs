//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spkw::corpus::Corpus;
use spkw::eval::{run_experiment, ExperimentConfig, ExperimentCorpus, InitCondition, OutlierConfig, TaskGroup};
use spkw::features::{compute_features, frame_count, read_feature_file, write_feature_file, AudioSignal, FeatureMatrix, MfccConfig};
use spkw::lvem::{
    compute_jpm, decode, e_step, init_oracle_keywords, init_oracle_speakers, m_step, q_value, run_em,
    run_em_on_table, DecodePolicy, EmConfig, LVState, LogLikTable, Posteriors,
};
use spkw::mixer::{
    enumerate_tasks, interleave_frames, mix, synth_feature_corpus, synth_waveform_corpus, SynthConfig,
};
use spkw::models::{train_bank, Family, MixtureComponent, MixtureModel, TrainConfig};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// Random small instances shared by criteria 1 and 5.

struct Instance {
    table: LogLikTable,
    state: LVState,
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.random_range(1e-12f64..1.0).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

fn random_instance(rng: &mut ChaCha8Rng, m: usize, n: usize, t: usize) -> Instance {
    let data: Vec<f64> = (0..t * m * n).map(|_| rng.random_range(-20.0..0.0)).collect();
    let table = LogLikTable::new(data, t, m, n).unwrap();
    let beta = random_simplex(rng, m);
    let delta = (0..m).map(|_| random_simplex(rng, n)).collect();
    Instance {
        table,
        state: LVState::new(beta, delta).unwrap(),
    }
}

fn instances(count: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes: Vec<(usize, usize, usize)> = [2, 3]
        .iter()
        .flat_map(|&m| [2, 3].iter().flat_map(move |&n| [5, 20].iter().map(move |&t| (m, n, t))))
        .collect();
    (0..count)
        .map(|i| {
            let (m, n, t) = shapes[i % shapes.len()];
            random_instance(&mut rng, m, n, t)
        })
        .collect()
}

/// Posterior of every hypothesis by plain products and sums.
fn linear_posteriors(inst: &Instance) -> Vec<f64> {
    let (t, m, n) = (inst.table.frames(), inst.table.speakers(), inst.table.keywords());
    let mut out = vec![0.0; t * m * n];
    for j in 0..t {
        let mut total = 0.0;
        for k in 0..m {
            for l in 0..n {
                let v = inst.state.beta()[k] * inst.state.delta(k, l) * inst.table.get(j, k, l).exp();
                out[(j * m + k) * n + l] = v;
                total += v;
            }
        }
        for v in &mut out[j * m * n..(j + 1) * m * n] {
            *v /= total;
        }
    }
    out
}

/// Expected complete-data log-likelihood of `(beta, delta)` under `post`.
fn q_oracle(post: &Posteriors, table: &LogLikTable, beta: &[f64], delta: &[Vec<f64>]) -> f64 {
    let (t, m, n) = (table.frames(), table.speakers(), table.keywords());
    let xlny = |p: f64, q: f64| if p == 0.0 { 0.0 } else { p * q.ln() };
    let mut q = 0.0;
    for j in 0..t {
        for k in 0..m {
            q += xlny(post.eta(j, k), beta[k]);
            for l in 0..n {
                let z = post.zeta(j, k, l);
                q += xlny(z, delta[k][l]);
                if z > 0.0 {
                    q += z * table.get(j, k, l);
                }
            }
        }
    }
    q
}

/// Every point of the probability simplex in `dim` coordinates whose entries
/// are multiples of `1/steps`.
fn simplex_grid(dim: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(dim: usize, left: usize, steps: usize, prefix: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if dim == 1 {
            prefix.push(left as f64 / steps as f64);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for i in 0..=left {
            prefix.push(i as f64 / steps as f64);
            rec(dim - 1, left - i, steps, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, steps, steps, &mut Vec::new(), &mut out);
    out
}

/// Best value of `sum_i w_i ln p_i` over the grid.
fn grid_max(weights: &[f64], grid: &[Vec<f64>]) -> f64 {
    grid.iter()
        .map(|p| {
            weights
                .iter()
                .zip(p)
                .map(|(&w, &pi)| if w == 0.0 { 0.0 } else { w * pi.ln() })
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cases = instances(100, 1);
    let grids = [simplex_grid(2, 100), simplex_grid(3, 100)];
    let (mut worst_post, mut worst_gap, mut worst_drop, mut iters) = (0.0f64, f64::NEG_INFINITY, 0.0f64, 0usize);
    for (i, inst) in cases.iter().enumerate() {
        let (t, m, n) = (inst.table.frames(), inst.table.speakers(), inst.table.keywords());
        let post = e_step(&inst.table, &inst.state).map_err(|e| e.to_string())?;
        let oracle = linear_posteriors(inst);
        for j in 0..t {
            for k in 0..m {
                for l in 0..n {
                    worst_post = worst_post.max((post.zeta(j, k, l) - oracle[(j * m + k) * n + l]).abs());
                }
            }
        }

        let next = m_step(&post);
        let q_next = q_oracle(&post, &inst.table, next.beta(), &next.delta_rows());
        let q_lib = q_value(&post, &next, &inst.table).map_err(|e| e.to_string())?;
        ensure((q_lib - q_next).abs() <= 1e-9 * q_next.abs().max(1.0), || {
            format!("instance {i}: library Q {q_lib} vs oracle Q {q_next}")
        })?;
        let eta_sums: Vec<f64> = (0..m).map(|k| (0..t).map(|j| post.eta(j, k)).sum()).collect();
        let mut q_grid = grid_max(&eta_sums, &grids[m - 2]);
        for k in 0..m {
            let zeta_sums: Vec<f64> = (0..n).map(|l| (0..t).map(|j| post.zeta(j, k, l)).sum()).collect();
            q_grid += grid_max(&zeta_sums, &grids[n - 2]);
        }
        let data_term: f64 = (0..t)
            .flat_map(|j| (0..m).flat_map(move |k| (0..n).map(move |l| (j, k, l))))
            .map(|(j, k, l)| post.zeta(j, k, l) * inst.table.get(j, k, l))
            .sum();
        q_grid += data_term;
        worst_gap = worst_gap.max(q_grid - q_next);

        let cfg = EmConfig {
            max_iters: 200,
            rel_tol: 1e-12,
            ..Default::default()
        };
        let run = run_em_on_table(&inst.table, &inst.state, &cfg).map_err(|e| e.to_string())?;
        iters += run.iterations;
        for w in run.log_likelihoods.windows(2) {
            worst_drop = worst_drop.max((w[0] - w[1]) / w[0].abs());
        }
    }
    let elapsed = start.elapsed();
    ensure(worst_post <= 1e-10, || format!("e_step deviates from the linear oracle by {worst_post:e}"))?;
    ensure(worst_gap <= 1e-6, || format!("grid search beats m_step by {worst_gap:e}"))?;
    ensure(worst_drop <= 1e-8, || format!("log-likelihood fell by a relative {worst_drop:e}"))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "100 instances; max |e_step - oracle| = {worst_post:.1e}; grid Q - m_step Q <= {worst_gap:.1e}; \
         max relative LL drop = {worst_drop:.1e} over {iters} iterations; {:.1}s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------
// Criteria 2 and 3 share a synthetic feature-mode corpus.

fn synthetic_corpus() -> Corpus<FeatureMatrix> {
    let cfg = SynthConfig {
        speakers: 10,
        keywords: 10,
        reps: 10,
        dim: 5,
        components: 8,
        seed: 2024,
        ..Default::default()
    };
    synth_feature_corpus(&cfg).unwrap().0
}

fn base_experiment() -> ExperimentConfig {
    ExperimentConfig {
        policy: DecodePolicy::KnownCount(2),
        folds: Some(vec![0]),
        max_tasks: Some(100),
        seed: 11,
        ..Default::default()
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let corpus = ExperimentCorpus::Features(synthetic_corpus());
    let cfg = ExperimentConfig {
        families: vec![Family::StudentT],
        inits: vec![InitCondition::Flat],
        ..base_experiment()
    };
    let report = run_experiment(&corpus, &cfg).map_err(|e| e.to_string())?;
    let row = report
        .row(Family::StudentT, TaskGroup::Overall, InitCondition::Flat)
        .ok_or("no overall row")?;
    let elapsed = start.elapsed();
    ensure(row.n_utterances == 200, || format!("{} mixtures", row.n_utterances))?;
    ensure(row.both_pairs >= 90.0, || format!("both_pairs {}", row.both_pairs))?;
    ensure(row.at_least_one_pair >= 99.0, || format!("at_least_one_pair {}", row.at_least_one_pair))?;
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "tMM flat known:2 on 200 mixtures: both_pairs {:.2}%, at_least_one_pair {:.2}%; {:.1}s",
        row.both_pairs,
        row.at_least_one_pair,
        elapsed.as_secs_f64()
    ))
}

fn criterion_3() -> Outcome {
    let corpus = ExperimentCorpus::Features(synthetic_corpus());
    let cfg = ExperimentConfig {
        families: vec![Family::StudentT, Family::Gaussian],
        inits: InitCondition::ALL.to_vec(),
        train_outliers: Some(OutlierConfig {
            fraction: 0.05,
            magnitude: 25.0,
        }),
        ..base_experiment()
    };
    let report = run_experiment(&corpus, &cfg).map_err(|e| e.to_string())?;
    let get = |f, i| report.row(f, TaskGroup::Overall, i).copied().ok_or("missing row");
    let t_flat = get(Family::StudentT, InitCondition::Flat)?;
    let g_flat = get(Family::Gaussian, InitCondition::Flat)?;
    ensure(t_flat.both_pairs >= g_flat.both_pairs, || {
        format!("tMM both_pairs {} < GMM {}", t_flat.both_pairs, g_flat.both_pairs)
    })?;
    let mut details = vec![format!(
        "both_pairs tMM {:.2}% vs GMM {:.2}%",
        t_flat.both_pairs, g_flat.both_pairs
    )];
    for family in [Family::StudentT, Family::Gaussian] {
        let flat = get(family, InitCondition::Flat)?;
        let spid = get(family, InitCondition::OracleSpeakers)?;
        let kwid = get(family, InitCondition::OracleKeywords)?;
        ensure(spid.both_speakers == 100.0, || format!("{family} oracle-spid both_speakers {}", spid.both_speakers))?;
        ensure(spid.both_pairs >= flat.both_pairs, || {
            format!("{family} oracle-spid both_pairs {} < flat {}", spid.both_pairs, flat.both_pairs)
        })?;
        ensure(kwid.both_keywords == 100.0, || format!("{family} oracle-kwid both_keywords {}", kwid.both_keywords))?;
        details.push(format!(
            "{family}: spid both_speakers {:.0}% both_pairs {:.2}% (flat {:.2}%), kwid both_keywords {:.0}%",
            spid.both_speakers, spid.both_pairs, flat.both_pairs, kwid.both_keywords
        ));
    }
    Ok(format!("5% outlier frames in training; {}", details.join("; ")))
}

fn criterion_4() -> Outcome {
    let (different, same) = enumerate_tasks(10, 10).map_err(|e| e.to_string())?;
    ensure(different.len() == 2025 && same.len() == 450, || {
        format!("{} and {} tasks", different.len(), same.len())
    })?;
    let corpus = synth_waveform_corpus(&SynthConfig {
        speakers: 10,
        keywords: 10,
        reps: 1,
        seed: 3,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let (mut worst_rpr, mut worst_overlap) = (0.0f64, f64::INFINITY);
    for (i, task) in different.iter().chain(&same).enumerate() {
        let spec = task.mix_spec(0, i as u64);
        let (a, b) = (spec.source_a, spec.source_b);
        let out = mix(&corpus.cell(a.speaker, a.keyword)[0], &corpus.cell(b.speaker, b.keyword)[0], &spec)
            .map_err(|e| e.to_string())?;
        ensure(out.truth == task.truth, || format!("mixture {i} truth differs from its task"))?;
        worst_rpr = worst_rpr.max(out.rpr_db.abs());
        worst_overlap = worst_overlap.min(out.overlap);
    }
    ensure(worst_rpr <= 0.5, || format!("RPR off by {worst_rpr} dB"))?;
    ensure(worst_overlap >= 0.9, || format!("overlap {worst_overlap}"))?;
    Ok(format!(
        "2025 MSpDKW + 450 MSpSKW tasks; all 2475 waveform mixtures within {worst_rpr:.1e} dB of 0 dB, min overlap {worst_overlap:.4}"
    ))
}

fn criterion_5() -> Outcome {
    let mut checks = 0usize;
    for inst in instances(60, 5) {
        let (t, m, n) = (inst.table.frames(), inst.table.speakers(), inst.table.keywords());
        let post = e_step(&inst.table, &inst.state).map_err(|e| e.to_string())?;
        for j in 0..t {
            let eta_sum: f64 = (0..m).map(|k| post.eta(j, k)).sum();
            ensure((eta_sum - 1.0).abs() <= 1e-10, || format!("sum_k eta = {eta_sum}"))?;
            for k in 0..m {
                let z: f64 = (0..n).map(|l| post.zeta(j, k, l)).sum();
                ensure((z - post.eta(j, k)).abs() <= 1e-10, || format!("sum_l zeta {z} vs eta {}", post.eta(j, k)))?;
            }
        }
        let run = run_em_on_table(&inst.table, &inst.state, &EmConfig::default()).map_err(|e| e.to_string())?;
        let s = &run.state;
        let beta_sum: f64 = s.beta().iter().sum();
        ensure((beta_sum - 1.0).abs() <= 1e-12, || format!("beta sums to {beta_sum}"))?;
        for k in 0..m {
            let row: f64 = s.delta_row(k).iter().sum();
            ensure((row - 1.0).abs() <= 1e-12, || format!("delta row sums to {row}"))?;
        }
        let jpm = compute_jpm(s);
        for k in 0..m {
            let row: f64 = jpm.row(k).iter().sum();
            ensure((row - s.beta()[k]).abs() <= 1e-12, || format!("JPM row {row} vs beta {}", s.beta()[k]))?;
        }
        for policy in [DecodePolicy::KnownCount(1), DecodePolicy::KnownCount(2), DecodePolicy::Threshold(0.3)] {
            let det = decode(&jpm, s, policy).map_err(|e| e.to_string())?;
            let mut speakers = det.speakers();
            speakers.dedup();
            ensure(speakers.len() == det.pairs.len(), || "more than one keyword for a speaker".into())?;
        }

        let active = vec![0, m - 1];
        let spid = init_oracle_speakers(m, n, &active).map_err(|e| e.to_string())?;
        let kwid = init_oracle_keywords(m, n, &[n - 1]).map_err(|e| e.to_string())?;
        for init in [spid, kwid] {
            let run = run_em_on_table(&inst.table, &init, &EmConfig::default()).map_err(|e| e.to_string())?;
            for k in 0..m {
                ensure((init.beta()[k] == 0.0) <= (run.state.beta()[k] == 0.0), || "a zero beta became non-zero".into())?;
                for l in 0..n {
                    ensure((init.delta(k, l) == 0.0) <= (run.state.delta(k, l) == 0.0), || {
                        "a zero delta became non-zero".into()
                    })?;
                }
            }
        }
        checks += 1;
    }

    let synth = SynthConfig {
        speakers: 4,
        keywords: 3,
        reps: 2,
        components: 3,
        seed: 8,
        ..Default::default()
    };
    let (corpus, _) = synth_feature_corpus(&synth).map_err(|e| e.to_string())?;
    let train = TrainConfig {
        n_components: 3,
        n_restarts: 1,
        ..Default::default()
    };
    for family in [Family::Gaussian, Family::StudentT] {
        let bank = train_bank(&corpus, family, &train).map_err(|e| e.to_string())?;
        for model in bank.models() {
            let w: f64 = model.components().iter().map(|c| c.weight).sum();
            ensure((w - 1.0).abs() <= 1e-12, || format!("{family} weights sum to {w}"))?;
        }
    }

    let bank = train_bank(&corpus, Family::Gaussian, &train).map_err(|e| e.to_string())?;
    let x = interleave_frames(&corpus.cell(0, 1)[1], &corpus.cell(2, 2)[1]).map_err(|e| e.to_string())?;
    let perm = [2usize, 3, 1, 0];
    let permuted = bank.permute_speakers(&perm).map_err(|e| e.to_string())?;
    let flat = |b: &spkw::models::ModelBank| spkw::lvem::init_flat(b.n_speakers(), b.n_keywords()).unwrap();
    let base = run_em(&x, &bank, &flat(&bank), &EmConfig::default()).map_err(|e| e.to_string())?;
    let moved = run_em(&x, &permuted, &flat(&permuted), &EmConfig::default()).map_err(|e| e.to_string())?;
    for (i, &p) in perm.iter().enumerate() {
        ensure((moved.state.beta()[i] - base.state.beta()[p]).abs() <= 1e-9, || "beta not equivariant".into())?;
        for l in 0..bank.n_keywords() {
            ensure((moved.state.delta(i, l) - base.state.delta(p, l)).abs() <= 1e-9, || "delta not equivariant".into())?;
        }
    }
    let policy = DecodePolicy::KnownCount(2);
    let d0 = decode(&compute_jpm(&base.state), &base.state, policy).map_err(|e| e.to_string())?;
    let d1 = decode(&compute_jpm(&moved.state), &moved.state, policy).map_err(|e| e.to_string())?;
    let mut mapped: Vec<(usize, usize)> = d1.pairs.iter().map(|p| (perm[p.speaker], p.keyword)).collect();
    mapped.sort_unstable();
    let original: Vec<(usize, usize)> = d0.pairs.iter().map(|p| (p.speaker, p.keyword)).collect();
    ensure(mapped == original, || format!("decoded {original:?} vs permuted {mapped:?}"))?;
    ensure(original == vec![(0, 1), (2, 2)], || format!("pipeline decoded {original:?}"))?;

    Ok(format!(
        "{checks} random instances: simplex sums, marginals, JPM rows, zero preservation, one keyword per speaker; \
         trained weights; permutation equivariance with decoded {original:?}"
    ))
}

fn criterion_6() -> Outcome {
    let cfg = MfccConfig::default();
    ensure(cfg.output_dim() == 38, || format!("default dim {}", cfg.output_dim()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let second = AudioSignal::new((0..16000).map(|_| rng.random_range(-0.3..0.3)).collect(), 16000).unwrap();
    let feats = compute_features(&second, &cfg).map_err(|e| e.to_string())?;
    ensure((feats.dim(), feats.frames()) == (38, 99), || format!("1 s gives {}x{}", feats.dim(), feats.frames()))?;
    for n in 0..5000usize {
        let got = frame_count(n, &cfg, 16000).ok();
        let want = (n >= 320).then(|| 1 + (n - 320) / 160);
        ensure(got == want, || format!("frame_count({n}) = {got:?}, expected {want:?}"))?;
    }

    let nu = 1e6;
    let mut worst = 0.0f64;
    for (mean, var) in [(0.0, 1.0), (1.5, 0.25), (-2.0, 4.0)] {
        let sd: f64 = f64::sqrt(var);
        let g = MixtureModel::new(Family::Gaussian, vec![MixtureComponent::gaussian(1.0, vec![mean], vec![var])]).unwrap();
        let t = MixtureModel::new(
            Family::StudentT,
            vec![MixtureComponent::student_t(1.0, vec![mean], vec![var * (nu - 2.0) / nu], nu)],
        )
        .unwrap();
        for i in -300..=300 {
            let x = mean + sd * i as f64 / 100.0;
            let d = (t.log_pdf(&[x]).unwrap() - g.log_pdf(&[x]).unwrap()).abs();
            worst = worst.max(d);
        }
    }
    let (mean3, var3) = (vec![0.5, -1.0, 2.0], vec![1.0, 0.5, 2.0]);
    let g3 = MixtureModel::new(Family::Gaussian, vec![MixtureComponent::gaussian(1.0, mean3.clone(), var3.clone())]).unwrap();
    let scaled: Vec<f64> = var3.iter().map(|v| v * (nu - 2.0) / nu).collect();
    let t3 = MixtureModel::new(Family::StudentT, vec![MixtureComponent::student_t(1.0, mean3.clone(), scaled, nu)]).unwrap();
    for axis in 0..3 {
        for i in -300..=300 {
            let mut x = mean3.clone();
            x[axis] += var3[axis].sqrt() * i as f64 / 100.0;
            worst = worst.max((t3.log_pdf(&x).unwrap() - g3.log_pdf(&x).unwrap()).abs());
        }
    }
    ensure(worst <= 1e-5, || format!("t vs Gaussian differ by {worst:e}"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let utt = synth_waveform_corpus(&SynthConfig {
        speakers: 1,
        keywords: 1,
        reps: 1,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let audio = &utt.cell(0, 0)[0];
    let (p1, p2) = (dir.path().join("a.lvf"), dir.path().join("b.lvf"));
    write_feature_file(&p1, &compute_features(audio, &cfg).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    write_feature_file(&p2, &compute_features(audio, &cfg).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let (b1, b2) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    ensure(b1 == b2, || "feature files differ across reruns".into())?;
    ensure(read_feature_file(&p1).is_ok(), || "feature file does not parse".into())?;
    Ok(format!(
        "D=38, 1 s -> 99 frames, frame_count exact for n < 5000, |t - Gaussian| <= {worst:.1e} at nu=1e6 for D=1 and D=3, {} identical bytes",
        b1.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 6] = [
        ("EM correctness suite", criterion_1),
        ("generative recovery", criterion_2),
        ("ordering properties", criterion_3),
        ("combinatorics and protocol", criterion_4),
        ("invariant suite", criterion_5),
        ("front-end checks", criterion_6),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {} PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
