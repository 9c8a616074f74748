//! Experiment orchestration: the trial matrix, a bounded worker pool, and
//! incremental record persistence with resume.

use super::records::{JsonlWriter, RunLogLine, TrialRecord};
use crate::config::{Assets, BackendKind, ExperimentConfig};
use crate::error::{Error, Result};
use crate::explore::{
    run_strategy, PerceptBackend, PipelineEvaluator, StrategySpec, Syllable, TrialOutcome,
};
use crate::objectives::ObjectiveConfig;
use crate::percept::{OracleConfig, PrototypeBank};
use crate::tpe::TpeConfig;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};

/// One planned trial.
#[derive(Debug, Clone)]
pub struct TrialJob {
    pub syllable: Syllable,
    pub strategy: StrategySpec,
    pub trial_index: usize,
    pub seed: u64,
}

/// Derives the stable per-trial seed from the base seed and the trial key.
pub fn trial_seed(base_seed: u64, syllable: &Syllable, trial_index: usize, strategy: &StrategySpec) -> u64 {
    let key = format!(
        "{base_seed}|{}|{}|{}|{trial_index}|{}|{}",
        syllable.c1,
        syllable.c2,
        syllable.v,
        strategy.kind.label(),
        strategy.coart_enabled
    );
    let digest = Sha256::digest(key.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// The full trial matrix in plan order: grid x trial index x strategy.
pub fn plan_jobs(cfg: &ExperimentConfig, assets: &Assets) -> Vec<TrialJob> {
    let mut jobs = Vec::new();
    for syllable in &assets.syllables {
        for trial_index in 0..cfg.trials_per_syllable {
            for &kind in &cfg.strategies {
                let strategy = StrategySpec {
                    kind,
                    total_budget: cfg.total_budget,
                    coart_enabled: cfg.coart_objective,
                };
                jobs.push(TrialJob {
                    syllable: syllable.clone(),
                    strategy,
                    trial_index,
                    seed: trial_seed(cfg.base_seed, syllable, trial_index, &strategy),
                });
            }
        }
    }
    jobs
}

fn objective_config(cfg: &ExperimentConfig) -> ObjectiveConfig {
    ObjectiveConfig {
        vowel_min_area_cm2: cfg.vowel_min_area_cm2,
        w_aud: cfg.w_aud,
        w_art: cfg.w_art,
        penalty_factor: cfg.penalty_factor,
    }
}

fn make_backend(
    cfg: &ExperimentConfig,
    bank: Option<&Arc<PrototypeBank>>,
    base_dir: &Path,
    seed: u64,
) -> Result<PerceptBackend> {
    match cfg.percept_backend {
        BackendKind::Oracle => Ok(PerceptBackend::Oracle(OracleConfig::default())),
        BackendKind::MelPrototype => Ok(PerceptBackend::MelPrototype {
            bank: bank.expect("bank loaded for mel backend").clone(),
            temperature: cfg.temperature,
            audio_rate: cfg.audio_rate_hz,
            noise_seed: seed ^ 0xA5A5_A5A5,
        }),
        BackendKind::External => {
            let cmd = cfg
                .external_cmd
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("external backend needs external_cmd".into()))?;
            if cmd.is_empty() {
                return Err(Error::InvalidConfig("external_cmd is empty".into()));
            }
            let args: Vec<String> = cmd[1..]
                .iter()
                .map(|a| {
                    // Relative paths in the command resolve against the config.
                    if a.starts_with("./") || a.starts_with("../") {
                        base_dir.join(a).to_string_lossy().into_owned()
                    } else {
                        a.clone()
                    }
                })
                .collect();
            let synth = crate::vtsynth::ExternalSynth::spawn(&cmd[0], &args)?;
            Ok(PerceptBackend::External {
                synth,
                bank: bank.expect("bank loaded for external backend").clone(),
                temperature: cfg.temperature,
                audio_rate: cfg.audio_rate_hz,
            })
        }
    }
}

fn run_one(
    cfg: &ExperimentConfig,
    assets: &Assets,
    bank: Option<&Arc<PrototypeBank>>,
    base_dir: &Path,
    job: &TrialJob,
) -> Result<(TrialRecord, Vec<RunLogLine>)> {
    let ctx = crate::explore::TrialContext {
        space: &assets.space,
        phones: &assets.phones,
        inventory: &assets.inventory,
        consonant_duration: cfg.consonant_duration_s,
        vowel_duration: cfg.vowel_duration_s,
        tpe: TpeConfig {
            n_startup: cfg.n_startup,
            n_candidates: cfg.n_candidates,
            seed: 0, // per-pass seeds derive from the trial seed
        },
        fail_cap_factor: cfg.fail_cap_factor,
    };
    let backend = make_backend(cfg, bank, base_dir, job.seed)?;
    let mut evaluator = PipelineEvaluator::new(
        &assets.space,
        &assets.phones,
        &assets.inventory,
        objective_config(cfg),
        cfg.control_rate_hz,
        backend,
    )?;
    let outcome: TrialOutcome =
        run_strategy(&ctx, &job.syllable, &job.strategy, job.seed, &mut evaluator)?;
    let record =
        TrialRecord::from_outcome(&outcome, job.trial_index, &assets.space, &assets.inventory)?;
    let mut log_lines = Vec::new();
    if cfg.log_evaluations {
        for (pi, pass) in outcome.passes.iter().enumerate() {
            for e in &pass.evaluations {
                log_lines.push(RunLogLine {
                    trial_id: record.trial_id.clone(),
                    pass: pi,
                    iter: e.iter,
                    gated: e.loss.gated,
                    loss: e.loss.total,
                    d_a: e.loss.d_a,
                    d_c1: e.loss.d_c1,
                    d_c2: e.loss.d_c2,
                    d_v: e.loss.d_v,
                    params: e.point.clone(),
                });
            }
        }
    }
    Ok((record, log_lines))
}

/// Result of a run: the records (existing plus new, in file order) and the
/// paths written.
pub struct RunOutput {
    pub records: Vec<TrialRecord>,
    pub records_path: PathBuf,
    pub run_log_path: Option<PathBuf>,
    pub config_hash: String,
    pub completed_jobs: usize,
    pub skipped_jobs: usize,
}

/// Runs the experiment plan over a bounded worker pool. Records persist one
/// per line in plan order; rerunning with the same seed reproduces the file
/// byte for byte, and interrupted runs resume by skipping completed trial
/// keys.
pub fn run_experiment(cfg: &ExperimentConfig, base_dir: &Path) -> Result<RunOutput> {
    cfg.validate()?;
    let assets = cfg.resolve_assets(base_dir)?;
    let config_hash = cfg.content_hash();

    let bank = match cfg.percept_backend {
        BackendKind::Oracle => None,
        _ => {
            let dir = cfg.bank_dir.as_ref().expect("validated");
            let dir = if Path::new(dir).is_absolute() {
                PathBuf::from(dir)
            } else {
                base_dir.join(dir)
            };
            Some(Arc::new(PrototypeBank::load(&dir)?))
        }
    };

    let out_dir = cfg.output_dir(base_dir);
    std::fs::create_dir_all(&out_dir)?;
    let records_path = out_dir.join("records.jsonl");

    // Resume: anything already recorded is skipped.
    let mut existing: Vec<TrialRecord> = Vec::new();
    if records_path.exists() {
        let (_, recs) = super::records::read_records(&records_path)?;
        existing = recs;
    }
    let done: std::collections::HashSet<String> =
        existing.iter().map(|r| r.trial_id.clone()).collect();

    let all_jobs = plan_jobs(cfg, &assets);
    let jobs: Vec<TrialJob> = all_jobs
        .into_iter()
        .filter(|j| {
            !done.contains(&TrialRecord::trial_id_for(
                &j.syllable,
                j.strategy.kind,
                j.strategy.coart_enabled,
                j.trial_index,
            ))
        })
        .collect();
    let skipped_jobs = done.len();

    let mut writer = JsonlWriter::open(&records_path, "trial_records", &config_hash)?;
    let run_log_path = cfg.log_evaluations.then(|| out_dir.join("run_log.jsonl"));
    let mut log_writer = match &run_log_path {
        Some(p) => Some(JsonlWriter::open(p, "run_log", &config_hash)?),
        None => None,
    };

    let workers = if cfg.workers > 0 {
        cfg.workers
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
    .min(jobs.len().max(1));

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Result<(TrialRecord, Vec<RunLogLine>)>)>();
    let mut new_records: Vec<TrialRecord> = Vec::with_capacity(jobs.len());

    std::thread::scope(|scope| -> Result<()> {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let jobs = &jobs;
            let assets = &assets;
            let bank = bank.as_ref();
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let result = run_one(cfg, assets, bank, base_dir, &jobs[i]);
                if tx.send((i, result)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        // Write in plan order so reruns are byte-identical.
        let mut pending: BTreeMap<usize, (TrialRecord, Vec<RunLogLine>)> = BTreeMap::new();
        let mut want = 0usize;
        let mut first_error: Option<Error> = None;
        for (i, result) in rx {
            match result {
                Ok(done) => {
                    pending.insert(i, done);
                }
                Err(e) => {
                    if first_error.is_none() {
                        first_error = Some(e);
                    }
                    // Stop handing out further work.
                    next.store(jobs.len(), Ordering::Relaxed);
                }
            }
            while let Some((record, log_lines)) = pending.remove(&want) {
                writer.write(&record)?;
                if let Some(w) = log_writer.as_mut() {
                    for line in &log_lines {
                        w.write(line)?;
                    }
                }
                new_records.push(record);
                want += 1;
            }
        }
        writer.flush()?;
        if let Some(w) = log_writer.as_mut() {
            w.flush()?;
        }
        match first_error {
            Some(e) => Err(e),
            None => Ok(()),
        }
    })?;

    let completed_jobs = new_records.len();
    existing.extend(new_records);
    Ok(RunOutput {
        records: existing,
        records_path,
        run_log_path,
        config_hash,
        completed_jobs,
        skipped_jobs,
    })
}
