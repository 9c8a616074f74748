//! Experiment harness CLI: run trial matrices, build reports, render single
//! utterances, calibrate the prototype bank, and benchmark the optimizer.

use anyhow::{anyhow, Context};
use babblekit::artic::ArticulatorySpace;
use babblekit::config::ExperimentConfig;
use babblekit::harness::{self, read_records, TrialRecord};
use babblekit::percept::{CalibrationConfig, MelConfig, PrototypeBank};
use babblekit::phones::{PhoneKind, PhoneSet};
use babblekit::tam::{generate_trajectory, GlottalFree, SegmentPlan, SlotRole, UtteranceSpec};
use babblekit::tpe::bench;
use babblekit::vtsynth::{synthesize, write_wav, GlottalSource};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "babblekit", version, about = "Articulatory babbling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Experiment config file; the built-in default config when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the worker count (0 = auto).
    #[arg(long)]
    workers: Option<usize>,
    /// Override the deterministic grid subsampling factor in (0, 1].
    #[arg(long)]
    scale: Option<f64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment plan and persist trial records.
    Run(ConfigArgs),
    /// Aggregate persisted records into tables.
    Report {
        #[command(subcommand)]
        what: ReportCommand,
    },
    /// Render one utterance description to a WAV file.
    Synth {
        /// Utterance description (JSON; see the README).
        #[arg(long)]
        targets: PathBuf,
        /// Output WAV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Aspiration noise seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render the prototype bank from the canonical articulations.
    Calibrate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Bank directory to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Optimizer benchmarks.
    Bench {
        #[command(subcommand)]
        what: BenchCommand,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Identification rates (%) per condition, Table-style TSV.
    IdTable {
        /// Record files (merged).
        #[arg(long, required = true, num_args = 1..)]
        records: Vec<PathBuf>,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-dimension consonant-vowel distance comparison across the
    /// coarticulation conditions.
    Coart {
        #[arg(long, required = true, num_args = 1..)]
        records: Vec<PathBuf>,
        /// Which consonant to compare against the vowel: c1 or c2.
        #[arg(long, default_value = "c1")]
        pair: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Sphere-function dominance benchmark against random search.
    Tpe {
        #[arg(long, default_value_t = 6)]
        dim: usize,
        #[arg(long, default_value_t = 500)]
        evals: usize,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
    },
}

/// Exit 1 for configuration problems, 2 for runtime failures.
struct CliError {
    code: u8,
    error: anyhow::Error,
}

fn config_err(error: anyhow::Error) -> CliError {
    CliError { code: 1, error }
}

fn runtime_err(error: anyhow::Error) -> CliError {
    CliError { code: 2, error }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage/parse problems exit 1; --help and --version exit 0.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<(ExperimentConfig, PathBuf), CliError> {
    match path {
        Some(p) => {
            let cfg = ExperimentConfig::from_path(p)
                .with_context(|| format!("loading config {}", p.display()))
                .map_err(config_err)?;
            let base = p.parent().unwrap_or(Path::new(".")).to_path_buf();
            Ok((cfg, base))
        }
        None => Ok((ExperimentConfig::builtin(), PathBuf::from("."))),
    }
}

fn apply_overrides(cfg: &mut ExperimentConfig, args: &ConfigArgs) {
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    if let Some(scale) = args.scale {
        cfg.scale = scale;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.to_string_lossy().into_owned();
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let (mut cfg, base) = load_config(&args.config)?;
            apply_overrides(&mut cfg, &args);
            cfg.validate().map_err(|e| config_err(e.into()))?;
            let output = harness::run_experiment(&cfg, &base).map_err(|e| runtime_err(e.into()))?;
            println!(
                "completed {} trials ({} resumed), records at {}",
                output.completed_jobs,
                output.skipped_jobs,
                output.records_path.display()
            );
            if let Some(p) = output.run_log_path {
                println!("run log at {}", p.display());
            }
            let table = harness::identification_table(&output.records)
                .map_err(|e| runtime_err(e.into()))?;
            print!("{}", table.to_tsv(&output.config_hash));
            Ok(())
        }
        Command::Report { what } => report(what),
        Command::Synth {
            targets,
            out,
            config,
            seed,
        } => {
            let (cfg, base) = load_config(&config)?;
            let assets = cfg.resolve_assets(&base).map_err(|e| config_err(e.into()))?;
            synth_command(&assets.space, &assets.phones, &targets, &out, seed, cfg.audio_rate_hz)
        }
        Command::Calibrate { config, out } => {
            let (cfg, base) = load_config(&config)?;
            let assets = cfg.resolve_assets(&base).map_err(|e| config_err(e.into()))?;
            let frontend = MelConfig {
                sample_rate: cfg.audio_rate_hz,
                ..MelConfig::default()
            };
            let cal = CalibrationConfig {
                consonant_duration_s: cfg.consonant_duration_s,
                vowel_duration_s: cfg.vowel_duration_s,
                control_rate_hz: cfg.control_rate_hz,
                ..CalibrationConfig::default()
            };
            let bank = PrototypeBank::calibrate(
                &assets.space,
                &assets.phones,
                &assets.inventory,
                &frontend,
                &cal,
            )
            .map_err(|e| runtime_err(e.into()))?;
            bank.save(&out).map_err(|e| runtime_err(e.into()))?;
            println!("bank with {} prototypes at {}", bank.len(), out.display());
            println!("content hash {}", bank.content_hash);
            Ok(())
        }
        Command::Bench { what } => match what {
            BenchCommand::Tpe { dim, evals, seeds } => {
                let tpe: Vec<f64> = (0..seeds).map(|s| bench::tpe_best(dim, evals, s)).collect();
                let rnd: Vec<f64> = (0..seeds).map(|s| bench::random_best(dim, evals, s)).collect();
                println!("seed\ttpe_best\trandom_best");
                for s in 0..seeds as usize {
                    println!("{s}\t{:.6}\t{:.6}", tpe[s], rnd[s]);
                }
                let (mt, mr) = (bench::median(tpe), bench::median(rnd));
                println!("median\t{mt:.6}\t{mr:.6}");
                println!("ratio\t{:.4}", mt / mr);
                Ok(())
            }
        },
    }
}

fn report(what: ReportCommand) -> Result<(), CliError> {
    match what {
        ReportCommand::IdTable { records, out } => {
            let (hash, recs) = read_record_files(&records)?;
            let table = harness::identification_table(&recs).map_err(|e| runtime_err(e.into()))?;
            emit(&table.to_tsv(&hash), &out)
        }
        ReportCommand::Coart {
            records,
            pair,
            config,
            out,
        } => {
            let pair = match pair.as_str() {
                "c1" => SlotRole::C1,
                "c2" => SlotRole::C2,
                other => {
                    return Err(config_err(anyhow!("pair must be c1 or c2, got `{other}`")))
                }
            };
            let (cfg, base) = load_config(&config)?;
            let assets = cfg.resolve_assets(&base).map_err(|e| config_err(e.into()))?;
            let (hash, recs) = read_record_files(&records)?;
            let report = harness::coart_report(&recs, pair, &assets.space)
                .map_err(|e| runtime_err(e.into()))?;
            emit(&report.to_csv(&hash), &out)
        }
    }
}

fn read_record_files(paths: &[PathBuf]) -> Result<(String, Vec<TrialRecord>), CliError> {
    let mut all = Vec::new();
    let mut hash = String::new();
    for p in paths {
        let (header, recs) = read_records(p)
            .with_context(|| format!("reading {}", p.display()))
            .map_err(runtime_err)?;
        if hash.is_empty() {
            hash = header.config_hash;
        } else if hash != header.config_hash {
            hash = format!("{hash}+{}", header.config_hash);
        }
        all.extend(recs);
    }
    Ok((hash, all))
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| runtime_err(e.into()))?;
            println!("wrote {}", p.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// The `synth --targets` document.
#[derive(Deserialize)]
struct UtteranceDoc {
    segments: Vec<SegmentDoc>,
    #[serde(default)]
    tau_supra: Option<f64>,
    #[serde(default)]
    tau_glottal: Option<f64>,
    #[serde(default)]
    chink_area: Option<f64>,
    #[serde(default)]
    relative_amplitude: Option<f64>,
}

#[derive(Deserialize)]
struct SegmentDoc {
    symbol: String,
    #[serde(default)]
    duration: Option<f64>,
    /// Raw dimension overrides on top of the symbol's canonical target.
    #[serde(default)]
    overrides: std::collections::BTreeMap<String, f64>,
}

fn synth_command(
    space: &ArticulatorySpace,
    phones: &PhoneSet,
    targets: &Path,
    out: &Path,
    seed: u64,
    audio_rate: f64,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(targets)
        .with_context(|| format!("reading {}", targets.display()))
        .map_err(config_err)?;
    let doc: UtteranceDoc = serde_json::from_str(&text)
        .context("parsing utterance description")
        .map_err(config_err)?;
    if doc.segments.is_empty() {
        return Err(config_err(anyhow!("utterance has no segments")));
    }

    let mut segments = Vec::new();
    let mut consonant_count = 0usize;
    for seg in &doc.segments {
        let phone = phones.get(&seg.symbol).map_err(|e| config_err(e.into()))?;
        let mut target = phones
            .target(space, &seg.symbol)
            .map_err(|e| config_err(e.into()))?;
        for (dim, &v) in &seg.overrides {
            target = target.with(space, dim, v).map_err(|e| config_err(e.into()))?;
        }
        let (role, duration) = match phone.kind {
            PhoneKind::Vowel => (SlotRole::V, seg.duration.unwrap_or(0.3)),
            PhoneKind::Consonant => {
                consonant_count += 1;
                let role = if consonant_count == 1 { SlotRole::C1 } else { SlotRole::C2 };
                (role, seg.duration.unwrap_or(0.12))
            }
        };
        segments.push(SegmentPlan {
            target,
            duration,
            class: phone.segment_class(),
            role,
        });
    }
    let c = &space.controls;
    let spec = UtteranceSpec {
        segments,
        tau_supra: doc.tau_supra.unwrap_or(c.tau_supra.neutral),
        tau_glottal: doc.tau_glottal.unwrap_or(c.tau_glottal.neutral),
        glottal: GlottalFree {
            chink_area: doc.chink_area.unwrap_or(c.chink_area.neutral),
            relative_amplitude: doc.relative_amplitude.unwrap_or(c.relative_amplitude.neutral),
        },
    };
    let traj = generate_trajectory(space, &spec, 1000.0).map_err(|e| runtime_err(e.into()))?;
    let glottal = GlottalSource {
        noise_seed: seed,
        ..GlottalSource::default()
    };
    let audio = synthesize(space, &traj, &glottal, audio_rate).map_err(|e| runtime_err(e.into()))?;
    write_wav(out, &audio).map_err(|e| runtime_err(e.into()))?;
    println!(
        "wrote {} ({:.2} s at {} Hz)",
        out.display(),
        audio.duration(),
        audio.sample_rate
    );
    Ok(())
}
