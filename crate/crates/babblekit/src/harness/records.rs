//! Trial records and their JSON Lines persistence.
//!
//! Record files start with one header object carrying the config content
//! hash; each following line is one record. Interrupted runs resume by
//! skipping keys already present.

use crate::artic::ArticulatorySpace;
use crate::error::{Error, Result};
use crate::explore::{StrategyKind, Syllable, TrialOutcome, TrialStatus};
use crate::percept::{identify, Inventory, Percept};
use crate::tam::{SlotRole, UtteranceSpec};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

/// First line of every output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileHeader {
    pub file: String,
    pub version: u32,
    pub config_hash: String,
}

/// Compact per-pass numbers kept in the record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PassSummary {
    pub best_loss: f64,
    pub synthesized: usize,
    pub gate_failures: usize,
    pub iterations: usize,
}

/// One finished trial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: String,
    pub syllable: Syllable,
    pub strategy: StrategyKind,
    pub coart: bool,
    pub trial_index: usize,
    pub seed: u64,
    pub status: TrialStatus,
    pub passes: Vec<PassSummary>,
    pub final_spec: Option<UtteranceSpec>,
    pub final_percept: Option<Percept>,
    pub identified: Option<(String, String, String)>,
    /// Per free dimension |u~_C1 - u~_V| of the final targets.
    pub c1_v_distance: Option<Vec<f64>>,
    pub c2_v_distance: Option<Vec<f64>>,
}

impl TrialRecord {
    pub fn trial_id_for(syllable: &Syllable, strategy: StrategyKind, coart: bool, trial_index: usize) -> String {
        format!(
            "{}.{}.{}/{}/{}/{}",
            syllable.c1,
            syllable.c2,
            syllable.v,
            strategy.label(),
            if coart { "coart" } else { "plain" },
            trial_index
        )
    }

    pub fn from_outcome(
        outcome: &TrialOutcome,
        trial_index: usize,
        space: &ArticulatorySpace,
        inventory: &Inventory,
    ) -> Result<TrialRecord> {
        let passes = outcome
            .passes
            .iter()
            .map(|p| PassSummary {
                best_loss: p.best_loss,
                synthesized: p.synthesized,
                gate_failures: p.gate_failures,
                iterations: p.evaluations.len(),
            })
            .collect();

        let mut record = TrialRecord {
            trial_id: Self::trial_id_for(
                &outcome.syllable,
                outcome.strategy.kind,
                outcome.strategy.coart_enabled,
                trial_index,
            ),
            syllable: outcome.syllable.clone(),
            strategy: outcome.strategy.kind,
            coart: outcome.strategy.coart_enabled,
            trial_index,
            seed: outcome.seed,
            status: outcome.status.clone(),
            passes,
            final_spec: None,
            final_percept: None,
            identified: None,
            c1_v_distance: None,
            c2_v_distance: None,
        };

        if let Some(last) = outcome.final_pass() {
            let spec = last.best_spec.clone();
            let percept = last.best_percept.clone();
            let (c1, c2, v) = identify(&percept, inventory);
            record.identified = Some((c1.to_string(), c2.to_string(), v.to_string()));

            let target_of = |role: SlotRole| {
                spec.segments
                    .iter()
                    .find(|s| s.role == role)
                    .map(|s| s.target.clone())
            };
            if let (Some(c1t), Some(vt)) = (target_of(SlotRole::C1), target_of(SlotRole::V)) {
                record.c1_v_distance = Some(space.per_dimension_distance(&c1t, &vt)?);
            }
            if let (Some(c2t), Some(vt)) = (target_of(SlotRole::C2), target_of(SlotRole::V)) {
                record.c2_v_distance = Some(space.per_dimension_distance(&c2t, &vt)?);
            }
            record.final_spec = Some(spec);
            record.final_percept = Some(percept);
        }
        Ok(record)
    }

    /// (vowel, onset, syllable) correctness against the goal. Failed trials
    /// count as incorrect everywhere.
    pub fn correct(&self) -> (bool, bool, bool) {
        match &self.identified {
            None => (false, false, false),
            Some((c1, c2, v)) => {
                let vowel = *v == self.syllable.v;
                let onset = *c1 == self.syllable.c1 && *c2 == self.syllable.c2;
                (vowel, onset, vowel && onset)
            }
        }
    }
}

/// One evaluation line of the optional run log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunLogLine {
    pub trial_id: String,
    pub pass: usize,
    pub iter: usize,
    pub gated: bool,
    pub loss: f64,
    pub d_a: f64,
    pub d_c1: Option<f64>,
    pub d_c2: Option<f64>,
    pub d_v: Option<f64>,
    pub params: Vec<f64>,
}

/// Appending JSONL writer that stamps the header on new files.
pub struct JsonlWriter {
    file: std::fs::File,
}

impl JsonlWriter {
    /// Opens (or creates) `path`. A new file gets the header line; an
    /// existing one must carry the same config hash.
    pub fn open(path: &Path, kind: &str, config_hash: &str) -> Result<JsonlWriter> {
        if path.exists() {
            let header = read_header(path)?;
            if header.config_hash != config_hash {
                return Err(Error::InvalidConfig(format!(
                    "{}: existing file has config hash {}, current config is {}",
                    path.display(),
                    header.config_hash,
                    config_hash
                )));
            }
            let file = std::fs::OpenOptions::new().append(true).open(path)?;
            Ok(JsonlWriter { file })
        } else {
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            let mut file = std::fs::File::create(path)?;
            let header = FileHeader {
                file: kind.to_string(),
                version: 1,
                config_hash: config_hash.to_string(),
            };
            writeln!(file, "{}", serde_json::to_string(&header)?)?;
            Ok(JsonlWriter { file })
        }
    }

    pub fn write<T: Serialize>(&mut self, value: &T) -> Result<()> {
        writeln!(self.file, "{}", serde_json::to_string(value)?)?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.file.flush()?;
        Ok(())
    }
}

pub fn read_header(path: &Path) -> Result<FileHeader> {
    let file = std::fs::File::open(path)?;
    let mut lines = std::io::BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::InvalidSpec(format!("{}: empty file", path.display())))??;
    Ok(serde_json::from_str(&first)?)
}

/// Reads a record file: header plus all records.
pub fn read_records(path: &Path) -> Result<(FileHeader, Vec<TrialRecord>)> {
    let file = std::fs::File::open(path)?;
    let mut lines = std::io::BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::InvalidSpec(format!("{}: empty file", path.display())))??;
    let header: FileHeader = serde_json::from_str(&first)?;
    let mut records = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok((header, records))
}
