//! Experiment configuration: a JSON document with a canonical key order so
//! its content hash is reproducible. The hash is stamped into every output
//! file header.

use crate::artic::ArticulatorySpace;
use crate::error::{Error, Result};
use crate::explore::{StrategyKind, Syllable};
use crate::percept::Inventory;
use crate::phones::PhoneSet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Which perceptual mapping scores utterances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Oracle,
    MelPrototype,
    External,
}

/// The experiment definition. Field order is the canonical serialization
/// order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Asset documents: `"builtin"` or a path relative to the config file.
    pub space_file: String,
    pub inventory_file: String,
    pub phones_file: String,
    pub syllables_file: String,
    /// Syllable constraints: a grid entry runs only if all three symbols are
    /// in these sets.
    pub c1_set: Vec<String>,
    pub c2_set: Vec<String>,
    pub v_set: Vec<String>,
    pub strategies: Vec<StrategyKind>,
    pub total_budget: usize,
    pub trials_per_syllable: usize,
    pub coart_objective: bool,
    pub w_aud: f64,
    pub w_art: f64,
    pub penalty_factor: f64,
    pub vowel_min_area_cm2: f64,
    pub percept_backend: BackendKind,
    pub temperature: f64,
    pub consonant_duration_s: f64,
    pub vowel_duration_s: f64,
    pub control_rate_hz: f64,
    pub audio_rate_hz: f64,
    pub n_startup: usize,
    pub n_candidates: usize,
    pub fail_cap_factor: usize,
    pub base_seed: u64,
    /// Worker threads; 0 picks the available parallelism.
    pub workers: usize,
    /// Deterministic grid subsampling in (0, 1].
    pub scale: f64,
    /// Write the per-evaluation run log (large).
    pub log_evaluations: bool,
    pub out_dir: String,
    /// Prototype bank directory (required by the mel and external backends).
    pub bank_dir: Option<String>,
    /// External synthesizer command line (required by the external backend).
    pub external_cmd: Option<Vec<String>>,
}

impl ExperimentConfig {
    pub fn builtin() -> ExperimentConfig {
        serde_json::from_str(crate::data::EXPERIMENT_JSON).expect("builtin config is valid")
    }

    pub fn from_path(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_budget == 0 || self.trials_per_syllable == 0 {
            return Err(Error::InvalidConfig("budget and trials must be >= 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidConfig("no strategies listed".into()));
        }
        let max_passes = self
            .strategies
            .iter()
            .map(|s| s.pass_plan().len())
            .max()
            .unwrap_or(1);
        if self.total_budget < max_passes {
            return Err(Error::InvalidConfig(format!(
                "budget {} is below the pass count {max_passes}",
                self.total_budget
            )));
        }
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(Error::InvalidConfig("scale must be in (0, 1]".into()));
        }
        if self.percept_backend != BackendKind::Oracle && self.bank_dir.is_none() {
            return Err(Error::InvalidConfig(
                "mel_prototype and external backends need bank_dir".into(),
            ));
        }
        if self.percept_backend == BackendKind::External && self.external_cmd.is_none() {
            return Err(Error::InvalidConfig("external backend needs external_cmd".into()));
        }
        Ok(())
    }

    /// Canonical serialization: pretty JSON in declared field order with a
    /// trailing newline. Loading and re-saving any equivalent document
    /// produces exactly these bytes.
    pub fn canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical_json());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Loads the referenced asset documents. Relative paths resolve against
    /// `base_dir` (normally the config file's directory).
    pub fn resolve_assets(&self, base_dir: &Path) -> Result<Assets> {
        let read = |spec: &str, builtin: &str| -> Result<String> {
            if spec == "builtin" {
                Ok(builtin.to_string())
            } else {
                let p = resolve_path(base_dir, spec);
                Ok(std::fs::read_to_string(p)?)
            }
        };
        let space = ArticulatorySpace::from_json(&read(&self.space_file, crate::data::SPACE_JSON)?)?;
        let inventory = Inventory::from_json(&read(&self.inventory_file, crate::data::INVENTORY_JSON)?)?;
        let phones = PhoneSet::from_json(&read(&self.phones_file, crate::data::PHONES_JSON)?)?;
        phones.validate(&space)?;

        #[derive(Deserialize)]
        struct Grid {
            syllables: Vec<(String, String, String)>,
        }
        let grid: Grid =
            serde_json::from_str(&read(&self.syllables_file, crate::data::SYLLABLES_JSON)?)?;
        let mut syllables = Vec::new();
        for (c1, c2, v) in grid.syllables {
            inventory.consonant_index(&c1)?;
            inventory.consonant_index(&c2)?;
            inventory.vowel_index(&v)?;
            if self.c1_set.contains(&c1) && self.c2_set.contains(&c2) && self.v_set.contains(&v) {
                syllables.push(Syllable { c1, c2, v });
            }
        }
        if syllables.is_empty() {
            return Err(Error::InvalidConfig(
                "syllable constraints leave an empty grid".into(),
            ));
        }
        let syllables = subsample(syllables, self.scale);
        Ok(Assets {
            space,
            inventory,
            phones,
            syllables,
        })
    }

    /// Output directory: the config's `out_dir`, overridable by the
    /// `BABBLEKIT_OUT` environment variable.
    pub fn output_dir(&self, base_dir: &Path) -> PathBuf {
        match std::env::var("BABBLEKIT_OUT") {
            Ok(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => resolve_path(base_dir, &self.out_dir),
        }
    }
}

fn resolve_path(base: &Path, spec: &str) -> PathBuf {
    let p = Path::new(spec);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Deterministic grid subsampling: evenly spaced indices over the stable
/// grid order.
fn subsample(syllables: Vec<Syllable>, scale: f64) -> Vec<Syllable> {
    let keep = ((syllables.len() as f64 * scale).ceil() as usize)
        .max(1)
        .min(syllables.len());
    if keep == syllables.len() {
        return syllables;
    }
    (0..keep)
        .map(|i| syllables[i * syllables.len() / keep].clone())
        .collect()
}

/// Loaded asset bundle.
pub struct Assets {
    pub space: ArticulatorySpace,
    pub inventory: Inventory,
    pub phones: PhoneSet,
    pub syllables: Vec<Syllable>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_config_validates_and_resolves() {
        let cfg = ExperimentConfig::builtin();
        cfg.validate().unwrap();
        let assets = cfg.resolve_assets(Path::new(".")).unwrap();
        assert_eq!(assets.syllables.len(), 150);
        assert_eq!(assets.space.free_indices().len(), 16);
    }

    #[test]
    fn canonical_roundtrip_is_byte_stable() {
        let cfg = ExperimentConfig::builtin();
        let canon = cfg.canonical_json();
        let reparsed: ExperimentConfig = serde_json::from_str(&canon).unwrap();
        assert_eq!(reparsed.canonical_json(), canon);
        assert_eq!(reparsed.content_hash(), cfg.content_hash());
    }

    #[test]
    fn scale_subsamples_deterministically() {
        let mut cfg = ExperimentConfig::builtin();
        cfg.scale = 0.1;
        let a = cfg.resolve_assets(Path::new(".")).unwrap().syllables;
        let b = cfg.resolve_assets(Path::new(".")).unwrap().syllables;
        assert_eq!(a, b);
        assert_eq!(a.len(), 15);
    }

    #[test]
    fn constraint_sets_filter_the_grid() {
        let mut cfg = ExperimentConfig::builtin();
        cfg.c1_set = vec!["p".into(), "t".into(), "k".into()];
        cfg.c2_set = vec!["l".into(), "w".into()];
        cfg.v_set = vec!["aa".into(), "iy".into(), "uw".into()];
        let assets = cfg.resolve_assets(Path::new(".")).unwrap();
        for s in &assets.syllables {
            assert!(cfg.c1_set.contains(&s.c1));
            assert!(cfg.c2_set.contains(&s.c2));
            assert!(cfg.v_set.contains(&s.v));
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = ExperimentConfig::builtin();
        cfg.total_budget = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::builtin();
        cfg.percept_backend = BackendKind::MelPrototype;
        cfg.bank_dir = None;
        assert!(cfg.validate().is_err());
    }
}
