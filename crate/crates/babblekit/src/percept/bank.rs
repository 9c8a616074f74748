//! Prototype bank: per (slot, symbol) reference mel segments rendered from
//! the canonical articulations, persisted as a directory of binary matrices
//! plus a manifest.
//!
//! Calibration renders each symbol in a carrier context appropriate for its
//! slot (vowels alone, first consonants before the carrier vowel, intermediate
//! consonants between the carrier consonant and vowel; the absence entry is
//! the carrier context without the symbol), so encoding compares like with
//! like.

use super::mel::{mel_spectrogram, MelConfig};
use super::Inventory;
use crate::artic::ArticulatorySpace;
use crate::error::{Error, Result};
use crate::phones::{PhoneKind, PhoneSet};
use crate::tam::{
    generate_trajectory, GlottalFree, SegmentPlan, SlotRole, UtteranceSpec,
};
use crate::vtsynth::{synthesize, GlottalSource};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

const MATRIX_MAGIC: &[u8; 8] = b"BKMEL1\0\0";

/// Durations and synthesis settings used during calibration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub consonant_duration_s: f64,
    pub vowel_duration_s: f64,
    pub control_rate_hz: f64,
    pub noise_seed: u64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            consonant_duration_s: 0.12,
            vowel_duration_s: 0.30,
            control_rate_hz: 1000.0,
            noise_seed: 12345,
        }
    }
}

fn slot_tag(role: SlotRole) -> &'static str {
    match role {
        SlotRole::C1 => "c1",
        SlotRole::C2 => "c2",
        SlotRole::V => "v",
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    slot: String,
    symbol: String,
    file: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    inventory: Inventory,
    frontend: MelConfig,
    entries: Vec<ManifestEntry>,
    content_hash: String,
}

/// The loaded bank.
#[derive(Debug, Clone)]
pub struct PrototypeBank {
    pub inventory: Inventory,
    pub config: MelConfig,
    pub content_hash: String,
    entries: BTreeMap<(&'static str, String), Vec<Vec<f64>>>,
}

impl PrototypeBank {
    /// The stored mel matrix for a (slot, symbol) pair. Panics on unknown
    /// pairs; banks always cover the full inventory.
    pub fn matrix(&self, role: SlotRole, symbol: &str) -> &Vec<Vec<f64>> {
        self.entries
            .get(&(slot_tag(role), symbol.to_string()))
            .unwrap_or_else(|| panic!("bank missing ({:?}, {symbol})", role))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Renders the full bank with the built-in synthesizer.
    pub fn calibrate(
        space: &ArticulatorySpace,
        phones: &PhoneSet,
        inventory: &Inventory,
        frontend: &MelConfig,
        cal: &CalibrationConfig,
    ) -> Result<PrototypeBank> {
        let mut entries = BTreeMap::new();
        for symbol in &inventory.vowels {
            let mel = render_prototype(space, phones, symbol, SlotRole::V, frontend, cal)?;
            entries.insert((slot_tag(SlotRole::V), symbol.clone()), mel);
        }
        for symbol in &inventory.consonants {
            for role in [SlotRole::C1, SlotRole::C2] {
                let mel = render_prototype(space, phones, symbol, role, frontend, cal)?;
                entries.insert((slot_tag(role), symbol.clone()), mel);
            }
        }
        let mut bank = PrototypeBank {
            inventory: inventory.clone(),
            config: frontend.clone(),
            content_hash: String::new(),
            entries,
        };
        bank.content_hash = bank.compute_hash()?;
        Ok(bank)
    }

    fn compute_hash(&self) -> Result<String> {
        let mut h = Sha256::new();
        h.update(serde_json::to_string(&self.inventory)?);
        h.update(serde_json::to_string(&self.config)?);
        for ((slot, symbol), m) in &self.entries {
            h.update(slot.as_bytes());
            h.update(symbol.as_bytes());
            for row in m {
                for v in row {
                    h.update(v.to_le_bytes());
                }
            }
        }
        Ok(hex(&h.finalize()))
    }

    /// Persists the bank as a directory: one matrix file per entry plus
    /// `manifest.json`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut manifest = Manifest {
            inventory: self.inventory.clone(),
            frontend: self.config.clone(),
            entries: Vec::new(),
            content_hash: self.content_hash.clone(),
        };
        for ((slot, symbol), m) in &self.entries {
            let index = if *slot == "v" {
                self.inventory.vowel_index(symbol)?
            } else {
                self.inventory.consonant_index(symbol)?
            };
            let file = format!("{slot}_{index:02}.mat");
            write_matrix(&dir.join(&file), m)?;
            manifest.entries.push(ManifestEntry {
                slot: slot.to_string(),
                symbol: symbol.clone(),
                file,
                rows: m.len(),
                cols: m.first().map_or(0, Vec::len),
            });
        }
        let mut f = std::fs::File::create(dir.join("manifest.json"))?;
        f.write_all(serde_json::to_string_pretty(&manifest)?.as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }

    /// Loads a bank directory and verifies its content hash and coverage.
    pub fn load(dir: &Path) -> Result<PrototypeBank> {
        let text = std::fs::read_to_string(dir.join("manifest.json"))?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        manifest.inventory.validate()?;
        let mut entries = BTreeMap::new();
        for e in &manifest.entries {
            let slot = match e.slot.as_str() {
                "c1" => "c1",
                "c2" => "c2",
                "v" => "v",
                other => return Err(Error::Bank(format!("unknown slot `{other}`"))),
            };
            let m = read_matrix(&dir.join(&e.file))?;
            if m.len() != e.rows || m.first().map_or(0, Vec::len) != e.cols {
                return Err(Error::Bank(format!("{}: shape mismatch", e.file)));
            }
            entries.insert((slot, e.symbol.clone()), m);
        }
        let bank = PrototypeBank {
            inventory: manifest.inventory,
            config: manifest.frontend,
            content_hash: manifest.content_hash.clone(),
            entries,
        };
        for symbol in &bank.inventory.vowels {
            if !bank.entries.contains_key(&("v", symbol.clone())) {
                return Err(Error::Bank(format!("missing vowel prototype `{symbol}`")));
            }
        }
        for symbol in &bank.inventory.consonants {
            for slot in ["c1", "c2"] {
                if !bank.entries.contains_key(&(slot, symbol.clone())) {
                    return Err(Error::Bank(format!("missing {slot} prototype `{symbol}`")));
                }
            }
        }
        let hash = bank.compute_hash()?;
        if hash != manifest.content_hash {
            return Err(Error::Bank(format!(
                "content hash mismatch: manifest {} vs computed {hash}",
                manifest.content_hash
            )));
        }
        Ok(bank)
    }

    /// The canonical calibration audio for a (slot, symbol) pair; exposed so
    /// self-consistency can be checked end to end.
    pub fn render_audio(
        space: &ArticulatorySpace,
        phones: &PhoneSet,
        symbol: &str,
        role: SlotRole,
        frontend: &MelConfig,
        cal: &CalibrationConfig,
    ) -> Result<crate::vtsynth::AudioBuffer> {
        let spec = prototype_spec(space, phones, symbol, role, cal)?;
        let traj = generate_trajectory(space, &spec, cal.control_rate_hz)?;
        let glottal = GlottalSource {
            noise_seed: cal.noise_seed,
            ..GlottalSource::default()
        };
        synthesize(space, &traj, &glottal, frontend.sample_rate)
    }
}

fn render_prototype(
    space: &ArticulatorySpace,
    phones: &PhoneSet,
    symbol: &str,
    role: SlotRole,
    frontend: &MelConfig,
    cal: &CalibrationConfig,
) -> Result<Vec<Vec<f64>>> {
    let audio = PrototypeBank::render_audio(space, phones, symbol, role, frontend, cal)?;
    Ok(mel_spectrogram(&audio, frontend)?.frames)
}

/// The carrier utterance a symbol is calibrated in.
fn prototype_spec(
    space: &ArticulatorySpace,
    phones: &PhoneSet,
    symbol: &str,
    role: SlotRole,
    cal: &CalibrationConfig,
) -> Result<UtteranceSpec> {
    let plan = |sym: &str, role: SlotRole| -> Result<SegmentPlan> {
        let phone = phones.get(sym)?;
        let duration = match phone.kind {
            PhoneKind::Vowel => cal.vowel_duration_s,
            PhoneKind::Consonant => cal.consonant_duration_s,
        };
        Ok(SegmentPlan {
            target: phones.target(space, sym)?,
            duration,
            class: phone.segment_class(),
            role,
        })
    };

    let want_kind = if role == SlotRole::V {
        PhoneKind::Vowel
    } else {
        PhoneKind::Consonant
    };
    if phones.get(symbol)?.kind != want_kind {
        return Err(Error::Bank(format!("`{symbol}` does not fit slot {role:?}")));
    }

    let segments = match (role, symbol == super::ABSENCE) {
        (SlotRole::V, _) => vec![plan(symbol, SlotRole::V)?],
        (SlotRole::C1, false) => vec![
            plan(symbol, SlotRole::C1)?,
            plan(&phones.carrier_vowel, SlotRole::V)?,
        ],
        (SlotRole::C1, true) => vec![plan(&phones.carrier_vowel, SlotRole::V)?],
        (SlotRole::C2, false) => vec![
            plan(&phones.carrier_c1, SlotRole::C1)?,
            plan(symbol, SlotRole::C2)?,
            plan(&phones.carrier_vowel, SlotRole::V)?,
        ],
        (SlotRole::C2, true) => vec![
            plan(&phones.carrier_c1, SlotRole::C1)?,
            plan(&phones.carrier_vowel, SlotRole::V)?,
        ],
    };
    Ok(UtteranceSpec {
        segments,
        tau_supra: space.controls.tau_supra.neutral,
        tau_glottal: space.controls.tau_glottal.neutral,
        glottal: GlottalFree {
            chink_area: space.controls.chink_area.neutral,
            relative_amplitude: space.controls.relative_amplitude.neutral,
        },
    })
}

fn write_matrix(path: &Path, m: &[Vec<f64>]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(MATRIX_MAGIC)?;
    f.write_all(&(m.len() as u32).to_le_bytes())?;
    f.write_all(&(m.first().map_or(0, Vec::len) as u32).to_le_bytes())?;
    let mut bytes = Vec::new();
    for row in m {
        for v in row {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    f.write_all(&bytes)?;
    Ok(())
}

fn read_matrix(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[..8] != MATRIX_MAGIC {
        return Err(Error::Bank(format!("{}: bad matrix header", path.display())));
    }
    let rows = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    if bytes.len() != 16 + rows * cols * 8 {
        return Err(Error::Bank(format!("{}: truncated matrix", path.display())));
    }
    let mut m = Vec::with_capacity(rows);
    let mut pos = 16;
    for _ in 0..rows {
        let mut row = Vec::with_capacity(cols);
        for _ in 0..cols {
            row.push(f64::from_le_bytes(bytes[pos..pos + 8].try_into().unwrap()));
            pos += 8;
        }
        m.push(row);
    }
    Ok(m)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
