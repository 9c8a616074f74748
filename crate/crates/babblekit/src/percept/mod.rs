//! Auditory perceptual mapping: audio (or articulation, for the oracle) to a
//! 64-dimensional percept `[q_c1 | q_c2 | q_v]` over 24 + 24 + 16 symbols,
//! plus argmax identification.

pub mod bank;
pub mod dtw;
pub mod mel;
pub mod oracle;

pub use bank::{CalibrationConfig, PrototypeBank};
pub use mel::{mel_spectrogram, MelConfig, MelSpectrogram};
pub use oracle::{oracle_percept, OracleConfig};

use crate::error::{Error, Result};
use crate::vtsynth::AudioBuffer;
use serde::{Deserialize, Serialize};

/// The symbol inventory: 24 consonants (index 0 is the "absence" entry) and
/// 16 vowels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inventory {
    pub consonants: Vec<String>,
    pub vowels: Vec<String>,
}

impl Inventory {
    pub fn from_json(text: &str) -> Result<Inventory> {
        let inv: Inventory = serde_json::from_str(text)?;
        inv.validate()?;
        Ok(inv)
    }

    pub fn builtin() -> Inventory {
        Self::from_json(crate::data::INVENTORY_JSON).expect("builtin inventory is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.consonants.len() != 24 {
            return Err(Error::InvalidSpec(format!(
                "inventory must list exactly 24 consonants, got {}",
                self.consonants.len()
            )));
        }
        if self.vowels.len() != 16 {
            return Err(Error::InvalidSpec(format!(
                "inventory must list exactly 16 vowels, got {}",
                self.vowels.len()
            )));
        }
        if self.consonants[0] != ABSENCE {
            return Err(Error::InvalidSpec(
                "consonant index 0 must be the absence symbol `-`".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for s in self.consonants.iter().chain(&self.vowels) {
            if !seen.insert(s.as_str()) {
                return Err(Error::InvalidSpec(format!("duplicate symbol `{s}`")));
            }
        }
        Ok(())
    }

    pub fn consonant_index(&self, symbol: &str) -> Result<usize> {
        self.consonants
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }

    pub fn vowel_index(&self, symbol: &str) -> Result<usize> {
        self.vowels
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }
}

/// The "no consonant" symbol.
pub const ABSENCE: &str = "-";

/// Soft classification over the inventory: each sub-vector is a simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Percept {
    pub q_c1: Vec<f64>,
    pub q_c2: Vec<f64>,
    pub q_v: Vec<f64>,
}

impl Percept {
    /// One-hot percept for a (c1, c2, v) symbol triple.
    pub fn one_hot(inventory: &Inventory, c1: &str, c2: &str, v: &str) -> Result<Percept> {
        let mut q_c1 = vec![0.0; inventory.consonants.len()];
        let mut q_c2 = vec![0.0; inventory.consonants.len()];
        let mut q_v = vec![0.0; inventory.vowels.len()];
        q_c1[inventory.consonant_index(c1)?] = 1.0;
        q_c2[inventory.consonant_index(c2)?] = 1.0;
        q_v[inventory.vowel_index(v)?] = 1.0;
        Ok(Percept { q_c1, q_c2, q_v })
    }

    /// The flat 64-dimensional vector `[q_c1 | q_c2 | q_v]`.
    pub fn concat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.q_c1.len() + self.q_c2.len() + self.q_v.len());
        out.extend_from_slice(&self.q_c1);
        out.extend_from_slice(&self.q_c2);
        out.extend_from_slice(&self.q_v);
        out
    }

    pub fn validate(&self) -> Result<()> {
        for (name, q) in [("q_c1", &self.q_c1), ("q_c2", &self.q_c2), ("q_v", &self.q_v)] {
            if q.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                return Err(Error::InvalidSpec(format!("{name} has negative entries")));
            }
            let sum: f64 = q.iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidSpec(format!("{name} sums to {sum}")));
            }
        }
        Ok(())
    }
}

/// Maps a percept to symbols by per-slot argmax; ties break toward the
/// lowest index.
pub fn identify<'a>(p: &Percept, inventory: &'a Inventory) -> (&'a str, &'a str, &'a str) {
    (
        &inventory.consonants[argmax(&p.q_c1)],
        &inventory.consonants[argmax(&p.q_c2)],
        &inventory.vowels[argmax(&p.q_v)],
    )
}

fn argmax(q: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// Encodes audio against a prototype bank: per slot, the softmax over
/// negative length-normalized DTW mel distances at the given temperature.
pub fn encode(audio: &AudioBuffer, bank: &PrototypeBank, temperature: f64) -> Result<Percept> {
    if audio.samples.is_empty() {
        return Err(Error::Audio("empty audio".into()));
    }
    if !(temperature > 0.0) {
        return Err(Error::InvalidSpec("temperature must be > 0".into()));
    }
    let mel = mel_spectrogram(audio, &bank.config)?;
    Ok(encode_mel(&mel, bank, temperature))
}

/// Encode a precomputed mel matrix (the frontend must match the bank's).
pub fn encode_mel(mel: &MelSpectrogram, bank: &PrototypeBank, temperature: f64) -> Percept {
    use crate::tam::SlotRole;
    let slot = |role: SlotRole, symbols: &[String]| -> Vec<f64> {
        let d: Vec<f64> = symbols
            .iter()
            .map(|s| dtw::dtw_distance(&mel.frames, bank.matrix(role, s)))
            .collect();
        softmax_neg(&d, temperature)
    };
    Percept {
        q_c1: slot(SlotRole::C1, &bank.inventory.consonants),
        q_c2: slot(SlotRole::C2, &bank.inventory.consonants),
        q_v: slot(SlotRole::V, &bank.inventory.vowels),
    }
}

fn softmax_neg(distances: &[f64], temperature: f64) -> Vec<f64> {
    let m = distances.iter().cloned().fold(f64::INFINITY, f64::min);
    let exps: Vec<f64> = distances
        .iter()
        .map(|&d| (-(d - m) / temperature).exp())
        .collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_inventory_validates() {
        let inv = Inventory::builtin();
        assert_eq!(inv.consonants.len(), 24);
        assert_eq!(inv.vowels.len(), 16);
        assert_eq!(inv.consonants[0], ABSENCE);
    }

    #[test]
    fn one_hot_identifies_to_itself() {
        let inv = Inventory::builtin();
        let p = Percept::one_hot(&inv, "p", "l", "aa").unwrap();
        p.validate().unwrap();
        assert_eq!(p.concat().len(), 64);
        assert_eq!(identify(&p, &inv), ("p", "l", "aa"));
    }

    #[test]
    fn uniform_subvector_breaks_ties_to_index_zero() {
        let inv = Inventory::builtin();
        let p = Percept {
            q_c1: vec![1.0 / 24.0; 24],
            q_c2: vec![1.0 / 24.0; 24],
            q_v: vec![1.0 / 16.0; 16],
        };
        let (c1, c2, v) = identify(&p, &inv);
        assert_eq!(c1, ABSENCE);
        assert_eq!(c2, ABSENCE);
        assert_eq!(v, inv.vowels[0]);
    }

    #[test]
    fn plurality_wins() {
        let inv = Inventory::builtin();
        let mut q_v = vec![0.4 / 15.0; 16];
        let iy = inv.vowel_index("iy").unwrap();
        q_v[iy] = 0.6;
        let p = Percept {
            q_c1: Percept::one_hot(&inv, "-", "-", "aa").unwrap().q_c1,
            q_c2: Percept::one_hot(&inv, "-", "-", "aa").unwrap().q_c2,
            q_v,
        };
        assert_eq!(identify(&p, &inv).2, "iy");
    }

    #[test]
    fn softmax_is_a_simplex_and_sharpens_with_temperature() {
        let d = vec![0.5, 0.1, 0.9];
        let soft = softmax_neg(&d, 0.1);
        assert!((soft.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let hard = softmax_neg(&d, 1e-4);
        assert!(hard[1] > 1.0 - 1e-9);
    }
}
