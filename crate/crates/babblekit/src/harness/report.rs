//! Identification-rate tables and coarticulation-distance reports.

use super::records::TrialRecord;
use super::stats::{mean, welch_t_test};
use crate::artic::ArticulatorySpace;
use crate::error::{Error, Result};
use crate::explore::StrategyKind;
use crate::tam::SlotRole;

/// One experimental condition: strategy crossed with the coarticulation
/// objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Condition {
    pub strategy: StrategyKind,
    pub coart: bool,
}

impl Condition {
    pub fn label(&self) -> String {
        format!(
            "{}/{}",
            self.strategy.label(),
            if self.coart { "coart" } else { "plain" }
        )
    }
}

/// Identification rates (%) per condition.
#[derive(Debug, Clone)]
pub struct IdTable {
    pub conditions: Vec<Condition>,
    pub n: Vec<usize>,
    pub syllable: Vec<f64>,
    pub vowel: Vec<f64>,
    pub onset: Vec<f64>,
}

impl IdTable {
    pub fn rate_for(&self, condition: Condition) -> Option<(f64, f64, f64)> {
        let i = self.conditions.iter().position(|c| *c == condition)?;
        Some((self.syllable[i], self.vowel[i], self.onset[i]))
    }

    /// Tab-separated rendering, rates to two decimals.
    pub fn to_tsv(&self, config_hash: &str) -> String {
        let mut out = format!("# identification rates (%)\tconfig_hash={config_hash}\n");
        out.push_str("metric");
        for c in &self.conditions {
            out.push('\t');
            out.push_str(&c.label());
        }
        out.push('\n');
        for (name, rates) in [
            ("syllable", &self.syllable),
            ("vowel", &self.vowel),
            ("onset", &self.onset),
        ] {
            out.push_str(name);
            for r in rates {
                out.push_str(&format!("\t{r:.2}"));
            }
            out.push('\n');
        }
        out.push_str("samples");
        for n in &self.n {
            out.push_str(&format!("\t{n}"));
        }
        out.push('\n');
        out
    }
}

/// Aggregates identification rates over the records, grouped by condition in
/// first-appearance order. The syllable counts as identified only when all
/// three slots match; the onset needs both consonants.
pub fn identification_table(records: &[TrialRecord]) -> Result<IdTable> {
    if records.is_empty() {
        return Err(Error::Stats("no records".into()));
    }
    let mut conditions: Vec<Condition> = Vec::new();
    let mut counts: Vec<(usize, usize, usize, usize)> = Vec::new(); // n, v, onset, syll
    for r in records {
        let cond = Condition {
            strategy: r.strategy,
            coart: r.coart,
        };
        let i = match conditions.iter().position(|c| *c == cond) {
            Some(i) => i,
            None => {
                conditions.push(cond);
                counts.push((0, 0, 0, 0));
                conditions.len() - 1
            }
        };
        let (vowel, onset, syllable) = r.correct();
        counts[i].0 += 1;
        counts[i].1 += vowel as usize;
        counts[i].2 += onset as usize;
        counts[i].3 += syllable as usize;
    }
    let rate = |num: usize, den: usize| 100.0 * num as f64 / den as f64;
    Ok(IdTable {
        conditions,
        n: counts.iter().map(|c| c.0).collect(),
        vowel: counts.iter().map(|c| rate(c.1, c.0)).collect(),
        onset: counts.iter().map(|c| rate(c.2, c.0)).collect(),
        syllable: counts.iter().map(|c| rate(c.3, c.0)).collect(),
    })
}

/// Per-dimension comparison of consonant-vowel target distances between the
/// with- and without-coarticulation conditions.
#[derive(Debug, Clone)]
pub struct CoartRow {
    pub dimension: String,
    pub mean_with: f64,
    pub mean_without: f64,
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

#[derive(Debug, Clone)]
pub struct CoartReport {
    pub pair: SlotRole,
    pub rows: Vec<CoartRow>,
    pub n_with: usize,
    pub n_without: usize,
}

impl CoartReport {
    /// Plot-ready long-format CSV: dimension, condition, mean, p.
    pub fn to_csv(&self, config_hash: &str) -> String {
        let mut out = format!("# config_hash={config_hash}\n");
        out.push_str("dimension,condition,mean,p\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},coart,{:.6},{:.6}\n",
                row.dimension, row.mean_with, row.p
            ));
            out.push_str(&format!(
                "{},plain,{:.6},{:.6}\n",
                row.dimension, row.mean_without, row.p
            ));
        }
        out
    }
}

/// Builds the per-dimension mean distance comparison for `pair` (C1 or C2
/// against the vowel). Records are split by their coarticulation flag; both
/// conditions need at least two completed records.
pub fn coart_report(
    records: &[TrialRecord],
    pair: SlotRole,
    space: &ArticulatorySpace,
) -> Result<CoartReport> {
    if pair == SlotRole::V {
        return Err(Error::Stats("pair must be a consonant slot".into()));
    }
    let pick = |r: &TrialRecord| -> Option<Vec<f64>> {
        match pair {
            SlotRole::C1 => r.c1_v_distance.clone(),
            SlotRole::C2 => r.c2_v_distance.clone(),
            SlotRole::V => None,
        }
    };
    let with: Vec<Vec<f64>> = records.iter().filter(|r| r.coart).filter_map(pick).collect();
    let without: Vec<Vec<f64>> = records.iter().filter(|r| !r.coart).filter_map(pick).collect();
    if with.len() < 2 || without.len() < 2 {
        return Err(Error::Stats(format!(
            "need >= 2 records per condition, got {} with and {} without",
            with.len(),
            without.len()
        )));
    }
    let names = space.free_names();
    let n_dims = names.len();
    for v in with.iter().chain(&without) {
        if v.len() != n_dims {
            return Err(Error::Stats("distance vector length mismatch".into()));
        }
    }
    let mut rows = Vec::with_capacity(n_dims);
    for (d, name) in names.iter().enumerate() {
        let a: Vec<f64> = with.iter().map(|v| v[d]).collect();
        let b: Vec<f64> = without.iter().map(|v| v[d]).collect();
        let w = welch_t_test(&a, &b)?;
        rows.push(CoartRow {
            dimension: name.to_string(),
            mean_with: mean(&a),
            mean_without: mean(&b),
            t: w.t,
            df: w.df,
            p: w.p,
        });
    }
    Ok(CoartReport {
        pair,
        rows,
        n_with: with.len(),
        n_without: without.len(),
    })
}
