//! Deterministic articulatory percept: classifies each planned segment from
//! the realized trajectory and tube features alone, bypassing audio.
//!
//! Consonant slots: the manner comes from the tightest opening reached in
//! the segment window (full closure -> stop; below the frication threshold ->
//! fricative; below the approximant threshold -> approximant; otherwise
//! absence), the place from the region of that constriction, and the symbol
//! from the nearest canonical articulation among feature-compatible
//! consonants. Vowel slot: nearest vowel articulation at the segment
//! midpoint. The result is a one-hot percept.

use super::{Inventory, Percept, ABSENCE};
use crate::artic::ArticulatorySpace;
use crate::error::{Error, Result};
use crate::phones::{Manner, PhoneKind, PhoneSet, Place};
use crate::tam::{SegmentClass, SlotRole, Trajectory, UtteranceSpec};
use crate::vtsynth::{Region, TubeFeatures};
use serde::{Deserialize, Serialize};

/// Opening thresholds (cm^2) separating the manners.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Openings below this (but above zero) count as frication.
    pub frication_max: f64,
    /// Openings below this count as an approximant constriction; anything
    /// wider is no consonant at all.
    pub approx_max: f64,
    /// Fraction of a consonant window skipped before collecting closure
    /// evidence, so lingering closures released from the previous segment
    /// are not credited to this one.
    pub read_skip_frac: f64,
    /// Where in the window a non-stop constriction is read (the gesture has
    /// formed by then; earlier frames still carry the previous release).
    pub read_frac: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            frication_max: 0.35,
            approx_max: 1.2,
            read_skip_frac: 0.35,
            read_frac: 0.8,
        }
    }
}

/// Classifies the utterance into a one-hot percept.
///
/// `tube_timeline` must hold one `TubeFeatures` per trajectory frame.
pub fn oracle_percept(
    space: &ArticulatorySpace,
    phones: &PhoneSet,
    inventory: &Inventory,
    traj: &Trajectory,
    tube_timeline: &[TubeFeatures],
    spec: &UtteranceSpec,
    cfg: &OracleConfig,
) -> Result<Percept> {
    if tube_timeline.len() != traj.len() {
        return Err(Error::InvalidSpec(format!(
            "tube timeline has {} frames, trajectory {}",
            tube_timeline.len(),
            traj.len()
        )));
    }

    let starts = spec.segment_starts();
    let mut c1 = ABSENCE.to_string();
    let mut c2 = ABSENCE.to_string();
    let mut v: Option<String> = None;

    for (seg, &start) in spec.segments.iter().zip(&starts) {
        let (lo, hi) = traj.frame_window(start, start + seg.duration);
        if lo >= hi {
            return Err(Error::InvalidSpec(format!(
                "segment window [{start}, {}) covers no frames",
                start + seg.duration
            )));
        }
        match seg.role {
            SlotRole::V => {
                let mid = (lo + hi) / 2;
                v = Some(nearest_vowel(space, phones, inventory, traj.supra(mid))?);
            }
            SlotRole::C1 | SlotRole::C2 => {
                let symbol =
                    classify_consonant(space, phones, inventory, traj, tube_timeline, lo, hi, seg.class, cfg)?;
                match seg.role {
                    SlotRole::C1 => c1 = symbol,
                    SlotRole::C2 => c2 = symbol,
                    SlotRole::V => unreachable!(),
                }
            }
        }
    }

    let v = v.ok_or_else(|| Error::InvalidSpec("utterance plans no vowel segment".into()))?;
    Percept::one_hot(inventory, &c1, &c2, &v)
}

#[allow(clippy::too_many_arguments)]
fn classify_consonant(
    space: &ArticulatorySpace,
    phones: &PhoneSet,
    inventory: &Inventory,
    traj: &Trajectory,
    tube: &[TubeFeatures],
    lo: usize,
    hi: usize,
    class: SegmentClass,
    cfg: &OracleConfig,
) -> Result<String> {
    // Closure evidence over the window, past the carry-over skip.
    let skip_lo = (lo + ((hi - lo) as f64 * cfg.read_skip_frac).round() as usize).min(hi - 1);
    let closure_frames: Vec<usize> = (skip_lo..hi).filter(|&k| tube[k].min_area == 0.0).collect();
    let (manner, place, read_frame) = if !closure_frames.is_empty() {
        let region = modal_region(&closure_frames, tube);
        let mid = closure_frames[closure_frames.len() / 2];
        (Manner::Stop, region_place(region), mid)
    } else {
        let read = (lo + ((hi - lo) as f64 * cfg.read_frac).floor() as usize).min(hi - 1);
        let tightest = tube[read].min_area;
        if tightest < cfg.frication_max {
            (Manner::Fricative, region_place(tube[read].min_area_region), read)
        } else if tightest < cfg.approx_max {
            (Manner::Approximant, region_place(tube[read].min_area_region), read)
        } else {
            return Ok(ABSENCE.to_string());
        }
    };

    let voiced = class != SegmentClass::Voiceless;
    let frame = traj.supra(read_frame);
    let probe = phones.project(space, &phones.consonant_dims, frame);

    // Narrow the candidate set by features, relaxing if nothing matches.
    let filters: [&dyn Fn(&crate::phones::Phone) -> bool; 4] = [
        &|p| p.manner == manner && p.voiced == voiced && p.place == place,
        &|p| p.manner == manner && p.voiced == voiced,
        &|p| p.manner == manner,
        &|_| true,
    ];
    for filter in filters {
        let mut best: Option<(f64, usize)> = None;
        for (idx, symbol) in inventory.consonants.iter().enumerate() {
            if symbol == ABSENCE {
                continue;
            }
            let phone = phones.get(symbol)?;
            if phone.kind != PhoneKind::Consonant || !filter(phone) {
                continue;
            }
            let proto = phones.target(space, symbol)?;
            let ref_vec = phones.project(space, &phones.consonant_dims, &proto.values);
            let d: f64 = probe
                .iter()
                .zip(&ref_vec)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            // Strictly-less keeps the lowest inventory index on ties.
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, idx));
            }
        }
        if let Some((_, idx)) = best {
            return Ok(inventory.consonants[idx].clone());
        }
    }
    Ok(ABSENCE.to_string())
}

fn nearest_vowel(
    space: &ArticulatorySpace,
    phones: &PhoneSet,
    inventory: &Inventory,
    frame: &[f64],
) -> Result<String> {
    let probe = phones.project(space, &phones.vowel_dims, frame);
    let mut best: Option<(f64, usize)> = None;
    for (idx, symbol) in inventory.vowels.iter().enumerate() {
        let proto = phones.target(space, symbol)?;
        let ref_vec = phones.project(space, &phones.vowel_dims, &proto.values);
        let d: f64 = probe
            .iter()
            .zip(&ref_vec)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, idx));
        }
    }
    Ok(inventory.vowels[best.expect("non-empty inventory").1].clone())
}

/// Most frequent closure region; ties resolve toward the latest occurrence.
fn modal_region(frames: &[usize], tube: &[TubeFeatures]) -> Region {
    let mut counts: Vec<(Region, usize, usize)> = Vec::new();
    for &k in frames {
        let r = tube[k].min_area_region;
        match counts.iter_mut().find(|(cr, _, _)| *cr == r) {
            Some(entry) => {
                entry.1 += 1;
                entry.2 = k;
            }
            None => counts.push((r, 1, k)),
        }
    }
    counts
        .into_iter()
        .max_by_key(|&(_, count, last)| (count, last))
        .expect("non-empty closure frames")
        .0
}

fn region_place(region: Region) -> Place {
    match region {
        Region::Labial => Place::Labial,
        Region::Alveolar => Place::Alveolar,
        Region::Palatal => Place::Palatal,
        Region::Velar => Place::Velar,
        Region::Pharyngeal => Place::Pharyngeal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percept::identify;
    use crate::tam::{generate_trajectory, GlottalFree, SegmentPlan};
    use crate::vtsynth::Tract;

    struct Fixture {
        space: ArticulatorySpace,
        phones: PhoneSet,
        inventory: Inventory,
        tract: Tract,
    }

    fn fixture() -> Fixture {
        let space = ArticulatorySpace::builtin();
        let tract = Tract::with_defaults(&space).unwrap();
        Fixture {
            phones: PhoneSet::builtin(),
            inventory: Inventory::builtin(),
            space,
            tract,
        }
    }

    fn spec_for(fx: &Fixture, symbols: &[(&str, SlotRole)]) -> UtteranceSpec {
        let segments = symbols
            .iter()
            .map(|(sym, role)| {
                let phone = fx.phones.get(sym).unwrap();
                SegmentPlan {
                    target: fx.phones.target(&fx.space, sym).unwrap(),
                    duration: if phone.kind == PhoneKind::Vowel { 0.3 } else { 0.12 },
                    class: phone.segment_class(),
                    role: *role,
                }
            })
            .collect();
        UtteranceSpec {
            segments,
            tau_supra: 0.012,
            tau_glottal: 0.015,
            glottal: GlottalFree {
                chink_area: 0.3,
                relative_amplitude: 0.8,
            },
        }
    }

    fn run(fx: &Fixture, spec: &UtteranceSpec) -> Percept {
        let traj = generate_trajectory(&fx.space, spec, 1000.0).unwrap();
        let timeline = fx.tract.features_timeline(&traj, fx.tract.default_sections());
        oracle_percept(
            &fx.space,
            &fx.phones,
            &fx.inventory,
            &traj,
            &timeline,
            spec,
            &OracleConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn labial_closure_reads_as_bilabial() {
        let fx = fixture();
        let spec = spec_for(&fx, &[("p", SlotRole::C1), ("aa", SlotRole::V)]);
        let p = run(&fx, &spec);
        let (c1, c2, _) = identify(&p, &fx.inventory);
        assert!(["p", "b", "m"].contains(&c1), "got {c1}");
        assert_eq!(c1, "p"); // voiceless plan picks the voiceless stop
        assert_eq!(c2, ABSENCE);
    }

    #[test]
    fn open_tract_reads_as_absence() {
        let fx = fixture();
        let spec = spec_for(&fx, &[("aa", SlotRole::V)]);
        let p = run(&fx, &spec);
        let (c1, c2, v) = identify(&p, &fx.inventory);
        assert_eq!(c1, ABSENCE);
        assert_eq!(c2, ABSENCE);
        assert_eq!(v, "aa");
    }

    #[test]
    fn vowel_prototype_frame_identifies_itself() {
        let fx = fixture();
        for vowel in ["aa", "iy", "uw", "eh"] {
            let spec = spec_for(&fx, &[(vowel, SlotRole::V)]);
            let p = run(&fx, &spec);
            assert_eq!(identify(&p, &fx.inventory).2, vowel);
        }
    }

    #[test]
    fn canonical_ccv_is_fully_recovered() {
        let fx = fixture();
        for (c1, c2, v) in [("p", "l", "aa"), ("t", "w", "iy"), ("k", "l", "uw"), ("s", "t", "ah")] {
            let spec = spec_for(
                &fx,
                &[(c1, SlotRole::C1), (c2, SlotRole::C2), (v, SlotRole::V)],
            );
            let p = run(&fx, &spec);
            let got = identify(&p, &fx.inventory);
            assert_eq!(got, (c1, c2, v), "syllable {c1}{c2}{v} read as {got:?}");
        }
    }

    #[test]
    fn percept_is_one_hot() {
        let fx = fixture();
        let spec = spec_for(&fx, &[("k", SlotRole::C1), ("aa", SlotRole::V)]);
        let p = run(&fx, &spec);
        p.validate().unwrap();
        for q in [&p.q_c1, &p.q_c2, &p.q_v] {
            assert_eq!(q.iter().filter(|&&x| x == 1.0).count(), 1);
            assert_eq!(q.iter().filter(|&&x| x == 0.0).count(), q.len() - 1);
        }
    }

    #[test]
    fn timeline_length_mismatch_is_an_error() {
        let fx = fixture();
        let spec = spec_for(&fx, &[("aa", SlotRole::V)]);
        let traj = generate_trajectory(&fx.space, &spec, 1000.0).unwrap();
        let timeline = fx.tract.features_timeline(&traj, fx.tract.default_sections());
        let r = oracle_percept(
            &fx.space,
            &fx.phones,
            &fx.inventory,
            &traj,
            &timeline[..timeline.len() - 1],
            &spec,
            &OracleConfig::default(),
        );
        assert!(r.is_err());
    }
}
