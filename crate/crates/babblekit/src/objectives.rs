//! Optimization goals and the loss: somatosensory objectives evaluated on
//! target-configuration tube geometry, the coarticulation objective, weighted
//! sub-vector distances, and the penalty applied when the somatosensory gate
//! fails.

use crate::artic::ArticulatorySpace;
use crate::error::{Error, Result};
use crate::percept::Percept;
use crate::phones::{Manner, PhoneKind, PhoneSet, Place};
use crate::tam::{SlotRole, UtteranceSpec};
use crate::vtsynth::{section_length_for_rate, Tract, TubeFeatures, DEFAULT_AUDIO_RATE};
use serde::{Deserialize, Serialize};

/// Binary geometric objective values: closed is 0, open is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosureTarget {
    Closed,
    Open,
}

impl ClosureTarget {
    pub fn value(self) -> f64 {
        match self {
            ClosureTarget::Closed => 0.0,
            ClosureTarget::Open => 1.0,
        }
    }
}

/// Somatosensory objectives of one utterance: an optional closure objective
/// per segment (stops must close, vowels must stay open, fricatives and
/// approximants are unconstrained) and an optional lip objective on the first
/// consonant when it is a stop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SomatoGoal {
    pub closure_targets: Vec<Option<ClosureTarget>>,
    pub lip_closure_target: Option<ClosureTarget>,
}

impl SomatoGoal {
    /// Derives the objectives from the planned segments. Only the first
    /// consonant and the vowel carry objectives; the intermediate consonant
    /// never does.
    pub fn for_segments(phones: &PhoneSet, spec: &UtteranceSpec, symbols: &[&str]) -> Result<SomatoGoal> {
        if symbols.len() != spec.segments.len() {
            return Err(Error::InvalidSpec(format!(
                "{} symbols for {} segments",
                symbols.len(),
                spec.segments.len()
            )));
        }
        let mut closure_targets = Vec::with_capacity(spec.segments.len());
        let mut lip = None;
        for (seg, &symbol) in spec.segments.iter().zip(symbols) {
            let phone = phones.get(symbol)?;
            let target = match (seg.role, phone.kind) {
                (SlotRole::V, _) => Some(ClosureTarget::Open),
                (SlotRole::C1, PhoneKind::Consonant) if phone.manner == Manner::Stop => {
                    lip = Some(if phone.place == Place::Labial {
                        ClosureTarget::Closed
                    } else {
                        ClosureTarget::Open
                    });
                    Some(ClosureTarget::Closed)
                }
                _ => None,
            };
            closure_targets.push(target);
        }
        Ok(SomatoGoal {
            closure_targets,
            lip_closure_target: lip,
        })
    }

    /// Target values in layout order: present closure objectives (segment
    /// order), then the lip objective.
    pub fn target_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .closure_targets
            .iter()
            .flatten()
            .map(|t| t.value())
            .collect();
        if let Some(lip) = self.lip_closure_target {
            out.push(lip.value());
        }
        out
    }
}

/// The full optimization goal `[q_a | q_c1 | q_c2 | q_v]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Goal {
    pub somato: SomatoGoal,
    /// One-hot auditory targets.
    pub auditory: Percept,
    /// Consonant-vowel segment index pairs whose coarticulation distance
    /// joins q_a with target 0 when enabled.
    pub coart_pairs: Vec<(usize, usize)>,
    pub coart_enabled: bool,
}

impl Goal {
    /// Target side of q_a: somatosensory targets then zeros for the enabled
    /// coarticulation pairs.
    pub fn artic_targets(&self) -> Vec<f64> {
        let mut t = self.somato.target_values();
        if self.coart_enabled {
            t.extend(std::iter::repeat(0.0).take(self.coart_pairs.len()));
        }
        t
    }
}

/// Weights and thresholds of the loss.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    /// Minimum opening (cm^2) for a vowel to count as fully open.
    pub vowel_min_area_cm2: f64,
    /// Weight of each auditory sub-vector distance.
    pub w_aud: f64,
    /// Weight of the articulatory distance.
    pub w_art: f64,
    /// Penalty multiplier applied to d_a when the gate fails.
    pub penalty_factor: f64,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        ObjectiveConfig {
            vowel_min_area_cm2: 0.25,
            w_aud: 2.0,
            w_art: 1.0,
            penalty_factor: 10.0,
        }
    }
}

/// Per-evaluation loss decomposition. `gated` marks evaluations that failed
/// the somatosensory gate and received the penalty; their auditory distances
/// are absent because no synthesis happened.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub d_a: f64,
    pub d_c1: Option<f64>,
    pub d_c2: Option<f64>,
    pub d_v: Option<f64>,
    pub gated: bool,
    pub total: f64,
}

/// Achieved somatosensory values for one utterance plus the gate outcome.
///
/// `tube_per_segment` holds the tube features of each segment's *target*
/// configuration (the gate runs before any synthesis). The achieved closure
/// value is 0 at full closure, 1 from the vowel opening threshold up, and
/// linear in between; the achieved lip value is 0 only at full lip closure.
/// The gate passes when every present objective achieves its target exactly.
pub fn eval_somatosensory(
    tube_per_segment: &[TubeFeatures],
    goal: &SomatoGoal,
    cfg: &ObjectiveConfig,
) -> Result<(Vec<f64>, bool)> {
    if tube_per_segment.len() != goal.closure_targets.len() {
        return Err(Error::InvalidSpec(format!(
            "{} tube summaries for {} segments",
            tube_per_segment.len(),
            goal.closure_targets.len()
        )));
    }
    let mut achieved = Vec::new();
    let mut pass = true;
    for (tube, target) in tube_per_segment.iter().zip(&goal.closure_targets) {
        let Some(target) = target else { continue };
        let value = if tube.min_area <= 0.0 {
            0.0
        } else if tube.min_area >= cfg.vowel_min_area_cm2 {
            1.0
        } else {
            tube.min_area / cfg.vowel_min_area_cm2
        };
        pass &= value == target.value();
        achieved.push(value);
    }
    if let Some(lip) = goal.lip_closure_target {
        // The lip objective rides on the first consonant segment.
        let c1_tube = tube_per_segment
            .first()
            .ok_or_else(|| Error::InvalidSpec("no segments".into()))?;
        let value = if c1_tube.lip_area <= 0.0 { 0.0 } else { 1.0 };
        pass &= value == lip.value();
        achieved.push(value);
    }
    Ok((achieved, pass))
}

/// Evaluates the full articulatory side of the goal for an utterance: gate
/// values from the segment targets' tube geometry, plus the coarticulation
/// distances of the enabled pairs. Returns (achieved q_a, gate passed).
pub fn evaluate_articulatory(
    space: &ArticulatorySpace,
    tract: &Tract,
    spec: &UtteranceSpec,
    goal: &Goal,
    cfg: &ObjectiveConfig,
) -> Result<(Vec<f64>, bool)> {
    let section_length = section_length_for_rate(DEFAULT_AUDIO_RATE);
    let tubes: Vec<TubeFeatures> = spec
        .segments
        .iter()
        .map(|seg| {
            tract
                .area_function(space, &seg.target.values, section_length)
                .map(|af| crate::vtsynth::tube_features(&af))
        })
        .collect::<Result<_>>()?;
    let (mut achieved, pass) = eval_somatosensory(&tubes, &goal.somato, cfg)?;
    if goal.coart_enabled {
        for &(ci, vi) in &goal.coart_pairs {
            let d = space.coart_distance(&spec.segments[ci].target, &spec.segments[vi].target)?;
            achieved.push(d);
        }
    }
    Ok((achieved, pass))
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Composes the loss of a gate-passing evaluation: per-sub-vector Euclidean
/// distances with the auditory terms weighted `w_aud` against `w_art` for the
/// articulatory term.
pub fn compose_loss(
    goal: &Goal,
    percept: &Percept,
    achieved_artic: &[f64],
    cfg: &ObjectiveConfig,
) -> Result<LossBreakdown> {
    let targets = goal.artic_targets();
    if achieved_artic.len() != targets.len() {
        return Err(Error::InvalidSpec(format!(
            "achieved q_a has {} entries, goal {}",
            achieved_artic.len(),
            targets.len()
        )));
    }
    if percept.q_c1.len() != goal.auditory.q_c1.len()
        || percept.q_c2.len() != goal.auditory.q_c2.len()
        || percept.q_v.len() != goal.auditory.q_v.len()
    {
        return Err(Error::InvalidSpec("percept/goal dimension mismatch".into()));
    }
    let d_a = euclidean(achieved_artic, &targets);
    let d_c1 = euclidean(&percept.q_c1, &goal.auditory.q_c1);
    let d_c2 = euclidean(&percept.q_c2, &goal.auditory.q_c2);
    let d_v = euclidean(&percept.q_v, &goal.auditory.q_v);
    Ok(LossBreakdown {
        d_a,
        d_c1: Some(d_c1),
        d_c2: Some(d_c2),
        d_v: Some(d_v),
        gated: false,
        total: cfg.w_art * d_a + cfg.w_aud * (d_c1 + d_c2 + d_v),
    })
}

/// The penalty loss of a gate-failing evaluation: a large value proportional
/// to the articulatory distance; auditory terms are absent.
pub fn penalty_loss(goal: &Goal, achieved_artic: &[f64], cfg: &ObjectiveConfig) -> LossBreakdown {
    let targets = goal.artic_targets();
    let d_a = euclidean(achieved_artic, &targets);
    LossBreakdown {
        d_a,
        d_c1: None,
        d_c2: None,
        d_v: None,
        gated: true,
        total: cfg.penalty_factor * d_a,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percept::Inventory;
    use crate::vtsynth::Region;

    fn tube(min_area: f64, lip_area: f64) -> TubeFeatures {
        TubeFeatures {
            min_area,
            min_area_region: Region::Alveolar,
            lip_area,
        }
    }

    fn goal_with(somato: SomatoGoal, coart_pairs: Vec<(usize, usize)>, coart: bool) -> Goal {
        let inv = Inventory::builtin();
        Goal {
            somato,
            auditory: Percept::one_hot(&inv, "p", "l", "aa").unwrap(),
            coart_pairs,
            coart_enabled: coart,
        }
    }

    #[test]
    fn plosive_closure_objective_met_at_zero_area() {
        let goal = SomatoGoal {
            closure_targets: vec![Some(ClosureTarget::Closed), Some(ClosureTarget::Open)],
            lip_closure_target: None,
        };
        let cfg = ObjectiveConfig::default();
        let (achieved, pass) =
            eval_somatosensory(&[tube(0.0, 1.0), tube(0.5, 2.0)], &goal, &cfg).unwrap();
        assert_eq!(achieved, vec![0.0, 1.0]);
        assert!(pass);
    }

    #[test]
    fn vowel_threshold_is_inclusive() {
        let goal = SomatoGoal {
            closure_targets: vec![Some(ClosureTarget::Open)],
            lip_closure_target: None,
        };
        let cfg = ObjectiveConfig::default();
        let (achieved, pass) =
            eval_somatosensory(&[tube(cfg.vowel_min_area_cm2, 1.0)], &goal, &cfg).unwrap();
        assert_eq!(achieved, vec![1.0]);
        assert!(pass);

        // Halfway to the threshold: linear value, gate fails.
        let (achieved, pass) =
            eval_somatosensory(&[tube(cfg.vowel_min_area_cm2 / 2.0, 1.0)], &goal, &cfg).unwrap();
        assert_eq!(achieved, vec![0.5]);
        assert!(!pass);
    }

    #[test]
    fn open_lips_fail_a_bilabial_lip_objective() {
        let goal = SomatoGoal {
            closure_targets: vec![Some(ClosureTarget::Closed)],
            lip_closure_target: Some(ClosureTarget::Closed),
        };
        let cfg = ObjectiveConfig::default();
        let (achieved, pass) = eval_somatosensory(&[tube(0.0, 0.4)], &goal, &cfg).unwrap();
        assert_eq!(achieved, vec![0.0, 1.0]);
        assert!(!pass);
    }

    #[test]
    fn perfect_match_gives_zero_total() {
        let inv = Inventory::builtin();
        let goal = goal_with(
            SomatoGoal {
                closure_targets: vec![Some(ClosureTarget::Closed)],
                lip_closure_target: None,
            },
            vec![],
            false,
        );
        let percept = Percept::one_hot(&inv, "p", "l", "aa").unwrap();
        let loss = compose_loss(&goal, &percept, &[0.0], &ObjectiveConfig::default()).unwrap();
        assert_eq!(loss.total, 0.0);
        assert!(!loss.gated);
    }

    #[test]
    fn composition_rule_hand_values() {
        // d_a = 0.3 and all three auditory distances 0.1:
        // total = 1 * 0.3 + 2 * (0.3) = 0.9.
        let cfg = ObjectiveConfig::default();
        let d_a = 0.3;
        let total = cfg.w_art * d_a + cfg.w_aud * (0.1 + 0.1 + 0.1);
        assert!((total - 0.9).abs() < 1e-12);
    }

    #[test]
    fn coart_terms_join_d_a_when_enabled() {
        let inv = Inventory::builtin();
        let somato = SomatoGoal {
            closure_targets: vec![Some(ClosureTarget::Closed), None, Some(ClosureTarget::Open)],
            lip_closure_target: Some(ClosureTarget::Open),
        };
        let goal = goal_with(somato, vec![(0, 2), (1, 2)], true);
        let percept = Percept::one_hot(&inv, "p", "l", "aa").unwrap();
        // Somato objectives met exactly; coart distances 0.5 and 0.3.
        let achieved = vec![0.0, 1.0, 1.0, 0.5, 0.3];
        let loss = compose_loss(&goal, &percept, &achieved, &ObjectiveConfig::default()).unwrap();
        let expect = (0.5f64 * 0.5 + 0.3 * 0.3).sqrt();
        assert!((loss.d_a - expect).abs() < 1e-12, "d_a {}", loss.d_a);
        assert!((expect - 0.583).abs() < 1e-3);

        // Disabled: the same goal without coart terms scores d_a = 0.
        let goal_off = goal_with(goal.somato.clone(), vec![(0, 2), (1, 2)], false);
        let loss_off =
            compose_loss(&goal_off, &percept, &[0.0, 1.0, 1.0], &ObjectiveConfig::default())
                .unwrap();
        assert_eq!(loss_off.d_a, 0.0);
    }

    #[test]
    fn penalty_scales_d_a() {
        let goal = goal_with(
            SomatoGoal {
                closure_targets: vec![Some(ClosureTarget::Closed)],
                lip_closure_target: None,
            },
            vec![],
            false,
        );
        let cfg = ObjectiveConfig::default();
        let loss = penalty_loss(&goal, &[0.5], &cfg);
        assert!(loss.gated);
        assert_eq!(loss.d_a, 0.5);
        assert!((loss.total - 5.0).abs() < 1e-12);
        assert!(loss.d_c1.is_none() && loss.d_c2.is_none() && loss.d_v.is_none());
    }

    #[test]
    fn gated_losses_dominate_ungated_ones_at_unit_failures() {
        // A failed binary objective contributes at least 1.0 to d_a, so with
        // K = 10 the penalty exceeds any ungated loss with d_a <= 1 and
        // one-hot auditory distances (each at most sqrt(2)).
        let cfg = ObjectiveConfig::default();
        let max_ungated = cfg.w_art * 1.0 + cfg.w_aud * 3.0 * 2.0f64.sqrt();
        let min_gated = cfg.penalty_factor * 1.0;
        assert!(min_gated > max_ungated, "{min_gated} vs {max_ungated}");
    }

    #[test]
    fn somato_goal_derivation_for_ccv() {
        use crate::tam::{GlottalFree, SegmentPlan};
        let space = ArticulatorySpace::builtin();
        let phones = PhoneSet::builtin();
        let seg = |sym: &str, role: SlotRole| SegmentPlan {
            target: phones.target(&space, sym).unwrap(),
            duration: 0.1,
            class: phones.get(sym).unwrap().segment_class(),
            role,
        };
        let spec = UtteranceSpec {
            segments: vec![seg("p", SlotRole::C1), seg("l", SlotRole::C2), seg("aa", SlotRole::V)],
            tau_supra: 0.02,
            tau_glottal: 0.015,
            glottal: GlottalFree { chink_area: 0.1, relative_amplitude: 0.8 },
        };
        let goal = SomatoGoal::for_segments(&phones, &spec, &["p", "l", "aa"]).unwrap();
        assert_eq!(
            goal.closure_targets,
            vec![Some(ClosureTarget::Closed), None, Some(ClosureTarget::Open)]
        );
        assert_eq!(goal.lip_closure_target, Some(ClosureTarget::Closed));

        // A non-labial stop wants open lips; a fricative carries no closure
        // objective at all.
        let spec_t = UtteranceSpec {
            segments: vec![seg("t", SlotRole::C1), seg("aa", SlotRole::V)],
            ..spec.clone()
        };
        let goal_t = SomatoGoal::for_segments(&phones, &spec_t, &["t", "aa"]).unwrap();
        assert_eq!(goal_t.lip_closure_target, Some(ClosureTarget::Open));
        let spec_s = UtteranceSpec {
            segments: vec![seg("s", SlotRole::C1), seg("aa", SlotRole::V)],
            ..spec.clone()
        };
        let goal_s = SomatoGoal::for_segments(&phones, &spec_s, &["s", "aa"]).unwrap();
        assert_eq!(goal_s.closure_targets, vec![None, Some(ClosureTarget::Open)]);
        assert_eq!(goal_s.lip_closure_target, None);
    }
}
