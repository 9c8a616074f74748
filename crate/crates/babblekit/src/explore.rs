//! Exploration strategies: pass pipelines over the optimizer with
//! somatosensory-gated budget accounting.
//!
//! A pass optimizes the targets of its free segments (earlier passes' targets
//! stay fixed verbatim; the glottal controls and both time constants are
//! re-optimized in every pass). Gate-failing samples receive the penalty loss
//! and are fed back to the optimizer but do not consume evaluation budget.

use crate::artic::{ArticulatorySpace, Target};
use crate::error::{Error, Result};
use crate::objectives::{
    compose_loss, evaluate_articulatory, penalty_loss, Goal, LossBreakdown, ObjectiveConfig,
    SomatoGoal,
};
use crate::percept::{
    encode, oracle_percept, Inventory, OracleConfig, Percept, PrototypeBank, ABSENCE,
};
use crate::phones::{PhoneKind, PhoneSet};
use crate::tam::{generate_trajectory, GlottalFree, SegmentPlan, SlotRole, UtteranceSpec};
use crate::tpe::{SearchSpace, TpeConfig, TpeOptimizer};
use crate::vtsynth::Tract;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// The four pass structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// One pass over all segment targets jointly.
    Joint,
    /// Vowel first, then both onset consonants jointly.
    VThenC1c2,
    /// Vowel, then the first consonant, then the intermediate one.
    VThenC1ThenC2,
    /// Vowel, then the intermediate consonant, then the first one.
    VThenC2ThenC1,
}

impl StrategyKind {
    /// Segments freed per pass, in pass order.
    pub fn pass_plan(self) -> Vec<Vec<SlotRole>> {
        match self {
            StrategyKind::Joint => vec![vec![SlotRole::C1, SlotRole::C2, SlotRole::V]],
            StrategyKind::VThenC1c2 => {
                vec![vec![SlotRole::V], vec![SlotRole::C1, SlotRole::C2]]
            }
            StrategyKind::VThenC1ThenC2 => {
                vec![vec![SlotRole::V], vec![SlotRole::C1], vec![SlotRole::C2]]
            }
            StrategyKind::VThenC2ThenC1 => {
                vec![vec![SlotRole::V], vec![SlotRole::C2], vec![SlotRole::C1]]
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StrategyKind::Joint => "C1C2V",
            StrategyKind::VThenC1c2 => "V.C1C2",
            StrategyKind::VThenC1ThenC2 => "V.C1.C2",
            StrategyKind::VThenC2ThenC1 => "V.C2.C1",
        }
    }
}

/// A strategy instance: pass structure, total synthesized-evaluation budget,
/// and whether the coarticulation objective is active.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    pub total_budget: usize,
    pub coart_enabled: bool,
}

/// Splits the budget across passes: single pass takes everything, two passes
/// split 1:4, three passes 1:2:2. Floors round down with the remainder going
/// to the final pass.
pub fn budget_split(spec: &StrategySpec) -> Vec<usize> {
    let b = spec.total_budget;
    let ratios: &[usize] = match spec.kind.pass_plan().len() {
        1 => &[1],
        2 => &[1, 4],
        _ => &[1, 2, 2],
    };
    let total: usize = ratios.iter().sum();
    let mut out: Vec<usize> = ratios.iter().map(|r| b * r / total).collect();
    let used: usize = out.iter().sum();
    *out.last_mut().expect("non-empty") += b - used;
    out
}

/// The syllable goal of one trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Syllable {
    pub c1: String,
    pub c2: String,
    pub v: String,
}

impl Syllable {
    pub fn new(c1: &str, c2: &str, v: &str) -> Syllable {
        Syllable {
            c1: c1.into(),
            c2: c2.into(),
            v: v.into(),
        }
    }

    pub fn symbol(&self, role: SlotRole) -> &str {
        match role {
            SlotRole::C1 => &self.c1,
            SlotRole::C2 => &self.c2,
            SlotRole::V => &self.v,
        }
    }

    pub fn label(&self) -> String {
        format!("{}{}{}", self.c1, self.c2, self.v)
    }
}

/// One optimizer iteration inside a pass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRecord {
    pub iter: usize,
    pub loss: LossBreakdown,
    pub point: Vec<f64>,
}

/// Outcome of one utterance evaluation.
#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub loss: LossBreakdown,
    /// Absent for gate-failing evaluations (no synthesis happened).
    pub percept: Option<Percept>,
}

/// The evaluation seam: the gate, forward model and perceptual mapping
/// behind one interface, so tests can inject arbitrary gate behavior.
pub trait UtteranceEvaluator {
    fn evaluate(&mut self, spec: &UtteranceSpec, goal: &Goal) -> Result<EvalOutcome>;
}

/// Which perceptual mapping scores gate-passing utterances.
pub enum PerceptBackend {
    /// Deterministic articulatory classification; no audio.
    Oracle(OracleConfig),
    /// Synthesize with the built-in waveguide and encode against a bank.
    MelPrototype {
        bank: std::sync::Arc<PrototypeBank>,
        temperature: f64,
        audio_rate: f64,
        noise_seed: u64,
    },
    /// Synthesize through the external adapter, then encode the returned
    /// audio against a bank.
    External {
        synth: crate::vtsynth::ExternalSynth,
        bank: std::sync::Arc<PrototypeBank>,
        temperature: f64,
        audio_rate: f64,
    },
}

/// The standard evaluator: somatosensory gate on target geometry, trajectory
/// generation, then the configured percept backend and loss composition.
pub struct PipelineEvaluator<'a> {
    pub space: &'a ArticulatorySpace,
    pub phones: &'a PhoneSet,
    pub inventory: &'a Inventory,
    pub tract: Tract,
    pub objectives: ObjectiveConfig,
    pub control_rate: f64,
    pub backend: PerceptBackend,
    feature_sections: usize,
}

impl<'a> PipelineEvaluator<'a> {
    pub fn new(
        space: &'a ArticulatorySpace,
        phones: &'a PhoneSet,
        inventory: &'a Inventory,
        objectives: ObjectiveConfig,
        control_rate: f64,
        backend: PerceptBackend,
    ) -> Result<PipelineEvaluator<'a>> {
        let tract = Tract::with_defaults(space)?;
        let feature_sections = tract.default_sections();
        Ok(PipelineEvaluator {
            space,
            phones,
            inventory,
            tract,
            objectives,
            control_rate,
            backend,
            feature_sections,
        })
    }
}

impl UtteranceEvaluator for PipelineEvaluator<'_> {
    fn evaluate(&mut self, spec: &UtteranceSpec, goal: &Goal) -> Result<EvalOutcome> {
        let (achieved, pass) =
            evaluate_articulatory(self.space, &self.tract, spec, goal, &self.objectives)?;
        if !pass {
            return Ok(EvalOutcome {
                loss: penalty_loss(goal, &achieved, &self.objectives),
                percept: None,
            });
        }
        let traj = generate_trajectory(self.space, spec, self.control_rate)?;
        let percept = match &mut self.backend {
            PerceptBackend::Oracle(cfg) => {
                let timeline = self.tract.features_timeline(&traj, self.feature_sections);
                oracle_percept(
                    self.space,
                    self.phones,
                    self.inventory,
                    &traj,
                    &timeline,
                    spec,
                    cfg,
                )?
            }
            PerceptBackend::MelPrototype {
                bank,
                temperature,
                audio_rate,
                noise_seed,
            } => {
                let glottal = crate::vtsynth::GlottalSource {
                    noise_seed: *noise_seed,
                    ..Default::default()
                };
                let audio =
                    crate::vtsynth::synthesize(self.space, &traj, &glottal, *audio_rate)?;
                encode(&audio, bank, *temperature)?
            }
            PerceptBackend::External {
                synth,
                bank,
                temperature,
                audio_rate,
            } => {
                let result = synth.synthesize(spec, *audio_rate)?;
                let audio = crate::vtsynth::read_wav(std::path::Path::new(&result.wav_path))?;
                encode(&audio, bank, *temperature)?
            }
        };
        let loss = compose_loss(goal, &percept, &achieved, &self.objectives)?;
        Ok(EvalOutcome {
            loss,
            percept: Some(percept),
        })
    }
}

/// Per-trial fixed context.
pub struct TrialContext<'a> {
    pub space: &'a ArticulatorySpace,
    pub phones: &'a PhoneSet,
    pub inventory: &'a Inventory,
    pub consonant_duration: f64,
    pub vowel_duration: f64,
    pub tpe: TpeConfig,
    /// A pass fails after `fail_cap_factor * budget` gate-failed samples.
    pub fail_cap_factor: usize,
}

/// Result of one pass.
#[derive(Debug, Clone)]
pub struct PassResult {
    /// Targets known after this pass (earlier fixed ones plus the best
    /// targets found here).
    pub fixed_targets: BTreeMap<SlotRole, Target>,
    pub best_spec: UtteranceSpec,
    pub best_loss: f64,
    pub best_percept: Percept,
    pub evaluations: Vec<EvalRecord>,
    pub synthesized: usize,
    pub gate_failures: usize,
}

/// Builds the utterance spec for a pass: the produced roles in canonical
/// order (C1, C2, V), fixed targets verbatim, free targets and the always
/// re-optimized controls from the optimizer's point.
fn build_spec(
    ctx: &TrialContext,
    syllable: &Syllable,
    roles: &[SlotRole],
    fixed: &BTreeMap<SlotRole, Target>,
    free_roles: &[SlotRole],
    point: &[f64],
) -> Result<UtteranceSpec> {
    let n_free_dims = ctx.space.free_indices().len();
    let mut segments = Vec::with_capacity(roles.len());
    for role in roles {
        let symbol = syllable.symbol(*role);
        let phone = ctx.phones.get(symbol)?;
        let target = if let Some(t) = fixed.get(role) {
            t.clone()
        } else {
            let slot = free_roles
                .iter()
                .position(|r| r == role)
                .expect("role is fixed or free");
            ctx.space
                .target_from_free(&point[slot * n_free_dims..(slot + 1) * n_free_dims])?
        };
        segments.push(SegmentPlan {
            target,
            duration: match phone.kind {
                PhoneKind::Vowel => ctx.vowel_duration,
                PhoneKind::Consonant => ctx.consonant_duration,
            },
            class: phone.segment_class(),
            role: *role,
        });
    }
    let base = free_roles.len() * n_free_dims;
    Ok(UtteranceSpec {
        segments,
        glottal: GlottalFree {
            chink_area: point[base],
            relative_amplitude: point[base + 1],
        },
        tau_supra: point[base + 2],
        tau_glottal: point[base + 3],
    })
}

/// The box bounds of a pass's search point: per free segment the free
/// articulatory dimensions, then chink area, relative amplitude and the two
/// time constants.
pub fn pass_search_space(
    space: &ArticulatorySpace,
    free_roles: &[SlotRole],
) -> Result<SearchSpace> {
    let mut dims = Vec::new();
    for role in free_roles {
        for &i in &space.free_indices() {
            let d = &space.dimensions[i];
            dims.push((format!("{role:?}:{}", d.name), d.min, d.max));
        }
    }
    let c = &space.controls;
    dims.push(("chink_area".into(), c.chink_area.min, c.chink_area.max));
    dims.push((
        "relative_amplitude".into(),
        c.relative_amplitude.min,
        c.relative_amplitude.max,
    ));
    dims.push(("tau_supra".into(), c.tau_supra.min, c.tau_supra.max));
    dims.push(("tau_glottal".into(), c.tau_glottal.min, c.tau_glottal.max));
    SearchSpace::new(dims)
}

/// The goal of a pass: one-hot targets for the produced slots (absent
/// consonant slots aim at the absence symbol), somatosensory objectives from
/// the produced segments, and a zero-distance coarticulation target per
/// consonant-vowel pair when enabled.
fn pass_goal(
    ctx: &TrialContext,
    syllable: &Syllable,
    spec: &UtteranceSpec,
    coart_enabled: bool,
) -> Result<Goal> {
    let roles: Vec<SlotRole> = spec.segments.iter().map(|s| s.role).collect();
    let symbol_of = |role: SlotRole| -> &str {
        if roles.contains(&role) {
            syllable.symbol(role)
        } else {
            ABSENCE
        }
    };
    let auditory = Percept::one_hot(
        ctx.inventory,
        symbol_of(SlotRole::C1),
        symbol_of(SlotRole::C2),
        syllable.symbol(SlotRole::V),
    )?;
    let symbols: Vec<&str> = roles.iter().map(|r| syllable.symbol(*r)).collect();
    let somato = SomatoGoal::for_segments(ctx.phones, spec, &symbols)?;
    let vowel_idx = roles
        .iter()
        .position(|r| *r == SlotRole::V)
        .ok_or_else(|| Error::InvalidSpec("pass produces no vowel".into()))?;
    let coart_pairs: Vec<(usize, usize)> = roles
        .iter()
        .enumerate()
        .filter(|(_, r)| **r != SlotRole::V)
        .map(|(i, _)| (i, vowel_idx))
        .collect();
    Ok(Goal {
        somato,
        auditory,
        coart_pairs,
        coart_enabled,
    })
}

/// Runs one pass: ask/tell until `budget` gate-passing evaluations have been
/// scored (gate failures cost no budget but are observed with the penalty
/// loss). Fails with [`Error::PassExhausted`] if gate failures exceed the
/// cap before the budget is spent.
#[allow(clippy::too_many_arguments)]
pub fn run_pass(
    ctx: &TrialContext,
    syllable: &Syllable,
    produced_now: &[SlotRole],
    fixed: &BTreeMap<SlotRole, Target>,
    budget: usize,
    coart_enabled: bool,
    seed: u64,
    evaluator: &mut dyn UtteranceEvaluator,
) -> Result<PassResult> {
    if budget == 0 {
        return Err(Error::InvalidSpec("pass budget must be >= 1".into()));
    }
    // Utterance roles: everything known so far plus what this pass frees,
    // in canonical order.
    let mut roles: Vec<SlotRole> = fixed.keys().copied().chain(produced_now.iter().copied()).collect();
    roles.sort_by_key(|r| match r {
        SlotRole::C1 => 0,
        SlotRole::C2 => 1,
        SlotRole::V => 2,
    });

    let search = pass_search_space(ctx.space, produced_now)?;
    let mut opt = TpeOptimizer::new(search, TpeConfig { seed, ..ctx.tpe });

    let fail_cap = ctx.fail_cap_factor.saturating_mul(budget);
    let mut evaluations = Vec::new();
    let mut synthesized = 0usize;
    let mut gate_failures = 0usize;
    let mut best: Option<(f64, UtteranceSpec, Percept)> = None;
    let mut iter = 0usize;

    while synthesized < budget {
        let point = opt.suggest();
        let spec = build_spec(ctx, syllable, &roles, fixed, produced_now, &point)?;
        let goal = pass_goal(ctx, syllable, &spec, coart_enabled)?;
        let outcome = evaluator.evaluate(&spec, &goal)?;

        if outcome.loss.gated {
            gate_failures += 1;
        } else {
            synthesized += 1;
            let percept = outcome
                .percept
                .clone()
                .ok_or_else(|| Error::InvalidSpec("ungated evaluation lacks a percept".into()))?;
            if best.as_ref().map_or(true, |(b, _, _)| outcome.loss.total < *b) {
                best = Some((outcome.loss.total, spec.clone(), percept));
            }
        }
        opt.observe(point.clone(), outcome.loss.total)?;
        evaluations.push(EvalRecord {
            iter,
            loss: outcome.loss,
            point,
        });
        iter += 1;

        if gate_failures > fail_cap {
            return Err(Error::PassExhausted(format!(
                "{} gate failures with {synthesized}/{budget} evaluations spent",
                gate_failures
            )));
        }
    }

    let (best_loss, best_spec, best_percept) = best.expect("budget >= 1 synthesized evaluation");
    let mut fixed_targets = fixed.clone();
    for (seg, role) in best_spec.segments.iter().zip(&roles) {
        if produced_now.contains(role) {
            fixed_targets.insert(*role, seg.target.clone());
        }
    }
    Ok(PassResult {
        fixed_targets,
        best_spec,
        best_loss,
        best_percept,
        evaluations,
        synthesized,
        gate_failures,
    })
}

/// Completion state of a trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Completed,
    /// A pass ran out of gate-failure headroom; `pass` is its index.
    Exhausted { pass: usize },
}

/// Everything a finished trial knows.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub syllable: Syllable,
    pub strategy: StrategySpec,
    pub seed: u64,
    pub passes: Vec<PassResult>,
    pub status: TrialStatus,
}

impl TrialOutcome {
    pub fn final_pass(&self) -> Option<&PassResult> {
        match self.status {
            TrialStatus::Completed => self.passes.last(),
            TrialStatus::Exhausted { .. } => None,
        }
    }
}

fn pass_seed(trial_seed: u64, pass_idx: usize) -> u64 {
    trial_seed ^ (pass_idx as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs a full strategy: its passes in order, carrying the best targets
/// forward. Pass exhaustion marks the trial failed instead of propagating.
pub fn run_strategy(
    ctx: &TrialContext,
    syllable: &Syllable,
    strategy: &StrategySpec,
    seed: u64,
    evaluator: &mut dyn UtteranceEvaluator,
) -> Result<TrialOutcome> {
    for role in [SlotRole::C1, SlotRole::C2, SlotRole::V] {
        let symbol = syllable.symbol(role);
        let phone = ctx.phones.get(symbol)?;
        let want = if role == SlotRole::V {
            PhoneKind::Vowel
        } else {
            PhoneKind::Consonant
        };
        if phone.kind != want {
            return Err(Error::InvalidSpec(format!(
                "`{symbol}` cannot fill the {role:?} slot"
            )));
        }
    }

    let budgets = budget_split(strategy);
    let plan = strategy.kind.pass_plan();
    let mut fixed: BTreeMap<SlotRole, Target> = BTreeMap::new();
    let mut passes = Vec::with_capacity(plan.len());
    for (pi, (produced, budget)) in plan.iter().zip(&budgets).enumerate() {
        match run_pass(
            ctx,
            syllable,
            produced,
            &fixed,
            *budget,
            strategy.coart_enabled,
            pass_seed(seed, pi),
            evaluator,
        ) {
            Ok(result) => {
                fixed = result.fixed_targets.clone();
                passes.push(result);
            }
            Err(Error::PassExhausted(_)) => {
                return Ok(TrialOutcome {
                    syllable: syllable.clone(),
                    strategy: *strategy,
                    seed,
                    passes,
                    status: TrialStatus::Exhausted { pass: pi },
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(TrialOutcome {
        syllable: syllable.clone(),
        strategy: *strategy,
        seed,
        passes,
        status: TrialStatus::Completed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_split_matches_stated_ratios() {
        let spec = |kind, total_budget| StrategySpec {
            kind,
            total_budget,
            coart_enabled: false,
        };
        assert_eq!(budget_split(&spec(StrategyKind::Joint, 5000)), vec![5000]);
        assert_eq!(
            budget_split(&spec(StrategyKind::VThenC1c2, 5000)),
            vec![1000, 4000]
        );
        assert_eq!(
            budget_split(&spec(StrategyKind::VThenC1ThenC2, 5000)),
            vec![1000, 2000, 2000]
        );
        assert_eq!(
            budget_split(&spec(StrategyKind::VThenC2ThenC1, 7)),
            vec![1, 2, 4]
        );
    }

    fn test_ctx<'a>(
        space: &'a ArticulatorySpace,
        phones: &'a PhoneSet,
        inventory: &'a Inventory,
    ) -> TrialContext<'a> {
        TrialContext {
            space,
            phones,
            inventory,
            consonant_duration: 0.12,
            vowel_duration: 0.3,
            tpe: TpeConfig {
                n_startup: 16,
                ..TpeConfig::default()
            },
            fail_cap_factor: 50,
        }
    }

    /// Gate fails for the first `fail_first` calls, then always passes with
    /// a loss that decreases over time.
    struct ScriptedEvaluator {
        calls: usize,
        fail_first: usize,
        inventory: Inventory,
    }

    impl UtteranceEvaluator for ScriptedEvaluator {
        fn evaluate(&mut self, _spec: &UtteranceSpec, goal: &Goal) -> Result<EvalOutcome> {
            self.calls += 1;
            if self.calls <= self.fail_first {
                let achieved: Vec<f64> = goal.artic_targets().iter().map(|t| 1.0 - t).collect();
                return Ok(EvalOutcome {
                    loss: penalty_loss(goal, &achieved, &ObjectiveConfig::default()),
                    percept: None,
                });
            }
            let _ = &self.inventory;
            let achieved = goal.artic_targets();
            let loss =
                compose_loss(goal, &goal.auditory, &achieved, &ObjectiveConfig::default())?;
            Ok(EvalOutcome {
                loss,
                percept: Some(goal.auditory.clone()),
            })
        }
    }

    #[test]
    fn gate_failures_do_not_consume_budget() {
        let space = ArticulatorySpace::builtin();
        let phones = PhoneSet::builtin();
        let inventory = Inventory::builtin();
        let ctx = test_ctx(&space, &phones, &inventory);
        let mut ev = ScriptedEvaluator {
            calls: 0,
            fail_first: 4,
            inventory: inventory.clone(),
        };
        let result = run_pass(
            &ctx,
            &Syllable::new("p", "l", "aa"),
            &[SlotRole::C1, SlotRole::C2, SlotRole::V],
            &BTreeMap::new(),
            10,
            false,
            7,
            &mut ev,
        )
        .unwrap();
        assert_eq!(result.synthesized, 10);
        assert_eq!(result.gate_failures, 4);
        assert!(result.evaluations.len() >= 14);
        assert_eq!(result.evaluations.len(), ev.calls);
    }

    #[test]
    fn exhaustion_cap_stops_hopeless_passes() {
        let space = ArticulatorySpace::builtin();
        let phones = PhoneSet::builtin();
        let inventory = Inventory::builtin();
        let mut ctx = test_ctx(&space, &phones, &inventory);
        ctx.fail_cap_factor = 3;
        let mut ev = ScriptedEvaluator {
            calls: 0,
            fail_first: usize::MAX,
            inventory: inventory.clone(),
        };
        let r = run_pass(
            &ctx,
            &Syllable::new("p", "l", "aa"),
            &[SlotRole::V],
            &BTreeMap::new(),
            2,
            false,
            7,
            &mut ev,
        );
        assert!(matches!(r, Err(Error::PassExhausted(_))));

        // Through run_strategy the same situation marks the trial failed.
        let out = run_strategy(
            &ctx,
            &Syllable::new("p", "l", "aa"),
            &StrategySpec {
                kind: StrategyKind::VThenC1c2,
                total_budget: 10,
                coart_enabled: false,
            },
            7,
            &mut ScriptedEvaluator {
                calls: 0,
                fail_first: usize::MAX,
                inventory: inventory.clone(),
            },
        )
        .unwrap();
        assert_eq!(out.status, TrialStatus::Exhausted { pass: 0 });
        assert!(out.final_pass().is_none());
    }

    #[test]
    fn search_dimensionality_counts() {
        let space = ArticulatorySpace::builtin();
        let joint = pass_search_space(&space, &[SlotRole::C1, SlotRole::C2, SlotRole::V]).unwrap();
        assert_eq!(joint.len(), 3 * 16 + 4);
        let onset = pass_search_space(&space, &[SlotRole::C1, SlotRole::C2]).unwrap();
        assert_eq!(onset.len(), 2 * 16 + 4);
        let vowel = pass_search_space(&space, &[SlotRole::V]).unwrap();
        assert_eq!(vowel.len(), 16 + 4);
    }

    /// Records the specs it sees so the fixed-target contract is checkable.
    struct SpyEvaluator {
        inventory: Inventory,
        vowel_targets: Vec<Target>,
    }

    impl UtteranceEvaluator for SpyEvaluator {
        fn evaluate(&mut self, spec: &UtteranceSpec, goal: &Goal) -> Result<EvalOutcome> {
            if let Some(seg) = spec.segments.iter().find(|s| s.role == SlotRole::V) {
                self.vowel_targets.push(seg.target.clone());
            }
            let achieved = goal.artic_targets();
            let loss =
                compose_loss(goal, &goal.auditory, &achieved, &ObjectiveConfig::default())?;
            let _ = &self.inventory;
            Ok(EvalOutcome {
                loss,
                percept: Some(goal.auditory.clone()),
            })
        }
    }

    #[test]
    fn fixed_vowel_target_is_carried_verbatim() {
        let space = ArticulatorySpace::builtin();
        let phones = PhoneSet::builtin();
        let inventory = Inventory::builtin();
        let ctx = test_ctx(&space, &phones, &inventory);
        let vowel_target = phones.target(&space, "aa").unwrap();
        let mut fixed = BTreeMap::new();
        fixed.insert(SlotRole::V, vowel_target.clone());
        let mut ev = SpyEvaluator {
            inventory: inventory.clone(),
            vowel_targets: Vec::new(),
        };
        run_pass(
            &ctx,
            &Syllable::new("p", "l", "aa"),
            &[SlotRole::C1, SlotRole::C2],
            &fixed,
            5,
            false,
            3,
            &mut ev,
        )
        .unwrap();
        assert!(!ev.vowel_targets.is_empty());
        for t in &ev.vowel_targets {
            assert_eq!(t, &vowel_target);
        }
    }

    #[test]
    fn v_then_c2_then_c1_produces_c2v_in_second_pass() {
        let plan = StrategyKind::VThenC2ThenC1.pass_plan();
        assert_eq!(plan, vec![vec![SlotRole::V], vec![SlotRole::C2], vec![SlotRole::C1]]);
    }

    #[test]
    fn best_loss_is_monotone_under_perfect_percepts() {
        let space = ArticulatorySpace::builtin();
        let phones = PhoneSet::builtin();
        let inventory = Inventory::builtin();
        let ctx = test_ctx(&space, &phones, &inventory);
        let mut ev = ScriptedEvaluator {
            calls: 0,
            fail_first: 0,
            inventory: inventory.clone(),
        };
        let result = run_pass(
            &ctx,
            &Syllable::new("p", "l", "aa"),
            &[SlotRole::V],
            &BTreeMap::new(),
            6,
            false,
            9,
            &mut ev,
        )
        .unwrap();
        // The scripted evaluator returns exact matches, so the best loss is 0
        // from the first synthesized evaluation on.
        assert_eq!(result.best_loss, 0.0);
    }
}
