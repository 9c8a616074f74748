//! Runs one vowel-then-onset exploration trial for /pla/ with the
//! articulatory oracle percept and prints what each pass found.
//!
//! Run with: `cargo run --release --example explore_syllable`

use babblekit::artic::ArticulatorySpace;
use babblekit::explore::{
    run_strategy, PerceptBackend, PipelineEvaluator, StrategyKind, StrategySpec, Syllable,
    TrialContext,
};
use babblekit::objectives::ObjectiveConfig;
use babblekit::percept::{identify, Inventory, OracleConfig};
use babblekit::phones::PhoneSet;
use babblekit::tpe::TpeConfig;

fn main() -> babblekit::Result<()> {
    let space = ArticulatorySpace::builtin();
    let phones = PhoneSet::builtin();
    let inventory = Inventory::builtin();

    let ctx = TrialContext {
        space: &space,
        phones: &phones,
        inventory: &inventory,
        consonant_duration: 0.12,
        vowel_duration: 0.3,
        tpe: TpeConfig::default(),
        fail_cap_factor: 50,
    };
    let mut evaluator = PipelineEvaluator::new(
        &space,
        &phones,
        &inventory,
        ObjectiveConfig::default(),
        1000.0,
        PerceptBackend::Oracle(OracleConfig::default()),
    )?;

    let syllable = Syllable::new("p", "l", "aa");
    let strategy = StrategySpec {
        kind: StrategyKind::VThenC1c2,
        total_budget: 600,
        coart_enabled: false,
    };
    println!("exploring /{}/ with {} (budget {})", syllable.label(), strategy.kind.label(), strategy.total_budget);

    let outcome = run_strategy(&ctx, &syllable, &strategy, 2024, &mut evaluator)?;
    for (i, pass) in outcome.passes.iter().enumerate() {
        println!(
            "pass {}: best loss {:.4} after {} evaluations ({} gate failures)",
            i + 1,
            pass.best_loss,
            pass.synthesized,
            pass.gate_failures
        );
    }
    if let Some(last) = outcome.final_pass() {
        let (c1, c2, v) = identify(&last.best_percept, &inventory);
        println!("identified as /{c1} {c2} {v}/");
        println!(
            "controls: chink {:.3} cm^2, amplitude {:.3}, tau_supra {:.1} ms, tau_glottal {:.1} ms",
            last.best_spec.glottal.chink_area,
            last.best_spec.glottal.relative_amplitude,
            last.best_spec.tau_supra * 1000.0,
            last.best_spec.tau_glottal * 1000.0
        );
    } else {
        println!("trial failed: {:?}", outcome.status);
    }
    Ok(())
}
