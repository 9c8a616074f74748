//! Compares consonant-vowel target distances with and without the
//! coarticulation objective on a few /p l V/ trials, including the per
//! dimension Welch test.
//!
//! Run with: `cargo run --release --example coart_objective`

use babblekit::artic::ArticulatorySpace;
use babblekit::explore::{
    run_strategy, PerceptBackend, PipelineEvaluator, StrategyKind, StrategySpec, Syllable,
    TrialContext,
};
use babblekit::harness::{coart_report, TrialRecord};
use babblekit::objectives::ObjectiveConfig;
use babblekit::percept::{Inventory, OracleConfig};
use babblekit::phones::PhoneSet;
use babblekit::tam::SlotRole;
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

    let mut records = Vec::new();
    for coart in [true, false] {
        for (i, v) in ["aa", "iy", "uw"].iter().enumerate() {
            for trial in 0..2 {
                let syllable = Syllable::new("p", "l", v);
                let strategy = StrategySpec {
                    kind: StrategyKind::VThenC1c2,
                    total_budget: 400,
                    coart_enabled: coart,
                };
                let mut evaluator = PipelineEvaluator::new(
                    &space,
                    &phones,
                    &inventory,
                    ObjectiveConfig::default(),
                    1000.0,
                    PerceptBackend::Oracle(OracleConfig::default()),
                )?;
                let seed = 1000 + (i * 10 + trial) as u64 + if coart { 500 } else { 0 };
                let outcome = run_strategy(&ctx, &syllable, &strategy, seed, &mut evaluator)?;
                records.push(TrialRecord::from_outcome(&outcome, trial, &space, &inventory)?);
                println!(
                    "/{}/ coart={coart} trial {trial}: status {:?}",
                    syllable.label(),
                    outcome.status
                );
            }
        }
    }

    let report = coart_report(&records, SlotRole::C1, &space)?;
    println!();
    println!("C1-V distance per dimension ({} vs {} records):", report.n_with, report.n_without);
    println!("{:>6} {:>10} {:>10} {:>9}", "dim", "with", "without", "p");
    for row in &report.rows {
        println!(
            "{:>6} {:>10.3} {:>10.3} {:>9.4}{}",
            row.dimension,
            row.mean_with,
            row.mean_without,
            row.p,
            if row.p < 0.05 && row.mean_with < row.mean_without { "  <-- reduced" } else { "" }
        );
    }
    Ok(())
}
