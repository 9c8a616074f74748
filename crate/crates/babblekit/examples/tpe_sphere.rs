//! Minimizes a 6-D sphere with the TPE optimizer and compares against
//! uniform random search at the same budget.
//!
//! Run with: `cargo run --release --example tpe_sphere`

use babblekit::tpe::{bench, SearchSpace, TpeConfig, TpeOptimizer};

fn main() -> babblekit::Result<()> {
    // One visible run.
    let space = SearchSpace::new((0..6).map(|i| (format!("x{i}"), -5.0, 5.0)).collect())?;
    let mut opt = TpeOptimizer::new(space, TpeConfig { seed: 1, ..TpeConfig::default() });
    for i in 0..500 {
        let p = opt.suggest();
        let loss = bench::sphere(&p);
        opt.observe(p, loss)?;
        if (i + 1) % 100 == 0 {
            println!("after {:>4} evaluations: best = {:.5}", i + 1, opt.best()?.1);
        }
    }

    // Median comparison over seeds.
    let seeds = 10;
    let tpe: Vec<f64> = (0..seeds).map(|s| bench::tpe_best(6, 500, s)).collect();
    let rnd: Vec<f64> = (0..seeds).map(|s| bench::random_best(6, 500, s)).collect();
    println!();
    println!(
        "median best over {seeds} seeds: tpe {:.4} vs random {:.4} (ratio {:.3})",
        bench::median(tpe.clone()),
        bench::median(rnd.clone()),
        bench::median(tpe) / bench::median(rnd)
    );
    Ok(())
}
