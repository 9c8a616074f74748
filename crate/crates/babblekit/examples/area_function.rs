//! Prints the tube area function and its features for a few canonical
//! articulations.
//!
//! Run with: `cargo run --example area_function`

use babblekit::artic::ArticulatorySpace;
use babblekit::phones::PhoneSet;
use babblekit::vtsynth::{area_function, tube_features};

fn main() -> babblekit::Result<()> {
    let space = ArticulatorySpace::builtin();
    let phones = PhoneSet::builtin();

    for symbol in ["ax", "aa", "iy", "uw", "p", "t", "k", "s", "l"] {
        let target = phones.target(&space, symbol)?;
        let af = area_function(&space, &target.values)?;
        let f = tube_features(&af);
        println!(
            "/{symbol}/: {} sections x {:.3} cm, min {:.2} cm^2 ({}), lips {:.2} cm^2",
            af.sections.len(),
            af.section_length,
            f.min_area,
            f.min_area_region,
            f.lip_area
        );
        println!("  {}", sparkline(&af.sections, 3.0));
    }
    Ok(())
}

/// Coarse text rendering of the area profile, glottis on the left.
fn sparkline(sections: &[f64], max: f64) -> String {
    const LEVELS: &[char] = &[' ', '.', ':', '-', '=', '+', '*', '#'];
    sections
        .iter()
        .map(|&a| {
            let i = ((a / max) * (LEVELS.len() - 1) as f64).round() as usize;
            LEVELS[i.min(LEVELS.len() - 1)]
        })
        .collect()
}
