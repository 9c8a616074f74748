//! Generates the control trajectory of a /pla/ utterance and writes it as a
//! CSV table for plotting.
//!
//! Run with: `cargo run --example tam_trajectory`

use babblekit::artic::ArticulatorySpace;
use babblekit::phones::PhoneSet;
use babblekit::tam::{generate_trajectory, GlottalFree, SegmentPlan, SlotRole, UtteranceSpec};

fn main() -> babblekit::Result<()> {
    let space = ArticulatorySpace::builtin();
    let phones = PhoneSet::builtin();

    let plan = |symbol: &str, duration: f64, role: SlotRole| -> babblekit::Result<SegmentPlan> {
        Ok(SegmentPlan {
            target: phones.target(&space, symbol)?,
            duration,
            class: phones.get(symbol)?.segment_class(),
            role,
        })
    };
    let spec = UtteranceSpec {
        segments: vec![
            plan("p", 0.12, SlotRole::C1)?,
            plan("l", 0.12, SlotRole::C2)?,
            plan("aa", 0.30, SlotRole::V)?,
        ],
        tau_supra: 0.015,
        tau_glottal: 0.012,
        glottal: GlottalFree {
            chink_area: 0.4,
            relative_amplitude: 0.9,
        },
    };

    let traj = generate_trajectory(&space, &spec, 1000.0)?;
    let path = std::path::Path::new("pla_trajectory.csv");
    traj.write_csv(std::fs::File::create(path)?)?;
    println!(
        "wrote {} ({} frames x {} channels)",
        path.display(),
        traj.len(),
        traj.names.len()
    );

    // A handful of landmark frames on the LD (lip distance) channel: closed
    // for /p/, reopening through /l/ into the vowel.
    let ld = traj.names.iter().position(|n| n == "LD").unwrap();
    for t in [0.02, 0.08, 0.14, 0.2, 0.35] {
        let frame = traj.sample_at(t);
        println!("t = {t:.2} s  LD = {:+.3}  RA = {:+.3}", frame[ld], frame[traj.n_supra + 1]);
    }
    Ok(())
}
