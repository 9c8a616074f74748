//! Renders /pla/ with the built-in waveguide and writes a WAV file.
//!
//! Run with: `cargo run --example synthesize_syllable`

use babblekit::artic::ArticulatorySpace;
use babblekit::phones::PhoneSet;
use babblekit::tam::{generate_trajectory, GlottalFree, SegmentPlan, SlotRole, UtteranceSpec};
use babblekit::vtsynth::{synthesize, write_wav, GlottalSource};

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
            plan("aa", 0.35, SlotRole::V)?,
        ],
        tau_supra: 0.015,
        tau_glottal: 0.012,
        glottal: GlottalFree {
            chink_area: 0.45,
            relative_amplitude: 0.9,
        },
    };

    let traj = generate_trajectory(&space, &spec, 1000.0)?;
    let glottal = GlottalSource {
        noise_seed: 7,
        ..GlottalSource::default()
    };
    let audio = synthesize(&space, &traj, &glottal, 44_100.0)?;
    let path = std::path::Path::new("pla.wav");
    write_wav(path, &audio)?;
    println!(
        "wrote {} ({:.2} s, rms {:.4}, peak {:.3})",
        path.display(),
        audio.duration(),
        audio.rms(),
        audio.samples.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    );
    Ok(())
}
