//! Drives the external synthesizer adapter against a small mock child
//! process (Python) that answers the line-delimited JSON protocol.
//!
//! Run with: `cargo run --example external_adapter`

use babblekit::artic::ArticulatorySpace;
use babblekit::phones::PhoneSet;
use babblekit::tam::{GlottalFree, SegmentPlan, SlotRole, UtteranceSpec};
use babblekit::vtsynth::{read_wav, ExternalSynth};

const MOCK: &str = r#"
import json, struct, sys, math, tempfile, os
for line in sys.stdin:
    req = json.loads(line)
    rate = int(req["sample_rate"])
    n = int(sum(req["durations"]) * rate)
    amp = req["glottal"]["relative_amplitude"]
    data = b"".join(struct.pack("<h", int(12000 * amp * math.sin(2 * math.pi * 150 * i / rate))) for i in range(n))
    fd, path = tempfile.mkstemp(suffix=".wav"); os.close(fd)
    with open(path, "wb") as f:
        f.write(b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE")
        f.write(b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, rate, rate * 2, 2, 16))
        f.write(b"data" + struct.pack("<I", len(data)) + data)
    print(json.dumps({"wav_path": path, "tube_min_area": 1.5, "lip_area": 2.0}), flush=True)
"#;

fn main() -> babblekit::Result<()> {
    if std::process::Command::new("python3").arg("--version").output().is_err() {
        println!("python3 not available; skipping the adapter demo");
        return Ok(());
    }
    let space = ArticulatorySpace::builtin();
    let phones = PhoneSet::builtin();
    let spec = UtteranceSpec {
        segments: vec![SegmentPlan {
            target: phones.target(&space, "aa")?,
            duration: 0.2,
            class: babblekit::tam::SegmentClass::Vowel,
            role: SlotRole::V,
        }],
        tau_supra: 0.02,
        tau_glottal: 0.015,
        glottal: GlottalFree {
            chink_area: 0.1,
            relative_amplitude: 0.8,
        },
    };

    let mut synth = ExternalSynth::spawn("python3", &["-c".to_string(), MOCK.to_string()])?;
    let result = synth.synthesize(&spec, 44_100.0)?;
    println!(
        "external synthesizer answered: wav at {}, min area {:.2} cm^2, lips {:.2} cm^2",
        result.wav_path, result.tube_min_area, result.lip_area
    );
    let audio = read_wav(std::path::Path::new(&result.wav_path))?;
    println!("decoded {} samples at {} Hz (rms {:.3})", audio.samples.len(), audio.sample_rate, audio.rms());
    std::fs::remove_file(&result.wav_path)?;
    Ok(())
}
