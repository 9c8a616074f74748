//! Calibrates the mel prototype bank, persists it, and encodes a rendered
//! utterance against it.
//!
//! Run with: `cargo run --release --example encode_with_prototypes`

use babblekit::artic::ArticulatorySpace;
use babblekit::percept::{encode, identify, CalibrationConfig, Inventory, MelConfig, PrototypeBank};
use babblekit::phones::PhoneSet;
use babblekit::tam::SlotRole;

fn main() -> babblekit::Result<()> {
    let space = ArticulatorySpace::builtin();
    let phones = PhoneSet::builtin();
    let inventory = Inventory::builtin();
    let frontend = MelConfig::default();
    let cal = CalibrationConfig::default();

    println!("rendering {} prototypes...", 2 * inventory.consonants.len() + inventory.vowels.len());
    let bank = PrototypeBank::calibrate(&space, &phones, &inventory, &frontend, &cal)?;
    let dir = std::path::Path::new("bank");
    bank.save(dir)?;
    println!("saved bank to {}/ (hash {})", dir.display(), &bank.content_hash[..16]);

    // Encode a fresh rendition of /t aa/ and read the percept.
    let audio = PrototypeBank::render_audio(&space, &phones, "t", SlotRole::C1, &frontend, &cal)?;
    let percept = encode(&audio, &bank, 0.1)?;
    let (c1, c2, v) = identify(&percept, &inventory);
    println!("/t aa/ rendition identified as c1=/{c1}/ c2=/{c2}/ v=/{v}/");

    let top = |q: &[f64], symbols: &[String]| -> Vec<(String, f64)> {
        let mut pairs: Vec<(String, f64)> = symbols.iter().cloned().zip(q.iter().copied()).collect();
        pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        pairs.truncate(3);
        pairs
    };
    println!("top c1 hypotheses: {:?}", top(&percept.q_c1, &inventory.consonants));
    println!("top v hypotheses:  {:?}", top(&percept.q_v, &inventory.vowels));
    Ok(())
}
