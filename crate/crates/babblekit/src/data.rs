//! Default data shipped with the crate: articulatory space, phone
//! inventory, canonical phone articulations, and the syllable grid.
//!
//! All of these are plain JSON and can be overridden from files at runtime;
//! the embedded copies make the library usable with no setup.

/// Default articulatory space definition (dimension ranges are model
/// calibration data, chosen so the built-in tract covers fully open and
/// fully closed configurations; edit freely).
pub const SPACE_JSON: &str = include_str!("../data/space.json");

/// Default phone inventory: 24 consonants (index 0 is "absence") and 16
/// vowels.
pub const INVENTORY_JSON: &str = include_str!("../data/inventory.json");

/// Canonical articulatory configurations and phonetic features per symbol.
pub const PHONES_JSON: &str = include_str!("../data/phones.json");

/// The default CCV syllable grid (onset cluster x vowel combinations).
pub const SYLLABLES_JSON: &str = include_str!("../data/syllables.json");

/// Default experiment configuration.
pub const EXPERIMENT_JSON: &str = include_str!("../data/experiment.json");
