//! Forward model: articulatory trajectories to tube geometry and audio.

pub mod adapter;
pub mod area;
pub mod wav;
pub mod waveguide;

pub use adapter::{ExternalResult, ExternalSynth};
pub use area::{
    area_function, section_length_for_rate, tube_features, AreaFunction, Region, Tract, TractMap,
    TubeFeatures, DEFAULT_AUDIO_RATE,
};
pub use wav::{read_wav, write_wav};
pub use waveguide::{synthesize, AudioBuffer, GlottalSource, Waveguide};
