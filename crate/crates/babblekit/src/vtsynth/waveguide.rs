//! Two-rail scattering-junction waveguide over the tube areas.
//!
//! Each tube section is half a sample of travel at the output rate, so the
//! rails advance twice per output sample. Reflection coefficients between
//! sections are `r = (A_i - A_{i+1}) / (A_i + A_{i+1})`; a zero-area section
//! reflects totally, so nothing propagates past a closure. The glottal end
//! reflects with +0.97, the lip end with -0.9, and the radiated signal is the
//! first difference of the transmitted lip wave.

use super::area::Tract;
use crate::artic::ArticulatorySpace;
use crate::error::{Error, Result};
use crate::tam::Trajectory;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Boundary reflection at the glottis.
pub const GLOTTAL_REFLECTION: f64 = 0.97;
/// Boundary reflection at the lips.
pub const LIP_REFLECTION: f64 = -0.9;
/// Per-substep rail damping.
const RAIL_DAMPING: f64 = 0.9995;
/// Peak level after normalization.
const PEAK_TARGET: f64 = 0.95;

/// Fixed source behavior; only the seed and gains vary between runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlottalSource {
    /// Fundamental frequency of the pulse train, Hz.
    pub f0: f64,
    /// Seed of the aspiration noise generator.
    pub noise_seed: u64,
    /// Aspiration noise amplitude per cm^2 of chink area.
    pub noise_gain: f64,
    /// Voiced pulse amplitude at relative amplitude 1.
    pub pulse_gain: f64,
}

impl Default for GlottalSource {
    fn default() -> Self {
        GlottalSource {
            f0: 120.0,
            noise_seed: 0,
            noise_gain: 0.25,
            pulse_gain: 1.0,
        }
    }
}

/// Rendered audio.
#[derive(Debug, Clone)]
pub struct AudioBuffer {
    pub sample_rate: f64,
    pub samples: Vec<f64>,
}

impl AudioBuffer {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64).sqrt()
    }
}

/// Rosenberg-style glottal flow pulse on phase [0, 1): raised-cosine opening
/// over the first 40% of the cycle, cosine closing over the next 16%.
pub fn rosenberg_pulse(phase: f64) -> f64 {
    const OPEN: f64 = 0.40;
    const CLOSE: f64 = 0.16;
    if phase < OPEN {
        0.5 * (1.0 - (std::f64::consts::PI * phase / OPEN).cos())
    } else if phase < OPEN + CLOSE {
        (std::f64::consts::PI * (phase - OPEN) / (2.0 * CLOSE)).cos()
    } else {
        0.0
    }
}

/// The bare waveguide, stepping over externally supplied areas. Public so
/// the resonance behavior can be driven directly (e.g. impulse responses).
pub struct Waveguide {
    right: Vec<f64>,
    left: Vec<f64>,
    next_right: Vec<f64>,
    next_left: Vec<f64>,
    reflections: Vec<f64>,
}

impl Waveguide {
    pub fn new(sections: usize) -> Waveguide {
        Waveguide {
            right: vec![0.0; sections],
            left: vec![0.0; sections],
            next_right: vec![0.0; sections],
            next_left: vec![0.0; sections],
            reflections: vec![0.0; sections.saturating_sub(1)],
        }
    }

    pub fn sections(&self) -> usize {
        self.right.len()
    }

    /// Recomputes junction reflections from section areas.
    pub fn set_areas(&mut self, areas: &[f64]) {
        debug_assert_eq!(areas.len(), self.right.len());
        for i in 0..self.reflections.len() {
            let (a, b) = (areas[i], areas[i + 1]);
            self.reflections[i] = if a + b > 0.0 { (a - b) / (a + b) } else { 0.0 };
        }
    }

    /// Advances one half-sample step with `source` injected at the glottis;
    /// returns the transmitted lip wave. All junction updates read the
    /// pre-step rails, so waves advance exactly one section per step.
    pub fn step(&mut self, source: f64) -> f64 {
        let n = self.right.len();
        let transmitted = (1.0 + LIP_REFLECTION) * self.right[n - 1];
        for i in 1..n {
            let w = self.reflections[i - 1] * (self.right[i - 1] + self.left[i]);
            self.next_right[i] = (self.right[i - 1] - w) * RAIL_DAMPING;
            self.next_left[i - 1] = (self.left[i] + w) * RAIL_DAMPING;
        }
        self.next_right[0] = (source + GLOTTAL_REFLECTION * self.left[0]) * RAIL_DAMPING;
        self.next_left[n - 1] = LIP_REFLECTION * self.right[n - 1] * RAIL_DAMPING;
        std::mem::swap(&mut self.right, &mut self.next_right);
        std::mem::swap(&mut self.left, &mut self.next_left);
        transmitted
    }
}

/// Renders an utterance trajectory to audio.
///
/// Control frames are interpolated linearly per audio sample; areas are
/// evaluated on a fixed grid sized from the first frame's tract length, so
/// the delay-line length stays constant within an utterance.
pub fn synthesize(
    space: &ArticulatorySpace,
    traj: &Trajectory,
    glottal: &GlottalSource,
    audio_rate: f64,
) -> Result<AudioBuffer> {
    let tract = Tract::with_defaults(space)?;
    synthesize_with(&tract, space, traj, glottal, audio_rate)
}

pub fn synthesize_with(
    tract: &Tract,
    space: &ArticulatorySpace,
    traj: &Trajectory,
    glottal: &GlottalSource,
    audio_rate: f64,
) -> Result<AudioBuffer> {
    if traj.is_empty() {
        return Err(Error::Audio("trajectory is empty".into()));
    }
    if space.len() != traj.n_supra {
        return Err(Error::SpaceMismatch {
            got: traj.n_supra,
            want: space.len(),
        });
    }

    let section_length = super::area::section_length_for_rate(audio_rate);
    let n = ((tract.length(traj.supra(0)) / section_length).round() as usize).max(8);

    // Per-control-frame areas on the fixed grid.
    let mut frame_areas: Vec<Vec<f64>> = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let mut buf = Vec::with_capacity(n);
        tract.areas_on_grid(traj.supra(k), n, &mut buf);
        frame_areas.push(buf);
    }

    let n_samples = (traj.duration() * audio_rate).round() as usize;
    let mut wg = Waveguide::new(n);
    let mut rng = ChaCha8Rng::seed_from_u64(glottal.noise_seed);
    let mut phase: f64 = 0.0;
    let dphase = glottal.f0 / (2.0 * audio_rate);

    let mut areas = vec![0.0; n];
    let mut samples = Vec::with_capacity(n_samples);
    let mut prev_lip = 0.0;
    for s in 0..n_samples {
        let t = s as f64 / audio_rate;
        let pos = (t * traj.sample_rate).min((traj.len() - 1) as f64);
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        let j = (i + 1).min(traj.len() - 1);
        for q in 0..n {
            areas[q] = frame_areas[i][q] + frac * (frame_areas[j][q] - frame_areas[i][q]);
        }
        wg.set_areas(&areas);

        let ca = traj.chink_area(i) + frac * (traj.chink_area(j) - traj.chink_area(i));
        let ra = traj.relative_amplitude(i)
            + frac * (traj.relative_amplitude(j) - traj.relative_amplitude(i));

        let mut lip = 0.0;
        for _ in 0..2 {
            let pulse = glottal.pulse_gain * ra * rosenberg_pulse(phase);
            let noise = glottal.noise_gain * ca * (rng.gen::<f64>() * 2.0 - 1.0);
            lip += 0.5 * wg.step(pulse + noise);
            phase += dphase;
            if phase >= 1.0 {
                phase -= 1.0;
            }
        }
        let out = lip - prev_lip;
        prev_lip = lip;
        if !out.is_finite() {
            return Err(Error::Instability(s));
        }
        samples.push(out);
    }

    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > PEAK_TARGET {
        let g = PEAK_TARGET / peak;
        for s in &mut samples {
            *s *= g;
        }
    }
    Ok(AudioBuffer {
        sample_rate: audio_rate,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artic::ArticulatorySpace;
    use crate::tam::Trajectory;

    fn constant_trajectory(space: &ArticulatorySpace, frame: Vec<f64>, ca: f64, ra: f64, dur: f64) -> Trajectory {
        let rate = 1000.0;
        let mut row = frame;
        row.push(ca);
        row.push(ra);
        let n = (dur * rate) as usize;
        let mut names: Vec<String> = space.dimensions.iter().map(|d| d.name.clone()).collect();
        names.push("CA".into());
        names.push("RA".into());
        Trajectory {
            sample_rate: rate,
            names,
            n_supra: space.len(),
            frames: vec![row; n],
        }
    }

    /// Impulse response peaks of the uniform neutral tube sit near the odd
    /// quarter-wavelength resonances (2k-1)c/4L = 500, 1500, 2500 Hz.
    #[test]
    fn uniform_tube_formants() {
        let space = ArticulatorySpace::builtin();
        let tract = Tract::with_defaults(&space).unwrap();
        let rate = 44_100.0;
        let n = ((tract.map.l0 / super::super::area::section_length_for_rate(rate)).round()
            as usize)
            .max(8);
        let mut wg = Waveguide::new(n);
        wg.set_areas(&vec![3.0; n]);

        let len = 1 << 15;
        let mut response = Vec::with_capacity(len);
        for s in 0..len {
            let mut lip = 0.0;
            for sub in 0..2 {
                let src = if s == 0 && sub == 0 { 1.0 } else { 0.0 };
                lip += 0.5 * wg.step(src);
            }
            response.push(lip);
        }

        let spectrum = crate::percept::mel::power_spectrum(&response);
        let bin_hz = rate / len as f64;
        let peaks = spectral_peaks(&spectrum, bin_hz, 200.0, 3500.0);
        assert!(peaks.len() >= 3, "found peaks {peaks:?}");
        for (found, expect) in peaks.iter().zip([500.0, 1500.0, 2500.0]) {
            let rel = (found - expect).abs() / expect;
            assert!(rel < 0.05, "peak {found} vs {expect}");
        }
    }

    fn spectral_peaks(power: &[f64], bin_hz: f64, lo: f64, hi: f64) -> Vec<f64> {
        let mut peaks = Vec::new();
        for i in 2..power.len() - 2 {
            let f = i as f64 * bin_hz;
            if f < lo || f > hi {
                continue;
            }
            if power[i] > power[i - 1]
                && power[i] >= power[i + 1]
                && power[i] > power[i - 2]
                && power[i] > power[i + 2]
            {
                peaks.push(f);
            }
        }
        peaks
    }

    #[test]
    fn full_closure_transmits_nothing() {
        let space = ArticulatorySpace::builtin();
        let closed = space.neutral_target().with(&space, "LD", 0.0).unwrap();
        let traj = constant_trajectory(&space, closed.values, 0.0, 1.0, 0.4);
        let audio = synthesize(&space, &traj, &GlottalSource::default(), 44_100.0).unwrap();
        assert!(audio.rms() < 1e-4, "rms: {}", audio.rms());
    }

    #[test]
    fn no_source_energy_means_silence() {
        let space = ArticulatorySpace::builtin();
        let traj = constant_trajectory(&space, space.neutral_target().values, 0.0, 0.0, 0.2);
        let audio = synthesize(&space, &traj, &GlottalSource::default(), 44_100.0).unwrap();
        assert_eq!(audio.rms(), 0.0);
    }

    #[test]
    fn output_is_bounded_and_deterministic() {
        let space = ArticulatorySpace::builtin();
        let traj = constant_trajectory(&space, space.neutral_target().values, 0.3, 0.9, 0.3);
        let glottal = GlottalSource {
            noise_seed: 42,
            ..GlottalSource::default()
        };
        let a = synthesize(&space, &traj, &glottal, 44_100.0).unwrap();
        let b = synthesize(&space, &traj, &glottal, 44_100.0).unwrap();
        assert_eq!(a.samples, b.samples);
        assert!(a.samples.iter().all(|s| s.abs() <= 1.0));
        assert!(a.rms() > 1e-4, "voiced neutral tube should radiate");
    }

    #[test]
    fn doubling_areas_preserves_reflections() {
        let mut a = Waveguide::new(8);
        let mut b = Waveguide::new(8);
        let areas: Vec<f64> = vec![3.0, 2.0, 1.0, 0.5, 1.5, 2.5, 3.0, 2.8];
        let doubled: Vec<f64> = areas.iter().map(|x| x * 2.0).collect();
        a.set_areas(&areas);
        b.set_areas(&doubled);
        assert_eq!(a.reflections, b.reflections);
    }

    #[test]
    fn empty_trajectory_is_an_error() {
        let space = ArticulatorySpace::builtin();
        let traj = Trajectory {
            sample_rate: 1000.0,
            names: vec![],
            n_supra: space.len(),
            frames: vec![],
        };
        assert!(synthesize(&space, &traj, &GlottalSource::default(), 44_100.0).is_err());
    }

    #[test]
    fn fuzzed_random_trajectories_stay_finite() {
        use rand::{Rng, SeedableRng};
        let space = ArticulatorySpace::builtin();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let unit: Vec<f64> = (0..space.free_indices().len()).map(|_| rng.gen()).collect();
            let target = space.denormalize(&unit).unwrap();
            let traj = constant_trajectory(&space, target.values, rng.gen::<f64>() * 0.8, rng.gen(), 0.15);
            let audio = synthesize(&space, &traj, &GlottalSource::default(), 22_050.0).unwrap();
            assert!(audio.samples.iter().all(|s| s.is_finite() && s.abs() <= 1.0));
        }
    }
}
