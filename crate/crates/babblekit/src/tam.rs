//! Target-approximation trajectory generation.
//!
//! Each control dimension follows a critically damped third-order response
//! toward the active segment's target,
//!
//! ```text
//! y(t) = (c0 + c1 t + c2 t^2) e^(-t/tau) + target
//! ```
//!
//! with the coefficients chosen so that value, velocity and acceleration are
//! continuous at every segment onset. Upper vocal tract dimensions share one
//! time constant, the two glottal controls another.

use crate::artic::{ArticulatorySpace, Target};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Names of the two glottal trajectory channels appended after the
/// articulatory dimensions.
pub const GLOTTAL_CHANNELS: [&str; 2] = ["CA", "RA"];

/// Delay before the glottal targets switch to voicing after a voiceless
/// segment. Together with the optimized glottal time constant this shapes
/// the voice onset time.
pub const VOT_DELAY_S: f64 = 0.040;

/// Fraction of the chink-area range used as the preset chink during voiced
/// segments (a small constant leak).
const CA_VOICED_FRAC: f64 = 0.06;

/// Laryngeal behavior of a segment, selecting its glottal preset targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentClass {
    Vowel,
    Voiced,
    Voiceless,
}

impl SegmentClass {
    pub fn is_voiceless(self) -> bool {
        matches!(self, SegmentClass::Voiceless)
    }
}

/// Which percept slot a segment occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotRole {
    C1,
    C2,
    V,
}

/// One planned segment: a static articulatory target held for a duration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentPlan {
    pub target: Target,
    pub duration: f64,
    pub class: SegmentClass,
    pub role: SlotRole,
}

/// Utterance-level free glottal controls.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GlottalFree {
    pub chink_area: f64,
    pub relative_amplitude: f64,
}

/// A full utterance plan: the optimizer's search point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UtteranceSpec {
    pub segments: Vec<SegmentPlan>,
    pub tau_supra: f64,
    pub tau_glottal: f64,
    pub glottal: GlottalFree,
}

impl UtteranceSpec {
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn validate(&self, space: &ArticulatorySpace) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidSpec("utterance has no segments".into()));
        }
        for seg in &self.segments {
            if !(seg.duration > 0.0) {
                return Err(Error::InvalidSpec("segment duration must be > 0".into()));
            }
            space.check_target(&seg.target)?;
        }
        if !(self.tau_supra > 0.0) || !(self.tau_glottal > 0.0) {
            return Err(Error::InvalidSpec("time constants must be > 0".into()));
        }
        let c = &space.controls;
        if !c.chink_area.contains(self.glottal.chink_area)
            || !c.relative_amplitude.contains(self.glottal.relative_amplitude)
        {
            return Err(Error::InvalidSpec("glottal controls outside bounds".into()));
        }
        Ok(())
    }

    /// Segment start times, in utterance time.
    pub fn segment_starts(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.segments
            .iter()
            .map(|s| {
                let start = t;
                t += s.duration;
                start
            })
            .collect()
    }
}

/// Kinematic state of one dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TamState {
    pub value: f64,
    pub velocity: f64,
    pub acceleration: f64,
}

impl TamState {
    pub fn at_rest(value: f64) -> Self {
        TamState {
            value,
            velocity: 0.0,
            acceleration: 0.0,
        }
    }
}

/// The solved response of one dimension within one segment.
#[derive(Debug, Clone, Copy)]
pub struct TamCoeffs {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub target: f64,
    pub tau: f64,
}

/// Solves the coefficient triple so that the response matches `initial`
/// at t = 0 and decays toward `target`.
pub fn solve_segment(initial: &TamState, target: f64, tau: f64) -> Result<TamCoeffs> {
    if !(tau > 0.0) {
        return Err(Error::InvalidSpec(format!("tau must be > 0, got {tau}")));
    }
    let c0 = initial.value - target;
    let c1 = initial.velocity + c0 / tau;
    let c2 = (initial.acceleration + 2.0 * c1 / tau - c0 / (tau * tau)) / 2.0;
    Ok(TamCoeffs {
        c0,
        c1,
        c2,
        target,
        tau,
    })
}

impl TamCoeffs {
    /// Value at segment-local time `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let e = (-t / self.tau).exp();
        (self.c0 + self.c1 * t + self.c2 * t * t) * e + self.target
    }

    /// Full kinematic state at segment-local time `t`.
    pub fn state_at(&self, t: f64) -> TamState {
        let e = (-t / self.tau).exp();
        let p = self.c0 + self.c1 * t + self.c2 * t * t;
        let dp = self.c1 + 2.0 * self.c2 * t;
        let inv = 1.0 / self.tau;
        TamState {
            value: p * e + self.target,
            velocity: (dp - p * inv) * e,
            acceleration: (2.0 * self.c2 - 2.0 * dp * inv + p * inv * inv) * e,
        }
    }
}

/// A sampled multi-channel control trajectory. The first `n_supra` columns
/// are the articulatory dimensions in space order, followed by the chink
/// area ("CA") and relative amplitude ("RA") channels.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub sample_rate: f64,
    pub names: Vec<String>,
    pub n_supra: usize,
    pub frames: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 / self.sample_rate
    }

    pub fn time(&self, frame: usize) -> f64 {
        frame as f64 / self.sample_rate
    }

    pub fn supra(&self, frame: usize) -> &[f64] {
        &self.frames[frame][..self.n_supra]
    }

    pub fn chink_area(&self, frame: usize) -> f64 {
        self.frames[frame][self.n_supra]
    }

    pub fn relative_amplitude(&self, frame: usize) -> f64 {
        self.frames[frame][self.n_supra + 1]
    }

    /// Frame index range [start, end) covering utterance times
    /// [t0, t1).
    pub fn frame_window(&self, t0: f64, t1: f64) -> (usize, usize) {
        let start = (t0 * self.sample_rate).ceil() as usize;
        let end = ((t1 * self.sample_rate).ceil() as usize).min(self.frames.len());
        (start.min(end), end)
    }

    /// Linear interpolation of the full frame vector at time `t`.
    pub fn sample_at(&self, t: f64) -> Vec<f64> {
        let pos = (t * self.sample_rate).max(0.0);
        let i = pos.floor() as usize;
        if i + 1 >= self.frames.len() {
            return self.frames.last().expect("non-empty").clone();
        }
        let frac = pos - i as f64;
        self.frames[i]
            .iter()
            .zip(&self.frames[i + 1])
            .map(|(a, b)| a + frac * (b - a))
            .collect()
    }

    /// Writes the trajectory as a simple time-by-dimension table.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        write!(w, "time")?;
        for n in &self.names {
            write!(w, ",{n}")?;
        }
        writeln!(w)?;
        for (i, row) in self.frames.iter().enumerate() {
            write!(w, "{:.6}", self.time(i))?;
            for v in row {
                write!(w, ",{v:.8}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// One piecewise-constant target timeline for a group of channels.
struct Piece {
    start: f64,
    targets: Vec<f64>,
}

/// Generates the control trajectory for an utterance.
///
/// Articulatory channels step through the segment targets with `tau_supra`.
/// The glottal channels follow per-segment presets with `tau_glottal`:
/// voiceless segments hold the optimized chink area with zero voicing
/// amplitude; vowels and voiced consonants hold a small preset chink and the
/// optimized relative amplitude. A voiceless-to-voiced transition delays the
/// glottal switch by [`VOT_DELAY_S`] into the voiced segment.
pub fn generate_trajectory(
    space: &ArticulatorySpace,
    spec: &UtteranceSpec,
    sample_rate: f64,
) -> Result<Trajectory> {
    if !(sample_rate >= 100.0) {
        return Err(Error::InvalidSpec(format!(
            "control sample rate must be >= 100 Hz, got {sample_rate}"
        )));
    }
    spec.validate(space)?;

    let n_supra = space.len();
    let starts = spec.segment_starts();
    let total = spec.total_duration();
    let n_frames = (total * sample_rate).ceil() as usize;

    // Articulatory target timeline: one piece per segment.
    let supra_pieces: Vec<Piece> = spec
        .segments
        .iter()
        .zip(&starts)
        .map(|(seg, &start)| Piece {
            start,
            targets: seg.target.values.clone(),
        })
        .collect();

    // Glottal target timeline, with delayed voicing onset after voiceless
    // segments.
    let ca_voiced = {
        let b = &space.controls.chink_area;
        b.min + CA_VOICED_FRAC * (b.max - b.min)
    };
    let glottal_targets = |class: SegmentClass| -> Vec<f64> {
        match class {
            SegmentClass::Voiceless => vec![spec.glottal.chink_area, 0.0],
            SegmentClass::Vowel | SegmentClass::Voiced => {
                vec![ca_voiced, spec.glottal.relative_amplitude]
            }
        }
    };
    let mut glottal_pieces: Vec<Piece> = Vec::new();
    for (i, (seg, &start)) in spec.segments.iter().zip(&starts).enumerate() {
        let mut t = start;
        if i > 0
            && spec.segments[i - 1].class.is_voiceless()
            && !seg.class.is_voiceless()
        {
            t += VOT_DELAY_S.min(seg.duration * 0.5);
        }
        let targets = glottal_targets(seg.class);
        match glottal_pieces.last() {
            Some(last) if last.targets == targets => {} // same target: no boundary
            _ => glottal_pieces.push(Piece { start: t, targets }),
        }
    }

    let mut names: Vec<String> = space.dimensions.iter().map(|d| d.name.clone()).collect();
    names.extend(GLOTTAL_CHANNELS.iter().map(|s| s.to_string()));

    // Per-channel integration state.
    let neutral = space.neutral_target();
    let mut supra_coeffs: Vec<TamCoeffs> = Vec::with_capacity(n_supra);
    for (i, &v) in neutral.values.iter().enumerate() {
        supra_coeffs.push(solve_segment(
            &TamState::at_rest(v),
            supra_pieces[0].targets[i],
            spec.tau_supra,
        )?);
    }
    let glottal_init = [space.controls.chink_area.neutral, 0.0];
    let mut glottal_coeffs: Vec<TamCoeffs> = Vec::with_capacity(2);
    for (i, &v) in glottal_init.iter().enumerate() {
        glottal_coeffs.push(solve_segment(
            &TamState::at_rest(v),
            glottal_pieces[0].targets[i],
            spec.tau_glottal,
        )?);
    }
    let mut supra_piece = 0usize;
    let mut supra_piece_start = supra_pieces[0].start;
    let mut glottal_piece = 0usize;
    let mut glottal_piece_start = glottal_pieces[0].start;

    let ca_bounds = space.controls.chink_area;
    let ra_bounds = space.controls.relative_amplitude;

    let mut frames = Vec::with_capacity(n_frames);
    for k in 0..n_frames {
        let t = k as f64 / sample_rate;

        while supra_piece + 1 < supra_pieces.len() && t >= supra_pieces[supra_piece + 1].start {
            let boundary = supra_pieces[supra_piece + 1].start;
            let local = boundary - supra_piece_start;
            for (i, c) in supra_coeffs.iter_mut().enumerate() {
                let state = c.state_at(local);
                *c = solve_segment(&state, supra_pieces[supra_piece + 1].targets[i], spec.tau_supra)?;
            }
            supra_piece += 1;
            supra_piece_start = boundary;
        }
        while glottal_piece + 1 < glottal_pieces.len()
            && t >= glottal_pieces[glottal_piece + 1].start
        {
            let boundary = glottal_pieces[glottal_piece + 1].start;
            let local = boundary - glottal_piece_start;
            for (i, c) in glottal_coeffs.iter_mut().enumerate() {
                let state = c.state_at(local);
                *c = solve_segment(
                    &state,
                    glottal_pieces[glottal_piece + 1].targets[i],
                    spec.tau_glottal,
                )?;
            }
            glottal_piece += 1;
            glottal_piece_start = boundary;
        }

        let mut row = Vec::with_capacity(n_supra + 2);
        let local = t - supra_piece_start;
        for (i, c) in supra_coeffs.iter().enumerate() {
            let d = &space.dimensions[i];
            row.push(c.value_at(local).clamp(d.min, d.max));
        }
        let local = t - glottal_piece_start;
        row.push(glottal_coeffs[0].value_at(local).clamp(ca_bounds.min, ca_bounds.max));
        row.push(glottal_coeffs[1].value_at(local).clamp(0.0, ra_bounds.max));
        frames.push(row);
    }

    Ok(Trajectory {
        sample_rate,
        names,
        n_supra,
        frames,
    })
}
