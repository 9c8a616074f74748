//! Parametric tube geometry: articulatory frame -> area function -> tube
//! features.
//!
//! The tract is a straight tube of baseline area `a0` whose length is
//! `l0 + k_lp * LP`. Five constrictors subtract Gaussian-profiled depth from
//! the baseline, each driven by the named articulators:
//!
//! ```text
//! A(x) = max(0, a0 - sum_r depth_max * z_r * exp(-(x - x_r)^2 / (2 sigma_r^2)))
//! ```
//!
//! where `z_r` in [0, 1] is the constrictor drive. A drive is the clamped sum
//! of per-driver terms `(v - neutral) / (sat - neutral)` with the saturation
//! point `sat` placed `sat_frac` of the way from neutral toward the closing
//! range end, so full closure is reachable strictly inside the range. With
//! `depth_max = depth_factor * a0` and `depth_factor > 1`, any drive of at
//! least `1 / depth_factor` pinches the tube shut.

use crate::artic::ArticulatorySpace;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Speed of sound used throughout, cm/s.
pub const SPEED_OF_SOUND_CM_S: f64 = 35_000.0;

/// Default synthesis rate, Hz.
pub const DEFAULT_AUDIO_RATE: f64 = 44_100.0;

/// Section length tied to an audio rate: c / (2 * rate), in cm.
pub fn section_length_for_rate(audio_rate: f64) -> f64 {
    SPEED_OF_SOUND_CM_S / (2.0 * audio_rate)
}

/// Broad place regions along the tube, glottis to lips, as fractions of the
/// tract length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Pharyngeal,
    Velar,
    Palatal,
    Alveolar,
    Labial,
}

impl Region {
    /// Region of a section centered at fraction `f` of the tract length.
    pub fn of_fraction(f: f64) -> Region {
        if f < 0.25 {
            Region::Pharyngeal
        } else if f < 0.45 {
            Region::Velar
        } else if f < 0.68 {
            Region::Palatal
        } else if f < 0.93 {
            Region::Alveolar
        } else {
            Region::Labial
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Region::Pharyngeal => "pharyngeal",
            Region::Velar => "velar",
            Region::Palatal => "palatal",
            Region::Alveolar => "alveolar",
            Region::Labial => "labial",
        };
        f.write_str(s)
    }
}

/// Cross-sectional areas from glottis to lips.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaFunction {
    /// Section areas in cm^2.
    pub sections: Vec<f64>,
    /// Uniform section length in cm.
    pub section_length: f64,
}

impl AreaFunction {
    pub fn tract_length(&self) -> f64 {
        self.sections.len() as f64 * self.section_length
    }
}

/// Geometry summary used by the somatosensory objectives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeFeatures {
    pub min_area: f64,
    pub min_area_region: Region,
    pub lip_area: f64,
}

/// Extracts the tube features of an area function: overall minimum (ties
/// resolved toward the most anterior section), its region, and the area of
/// the final (lip) section.
pub fn tube_features(af: &AreaFunction) -> TubeFeatures {
    let n = af.sections.len();
    let mut min_area = f64::INFINITY;
    let mut min_idx = 0usize;
    for (i, &a) in af.sections.iter().enumerate() {
        if a <= min_area {
            min_area = a;
            min_idx = i;
        }
    }
    TubeFeatures {
        min_area,
        min_area_region: Region::of_fraction((min_idx as f64 + 0.5) / n as f64),
        lip_area: af.sections[n - 1],
    }
}

/// One constriction: a Gaussian dip driven by articulators.
#[derive(Debug, Clone)]
struct Constrictor {
    region: Region,
    center_frac: f64,
    sigma_frac: f64,
    /// (dimension name, weight, closing range end is max?).
    drivers: Vec<(&'static str, f64, bool)>,
    /// Optional (dimension name, max fractional shift) moving the center.
    shift: Option<(&'static str, f64)>,
}

/// Calibration constants of the articulatory-to-area mapping.
#[derive(Debug, Clone)]
pub struct TractMap {
    /// Baseline uniform area, cm^2.
    pub a0: f64,
    /// Baseline tract length, cm.
    pub l0: f64,
    /// Length gain of lip protrusion (cm of tract per unit LP).
    pub k_lp: f64,
    /// Constriction depth as a multiple of `a0`.
    pub depth_factor: f64,
    /// Where drives saturate, as a fraction of neutral-to-range-end.
    pub sat_frac: f64,
    constrictors: Vec<Constrictor>,
}

impl Default for TractMap {
    fn default() -> Self {
        TractMap {
            a0: 3.0,
            l0: 17.5,
            k_lp: 1.0,
            depth_factor: 1.5,
            sat_frac: 0.75,
            constrictors: vec![
                Constrictor {
                    region: Region::Labial,
                    center_frac: 1.0,
                    sigma_frac: 0.09,
                    drivers: vec![("LD", 1.0, false), ("JA", 0.5, true)],
                    shift: None,
                },
                Constrictor {
                    region: Region::Alveolar,
                    center_frac: 0.80,
                    sigma_frac: 0.06,
                    drivers: vec![("TTY", 1.0, true)],
                    shift: Some(("TTX", 0.03)),
                },
                Constrictor {
                    region: Region::Palatal,
                    center_frac: 0.55,
                    sigma_frac: 0.08,
                    drivers: vec![("TBY", 1.0, true)],
                    shift: Some(("TBX", 0.03)),
                },
                Constrictor {
                    region: Region::Velar,
                    center_frac: 0.35,
                    sigma_frac: 0.08,
                    drivers: vec![("TCY", 1.0, true)],
                    shift: None,
                },
                Constrictor {
                    region: Region::Pharyngeal,
                    center_frac: 0.15,
                    sigma_frac: 0.10,
                    drivers: vec![("TCX", 1.0, false)],
                    shift: None,
                },
            ],
        }
    }
}

/// A tract map with its dimension lookups resolved against a space.
#[derive(Debug, Clone)]
pub struct Tract {
    pub map: TractMap,
    idx_lp: usize,
    /// Per constrictor: (center, sigma, shift, drivers as (index, weight,
    /// inv_sat_span, neutral)).
    resolved: Vec<ResolvedConstrictor>,
}

#[derive(Debug, Clone)]
struct ResolvedConstrictor {
    region: Region,
    center_frac: f64,
    sigma_frac: f64,
    drivers: Vec<(usize, f64, f64, f64)>,
    shift: Option<(usize, f64, f64, f64)>, // (index, max shift, neutral, half range)
}

impl Tract {
    pub fn new(space: &ArticulatorySpace, map: TractMap) -> Result<Tract> {
        let idx_lp = space
            .index_of("LP")
            .ok_or_else(|| Error::UnknownDimension("LP".into()))?;
        let mut resolved = Vec::new();
        for c in &map.constrictors {
            let mut drivers = Vec::new();
            for &(name, weight, toward_max) in &c.drivers {
                let i = space
                    .index_of(name)
                    .ok_or_else(|| Error::UnknownDimension(name.into()))?;
                let d = &space.dimensions[i];
                let end = if toward_max { d.max } else { d.min };
                let sat_span = map.sat_frac * (end - d.neutral);
                drivers.push((i, weight, 1.0 / sat_span, d.neutral));
            }
            let shift = match c.shift {
                Some((name, max_shift)) => {
                    let i = space
                        .index_of(name)
                        .ok_or_else(|| Error::UnknownDimension(name.into()))?;
                    let d = &space.dimensions[i];
                    Some((i, max_shift, d.neutral, (d.max - d.min) / 2.0))
                }
                None => None,
            };
            resolved.push(ResolvedConstrictor {
                region: c.region,
                center_frac: c.center_frac,
                sigma_frac: c.sigma_frac,
                drivers,
                shift,
            });
        }
        Ok(Tract {
            map,
            idx_lp,
            resolved,
        })
    }

    pub fn with_defaults(space: &ArticulatorySpace) -> Result<Tract> {
        Tract::new(space, TractMap::default())
    }

    /// Tract length for a frame, cm.
    pub fn length(&self, frame: &[f64]) -> f64 {
        self.map.l0 + self.map.k_lp * frame[self.idx_lp]
    }

    /// Constrictor drives for a frame: (region, z, center fraction, sigma
    /// fraction), z in [0, 1].
    pub fn drives(&self, frame: &[f64]) -> Vec<(Region, f64, f64, f64)> {
        self.resolved
            .iter()
            .map(|c| {
                let mut z = 0.0;
                for &(i, w, inv_span, neutral) in &c.drivers {
                    z += w * ((frame[i] - neutral) * inv_span).clamp(0.0, 1.0);
                }
                let mut center = c.center_frac;
                if let Some((i, max_shift, neutral, half)) = c.shift {
                    center += max_shift * ((frame[i] - neutral) / half).clamp(-1.0, 1.0);
                }
                (c.region, z.clamp(0.0, 1.0), center, c.sigma_frac)
            })
            .collect()
    }

    /// Areas sampled on `n` equal sections along the current tract length.
    pub fn areas_on_grid(&self, frame: &[f64], n: usize, out: &mut Vec<f64>) {
        let drives = self.drives(frame);
        let depth_max = self.map.depth_factor * self.map.a0;
        out.clear();
        for i in 0..n {
            let x = (i as f64 + 0.5) / n as f64;
            let mut a = self.map.a0;
            for &(_, z, center, sigma) in &drives {
                if z > 0.0 {
                    let d = (x - center) / sigma;
                    a -= depth_max * z * (-0.5 * d * d).exp();
                }
            }
            out.push(a.max(0.0));
        }
    }

    /// The area function of one articulatory frame, quantized to the given
    /// section length (nearest section count, at least 8).
    pub fn area_function(&self, space: &ArticulatorySpace, frame: &[f64], section_length: f64) -> Result<AreaFunction> {
        if frame.len() != space.len() {
            return Err(Error::SpaceMismatch {
                got: frame.len(),
                want: space.len(),
            });
        }
        for (d, &v) in space.dimensions.iter().zip(frame) {
            if !v.is_finite() || v < d.min - 1e-9 || v > d.max + 1e-9 {
                return Err(Error::RangeViolation {
                    dim: d.name.clone(),
                    value: v,
                    min: d.min,
                    max: d.max,
                });
            }
        }
        let length = self.length(frame);
        let n = ((length / section_length).round() as usize).max(8);
        let mut sections = Vec::new();
        self.areas_on_grid(frame, n, &mut sections);
        Ok(AreaFunction {
            sections,
            section_length: length / n as f64,
        })
    }

    /// Tube features per trajectory frame, evaluated on a fixed `n`-section
    /// grid.
    pub fn features_timeline(
        &self,
        traj: &crate::tam::Trajectory,
        n: usize,
    ) -> Vec<TubeFeatures> {
        let mut buf = Vec::with_capacity(n);
        (0..traj.len())
            .map(|k| {
                self.areas_on_grid(traj.supra(k), n, &mut buf);
                let mut min_area = f64::INFINITY;
                let mut min_idx = 0usize;
                for (i, &a) in buf.iter().enumerate() {
                    if a <= min_area {
                        min_area = a;
                        min_idx = i;
                    }
                }
                TubeFeatures {
                    min_area,
                    min_area_region: Region::of_fraction((min_idx as f64 + 0.5) / n as f64),
                    lip_area: buf[n - 1],
                }
            })
            .collect()
    }

    /// Default section count for feature evaluation (the grid the default
    /// audio rate implies).
    pub fn default_sections(&self) -> usize {
        ((self.map.l0 / section_length_for_rate(DEFAULT_AUDIO_RATE)).round() as usize).max(8)
    }
}

/// Convenience wrapper using the default tract map.
pub fn area_function(space: &ArticulatorySpace, frame: &[f64]) -> Result<AreaFunction> {
    let tract = Tract::with_defaults(space)?;
    tract.area_function(space, frame, section_length_for_rate(DEFAULT_AUDIO_RATE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artic::ArticulatorySpace;

    fn setup() -> (ArticulatorySpace, Tract) {
        let space = ArticulatorySpace::builtin();
        let tract = Tract::with_defaults(&space).unwrap();
        (space, tract)
    }

    #[test]
    fn neutral_frame_gives_uniform_baseline() {
        let (space, tract) = setup();
        let af = area_function(&space, &space.neutral_target().values).unwrap();
        assert!(af.sections.len() >= 40, "sections: {}", af.sections.len());
        for &a in &af.sections {
            assert!((a - tract.map.a0).abs() < 1e-12, "non-uniform area {a}");
        }
    }

    #[test]
    fn closed_lips_zero_the_labial_region() {
        let (space, _) = setup();
        let t = space.neutral_target().with(&space, "LD", 0.0).unwrap();
        let af = area_function(&space, &t.values).unwrap();
        let n = af.sections.len();
        for (i, &a) in af.sections.iter().enumerate() {
            let frac = (i as f64 + 0.5) / n as f64;
            if Region::of_fraction(frac) == Region::Labial {
                assert_eq!(a, 0.0, "labial section {i} not closed");
            }
        }
        let f = tube_features(&af);
        assert_eq!(f.min_area, 0.0);
        assert_eq!(f.min_area_region, Region::Labial);
        assert_eq!(f.lip_area, 0.0);
    }

    #[test]
    fn half_closure_depth_follows_profile_formula() {
        let (space, tract) = setup();
        // Drive the tongue tip to exactly z = 0.5.
        let d = space.dim("TTY").unwrap();
        let sat = d.neutral + tract.map.sat_frac * (d.max - d.neutral);
        let v = d.neutral + 0.5 * (sat - d.neutral);
        let t = space.neutral_target().with(&space, "TTY", v).unwrap();
        let af = tract
            .area_function(&space, &t.values, section_length_for_rate(DEFAULT_AUDIO_RATE))
            .unwrap();

        let n = af.sections.len();
        let depth_max = tract.map.depth_factor * tract.map.a0;
        // Minimum over the alveolar region: a0 - 0.5 * depth_max at the
        // constriction center, up to grid quantization of the Gaussian.
        let min_alv = af
            .sections
            .iter()
            .enumerate()
            .filter(|(i, _)| Region::of_fraction((*i as f64 + 0.5) / n as f64) == Region::Alveolar)
            .map(|(_, &a)| a)
            .fold(f64::INFINITY, f64::min);
        let ideal = tract.map.a0 - 0.5 * depth_max;
        // Exact value at the nearest grid point to the center:
        let center = 0.80;
        let nearest = (0..n)
            .map(|i| (i as f64 + 0.5) / n as f64)
            .min_by(|a, b| {
                ((a - center).abs()).partial_cmp(&(b - center).abs()).unwrap()
            })
            .unwrap();
        let g = (-0.5 * ((nearest - center) / 0.06).powi(2)).exp();
        let expect = tract.map.a0 - 0.5 * depth_max * g;
        assert!((min_alv - expect).abs() < 1e-9, "got {min_alv}, expect {expect}");
        assert!((min_alv - ideal).abs() < 0.06, "far from ideal: {min_alv} vs {ideal}");
    }

    #[test]
    fn single_velar_constriction_reports_velar_region() {
        let (space, _) = setup();
        let d = space.dim("TCY").unwrap();
        let t = space.neutral_target().with(&space, "TCY", d.max).unwrap();
        let af = area_function(&space, &t.values).unwrap();
        let f = tube_features(&af);
        assert_eq!(f.min_area, 0.0);
        assert_eq!(f.min_area_region, Region::Velar);
        assert!(f.lip_area > 0.0);
    }

    #[test]
    fn uniform_tube_features() {
        let (space, tract) = setup();
        let af = area_function(&space, &space.neutral_target().values).unwrap();
        let f = tube_features(&af);
        assert_eq!(f.min_area, tract.map.a0);
        assert_eq!(f.lip_area, tract.map.a0);
    }

    #[test]
    fn protrusion_lengthens_the_tract() {
        let (space, tract) = setup();
        let neutral = space.neutral_target();
        let protruded = neutral.with(&space, "LP", 1.0).unwrap();
        assert!(
            tract.length(&protruded.values) > tract.length(&neutral.values) + 0.9
        );
        let af = area_function(&space, &protruded.values).unwrap();
        // One centimeter of protrusion adds two or three sections.
        assert!(af.sections.len() >= 46, "sections: {}", af.sections.len());
    }

    #[test]
    fn out_of_range_frame_is_rejected() {
        let (space, _) = setup();
        let mut frame = space.neutral_target().values;
        frame[0] = 99.0;
        assert!(area_function(&space, &frame).is_err());
    }
}
