//! Articulatory parameter space: named bounded dimensions, range
//! normalization, and the normalized L1 coarticulation distance between
//! targets.
//!
//! The space covers the upper vocal tract only. The utterance-level glottal
//! controls (chink area, relative amplitude) and the two time constants are
//! bounded here as well but are not part of the coarticulation vector.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// How a dimension participates in the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DimensionMode {
    /// Optimized directly.
    Free,
    /// Pinned to its neutral value (e.g. the velum opening, kept closed).
    Fixed,
    /// Computed from another dimension by a fixed affine tie.
    Derived,
}

/// One bounded articulatory dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArticulatoryDimension {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub neutral: f64,
    pub mode: DimensionMode,
    /// Source dimensions for `Derived` entries. The tie is
    /// `value = source + (self.neutral - source.neutral)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub derived_from: Vec<String>,
}

impl ArticulatoryDimension {
    fn validate(&self) -> Result<()> {
        if !(self.min < self.max) {
            return Err(Error::InvalidSpec(format!(
                "dimension `{}`: min {} must be < max {}",
                self.name, self.min, self.max
            )));
        }
        if self.neutral < self.min || self.neutral > self.max {
            return Err(Error::InvalidSpec(format!(
                "dimension `{}`: neutral {} outside [{}, {}]",
                self.name, self.neutral, self.min, self.max
            )));
        }
        if self.mode == DimensionMode::Derived && self.derived_from.is_empty() {
            return Err(Error::InvalidSpec(format!(
                "derived dimension `{}` lists no source",
                self.name
            )));
        }
        Ok(())
    }
}

/// Bounds and neutral value for one utterance-level control.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ControlBounds {
    pub min: f64,
    pub max: f64,
    pub neutral: f64,
}

impl ControlBounds {
    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }
}

/// Utterance-level free parameters: two glottal controls and the two TAM
/// time constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UtteranceControls {
    pub chink_area: ControlBounds,
    pub relative_amplitude: ControlBounds,
    pub tau_supra: ControlBounds,
    pub tau_glottal: ControlBounds,
}

/// The full articulatory search domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArticulatorySpace {
    pub dimensions: Vec<ArticulatoryDimension>,
    pub controls: UtteranceControls,
}

impl ArticulatorySpace {
    /// Parses a space definition document (JSON with `dimensions` and
    /// `controls` sections) and validates its invariants.
    pub fn from_json(text: &str) -> Result<Self> {
        let space: ArticulatorySpace = serde_json::from_str(text)?;
        space.validate()?;
        Ok(space)
    }

    /// The default space shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json(crate::data::SPACE_JSON).expect("builtin space is valid")
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = std::collections::HashSet::new();
        for d in &self.dimensions {
            d.validate()?;
            if !names.insert(d.name.as_str()) {
                return Err(Error::InvalidSpec(format!("duplicate dimension `{}`", d.name)));
            }
        }
        if self.free_indices().is_empty() {
            return Err(Error::InvalidSpec("space has no free dimension".into()));
        }
        for d in &self.dimensions {
            for src in &d.derived_from {
                if self.index_of(src).is_none() {
                    return Err(Error::UnknownDimension(src.clone()));
                }
            }
        }
        for (name, c) in [
            ("chink_area", &self.controls.chink_area),
            ("relative_amplitude", &self.controls.relative_amplitude),
            ("tau_supra", &self.controls.tau_supra),
            ("tau_glottal", &self.controls.tau_glottal),
        ] {
            if !(c.min < c.max) || !c.contains(c.neutral) {
                return Err(Error::InvalidSpec(format!("control `{name}` has bad bounds")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dimensions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dimensions.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.dimensions.iter().position(|d| d.name == name)
    }

    pub fn dim(&self, name: &str) -> Result<&ArticulatoryDimension> {
        self.dimensions
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::UnknownDimension(name.to_string()))
    }

    /// Indices of the free dimensions, in space order. These are the
    /// components of the coarticulation vector.
    pub fn free_indices(&self) -> Vec<usize> {
        self.dimensions
            .iter()
            .enumerate()
            .filter(|(_, d)| d.mode == DimensionMode::Free)
            .map(|(i, _)| i)
            .collect()
    }

    /// Names of the free dimensions, in space order.
    pub fn free_names(&self) -> Vec<&str> {
        self.free_indices()
            .into_iter()
            .map(|i| self.dimensions[i].name.as_str())
            .collect()
    }

    /// The neutral configuration, at rest.
    pub fn neutral_target(&self) -> Target {
        Target {
            values: self.dimensions.iter().map(|d| d.neutral).collect(),
        }
    }

    /// Builds a full target from values for the free dimensions (space
    /// order). Fixed dimensions take their neutral value; derived ones are
    /// filled from their tie.
    pub fn target_from_free(&self, free_values: &[f64]) -> Result<Target> {
        let free = self.free_indices();
        if free_values.len() != free.len() {
            return Err(Error::SpaceMismatch {
                got: free_values.len(),
                want: free.len(),
            });
        }
        let mut values: Vec<f64> = self.dimensions.iter().map(|d| d.neutral).collect();
        for (slot, &v) in free.iter().zip(free_values) {
            values[*slot] = v;
        }
        self.apply_derivations(&mut values);
        let t = Target { values };
        self.check_target(&t)?;
        Ok(t)
    }

    /// Re-derives the derived dimensions from their sources, clipped to the
    /// derived dimension's own range.
    pub fn apply_derivations(&self, values: &mut [f64]) {
        for (i, d) in self.dimensions.iter().enumerate() {
            if d.mode != DimensionMode::Derived {
                continue;
            }
            let mut v = 0.0;
            for src in &d.derived_from {
                let j = self.index_of(src).expect("validated");
                v += values[j] + (d.neutral - self.dimensions[j].neutral);
            }
            v /= d.derived_from.len() as f64;
            values[i] = v.clamp(d.min, d.max);
        }
    }

    /// Validates a target against ranges, fixed values and derivations.
    pub fn check_target(&self, t: &Target) -> Result<()> {
        if t.values.len() != self.dimensions.len() {
            return Err(Error::SpaceMismatch {
                got: t.values.len(),
                want: self.dimensions.len(),
            });
        }
        for (d, &v) in self.dimensions.iter().zip(&t.values) {
            if v < d.min || v > d.max || !v.is_finite() {
                return Err(Error::RangeViolation {
                    dim: d.name.clone(),
                    value: v,
                    min: d.min,
                    max: d.max,
                });
            }
        }
        Ok(())
    }

    /// Range-normalizes the free components of a target into [0, 1].
    pub fn normalize(&self, t: &Target) -> Result<Vec<f64>> {
        self.check_target(t)?;
        Ok(self
            .free_indices()
            .into_iter()
            .map(|i| {
                let d = &self.dimensions[i];
                (t.values[i] - d.min) / (d.max - d.min)
            })
            .collect())
    }

    /// Inverse of [`normalize`](Self::normalize): free components in [0, 1]
    /// back to model units, derived and fixed dimensions filled in.
    pub fn denormalize(&self, unit: &[f64]) -> Result<Target> {
        let free = self.free_indices();
        if unit.len() != free.len() {
            return Err(Error::SpaceMismatch {
                got: unit.len(),
                want: free.len(),
            });
        }
        let values: Vec<f64> = free
            .iter()
            .zip(unit)
            .map(|(&i, &u)| {
                let d = &self.dimensions[i];
                d.min + u * (d.max - d.min)
            })
            .collect();
        self.target_from_free(&values)
    }

    /// Normalized L1 distance between two targets over the free dimensions:
    /// the mean absolute difference of the range-normalized vectors, in
    /// [0, 1].
    pub fn coart_distance(&self, a: &Target, b: &Target) -> Result<f64> {
        let per_dim = self.per_dimension_distance(a, b)?;
        Ok(per_dim.iter().sum::<f64>() / per_dim.len() as f64)
    }

    /// The unaggregated form of [`coart_distance`](Self::coart_distance):
    /// |ũa_i - ũb_i| per free dimension.
    pub fn per_dimension_distance(&self, a: &Target, b: &Target) -> Result<Vec<f64>> {
        let na = self.normalize(a)?;
        let nb = self.normalize(b)?;
        Ok(na.iter().zip(&nb).map(|(x, y)| (x - y).abs()).collect())
    }
}

/// A static vocal-tract configuration: one value per dimension of the space,
/// in model units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub values: Vec<f64>,
}

impl Target {
    pub fn value(&self, space: &ArticulatorySpace, name: &str) -> Result<f64> {
        let i = space
            .index_of(name)
            .ok_or_else(|| Error::UnknownDimension(name.to_string()))?;
        Ok(self.values[i])
    }

    /// Returns a copy with the named dimension set, rederiving dependents.
    pub fn with(&self, space: &ArticulatorySpace, name: &str, value: f64) -> Result<Target> {
        let i = space
            .index_of(name)
            .ok_or_else(|| Error::UnknownDimension(name.to_string()))?;
        let mut values = self.values.clone();
        values[i] = value;
        space.apply_derivations(&mut values);
        Ok(Target { values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_dim_space() -> ArticulatorySpace {
        ArticulatorySpace::from_json(
            r#"{
              "dimensions": [
                {"name": "A", "min": -6.0, "max": 0.0, "neutral": -3.0, "mode": "free"},
                {"name": "B", "min": 0.0, "max": 10.0, "neutral": 5.0, "mode": "free"}
              ],
              "controls": {
                "chink_area": {"min": 0.0, "max": 1.0, "neutral": 0.1},
                "relative_amplitude": {"min": 0.0, "max": 1.0, "neutral": 0.8},
                "tau_supra": {"min": 0.005, "max": 0.05, "neutral": 0.02},
                "tau_glottal": {"min": 0.005, "max": 0.05, "neutral": 0.015}
              }
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn normalize_midpoint_and_endpoints() {
        let s = two_dim_space();
        let t = Target { values: vec![-3.0, 0.0] };
        let n = s.normalize(&t).unwrap();
        assert_eq!(n[0], 0.5); // midpoint of [-6, 0]
        assert_eq!(n[1], 0.0); // value = min

        let t = Target { values: vec![0.0, 10.0] };
        let n = s.normalize(&t).unwrap();
        assert_eq!(n, vec![1.0, 1.0]); // value = max
    }

    #[test]
    fn normalize_rejects_out_of_range_naming_dimension() {
        let s = two_dim_space();
        let t = Target { values: vec![0.0 + 1e-9, 5.0] };
        match s.normalize(&t) {
            Err(Error::RangeViolation { dim, .. }) => assert_eq!(dim, "A"),
            other => panic!("expected range violation, got {other:?}"),
        }
    }

    #[test]
    fn coart_distance_matches_hand_evaluation() {
        // Normalized vectors (0.2, 0.4) and (0.6, 0.8) -> mean |diff| = 0.4.
        let s = two_dim_space();
        let t1 = s.denormalize(&[0.2, 0.4]).unwrap();
        let t2 = s.denormalize(&[0.6, 0.8]).unwrap();
        let d = s.coart_distance(&t1, &t2).unwrap();
        assert!((d - 0.4).abs() < 1e-12, "got {d}");
        let per = s.per_dimension_distance(&t1, &t2).unwrap();
        assert!((per[0] - 0.4).abs() < 1e-12);
        assert!((per[1] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn coart_distance_extremes() {
        let s = two_dim_space();
        let t1 = s.denormalize(&[0.0, 0.0]).unwrap();
        let t2 = s.denormalize(&[1.0, 1.0]).unwrap();
        assert_eq!(s.coart_distance(&t1, &t1).unwrap(), 0.0);
        assert!((s.coart_distance(&t1, &t2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_target_is_an_error() {
        let s = two_dim_space();
        let bad = Target { values: vec![0.0] };
        assert!(matches!(
            s.coart_distance(&bad, &bad),
            Err(Error::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn normalize_denormalize_roundtrip() {
        let s = ArticulatorySpace::builtin();
        let unit: Vec<f64> = (0..s.free_indices().len())
            .map(|i| (i as f64 * 0.37 + 0.11).fract())
            .collect();
        let t = s.denormalize(&unit).unwrap();
        let back = s.normalize(&t).unwrap();
        for (u, b) in unit.iter().zip(&back) {
            assert!((u - b).abs() < 1e-12);
        }
    }

    #[test]
    fn builtin_space_has_sixteen_free_dims_and_derived_tongue_root() {
        let s = ArticulatorySpace::builtin();
        assert_eq!(s.free_indices().len(), 16);
        let trx = s.dim("TRX").unwrap();
        assert_eq!(trx.mode, DimensionMode::Derived);
        assert_eq!(trx.derived_from, vec!["TCX".to_string()]);
        assert_eq!(s.dim("VO").unwrap().mode, DimensionMode::Fixed);

        // Tongue root follows the tongue body with the neutral offset.
        let t = s
            .neutral_target()
            .with(&s, "TCX", s.dim("TCX").unwrap().neutral + 0.5)
            .unwrap();
        let expect = (s.dim("TRX").unwrap().neutral + 0.5)
            .clamp(s.dim("TRX").unwrap().min, s.dim("TRX").unwrap().max);
        assert!((t.value(&s, "TRX").unwrap() - expect).abs() < 1e-12);
    }
}
