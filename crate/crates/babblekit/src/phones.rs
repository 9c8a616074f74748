//! Canonical phone articulations and features: the hand-authored
//! configuration each symbol is rendered from during calibration, plus the
//! phonetic features the articulatory oracle classifies against.

use crate::artic::{ArticulatorySpace, Target};
use crate::error::{Error, Result};
use crate::tam::SegmentClass;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhoneKind {
    Consonant,
    Vowel,
}

/// Constriction manner as realized by the tube model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manner {
    Stop,
    Fricative,
    Approximant,
    /// The "no consonant" entry.
    Absence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Place {
    Labial,
    Alveolar,
    Palatal,
    Velar,
    Pharyngeal,
    Glottal,
    None,
}

impl Place {
    pub fn matches_region(self, region: crate::vtsynth::Region) -> bool {
        use crate::vtsynth::Region;
        matches!(
            (self, region),
            (Place::Labial, Region::Labial)
                | (Place::Alveolar, Region::Alveolar)
                | (Place::Palatal, Region::Palatal)
                | (Place::Velar, Region::Velar)
                | (Place::Pharyngeal, Region::Pharyngeal)
        )
    }
}

fn default_voiced() -> bool {
    true
}

fn default_manner() -> Manner {
    Manner::Absence
}

fn default_place() -> Place {
    Place::None
}

/// One phone: its canonical articulation (overrides from neutral) and
/// features.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Phone {
    pub kind: PhoneKind,
    #[serde(default = "default_voiced")]
    pub voiced: bool,
    #[serde(default = "default_manner")]
    pub manner: Manner,
    #[serde(default = "default_place")]
    pub place: Place,
    pub overrides: BTreeMap<String, f64>,
}

impl Phone {
    pub fn segment_class(&self) -> SegmentClass {
        match self.kind {
            PhoneKind::Vowel => SegmentClass::Vowel,
            PhoneKind::Consonant if self.voiced => SegmentClass::Voiced,
            PhoneKind::Consonant => SegmentClass::Voiceless,
        }
    }
}

/// The full phone table plus the dimension subsets used for articulatory
/// classification and the calibration carrier context.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhoneSet {
    pub consonant_dims: Vec<String>,
    pub vowel_dims: Vec<String>,
    pub carrier_c1: String,
    pub carrier_vowel: String,
    pub phones: BTreeMap<String, Phone>,
}

impl PhoneSet {
    pub fn from_json(text: &str) -> Result<PhoneSet> {
        let set: PhoneSet = serde_json::from_str(text)?;
        Ok(set)
    }

    pub fn builtin() -> PhoneSet {
        Self::from_json(crate::data::PHONES_JSON).expect("builtin phone set is valid")
    }

    pub fn get(&self, symbol: &str) -> Result<&Phone> {
        self.phones
            .get(symbol)
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }

    /// The canonical articulatory target for a symbol: neutral configuration
    /// plus the phone's overrides, with derived dimensions refreshed.
    pub fn target(&self, space: &ArticulatorySpace, symbol: &str) -> Result<Target> {
        let phone = self.get(symbol)?;
        let mut values = space.neutral_target().values;
        for (dim, &v) in &phone.overrides {
            let i = space
                .index_of(dim)
                .ok_or_else(|| Error::UnknownDimension(dim.clone()))?;
            values[i] = v;
        }
        space.apply_derivations(&mut values);
        let t = Target { values };
        space.check_target(&t)?;
        Ok(t)
    }

    /// Normalized (range-scaled) values of a frame over the named dims.
    pub fn project(&self, space: &ArticulatorySpace, dims: &[String], frame: &[f64]) -> Vec<f64> {
        dims.iter()
            .map(|name| {
                let i = space.index_of(name).expect("validated dims");
                let d = &space.dimensions[i];
                (frame[i] - d.min) / (d.max - d.min)
            })
            .collect()
    }

    pub fn validate(&self, space: &ArticulatorySpace) -> Result<()> {
        for dims in [&self.consonant_dims, &self.vowel_dims] {
            for name in dims {
                if space.index_of(name).is_none() {
                    return Err(Error::UnknownDimension(name.clone()));
                }
            }
        }
        for (symbol, phone) in &self.phones {
            for dim in phone.overrides.keys() {
                if space.index_of(dim).is_none() {
                    return Err(Error::InvalidSpec(format!(
                        "phone `{symbol}` overrides unknown dimension `{dim}`"
                    )));
                }
            }
            // Overrides must be reachable.
            self.target(space, symbol)?;
        }
        self.get(&self.carrier_c1)?;
        self.get(&self.carrier_vowel)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_phones_validate_against_builtin_space() {
        let space = ArticulatorySpace::builtin();
        let phones = PhoneSet::builtin();
        phones.validate(&space).unwrap();
    }

    #[test]
    fn segment_classes_follow_voicing() {
        let phones = PhoneSet::builtin();
        assert_eq!(phones.get("p").unwrap().segment_class(), SegmentClass::Voiceless);
        assert_eq!(phones.get("b").unwrap().segment_class(), SegmentClass::Voiced);
        assert_eq!(phones.get("aa").unwrap().segment_class(), SegmentClass::Vowel);
    }

    #[test]
    fn canonical_stop_targets_reach_closure() {
        let space = ArticulatorySpace::builtin();
        let phones = PhoneSet::builtin();
        for symbol in ["p", "t", "k"] {
            let t = phones.target(&space, symbol).unwrap();
            let af = crate::vtsynth::area_function(&space, &t.values).unwrap();
            let f = crate::vtsynth::tube_features(&af);
            assert_eq!(f.min_area, 0.0, "{symbol} target does not close the tract");
            let place = phones.get(symbol).unwrap().place;
            assert!(place.matches_region(f.min_area_region), "{symbol}: {:?}", f.min_area_region);
        }
    }

    #[test]
    fn canonical_vowel_targets_stay_open() {
        let space = ArticulatorySpace::builtin();
        let phones = PhoneSet::builtin();
        for (symbol, phone) in &phones.phones {
            if phone.kind != PhoneKind::Vowel {
                continue;
            }
            let t = phones.target(&space, symbol).unwrap();
            let af = crate::vtsynth::area_function(&space, &t.values).unwrap();
            let f = crate::vtsynth::tube_features(&af);
            assert!(f.min_area >= 0.25, "{symbol}: min area {}", f.min_area);
        }
    }

    #[test]
    fn canonical_fricatives_land_in_the_frication_band() {
        let space = ArticulatorySpace::builtin();
        let phones = PhoneSet::builtin();
        for symbol in ["f", "s", "sh", "th"] {
            let t = phones.target(&space, symbol).unwrap();
            let af = crate::vtsynth::area_function(&space, &t.values).unwrap();
            let f = crate::vtsynth::tube_features(&af);
            assert!(
                f.min_area > 0.0 && f.min_area < 0.35,
                "{symbol}: min area {}",
                f.min_area
            );
        }
    }

    #[test]
    fn canonical_approximants_keep_a_moderate_opening() {
        let space = ArticulatorySpace::builtin();
        let phones = PhoneSet::builtin();
        for symbol in ["l", "r", "w", "y"] {
            let t = phones.target(&space, symbol).unwrap();
            let af = crate::vtsynth::area_function(&space, &t.values).unwrap();
            let f = crate::vtsynth::tube_features(&af);
            assert!(
                f.min_area >= 0.35 && f.min_area < 1.2,
                "{symbol}: min area {}",
                f.min_area
            );
        }
    }
}
