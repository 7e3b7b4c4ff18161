//! Unit sequences and the run-length collapse/expand pair.
//!
//! A [`ContinuousUnitSeq`] carries one unit id per speech frame. Collapsing
//! it removes adjacent repeats and yields an [`OrigUnitSeq`] together with
//! the run length of every unit; expanding goes the other way.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cluster index of a discrete speech unit.
pub type UnitId = u32;

/// Default frame hop of the unit extractor, in milliseconds.
pub const DEFAULT_FRAME_MS: u32 = 20;

/// Frame-level unit stream, one id per frame.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContinuousUnitSeq {
    units: Vec<UnitId>,
    frame_ms: u32,
}

impl ContinuousUnitSeq {
    pub fn new(units: Vec<UnitId>) -> Self {
        Self::with_frame_ms(units, DEFAULT_FRAME_MS)
    }

    pub fn with_frame_ms(units: Vec<UnitId>, frame_ms: u32) -> Self {
        Self { units, frame_ms }
    }

    pub fn units(&self) -> &[UnitId] {
        &self.units
    }

    pub fn into_units(self) -> Vec<UnitId> {
        self.units
    }

    pub fn frame_ms(&self) -> u32 {
        self.frame_ms
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Checks every id against a vocabulary of `vocab` clusters.
    pub fn validate_vocab(&self, vocab: u32) -> Result<()> {
        check_vocab(&self.units, vocab)
    }
}

impl From<Vec<UnitId>> for ContinuousUnitSeq {
    fn from(units: Vec<UnitId>) -> Self {
        Self::new(units)
    }
}

/// Unit sequence without adjacent repeats.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<UnitId>", into = "Vec<UnitId>")]
pub struct OrigUnitSeq(Vec<UnitId>);

impl OrigUnitSeq {
    pub fn new(units: Vec<UnitId>) -> Result<Self> {
        if let Some(i) = units.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::AdjacentDuplicate {
                index: i + 1,
                unit: units[i],
            });
        }
        Ok(Self(units))
    }

    pub fn units(&self) -> &[UnitId] {
        &self.0
    }

    pub fn into_units(self) -> Vec<UnitId> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate_vocab(&self, vocab: u32) -> Result<()> {
        check_vocab(&self.0, vocab)
    }
}

impl TryFrom<Vec<UnitId>> for OrigUnitSeq {
    type Error = Error;

    fn try_from(units: Vec<UnitId>) -> Result<Self> {
        Self::new(units)
    }
}

impl From<OrigUnitSeq> for Vec<UnitId> {
    fn from(seq: OrigUnitSeq) -> Self {
        seq.0
    }
}

fn check_vocab(units: &[UnitId], vocab: u32) -> Result<()> {
    match units.iter().find(|&&u| u >= vocab) {
        Some(&unit) => Err(Error::UnitOutOfRange { unit, vocab }),
        None => Ok(()),
    }
}

/// Removes adjacent repeats, returning the deduplicated units and their run lengths.
pub fn collapse(z: &ContinuousUnitSeq) -> (OrigUnitSeq, Vec<usize>) {
    let mut units: Vec<UnitId> = Vec::new();
    let mut durations: Vec<usize> = Vec::new();
    for &u in z.units() {
        match units.last() {
            Some(&last) if last == u => *durations.last_mut().expect("aligned") += 1,
            _ => {
                units.push(u);
                durations.push(1);
            }
        }
    }
    (OrigUnitSeq(units), durations)
}

/// Repeats each unit by its duration. Zero-duration units are dropped.
pub fn expand(u: &OrigUnitSeq, durations: &[usize]) -> Result<ContinuousUnitSeq> {
    if u.len() != durations.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: durations.len(),
        });
    }
    let total = durations.iter().sum();
    let mut out = Vec::with_capacity(total);
    for (&unit, &d) in u.units().iter().zip(durations) {
        out.extend(std::iter::repeat_n(unit, d));
    }
    Ok(ContinuousUnitSeq::new(out))
}

/// [`expand`] for signed durations coming from untyped boundaries (text files, C callers).
pub fn expand_signed(u: &OrigUnitSeq, durations: &[i64]) -> Result<ContinuousUnitSeq> {
    expand(u, &to_unsigned_durations(durations)?)
}

pub fn to_unsigned_durations(durations: &[i64]) -> Result<Vec<usize>> {
    durations
        .iter()
        .enumerate()
        .map(|(index, &d)| usize::try_from(d).map_err(|_| Error::NegativeDuration { index }))
        .collect()
}
