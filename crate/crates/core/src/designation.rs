//! Fully specified systems and their codecs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::FactorSchema;

/// A single factor choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Choice {
    Zero,
    One,
}

impl Choice {
    pub fn bit(self) -> u8 {
        match self {
            Choice::Zero => 0,
            Choice::One => 1,
        }
    }

    pub fn from_bool(set: bool) -> Self {
        if set {
            Choice::One
        } else {
            Choice::Zero
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Choice::Zero => Choice::One,
            Choice::One => Choice::Zero,
        }
    }
}

impl TryFrom<u8> for Choice {
    type Error = Error;

    fn try_from(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(Choice::Zero),
            1 => Ok(Choice::One),
            other => Err(Error::BadChoice(i64::from(other))),
        }
    }
}

impl From<Choice> for u8 {
    fn from(c: Choice) -> u8 {
        c.bit()
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// Per-factor answers, `(position_value, choice)` pairs.
///
/// Construction is unchecked so that callers can hand in whatever a human
/// typed; [`Designation::from_choices`] does the validation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ChoiceMap {
    entries: Vec<(u64, Choice)>,
}

impl ChoiceMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, position_value: u64, choice: Choice) {
        self.entries.push((position_value, choice));
    }

    pub fn with(mut self, position_value: u64, choice: Choice) -> Self {
        self.push(position_value, choice);
        self
    }

    /// Replaces the choice at `position_value`, adding it if absent.
    pub fn set(&mut self, position_value: u64, choice: Choice) {
        match self.entries.iter_mut().find(|(p, _)| *p == position_value) {
            Some(entry) => entry.1 = choice,
            None => self.push(position_value, choice),
        }
    }

    pub fn get(&self, position_value: u64) -> Option<Choice> {
        self.entries
            .iter()
            .find(|(p, _)| *p == position_value)
            .map(|&(_, c)| c)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Choice)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(u64, Choice)> for ChoiceMap {
    fn from_iter<I: IntoIterator<Item = (u64, Choice)>>(iter: I) -> Self {
        ChoiceMap {
            entries: iter.into_iter().collect(),
        }
    }
}

/// A fully specified system, `System-<value>` under some schema.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Designation {
    value: u64,
    schema: FactorSchema,
}

impl Designation {
    pub fn from_decimal(schema: &FactorSchema, n: u64) -> Result<Self> {
        if n >= schema.system_count() {
            return Err(Error::OutOfRange {
                value: n.to_string(),
                limit: schema.system_count(),
                schema: schema.version_id().to_owned(),
            });
        }
        Ok(Designation {
            value: n,
            schema: schema.clone(),
        })
    }

    pub fn from_choices(schema: &FactorSchema, choices: &ChoiceMap) -> Result<Self> {
        let mut seen = 0u64;
        let mut value = 0u64;
        for (position, choice) in choices.iter() {
            if schema.index_of(position).is_none() {
                return Err(schema.unknown_position(position));
            }
            if seen & position != 0 {
                return Err(Error::DuplicatePosition(position));
            }
            seen |= position;
            if choice == Choice::One {
                value |= position;
            }
        }
        if seen != schema.full_mask() {
            let missing = schema.positions().filter(|p| seen & p == 0).collect();
            return Err(Error::IncompleteChoices { missing });
        }
        Ok(Designation {
            value,
            schema: schema.clone(),
        })
    }

    /// Parses a raw MSB-first stream of exactly `N` zeros and ones.
    pub fn from_bitstring(schema: &FactorSchema, s: &str) -> Result<Self> {
        let found = s.chars().count();
        if found != schema.len() {
            return Err(Error::BadLength {
                expected: schema.len(),
                found,
            });
        }
        let mut value = 0u64;
        for (offset, ch) in s.chars().enumerate() {
            let bit = match ch {
                '0' => 0,
                '1' => 1,
                _ => return Err(Error::BadChar { ch, offset }),
            };
            value = (value << 1) | bit;
        }
        Ok(Designation {
            value,
            schema: schema.clone(),
        })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn schema(&self) -> &FactorSchema {
        &self.schema
    }

    pub fn schema_version(&self) -> &str {
        self.schema.version_id()
    }

    /// Choice for the factor at `position_value`.
    pub fn choice(&self, position_value: u64) -> Result<Choice> {
        self.schema.factor_at(position_value)?;
        Ok(Choice::from_bool(self.value & position_value != 0))
    }

    /// One entry per factor, ascending by position.
    pub fn to_choices(&self) -> ChoiceMap {
        self.schema
            .positions()
            .map(|p| (p, Choice::from_bool(self.value & p != 0)))
            .collect()
    }

    /// MSB-first stream, highest position leftmost, zero-padded to `N`.
    pub fn to_bitstring(&self) -> String {
        self.schema
            .positions()
            .rev()
            .map(|p| if self.value & p != 0 { '1' } else { '0' })
            .collect()
    }

    /// Even-numbered systems are collaborative with humans.
    pub fn is_collaborative(&self) -> bool {
        self.value & 1 == 0
    }

    /// Choice 0 on the factor named "Sentience"; `None` when the schema has
    /// no such factor.
    pub fn is_sentient(&self) -> Option<bool> {
        self.schema
            .factor_named("Sentience")
            .map(|f| self.value & f.position_value() == 0)
    }

    /// Reads this designation under `wider`, which must extend our schema;
    /// new factors come out as choice 0 and the value is unchanged.
    pub fn rebase(&self, wider: &FactorSchema) -> Result<Self> {
        if !wider.is_extension_of(&self.schema) {
            return Err(Error::NotAnExtension {
                old: self.schema.version_id().to_owned(),
                new: wider.version_id().to_owned(),
            });
        }
        Ok(Designation {
            value: self.value,
            schema: wider.clone(),
        })
    }
}

impl fmt::Display for Designation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "System-{}", self.value)
    }
}
