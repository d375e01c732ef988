//! Factor axes and the ordered, versioned schemas built from them.
//!
//! A schema is plain data: the built-in ten-factor base schema and any
//! extension of it serialize to the same JSON document, so new factors
//! never require a code change. Extensions are append-only and always
//! land on the next power of two.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version id of the built-in ten-factor schema.
pub const BASE_VERSION_ID: &str = "base-10";

/// Designations are stored in a `u64`, which caps the factor count.
pub const MAX_FACTORS: usize = 63;

/// One binary design axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FactorDocument", into = "FactorDocument")]
pub struct Factor {
    name: String,
    position_value: u64,
    choice0_label: String,
    choice1_label: String,
    description: Option<String>,
}

impl Factor {
    pub fn new(
        name: impl Into<String>,
        position_value: u64,
        choice0_label: impl Into<String>,
        choice1_label: impl Into<String>,
    ) -> Result<Self> {
        let factor = Factor {
            name: name.into(),
            position_value,
            choice0_label: choice0_label.into(),
            choice1_label: choice1_label.into(),
            description: None,
        };
        factor.validate()?;
        Ok(factor)
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        let description = description.into();
        self.description = (!description.trim().is_empty()).then_some(description);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::InvalidFactor("name is empty".into()));
        }
        if !self.position_value.is_power_of_two() {
            return Err(Error::InvalidFactor(format!(
                "{:?}: position value {} is not a power of two",
                self.name, self.position_value
            )));
        }
        if self.choice0_label.trim().is_empty() || self.choice1_label.trim().is_empty() {
            return Err(Error::InvalidFactor(format!(
                "{:?}: choice labels must be non-empty",
                self.name
            )));
        }
        if self.choice0_label == self.choice1_label {
            return Err(Error::InvalidFactor(format!(
                "{:?}: both choices are labelled {:?}",
                self.name, self.choice0_label
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The factor's weight in the binary stream, `2^k`.
    pub fn position_value(&self) -> u64 {
        self.position_value
    }

    /// Zero-based bit index, `k` in `2^k`.
    pub fn bit_index(&self) -> u32 {
        self.position_value.trailing_zeros()
    }

    pub fn choice0_label(&self) -> &str {
        &self.choice0_label
    }

    pub fn choice1_label(&self) -> &str {
        &self.choice1_label
    }

    pub fn label(&self, choice: crate::Choice) -> &str {
        match choice {
            crate::Choice::Zero => &self.choice0_label,
            crate::Choice::One => &self.choice1_label,
        }
    }

    pub fn description(&self) -> Option<&str> {
        self.description.as_deref()
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.name, self.position_value)
    }
}

#[derive(Serialize, Deserialize)]
struct FactorDocument {
    name: String,
    position_value: u64,
    choice0_label: String,
    choice1_label: String,
    #[serde(default)]
    description: Option<String>,
}

impl TryFrom<FactorDocument> for Factor {
    type Error = Error;

    fn try_from(doc: FactorDocument) -> Result<Self> {
        let factor = Factor {
            name: doc.name,
            position_value: doc.position_value,
            choice0_label: doc.choice0_label,
            choice1_label: doc.choice1_label,
            description: doc.description,
        };
        factor.validate()?;
        Ok(factor)
    }
}

impl From<Factor> for FactorDocument {
    fn from(f: Factor) -> Self {
        FactorDocument {
            name: f.name,
            position_value: f.position_value,
            choice0_label: f.choice0_label,
            choice1_label: f.choice1_label,
            description: f.description,
        }
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct SchemaInner {
    version_id: String,
    factors: Vec<Factor>,
}

/// Ordered set of factors with positions exactly `1, 2, 4, …, 2^(N-1)`.
///
/// Cheap to clone; the factor list is shared and never mutated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SchemaDocument", into = "SchemaDocument")]
pub struct FactorSchema(Arc<SchemaInner>);

#[derive(Serialize, Deserialize)]
struct SchemaDocument {
    version_id: String,
    factors: Vec<Factor>,
}

impl TryFrom<SchemaDocument> for FactorSchema {
    type Error = Error;

    fn try_from(doc: SchemaDocument) -> Result<Self> {
        FactorSchema::new(doc.version_id, doc.factors)
    }
}

impl From<FactorSchema> for SchemaDocument {
    fn from(s: FactorSchema) -> Self {
        SchemaDocument {
            version_id: s.0.version_id.clone(),
            factors: s.0.factors.clone(),
        }
    }
}

const BASE_FACTORS: [(&str, &str, &str); 10] = [
    ("Relationship with Humans", "Collaborative", "Competitive"),
    ("Locus of Control", "Decentralized", "Centralized"),
    ("Cross-AI Learning", "Connected", "Isolated"),
    (
        "Human Potential Approach",
        "Potential Developing",
        "Potential Status Quo",
    ),
    (
        "Emotionality",
        "Emotionally Expressive",
        "Emotionally Inert",
    ),
    ("Cultural Flexibility", "Culturally Flexible", "Monoculture"),
    ("Embodiment", "Embodied", "Non-Embodied"),
    (
        "Nonlocal Access",
        "Nonlocality Enabled",
        "Nonlocality Disabled",
    ),
    (
        "Serendipity Access",
        "Serendipity Enabled",
        "Serendipity Disabled",
    ),
    ("Sentience", "Sentient", "Non-Sentient"),
];

impl FactorSchema {
    /// Builds a schema, sorting factors by position and checking that the
    /// positions form a gap-free run of powers of two from 1.
    pub fn new(version_id: impl Into<String>, mut factors: Vec<Factor>) -> Result<Self> {
        let version_id = version_id.into();
        if version_id.trim().is_empty() {
            return Err(Error::InvalidSchema("version_id is empty".into()));
        }
        if factors.is_empty() {
            return Err(Error::InvalidSchema(
                "a schema needs at least one factor".into(),
            ));
        }
        if factors.len() > MAX_FACTORS {
            return Err(Error::TooManyFactors { max: MAX_FACTORS });
        }
        for f in &factors {
            f.validate()?;
        }
        factors.sort_by_key(Factor::position_value);
        for (k, f) in factors.iter().enumerate() {
            let expected = 1u64 << k;
            if f.position_value != expected {
                return Err(Error::InvalidSchema(format!(
                    "factor {:?} has position {}, expected {} (positions must be 1, 2, 4, … without gaps)",
                    f.name, f.position_value, expected
                )));
            }
        }
        for (i, f) in factors.iter().enumerate() {
            if factors[..i].iter().any(|g| g.name == f.name) {
                return Err(Error::DuplicateName(f.name.clone()));
            }
        }
        Ok(FactorSchema(Arc::new(SchemaInner {
            version_id,
            factors,
        })))
    }

    /// The ten-factor schema every designation in the wild starts from.
    pub fn base() -> Self {
        let factors = BASE_FACTORS
            .iter()
            .enumerate()
            .map(|(k, (name, c0, c1))| Factor {
                name: (*name).to_owned(),
                position_value: 1 << k,
                choice0_label: (*c0).to_owned(),
                choice1_label: (*c1).to_owned(),
                description: None,
            })
            .collect();
        FactorSchema(Arc::new(SchemaInner {
            version_id: BASE_VERSION_ID.to_owned(),
            factors,
        }))
    }

    /// Appends a factor at the next power of two.
    ///
    /// Every designation valid under `self` stays valid under the result,
    /// with the new factor read as choice 0.
    pub fn extend(&self, new_factor: Factor) -> Result<Self> {
        new_factor.validate()?;
        if self.len() >= MAX_FACTORS {
            return Err(Error::TooManyFactors { max: MAX_FACTORS });
        }
        let expected = 1u64 << self.len();
        if new_factor.position_value != expected {
            return Err(Error::PositionNotNext {
                expected,
                found: new_factor.position_value,
            });
        }
        if self.factor_named(&new_factor.name).is_some() {
            return Err(Error::DuplicateName(new_factor.name));
        }
        let version_id = format!(
            "{}+{}@{}",
            self.version_id(),
            new_factor.name,
            new_factor.position_value
        );
        let mut factors = self.0.factors.clone();
        factors.push(new_factor);
        Ok(FactorSchema(Arc::new(SchemaInner {
            version_id,
            factors,
        })))
    }

    /// Extends with a factor placed at the next free position.
    pub fn extend_next(
        &self,
        name: impl Into<String>,
        choice0_label: impl Into<String>,
        choice1_label: impl Into<String>,
    ) -> Result<Self> {
        if self.len() >= MAX_FACTORS {
            return Err(Error::TooManyFactors { max: MAX_FACTORS });
        }
        let factor = Factor::new(name, 1u64 << self.len(), choice0_label, choice1_label)?;
        self.extend(factor)
    }

    pub fn factor_at(&self, position_value: u64) -> Result<&Factor> {
        self.index_of(position_value)
            .map(|i| &self.0.factors[i])
            .ok_or_else(|| self.unknown_position(position_value))
    }

    pub(crate) fn unknown_position(&self, position: u64) -> Error {
        Error::UnknownPosition {
            position,
            schema: self.version_id().to_owned(),
        }
    }

    /// Index of the factor at `position_value`, if it is one of ours.
    pub fn index_of(&self, position_value: u64) -> Option<usize> {
        if !position_value.is_power_of_two() {
            return None;
        }
        let k = position_value.trailing_zeros() as usize;
        (k < self.len()).then_some(k)
    }

    pub fn factor_named(&self, name: &str) -> Option<&Factor> {
        self.0.factors.iter().find(|f| f.name == name)
    }

    pub fn version_id(&self) -> &str {
        &self.0.version_id
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0.factors
    }

    pub fn positions(&self) -> impl DoubleEndedIterator<Item = u64> + '_ {
        self.0.factors.iter().map(Factor::position_value)
    }

    /// Number of factors, `N`.
    pub fn len(&self) -> usize {
        self.0.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.factors.is_empty()
    }

    /// Number of fully specified systems, `2^N`.
    pub fn system_count(&self) -> u64 {
        1u64 << self.len()
    }

    /// Bits occupied by this schema's factors.
    pub fn full_mask(&self) -> u64 {
        self.system_count() - 1
    }

    /// True if `self` keeps every factor of `older`, field for field, in
    /// the same positions (possibly adding more on top).
    pub fn is_extension_of(&self, older: &FactorSchema) -> bool {
        self.len() >= older.len() && self.factors()[..older.len()] == *older.factors()
    }

    pub fn same_version(&self, other: &FactorSchema) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }

    pub(crate) fn check_same(&self, other: &FactorSchema) -> Result<()> {
        if self.same_version(other) {
            Ok(())
        } else {
            Err(Error::SchemaMismatch {
                expected: self.version_id().to_owned(),
                found: other.version_id().to_owned(),
            })
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::registry::write_atomically(path, self.to_json().as_bytes())
    }
}

impl Default for FactorSchema {
    fn default() -> Self {
        Self::base()
    }
}
