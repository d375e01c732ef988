//! Persistent catalog of classified real-world systems.
//!
//! A registry file is a self-describing JSON document that embeds the full
//! factor schema it was written under:
//!
//! ```json
//! {
//!   "format": "aidesig-registry",
//!   "format_version": 1,
//!   "schema": { "version_id": "base-10", "factors": [ … ] },
//!   "records": [
//!     {
//!       "record_id": "song-shuffler",
//!       "display_name": "Song shuffler",
//!       "schema_version": "base-10",
//!       "classification": { "kind": "designation", "text": "System-734" },
//!       "rationales": { "256": "Shuffle gives the listener surprises." },
//!       "created_at": "2024-03-01T12:00:00Z",
//!       "tags": ["music"]
//!     }
//!   ]
//! }
//! ```
//!
//! Designations are stored as `System-<n>` and patterns as their MSB-first
//! wildcard stream, so the file stays readable in a diff.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::designation::{ChoiceMap, Designation};
use crate::error::{Error, Result};
use crate::notation::{self, Classification};
use crate::pattern::CategoryPattern;
use crate::schema::FactorSchema;

pub const FORMAT_NAME: &str = "aidesig-registry";
pub const FORMAT_VERSION: u32 = 1;

/// One classified system with its per-factor reasoning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemRecord {
    pub record_id: String,
    pub display_name: String,
    pub classification: Classification,
    /// Free-text reasoning keyed by factor position; may be partial.
    pub rationales: BTreeMap<u64, String>,
    pub created_at: DateTime<Utc>,
    pub tags: Vec<String>,
}

impl SystemRecord {
    pub fn new(
        record_id: impl Into<String>,
        display_name: impl Into<String>,
        classification: impl Into<Classification>,
    ) -> Self {
        SystemRecord {
            record_id: record_id.into(),
            display_name: display_name.into(),
            classification: classification.into(),
            rationales: BTreeMap::new(),
            created_at: Utc::now(),
            tags: Vec::new(),
        }
    }

    pub fn with_rationale(mut self, position: u64, text: impl Into<String>) -> Self {
        self.rationales.insert(position, text.into());
        self
    }

    pub fn with_tags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tags = tags.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_created_at(mut self, created_at: DateTime<Utc>) -> Self {
        self.created_at = created_at;
        self
    }

    pub fn schema_version(&self) -> &str {
        self.classification.schema_version()
    }

    /// The record exactly as it appears inside a registry file.
    pub fn to_document(&self) -> serde_json::Value {
        serde_json::to_value(RecordDocument::from_record(self))
            .expect("record serialization is infallible")
    }

    fn validate(&self, schema: &FactorSchema) -> Result<()> {
        if self.record_id.trim().is_empty() {
            return Err(Error::MalformedDocument("record_id is empty".into()));
        }
        schema.check_same(self.classification.schema())?;
        if let Some(&bad) = self
            .rationales
            .keys()
            .find(|&&p| schema.index_of(p).is_none())
        {
            return Err(Error::InvalidRationaleKey(bad));
        }
        Ok(())
    }

    fn matches(&self, query: &CategoryPattern) -> bool {
        match &self.classification {
            Classification::Designation(d) => query.matches_value(d.value()),
            Classification::Pattern(p) => query.subsumes(p).unwrap_or(false),
        }
    }

    fn rebased(&self, wider: &FactorSchema) -> Result<Self> {
        let classification = match &self.classification {
            Classification::Designation(d) => Classification::Designation(d.rebase(wider)?),
            Classification::Pattern(p) => Classification::Pattern(p.widen(wider)?),
        };
        Ok(SystemRecord {
            classification,
            ..self.clone()
        })
    }
}

/// Turns a full set of human answers into a record.
///
/// Rationales are stored verbatim; the record id is the caller's choice.
pub fn classify(
    schema: &FactorSchema,
    record_id: impl Into<String>,
    display_name: impl Into<String>,
    answers: &ChoiceMap,
    rationales: BTreeMap<u64, String>,
) -> Result<SystemRecord> {
    let designation = Designation::from_choices(schema, answers)?;
    if let Some(&bad) = rationales.keys().find(|&&p| schema.index_of(p).is_none()) {
        return Err(Error::InvalidRationaleKey(bad));
    }
    let mut record = SystemRecord::new(record_id, display_name, designation);
    record.rationales = rationales;
    Ok(record)
}

/// Lowercase ASCII slug, e.g. "Song Shuffler (v2)" -> "song-shuffler-v2".
pub fn slugify(name: &str) -> String {
    let mut slug = String::with_capacity(name.len());
    for ch in name.chars() {
        if ch.is_ascii_alphanumeric() {
            slug.push(ch.to_ascii_lowercase());
        } else if !slug.is_empty() && !slug.ends_with('-') {
            slug.push('-');
        }
    }
    while slug.ends_with('-') {
        slug.pop();
    }
    if slug.is_empty() {
        slug.push_str("record");
    }
    slug
}

/// Counts for one category in a [`Registry::population_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulationRow {
    pub category: CategoryPattern,
    /// Fully designated records inside the category.
    pub designated: usize,
    /// Pattern-classified records whose whole category lies inside it.
    pub patterned: usize,
    /// Number of system types the category spans.
    pub cardinality: u64,
}

impl PopulationRow {
    pub fn total(&self) -> usize {
        self.designated + self.patterned
    }
}

/// An immutable set of records sharing one schema. Mutating operations
/// return a new registry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    schema: FactorSchema,
    records: BTreeMap<String, SystemRecord>,
}

impl Registry {
    pub fn new(schema: FactorSchema) -> Self {
        Registry {
            schema,
            records: BTreeMap::new(),
        }
    }

    pub fn schema(&self) -> &FactorSchema {
        &self.schema
    }

    /// Records in ascending id order.
    pub fn records(&self) -> impl ExactSizeIterator<Item = &SystemRecord> {
        self.records.values()
    }

    pub fn get(&self, record_id: &str) -> Option<&SystemRecord> {
        self.records.get(record_id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn add_record(&self, record: SystemRecord) -> Result<Self> {
        record.validate(&self.schema)?;
        if self.records.contains_key(&record.record_id) {
            return Err(Error::DuplicateId(record.record_id));
        }
        let mut next = self.clone();
        next.records.insert(record.record_id.clone(), record);
        Ok(next)
    }

    /// Records inside the queried category. A designated record matches
    /// when its value matches; a pattern record matches when its whole
    /// category is subsumed by the query.
    pub fn query(&self, category: &CategoryPattern) -> Result<Vec<&SystemRecord>> {
        self.schema.check_same(category.schema())?;
        Ok(self.records().filter(|r| r.matches(category)).collect())
    }

    pub fn population_report(&self, categories: &[CategoryPattern]) -> Result<Vec<PopulationRow>> {
        categories
            .iter()
            .map(|category| {
                let hits = self.query(category)?;
                let designated = hits
                    .iter()
                    .filter(|r| matches!(r.classification, Classification::Designation(_)))
                    .count();
                Ok(PopulationRow {
                    category: category.clone(),
                    designated,
                    patterned: hits.len() - designated,
                    cardinality: category.cardinality(),
                })
            })
            .collect()
    }

    /// Re-reads every record under `new_schema`, which must keep all of the
    /// current factors. Designations keep their value (new factors read as
    /// choice 0); pattern records get unspecified cells for new factors.
    pub fn migrate(&self, new_schema: &FactorSchema) -> Result<Self> {
        if !new_schema.is_extension_of(&self.schema) {
            return Err(Error::NotAnExtension {
                old: self.schema.version_id().to_owned(),
                new: new_schema.version_id().to_owned(),
            });
        }
        let records = self
            .records
            .iter()
            .map(|(id, r)| Ok((id.clone(), r.rebased(new_schema)?)))
            .collect::<Result<_>>()?;
        Ok(Registry {
            schema: new_schema.clone(),
            records,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = RegistryDocument {
            format: FORMAT_NAME.to_owned(),
            format_version: FORMAT_VERSION,
            schema: self.schema.clone(),
            records: self.records().map(RecordDocument::from_record).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("registry serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: RegistryDocument =
            serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))?;
        if doc.format != FORMAT_NAME {
            return Err(Error::MalformedDocument(format!(
                "format is {:?}, expected {FORMAT_NAME:?}",
                doc.format
            )));
        }
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::MalformedDocument(format!(
                "unsupported format_version {}",
                doc.format_version
            )));
        }
        doc.records
            .into_iter()
            .try_fold(Registry::new(doc.schema), |reg, rec| {
                let record = rec.into_record(&reg.schema)?;
                reg.add_record(record)
            })
    }

    /// Writes the registry through a temporary file in the same directory
    /// and renames it into place.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        write_atomically(path, text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Loads a registry and insists it was written under `expected`.
    /// A registry from an older schema must be migrated explicitly.
    pub fn load_expecting(path: &Path, expected: &FactorSchema) -> Result<Self> {
        let reg = Self::load(path)?;
        expected.check_same(&reg.schema)?;
        Ok(reg)
    }

    /// Adds one record per CSV row. The header must start with `name,bits`;
    /// any further columns are tags. Ids are slugs of the names.
    pub fn import_csv<R: Read>(&self, reader: R, created_at: DateTime<Utc>) -> Result<Self> {
        let csv_err = |e: csv::Error| Error::MalformedDocument(format!("csv: {e}"));
        let mut rdr = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(csv_err)?;
        let leading: Vec<String> = headers
            .iter()
            .take(2)
            .map(str::to_ascii_lowercase)
            .collect();
        if leading != ["name", "bits"] {
            return Err(Error::MalformedDocument(
                "csv header must begin with name,bits".into(),
            ));
        }
        let mut reg = self.clone();
        for row in rdr.records() {
            let row = row.map_err(csv_err)?;
            let name = row.get(0).unwrap_or_default();
            let bits = row.get(1).unwrap_or_default();
            if name.is_empty() {
                return Err(Error::MalformedDocument("csv row without a name".into()));
            }
            let classification = parse_stream_classification(&reg.schema, bits)?;
            let tags = row.iter().skip(2).filter(|t| !t.is_empty());
            let record = SystemRecord::new(slugify(name), name, classification)
                .with_tags(tags)
                .with_created_at(created_at);
            reg = reg.add_record(record)?;
        }
        Ok(reg)
    }

    /// Writes `name,bits,tag…` rows, one per record.
    pub fn export_csv<W: Write>(&self, writer: W) -> Result<()> {
        let csv_err = |e: csv::Error| Error::MalformedDocument(format!("csv: {e}"));
        let tag_columns = self.records().map(|r| r.tags.len()).max().unwrap_or(0);
        let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(writer);
        let mut header = vec!["name".to_owned(), "bits".to_owned()];
        header.extend(std::iter::repeat_n("tag".to_owned(), tag_columns.max(1)));
        wtr.write_record(&header).map_err(csv_err)?;
        for r in self.records() {
            let bits = match &r.classification {
                Classification::Designation(d) => d.to_bitstring(),
                Classification::Pattern(p) => p.to_stream(),
            };
            let mut row = vec![r.display_name.clone(), bits];
            row.extend(r.tags.iter().cloned());
            wtr.write_record(&row).map_err(csv_err)?;
        }
        wtr.flush().map_err(|e| Error::Io {
            path: "<csv output>".into(),
            source: e,
        })
    }
}

fn parse_stream_classification(schema: &FactorSchema, bits: &str) -> Result<Classification> {
    let parsed = notation::parse(schema, bits)?;
    match parsed.form {
        notation::SourceForm::Bitstring | notation::SourceForm::WildcardString => Ok(parsed.item),
        _ => Err(Error::MalformedDocument(format!(
            "bits column must be a bit or wildcard stream, got {bits:?}"
        ))),
    }
}

pub(crate) fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct RegistryDocument {
    format: String,
    format_version: u32,
    schema: FactorSchema,
    records: Vec<RecordDocument>,
}

#[derive(Serialize, Deserialize)]
struct RecordDocument {
    record_id: String,
    display_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema_version: Option<String>,
    classification: ClassificationDocument,
    #[serde(default)]
    rationales: BTreeMap<String, String>,
    created_at: DateTime<Utc>,
    #[serde(default)]
    tags: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ClassificationDocument {
    kind: ClassificationKind,
    text: String,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum ClassificationKind {
    Designation,
    Pattern,
}

impl RecordDocument {
    fn from_record(r: &SystemRecord) -> Self {
        let (kind, text) = match &r.classification {
            Classification::Designation(d) => (ClassificationKind::Designation, d.to_string()),
            Classification::Pattern(p) => (ClassificationKind::Pattern, p.to_stream()),
        };
        RecordDocument {
            record_id: r.record_id.clone(),
            display_name: r.display_name.clone(),
            schema_version: Some(r.schema_version().to_owned()),
            classification: ClassificationDocument { kind, text },
            rationales: r
                .rationales
                .iter()
                .map(|(p, t)| (p.to_string(), t.clone()))
                .collect(),
            created_at: r.created_at,
            tags: r.tags.clone(),
        }
    }

    fn into_record(self, schema: &FactorSchema) -> Result<SystemRecord> {
        if let Some(version) = &self.schema_version {
            if version != schema.version_id() {
                return Err(Error::SchemaMismatch {
                    expected: schema.version_id().to_owned(),
                    found: version.clone(),
                });
            }
        }
        let text = &self.classification.text;
        let does_not_fit = |e: Error| Error::SchemaMismatch {
            expected: schema.version_id().to_owned(),
            found: format!("record {:?} classified as {text:?} ({e})", self.record_id),
        };
        let classification = match self.classification.kind {
            ClassificationKind::Designation => Classification::Designation(
                notation::parse_designation(schema, text).map_err(does_not_fit)?,
            ),
            ClassificationKind::Pattern => Classification::Pattern(
                notation::parse_pattern(schema, text).map_err(does_not_fit)?,
            ),
        };
        let rationales = self
            .rationales
            .into_iter()
            .map(|(k, v)| {
                k.parse::<u64>().map(|p| (p, v)).map_err(|_| {
                    Error::MalformedDocument(format!("rationale key {k:?} is not a number"))
                })
            })
            .collect::<Result<_>>()?;
        Ok(SystemRecord {
            record_id: self.record_id,
            display_name: self.display_name,
            classification,
            rationales,
            created_at: self.created_at,
            tags: self.tags,
        })
    }
}
