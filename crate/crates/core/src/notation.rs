//! Textual forms of designations and categories.
//!
//! Accepted input, after trimming surrounding whitespace:
//!
//! ```text
//! system    := "System-" DECIMAL
//! category  := "Category-" group ( "-" group )* ( WS+ ( "System" | "Systems" ) )?
//! group     := POSITION "/" ( "0" | "1" )
//! bitstring := [01]{N}
//! wildcard  := [01Xx]{N}      with at least one X
//! ```
//!
//! `POSITION` is a factor's place value (1, 2, 4, …), not its row number.
//! Category groups may come in any order; a repeated group with the same
//! bit is accepted, a repeated group with the other bit is a conflict.
//! Output is canonical: groups ascending by position, singular "System",
//! uppercase `X`.

use std::fmt;

use crate::designation::{Choice, Designation};
use crate::error::{Error, Result};
use crate::pattern::CategoryPattern;
use crate::schema::FactorSchema;

/// Either a fully specified system or a category of systems.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Classification {
    Designation(Designation),
    Pattern(CategoryPattern),
}

impl Classification {
    pub fn schema(&self) -> &FactorSchema {
        match self {
            Classification::Designation(d) => d.schema(),
            Classification::Pattern(p) => p.schema(),
        }
    }

    pub fn schema_version(&self) -> &str {
        self.schema().version_id()
    }

    /// The category this classification stands for; a designation becomes
    /// its single-member pattern.
    pub fn as_pattern(&self) -> CategoryPattern {
        match self {
            Classification::Designation(d) => CategoryPattern::from_designation(d),
            Classification::Pattern(p) => p.clone(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Classification::Designation(_) => "designation",
            Classification::Pattern(_) => "pattern",
        }
    }
}

impl From<Designation> for Classification {
    fn from(d: Designation) -> Self {
        Classification::Designation(d)
    }
}

impl From<CategoryPattern> for Classification {
    fn from(p: CategoryPattern) -> Self {
        Classification::Pattern(p)
    }
}

/// Which input syntax [`parse`] recognized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceForm {
    SystemName,
    CategoryName,
    Bitstring,
    WildcardString,
}

/// Output syntax for [`format`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Style {
    SystemName,
    CategoryName,
    Bitstring,
}

impl Style {
    pub const ALL: [Style; 3] = [Style::SystemName, Style::CategoryName, Style::Bitstring];

    pub fn name(self) -> &'static str {
        match self {
            Style::SystemName => "system-name",
            Style::CategoryName => "category-name",
            Style::Bitstring => "bitstring",
        }
    }
}

impl fmt::Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedText {
    pub item: Classification,
    pub form: SourceForm,
}

const SYSTEM_PREFIX: &str = "System-";
const CATEGORY_PREFIX: &str = "Category-";

pub fn parse(schema: &FactorSchema, text: &str) -> Result<ParsedText> {
    let text = text.trim();
    if let Some(rest) = text.strip_prefix(SYSTEM_PREFIX) {
        let d = parse_system_number(schema, rest)?;
        return Ok(ParsedText {
            item: Classification::Designation(d),
            form: SourceForm::SystemName,
        });
    }
    if let Some(rest) = text.strip_prefix(CATEGORY_PREFIX) {
        let p = parse_category(schema, rest, text)?;
        return Ok(ParsedText {
            item: Classification::Pattern(p),
            form: SourceForm::CategoryName,
        });
    }
    if !text.is_empty()
        && text
            .chars()
            .all(|c| c.is_ascii_digit() || c == 'X' || c == 'x')
    {
        return parse_stream(schema, text);
    }
    Err(Error::UnrecognizedSyntax(text.to_owned()))
}

/// Parses any accepted form as a category; a full designation becomes its
/// single-member pattern.
pub fn parse_pattern(schema: &FactorSchema, text: &str) -> Result<CategoryPattern> {
    Ok(parse(schema, text)?.item.as_pattern())
}

/// Parses text that must name exactly one system.
pub fn parse_designation(schema: &FactorSchema, text: &str) -> Result<Designation> {
    match parse(schema, text)?.item {
        Classification::Designation(d) => Ok(d),
        Classification::Pattern(p) => p.to_designation().ok_or_else(|| {
            Error::UnrecognizedSyntax(format!(
                "{} names a category of {} systems, not a single system",
                text.trim(),
                p.cardinality()
            ))
        }),
    }
}

fn parse_system_number(schema: &FactorSchema, digits: &str) -> Result<Designation> {
    let out_of_range = || Error::OutOfRange {
        value: digits.to_owned(),
        limit: schema.system_count(),
        schema: schema.version_id().to_owned(),
    };
    if let Some(magnitude) = digits.strip_prefix('-') {
        if is_decimal(magnitude) {
            return Err(out_of_range());
        }
    }
    if !is_decimal(digits) {
        return Err(Error::UnrecognizedSyntax(format!(
            "{SYSTEM_PREFIX}{digits}"
        )));
    }
    // Any run of digits too long for u64 is certainly out of range.
    let n = digits.parse::<u64>().map_err(|_| out_of_range())?;
    Designation::from_decimal(schema, n)
}

fn is_decimal(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn parse_category(schema: &FactorSchema, rest: &str, whole: &str) -> Result<CategoryPattern> {
    let unrecognized = || Error::UnrecognizedSyntax(whole.to_owned());
    let (groups, suffix) = match rest.split_once(char::is_whitespace) {
        Some((groups, suffix)) => (groups, suffix.trim_start()),
        None => (rest, ""),
    };
    if !matches!(suffix, "" | "System" | "Systems") {
        return Err(unrecognized());
    }
    let mut pattern = CategoryPattern::unspecified(schema);
    for group in groups.split('-') {
        let (position, bit) = group.split_once('/').ok_or_else(unrecognized)?;
        if !is_decimal(position) || bit.is_empty() {
            return Err(unrecognized());
        }
        let position: u64 = position
            .parse()
            .map_err(|_| schema.unknown_position(u64::MAX))?;
        schema.factor_at(position)?;
        let choice = match bit {
            "0" => Choice::Zero,
            "1" => Choice::One,
            _ => {
                let ch = bit.chars().find(|c| *c != '0' && *c != '1').unwrap_or('?');
                let offset = whole.find(group).unwrap_or(0) + group.len() - bit.len();
                return Err(Error::BadChar { ch, offset });
            }
        };
        pattern = pattern.specialize(position, choice)?;
    }
    Ok(pattern)
}

fn parse_stream(schema: &FactorSchema, text: &str) -> Result<ParsedText> {
    let found = text.chars().count();
    if found != schema.len() {
        return Err(Error::BadLength {
            expected: schema.len(),
            found,
        });
    }
    let mut cells = Vec::with_capacity(found);
    let mut wildcard = false;
    for (offset, ch) in text.chars().enumerate() {
        cells.push(match ch {
            '0' => Some(Choice::Zero),
            '1' => Some(Choice::One),
            'X' | 'x' => {
                wildcard = true;
                None
            }
            _ => return Err(Error::BadChar { ch, offset }),
        });
    }
    if !wildcard {
        let d = Designation::from_bitstring(schema, text)?;
        return Ok(ParsedText {
            item: Classification::Designation(d),
            form: SourceForm::Bitstring,
        });
    }
    // Stream is MSB-first, cells are ascending.
    cells.reverse();
    let cells: Vec<_> = cells.into_iter().map(Into::into).collect();
    Ok(ParsedText {
        item: Classification::Pattern(CategoryPattern::from_cells(schema, &cells)?),
        form: SourceForm::WildcardString,
    })
}

/// Canonical text for `item` in `style`.
///
/// Valid combinations are exactly those that [`parse`] maps back to the
/// same item: system-name and bitstring for designations, category-name
/// for patterns with at least one constraint, bitstring for patterns with
/// at least one wildcard.
pub fn format(item: &Classification, style: Style) -> Result<String> {
    let mismatch = |item: &'static str| Error::StyleMismatch {
        style: style.name(),
        item,
    };
    match (item, style) {
        (Classification::Designation(d), Style::SystemName) => Ok(d.to_string()),
        (Classification::Designation(d), Style::Bitstring) => Ok(d.to_bitstring()),
        (Classification::Designation(_), Style::CategoryName) => {
            Err(mismatch("a fully specified designation"))
        }
        (Classification::Pattern(_), Style::SystemName) => Err(mismatch("a category pattern")),
        (Classification::Pattern(p), Style::CategoryName) => {
            if p.is_unspecified() {
                return Err(mismatch("a pattern with no constraints"));
            }
            let groups: Vec<String> = p
                .constraints()
                .map(|(pos, c)| format!("{pos}/{c}"))
                .collect();
            Ok(format!("{CATEGORY_PREFIX}{} System", groups.join("-")))
        }
        (Classification::Pattern(p), Style::Bitstring) => {
            if p.is_fully_specified() {
                return Err(mismatch("a pattern with no wildcards"));
            }
            Ok(p.to_stream())
        }
    }
}

/// Styles [`format`] accepts for `item`.
pub fn valid_styles(item: &Classification) -> Vec<Style> {
    Style::ALL
        .into_iter()
        .filter(|&s| format(item, s).is_ok())
        .collect()
}
