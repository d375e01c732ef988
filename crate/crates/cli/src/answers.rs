//! Answers files for `encode --answers` and `classify --answers`.
//!
//! A JSON object keyed by factor position:
//!
//! ```json
//! { "1": { "choice": 0, "rationale": "Works with listeners." }, "2": { "choice": 1 }, "4": 1 }
//! ```
//!
//! An entry may be a bare `0`/`1` when there is no rationale.

use std::collections::BTreeMap;
use std::path::Path;

use aidesig::{Choice, ChoiceMap, Error, Result};
use serde::Deserialize;

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Bare(i64),
    Full {
        choice: i64,
        #[serde(default)]
        rationale: Option<String>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Answers {
    pub choices: ChoiceMap,
    pub rationales: BTreeMap<u64, String>,
}

pub fn parse(text: &str) -> Result<Answers> {
    let raw: BTreeMap<String, Entry> = serde_json::from_str(text)
        .map_err(|e| Error::MalformedDocument(format!("answers file: {e}")))?;
    let mut parsed: Vec<(u64, Choice, Option<String>)> = Vec::with_capacity(raw.len());
    for (key, entry) in raw {
        let position: u64 = key.trim().parse().map_err(|_| {
            Error::MalformedDocument(format!("answers file: key {key:?} is not a position value"))
        })?;
        let (bit, rationale) = match entry {
            Entry::Bare(bit) => (bit, None),
            Entry::Full { choice, rationale } => (choice, rationale),
        };
        let choice = match bit {
            0 => Choice::Zero,
            1 => Choice::One,
            other => return Err(Error::BadChoice(other)),
        };
        parsed.push((position, choice, rationale));
    }
    parsed.sort_by_key(|(p, _, _)| *p);
    let mut answers = Answers::default();
    for (position, choice, rationale) in parsed {
        answers.choices.push(position, choice);
        if let Some(text) = rationale.filter(|t| !t.trim().is_empty()) {
            answers.rationales.insert(position, text);
        }
    }
    Ok(answers)
}

pub fn load(path: &Path) -> Result<Answers> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse(&text)
}
