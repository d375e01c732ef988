//! Binary-stream designations for high-level AI design choices.
//!
//! Each factor of a [`FactorSchema`] is a binary design axis with a place
//! value `2^k`. A fully specified system is the decimal value of its
//! stream of choices ([`Designation`], written `System-734`); a partially
//! specified one is a [`CategoryPattern`] (`Category-2/0-4/0`, or
//! `XXXXXXX00X`). The [`Registry`] keeps classified real-world systems
//! together with their per-factor reasoning.
//!
//! ```
//! use aidesig::{notation, FactorSchema};
//!
//! let schema = FactorSchema::base();
//! let shuffler = notation::parse_designation(&schema, "System-734").unwrap();
//! assert_eq!(shuffler.to_bitstring(), "1011011110");
//! assert!(shuffler.is_collaborative());
//!
//! let competitive = notation::parse_pattern(&schema, "Category-1/1").unwrap();
//! assert_eq!(competitive.cardinality(), 512);
//! assert!(!competitive.matches(&shuffler).unwrap());
//! ```

pub mod designation;
pub mod error;
pub mod notation;
pub mod pattern;
pub mod registry;
pub mod schema;

pub use designation::{Choice, ChoiceMap, Designation};
pub use error::{Error, Result};
pub use notation::{Classification, ParsedText, SourceForm, Style};
pub use pattern::{CategoryPattern, Cell, Meet, Members};
pub use registry::{classify, slugify, PopulationRow, Registry, SystemRecord};
pub use schema::{Factor, FactorSchema, BASE_VERSION_ID, MAX_FACTORS};
