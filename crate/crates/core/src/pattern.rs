//! Under-specified systems: per-factor tristate patterns and their algebra.
//!
//! A pattern is stored as a pair of masks. `care` marks the constrained
//! positions, `bits` holds their required values (`bits ⊆ care`). Matching,
//! subsumption and meet are then a handful of bitwise operations.

use std::fmt;
use std::iter::FusedIterator;

use crate::designation::{Choice, Designation};
use crate::error::{Error, Result};
use crate::schema::FactorSchema;

/// One factor slot of a [`CategoryPattern`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Zero,
    One,
    Unspecified,
}

impl Cell {
    pub fn choice(self) -> Option<Choice> {
        match self {
            Cell::Zero => Some(Choice::Zero),
            Cell::One => Some(Choice::One),
            Cell::Unspecified => None,
        }
    }
}

impl From<Choice> for Cell {
    fn from(c: Choice) -> Self {
        match c {
            Choice::Zero => Cell::Zero,
            Choice::One => Cell::One,
        }
    }
}

impl From<Option<Choice>> for Cell {
    fn from(c: Option<Choice>) -> Self {
        c.map_or(Cell::Unspecified, Cell::from)
    }
}

/// A category of systems, e.g. `Category-2/0-4/0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CategoryPattern {
    schema: FactorSchema,
    care: u64,
    bits: u64,
}

/// Outcome of [`CategoryPattern::meet`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Meet {
    Pattern(CategoryPattern),
    /// No system satisfies both sides; lists the disputed positions.
    Contradiction(Vec<u64>),
}

impl Meet {
    pub fn into_pattern(self) -> Option<CategoryPattern> {
        match self {
            Meet::Pattern(p) => Some(p),
            Meet::Contradiction(_) => None,
        }
    }

    pub fn is_contradiction(&self) -> bool {
        matches!(self, Meet::Contradiction(_))
    }
}

impl CategoryPattern {
    /// Every system of the schema.
    pub fn unspecified(schema: &FactorSchema) -> Self {
        CategoryPattern {
            schema: schema.clone(),
            care: 0,
            bits: 0,
        }
    }

    /// Cells ascending by position value; exactly one per factor.
    pub fn from_cells(schema: &FactorSchema, cells: &[Cell]) -> Result<Self> {
        if cells.len() != schema.len() {
            return Err(Error::BadLength {
                expected: schema.len(),
                found: cells.len(),
            });
        }
        let mut p = Self::unspecified(schema);
        for (k, cell) in cells.iter().enumerate() {
            if let Some(choice) = cell.choice() {
                p.constrain(1 << k, choice);
            }
        }
        Ok(p)
    }

    /// Builds from `(position, choice)` constraints in any order. Repeating
    /// a constraint with the same choice is harmless.
    pub fn from_constraints<I>(schema: &FactorSchema, constraints: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, Choice)>,
    {
        constraints
            .into_iter()
            .try_fold(Self::unspecified(schema), |p, (pos, choice)| {
                p.specialize(pos, choice)
            })
    }

    /// The single-member category of a designation.
    pub fn from_designation(d: &Designation) -> Self {
        CategoryPattern {
            schema: d.schema().clone(),
            care: d.schema().full_mask(),
            bits: d.value(),
        }
    }

    fn constrain(&mut self, position: u64, choice: Choice) {
        self.care |= position;
        match choice {
            Choice::One => self.bits |= position,
            Choice::Zero => self.bits &= !position,
        }
    }

    pub fn schema(&self) -> &FactorSchema {
        &self.schema
    }

    pub fn schema_version(&self) -> &str {
        self.schema.version_id()
    }

    pub fn cell(&self, position: u64) -> Result<Cell> {
        self.schema.factor_at(position)?;
        Ok(self.cell_unchecked(position))
    }

    fn cell_unchecked(&self, position: u64) -> Cell {
        if self.care & position == 0 {
            Cell::Unspecified
        } else {
            Cell::from(Choice::from_bool(self.bits & position != 0))
        }
    }

    /// All cells, ascending by position.
    pub fn cells(&self) -> Vec<Cell> {
        self.schema
            .positions()
            .map(|p| self.cell_unchecked(p))
            .collect()
    }

    /// Constrained positions and their required choices, ascending.
    pub fn constraints(&self) -> impl Iterator<Item = (u64, Choice)> + '_ {
        self.schema
            .positions()
            .filter(|p| self.care & p != 0)
            .map(|p| (p, Choice::from_bool(self.bits & p != 0)))
    }

    pub fn constrained_count(&self) -> usize {
        self.care.count_ones() as usize
    }

    pub fn is_unspecified(&self) -> bool {
        self.care == 0
    }

    pub fn is_fully_specified(&self) -> bool {
        self.care == self.schema.full_mask()
    }

    /// The lone member of a fully specified pattern.
    pub fn to_designation(&self) -> Option<Designation> {
        self.is_fully_specified().then(|| {
            Designation::from_decimal(&self.schema, self.bits).expect("bits within schema")
        })
    }

    pub fn matches(&self, d: &Designation) -> Result<bool> {
        self.schema.check_same(d.schema())?;
        Ok(self.matches_value(d.value()))
    }

    pub(crate) fn matches_value(&self, value: u64) -> bool {
        value & self.care == self.bits
    }

    /// Number of matching systems, `2^(unspecified cells)`.
    pub fn cardinality(&self) -> u64 {
        1u64 << (self.schema.len() - self.constrained_count())
    }

    /// Matching systems in ascending decimal order, produced lazily.
    pub fn members(&self) -> Members {
        Members {
            schema: self.schema.clone(),
            bits: self.bits,
            free: self.schema.full_mask() & !self.care,
            next_free: Some(0),
        }
    }

    /// True iff every system matching `specific` also matches `self`.
    pub fn subsumes(&self, specific: &CategoryPattern) -> Result<bool> {
        self.schema.check_same(&specific.schema)?;
        Ok(self.care & !specific.care == 0 && specific.bits & self.care == self.bits)
    }

    /// Cell-wise combination: the most general pattern subsumed by both.
    pub fn meet(&self, other: &CategoryPattern) -> Result<Meet> {
        self.schema.check_same(&other.schema)?;
        let disputed = self.care & other.care & (self.bits ^ other.bits);
        if disputed != 0 {
            let positions = self
                .schema
                .positions()
                .filter(|p| disputed & p != 0)
                .collect();
            return Ok(Meet::Contradiction(positions));
        }
        Ok(Meet::Pattern(CategoryPattern {
            schema: self.schema.clone(),
            care: self.care | other.care,
            bits: self.bits | other.bits,
        }))
    }

    /// Constrains one more position.
    pub fn specialize(&self, position: u64, choice: Choice) -> Result<Self> {
        self.schema.factor_at(position)?;
        if let Some(existing) = self.cell_unchecked(position).choice() {
            if existing != choice {
                return Err(Error::ConflictingConstraint(position));
            }
        }
        let mut p = self.clone();
        p.constrain(position, choice);
        Ok(p)
    }

    /// Re-reads the pattern under an extended schema; new cells are left
    /// unspecified.
    pub fn widen(&self, wider: &FactorSchema) -> Result<Self> {
        if !wider.is_extension_of(&self.schema) {
            return Err(Error::NotAnExtension {
                old: self.schema.version_id().to_owned(),
                new: wider.version_id().to_owned(),
            });
        }
        Ok(CategoryPattern {
            schema: wider.clone(),
            care: self.care,
            bits: self.bits,
        })
    }

    /// MSB-first stream with `X` for unspecified cells.
    pub fn to_stream(&self) -> String {
        self.schema
            .positions()
            .rev()
            .map(|p| match self.cell_unchecked(p) {
                Cell::Zero => '0',
                Cell::One => '1',
                Cell::Unspecified => 'X',
            })
            .collect()
    }
}

impl fmt::Display for CategoryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_stream())
    }
}

/// Iterator over the members of a pattern; see [`CategoryPattern::members`].
#[derive(Debug, Clone)]
pub struct Members {
    schema: FactorSchema,
    bits: u64,
    free: u64,
    next_free: Option<u64>,
}

impl Iterator for Members {
    type Item = Designation;

    fn next(&mut self) -> Option<Designation> {
        let current = self.next_free?;
        // Next subset of `free` in ascending order: carry through the
        // non-free positions by setting them before the increment.
        let successor = (current | !self.free).wrapping_add(1) & self.free;
        self.next_free = (successor != 0).then_some(successor);
        Some(
            Designation::from_decimal(&self.schema, self.bits | current)
                .expect("member within schema"),
        )
    }
}

impl FusedIterator for Members {}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> FactorSchema {
        FactorSchema::base()
    }

    fn cat(pairs: &[(u64, u8)]) -> CategoryPattern {
        CategoryPattern::from_constraints(
            &base(),
            pairs
                .iter()
                .map(|&(p, b)| (p, Choice::try_from(b).unwrap())),
        )
        .unwrap()
    }

    fn sys(n: u64) -> Designation {
        Designation::from_decimal(&base(), n).unwrap()
    }

    #[test]
    fn matching_examples() {
        assert!(cat(&[(1, 1)]).matches(&sys(1023)).unwrap());
        assert!(!cat(&[(512, 0)]).matches(&sys(734)).unwrap());
        assert!(!cat(&[(2, 0), (4, 0)]).matches(&sys(734)).unwrap());
    }

    #[test]
    fn matching_across_schemas_is_rejected() {
        let ext = base().extend_next("Alpha", "A", "B").unwrap();
        let d = Designation::from_decimal(&ext, 3).unwrap();
        assert!(matches!(
            cat(&[(1, 1)]).matches(&d),
            Err(Error::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn cardinality_examples() {
        assert_eq!(CategoryPattern::unspecified(&base()).cardinality(), 1024);
        assert_eq!(cat(&[(1, 1)]).cardinality(), 512);
        assert_eq!(
            CategoryPattern::from_designation(&sys(734)).cardinality(),
            1
        );
    }

    #[test]
    fn member_examples() {
        let sentient: Vec<u64> = cat(&[(512, 0)]).members().map(|d| d.value()).collect();
        assert_eq!(sentient, (0..512).collect::<Vec<_>>());
        let single: Vec<u64> = CategoryPattern::from_designation(&sys(734))
            .members()
            .map(|d| d.value())
            .collect();
        assert_eq!(single, vec![734]);
        let odd: Vec<u64> = cat(&[(1, 1)]).members().map(|d| d.value()).collect();
        assert_eq!(odd, (0..1024).filter(|v| v % 2 == 1).collect::<Vec<_>>());
    }

    #[test]
    fn members_are_lazy() {
        let wide = (0..53).fold(base(), |s, i| {
            s.extend_next(format!("F{i}"), "a", "b").unwrap()
        });
        assert_eq!(wide.len(), 63);
        let everything = CategoryPattern::unspecified(&wide);
        assert_eq!(everything.cardinality(), 1 << 63);
        let first: Vec<u64> = everything.members().take(3).map(|d| d.value()).collect();
        assert_eq!(first, vec![0, 1, 2]);
    }

    #[test]
    fn subsumption_examples() {
        let dec = cat(&[(2, 0)]);
        let dec_conn = cat(&[(2, 0), (4, 0)]);
        assert!(dec.subsumes(&dec_conn).unwrap());
        assert!(!dec_conn.subsumes(&dec).unwrap());
        assert!(dec.subsumes(&dec).unwrap());
        assert!(CategoryPattern::unspecified(&base())
            .subsumes(&dec)
            .unwrap());
    }

    #[test]
    fn meet_examples() {
        assert_eq!(
            cat(&[(2, 0)]).meet(&cat(&[(4, 0)])).unwrap(),
            Meet::Pattern(cat(&[(2, 0), (4, 0)]))
        );
        assert_eq!(
            cat(&[(1, 1)]).meet(&cat(&[(1, 0)])).unwrap(),
            Meet::Contradiction(vec![1])
        );
        let p = cat(&[(8, 1), (64, 0)]);
        assert_eq!(
            p.meet(&CategoryPattern::unspecified(&base())).unwrap(),
            Meet::Pattern(p.clone())
        );
    }

    #[test]
    fn specialize_examples() {
        let any = CategoryPattern::unspecified(&base());
        assert_eq!(any.specialize(1, Choice::One).unwrap(), cat(&[(1, 1)]));
        assert_eq!(
            cat(&[(2, 0)]).specialize(4, Choice::Zero).unwrap(),
            cat(&[(2, 0), (4, 0)])
        );
        assert!(matches!(
            cat(&[(2, 0)]).specialize(2, Choice::One),
            Err(Error::ConflictingConstraint(2))
        ));
        assert!(matches!(
            any.specialize(3, Choice::One),
            Err(Error::UnknownPosition { .. })
        ));
        assert_eq!(
            cat(&[(2, 0)]).specialize(2, Choice::Zero).unwrap(),
            cat(&[(2, 0)])
        );
    }

    #[test]
    fn cells_and_stream() {
        let p = cat(&[(2, 0), (4, 0)]);
        assert_eq!(p.to_stream(), "XXXXXXX00X");
        assert_eq!(p.cell(2).unwrap(), Cell::Zero);
        assert_eq!(p.cell(8).unwrap(), Cell::Unspecified);
        assert_eq!(CategoryPattern::from_cells(&base(), &p.cells()).unwrap(), p);
        assert!(CategoryPattern::from_cells(&base(), &[Cell::Zero; 3]).is_err());
        assert_eq!(cat(&[(1, 1)]).to_stream(), "XXXXXXXXX1");
        assert_eq!(cat(&[(512, 0)]).to_stream(), "0XXXXXXXXX");
    }

    #[test]
    fn fully_specified_converts_explicitly() {
        let p = CategoryPattern::from_designation(&sys(582));
        assert!(p.is_fully_specified());
        assert_eq!(p.to_designation(), Some(sys(582)));
        assert_eq!(cat(&[(1, 0)]).to_designation(), None);
    }

    #[test]
    fn widen_leaves_new_cells_open() {
        let ext = base().extend_next("Alpha", "A", "B").unwrap();
        let w = cat(&[(1, 1)]).widen(&ext).unwrap();
        assert_eq!(w.cells().len(), 11);
        assert_eq!(w.cell(1024).unwrap(), Cell::Unspecified);
        assert_eq!(w.to_stream(), "XXXXXXXXXX1");
        assert_eq!(w.cardinality(), 1024);
    }
}
