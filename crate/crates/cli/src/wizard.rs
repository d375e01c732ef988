//! The question-per-factor classification prompt.

use std::io::{BufRead, Write};

use aidesig::{Choice, Error, FactorSchema, Result};

use crate::answers::Answers;

/// Asks one question per factor, lowest position first, re-prompting until
/// it gets a 0 or 1. A blank rationale is skipped.
pub fn run<R: BufRead + ?Sized, W: Write + ?Sized>(
    schema: &FactorSchema,
    input: &mut R,
    out: &mut W,
) -> Result<Answers> {
    let io = |source| Error::Io {
        path: "<terminal>".into(),
        source,
    };
    let total = schema.len();
    let mut answers = Answers::default();
    for (i, factor) in schema.factors().iter().enumerate() {
        writeln!(out, "\n[{}/{}] {}", i + 1, total, factor).map_err(io)?;
        if let Some(description) = factor.description() {
            writeln!(out, "    {description}").map_err(io)?;
        }
        writeln!(out, "  0) {}", factor.choice0_label()).map_err(io)?;
        writeln!(out, "  1) {}", factor.choice1_label()).map_err(io)?;
        let choice = loop {
            write!(out, "Choice [0/1]: ").map_err(io)?;
            out.flush().map_err(io)?;
            let Some(line) = read_line(input).map_err(io)? else {
                let missing = schema.positions().skip(i).collect();
                return Err(Error::IncompleteChoices { missing });
            };
            match line.trim() {
                "0" => break Choice::Zero,
                "1" => break Choice::One,
                _ => writeln!(out, "Please answer 0 or 1.").map_err(io)?,
            }
        };
        write!(out, "Rationale (optional, Enter to skip): ").map_err(io)?;
        out.flush().map_err(io)?;
        let rationale = read_line(input).map_err(io)?.unwrap_or_default();
        answers.choices.push(factor.position_value(), choice);
        let rationale = rationale.trim();
        if !rationale.is_empty() {
            answers
                .rationales
                .insert(factor.position_value(), rationale.to_owned());
        }
    }
    Ok(answers)
}

fn read_line<R: BufRead + ?Sized>(input: &mut R) -> std::io::Result<Option<String>> {
    let mut line = String::new();
    match input.read_line(&mut line)? {
        0 => Ok(None),
        _ => Ok(Some(line)),
    }
}
