//! Command-line front end for `aidesig`.
//!
//! Exit codes: 0 success (or `match` true), 1 `match` false, 2 validation
//! or usage error, 3 I/O failure.

pub mod answers;
mod commands;
pub mod wizard;

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::Context;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_MATCH: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "aidesig",
    version,
    about = "Binary-stream AI system designations"
)]
pub struct Cli {
    /// Schema file to use instead of the built-in ten-factor schema.
    #[arg(long, global = true, value_name = "FILE")]
    pub schema: Option<PathBuf>,
    /// Emit structured JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Registry file to read or update.
    #[arg(long, global = true, value_name = "FILE")]
    pub registry: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the factor choices of a designation (or category).
    Decode { text: String },
    /// Turn a stream of choices into a System-N designation.
    Encode(EncodeArgs),
    /// Show the canonical forms of any notation.
    Parse { text: String },
    /// Check whether a designation belongs to a category (exit 1 if not).
    Match {
        pattern: String,
        designation: String,
    },
    /// List the designations of a category in ascending order.
    Enumerate {
        pattern: String,
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Count the designations in a category.
    Cardinality { pattern: String },
    /// Answer one question per factor and record the result.
    Classify(ClassifyArgs),
    /// Manage a registry file.
    #[command(subcommand)]
    Registry(RegistryCommand),
    /// Inspect or extend the factor schema.
    #[command(subcommand)]
    Schema(SchemaCommand),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct EncodeArgs {
    /// MSB-first stream of 0s and 1s.
    #[arg(long)]
    pub bits: Option<String>,
    /// Answers file.
    #[arg(long, value_name = "FILE")]
    pub answers: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, conflicts_with = "answers", required_unless_present = "answers")]
    pub interactive: bool,
    #[arg(long, value_name = "FILE")]
    pub answers: Option<PathBuf>,
    /// Display name of the system being classified.
    #[arg(long)]
    pub name: String,
    #[command(flatten)]
    pub meta: RecordMeta,
}

#[derive(Debug, Args)]
pub struct RecordMeta {
    /// Record id; defaults to a slug of the name.
    #[arg(long)]
    pub id: Option<String>,
    #[arg(long = "tag")]
    pub tags: Vec<String>,
    /// RFC 3339 timestamp; defaults to now.
    #[arg(long, value_name = "TIMESTAMP")]
    pub created_at: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum RegistryCommand {
    /// Add a record classified by a designation or category.
    Add {
        classification: String,
        #[arg(long)]
        name: String,
        /// Per-factor reasoning as POSITION=TEXT.
        #[arg(long = "rationale", value_name = "POSITION=TEXT")]
        rationales: Vec<String>,
        #[command(flatten)]
        meta: RecordMeta,
    },
    /// List every record.
    List,
    /// Records inside a category.
    Query { pattern: String },
    /// Record counts per category.
    Stats {
        #[arg(required = true)]
        patterns: Vec<String>,
    },
    /// Write the registry to stdout.
    Export {
        #[arg(long)]
        csv: bool,
    },
    /// Add records from a `name,bits,tag…` CSV file.
    Import {
        file: PathBuf,
        #[arg(long, value_name = "TIMESTAMP")]
        created_at: Option<String>,
    },
    /// Re-read the registry under the schema given by --schema.
    Migrate,
}

#[derive(Debug, Subcommand)]
pub enum SchemaCommand {
    Show,
    /// Add a factor at the next power of two.
    Extend {
        #[arg(long)]
        name: String,
        #[arg(long)]
        choice0: String,
        #[arg(long)]
        choice1: String,
        #[arg(long)]
        description: Option<String>,
        /// Where to write the new schema; stdout if omitted.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Also migrate the --registry file to the new schema.
        #[arg(long, requires = "out")]
        migrate: bool,
    },
}

/// Process streams plus whether stdin is an interactive terminal.
pub struct Io<'a> {
    pub stdin: &'a mut dyn BufRead,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
    pub interactive: bool,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I, io: Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let rendered = e.render().to_string();
            let sink = if e.use_stderr() { io.stderr } else { io.stdout };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };
    let json = cli.json;
    let stderr = &mut *io.stderr;
    let mut ctx = Context::new(&cli, io.stdin, io.stdout, io.interactive);
    match ctx.dispatch(&cli.command) {
        Ok(code) => code,
        Err(err) => {
            let _ = if json {
                writeln!(
                    stderr,
                    "{}",
                    serde_json::json!({ "error": err.kind(), "message": err.to_string() })
                )
            } else {
                writeln!(stderr, "error: {err}")
            };
            err.exit_code()
        }
    }
}
