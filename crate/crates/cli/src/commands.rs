use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use aidesig::notation::{self, Style};
use aidesig::{
    classify, slugify, CategoryPattern, Cell, Choice, Classification, Designation, Error,
    FactorSchema, Registry, SystemRecord,
};
use chrono::{DateTime, Utc};
use serde_json::{json, Value};

use crate::{
    answers, wizard, ClassifyArgs, Cli, Command, EncodeArgs, RecordMeta, RegistryCommand,
    SchemaCommand, EXIT_IO, EXIT_NO_MATCH, EXIT_OK, EXIT_VALIDATION,
};

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Usage(String),
    Output(std::io::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Lib(e) => e.kind(),
            CliError::Usage(_) => "Usage",
            CliError::Output(_) => "IoFailure",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(e) if e.is_io() => EXIT_IO,
            CliError::Output(_) => EXIT_IO,
            _ => EXIT_VALIDATION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{}: {e}", e.kind()),
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Output(e) => write!(f, "IoFailure: writing output: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e)
    }
}

type CmdResult = Result<i32, CliError>;

/// Per-invocation state: global flags and the process streams.
pub struct Context<'a> {
    json: bool,
    schema_path: Option<PathBuf>,
    registry_path: Option<PathBuf>,
    stdin: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    interactive: bool,
}

impl<'a> Context<'a> {
    pub fn new(
        cli: &Cli,
        stdin: &'a mut dyn BufRead,
        out: &'a mut dyn Write,
        interactive: bool,
    ) -> Self {
        Context {
            json: cli.json,
            schema_path: cli.schema.clone(),
            registry_path: cli.registry.clone(),
            stdin,
            out,
            interactive,
        }
    }

    pub fn dispatch(&mut self, command: &Command) -> CmdResult {
        match command {
            Command::Decode { text } => self.decode(text),
            Command::Encode(args) => self.encode(args),
            Command::Parse { text } => self.parse(text),
            Command::Match {
                pattern,
                designation,
            } => self.match_cmd(pattern, designation),
            Command::Enumerate { pattern, limit } => self.enumerate(pattern, *limit),
            Command::Cardinality { pattern } => self.cardinality(pattern),
            Command::Classify(args) => self.classify(args),
            Command::Registry(cmd) => self.registry(cmd),
            Command::Schema(cmd) => self.schema_cmd(cmd),
        }
    }

    /// `--schema` if given, else the schema embedded in an existing
    /// `--registry`, else the built-in base schema.
    fn schema(&self) -> Result<FactorSchema, CliError> {
        if let Some(path) = &self.schema_path {
            return Ok(FactorSchema::load(path)?);
        }
        if let Some(path) = &self.registry_path {
            if path.exists() {
                return Ok(Registry::load(path)?.schema().clone());
            }
        }
        Ok(FactorSchema::base())
    }

    fn registry_path(&self) -> Result<&Path, CliError> {
        self.registry_path
            .as_deref()
            .ok_or_else(|| CliError::Usage("this command needs --registry <FILE>".into()))
    }

    /// Loads the registry, checking it against `--schema` when one is
    /// given. With `create`, a missing file yields an empty registry.
    fn open_registry(&self, create: bool) -> Result<(PathBuf, Registry), CliError> {
        let path = self.registry_path()?.to_owned();
        if !path.exists() && create {
            let schema = match &self.schema_path {
                Some(p) => FactorSchema::load(p)?,
                None => FactorSchema::base(),
            };
            return Ok((path, Registry::new(schema)));
        }
        let reg = match &self.schema_path {
            Some(p) => Registry::load_expecting(&path, &FactorSchema::load(p)?).map_err(|e| {
                match e {
                    Error::SchemaMismatch { expected, found } => Error::SchemaMismatch {
                        expected,
                        found: format!("{found} (run `registry migrate` to move the registry to the new schema)"),
                    },
                    other => other,
                }
            })?,
            None => Registry::load(&path)?,
        };
        Ok((path, reg))
    }

    fn emit_json(&mut self, value: &Value) -> CmdResult {
        writeln!(
            self.out,
            "{}",
            serde_json::to_string_pretty(value).expect("json")
        )?;
        Ok(EXIT_OK)
    }

    fn decode(&mut self, text: &str) -> CmdResult {
        let schema = self.schema()?;
        let item = resolve(&schema, text)?;
        let pattern = item.as_pattern();
        if self.json {
            let mut value = describe(&item);
            value["choices"] = Value::Array(
                schema
                    .factors()
                    .iter()
                    .map(|f| {
                        let cell = pattern.cell(f.position_value()).expect("schema position");
                        json!({
                            "position": f.position_value(),
                            "factor": f.name(),
                            "choice": cell.choice().map(Choice::bit),
                            "label": cell.choice().map_or("Unspecified", |c| f.label(c)),
                        })
                    })
                    .collect(),
            );
            return self.emit_json(&value);
        }
        writeln!(
            self.out,
            "{} ({}) [schema {}]",
            canonical(&item),
            pattern.to_stream(),
            schema.version_id()
        )?;
        for f in schema.factors() {
            let cell = pattern.cell(f.position_value()).expect("schema position");
            let shown = match cell.choice() {
                Some(c) => format!("{} ({})", c, f.label(c)),
                None => "0 or 1 (Unspecified)".to_owned(),
            };
            writeln!(self.out, "{}: {}", f, shown)?;
        }
        Ok(EXIT_OK)
    }

    fn encode(&mut self, args: &EncodeArgs) -> CmdResult {
        let schema = self.schema()?;
        let d = match (&args.bits, &args.answers) {
            (Some(bits), _) => Designation::from_bitstring(&schema, bits.trim())?,
            (None, Some(path)) => {
                let a = answers::load(path)?;
                Designation::from_choices(&schema, &a.choices)?
            }
            (None, None) => unreachable!("clap requires one input"),
        };
        if self.json {
            return self.emit_json(&describe(&Classification::Designation(d)));
        }
        writeln!(self.out, "{} ({})", d, d.to_bitstring())?;
        Ok(EXIT_OK)
    }

    fn parse(&mut self, text: &str) -> CmdResult {
        let schema = self.schema()?;
        let parsed = notation::parse(&schema, text)?;
        let forms: BTreeMap<&str, String> = notation::valid_styles(&parsed.item)
            .into_iter()
            .map(|s| {
                (
                    s.name(),
                    notation::format(&parsed.item, s).expect("valid style"),
                )
            })
            .collect();
        if self.json {
            let mut value = describe(&parsed.item);
            value["source_form"] = json!(format!("{:?}", parsed.form));
            value["forms"] = json!(forms);
            return self.emit_json(&value);
        }
        for (style, text) in forms {
            writeln!(self.out, "{style}: {text}")?;
        }
        Ok(EXIT_OK)
    }

    fn match_cmd(&mut self, pattern: &str, designation: &str) -> CmdResult {
        let schema = self.schema()?;
        let p = notation::parse_pattern(&schema, pattern)?;
        let d = resolve_designation(&schema, designation)?;
        let hit = p.matches(&d)?;
        if self.json {
            self.emit_json(&json!({
                "pattern": canonical_pattern(&p),
                "designation": d.to_string(),
                "matches": hit,
            }))?;
        } else {
            writeln!(self.out, "{hit}")?;
        }
        Ok(if hit { EXIT_OK } else { EXIT_NO_MATCH })
    }

    fn enumerate(&mut self, pattern: &str, limit: Option<u64>) -> CmdResult {
        let schema = self.schema()?;
        let p = notation::parse_pattern(&schema, pattern)?;
        let cap = limit.unwrap_or(u64::MAX);
        let members = p.members().take(usize::try_from(cap).unwrap_or(usize::MAX));
        if self.json {
            let listed: Vec<String> = members.map(|d| d.to_string()).collect();
            return self.emit_json(&json!({
                "pattern": canonical_pattern(&p),
                "cardinality": p.cardinality(),
                "truncated": (listed.len() as u64) < p.cardinality(),
                "members": listed,
            }));
        }
        for d in members {
            writeln!(self.out, "{d}")?;
        }
        Ok(EXIT_OK)
    }

    fn cardinality(&mut self, pattern: &str) -> CmdResult {
        let schema = self.schema()?;
        let p = notation::parse_pattern(&schema, pattern)?;
        if self.json {
            return self.emit_json(&json!({
                "pattern": canonical_pattern(&p),
                "cardinality": p.cardinality(),
            }));
        }
        writeln!(self.out, "{}", p.cardinality())?;
        Ok(EXIT_OK)
    }

    fn classify(&mut self, args: &ClassifyArgs) -> CmdResult {
        let target = match self.registry_path {
            Some(_) => Some(self.open_registry(true)?),
            None => None,
        };
        let schema = match &target {
            Some((_, reg)) => reg.schema().clone(),
            None => self.schema()?,
        };
        let answers = if args.interactive {
            if !self.interactive {
                return Err(CliError::Usage(
                    "--interactive needs a terminal on stdin; use --answers <FILE> instead".into(),
                ));
            }
            writeln!(
                self.out,
                "Classifying {:?} against schema {} ({} factors).",
                args.name,
                schema.version_id(),
                schema.len()
            )?;
            wizard::run(&schema, &mut *self.stdin, &mut *self.out)?
        } else {
            let path = args.answers.as_ref().expect("clap requires --answers");
            answers::load(path)?
        };
        let record = classify(
            &schema,
            record_id(&args.meta, &args.name),
            &args.name,
            &answers.choices,
            answers.rationales,
        )?;
        let record = apply_meta(record, &args.meta)?;
        self.finish_record(record, target)
    }

    fn finish_record(
        &mut self,
        record: SystemRecord,
        target: Option<(PathBuf, Registry)>,
    ) -> CmdResult {
        if let Some((path, reg)) = target {
            reg.add_record(record.clone())?.save(&path)?;
            if !self.json {
                writeln!(self.out, "added {} to {}", record.record_id, path.display())?;
            }
        }
        if self.json {
            return self.emit_json(&record.to_document());
        }
        let item = &record.classification;
        writeln!(self.out, "{}", canonical(item))?;
        Ok(EXIT_OK)
    }

    fn registry(&mut self, cmd: &RegistryCommand) -> CmdResult {
        match cmd {
            RegistryCommand::Add {
                classification,
                name,
                rationales,
                meta,
            } => {
                let (path, reg) = self.open_registry(true)?;
                let item = resolve(reg.schema(), classification)?;
                let mut record = SystemRecord::new(record_id(meta, name), name, item);
                for entry in rationales {
                    let (pos, text) = parse_rationale(entry)?;
                    record = record.with_rationale(pos, text);
                }
                let record = apply_meta(record, meta)?;
                self.finish_record(record, Some((path, reg)))
            }
            RegistryCommand::List => {
                let (_, reg) = self.open_registry(false)?;
                let everything = CategoryPattern::unspecified(reg.schema());
                self.print_records(&reg, &everything)
            }
            RegistryCommand::Query { pattern } => {
                let (_, reg) = self.open_registry(false)?;
                let p = notation::parse_pattern(reg.schema(), pattern)?;
                self.print_records(&reg, &p)
            }
            RegistryCommand::Stats { patterns } => {
                let (_, reg) = self.open_registry(false)?;
                let categories = patterns
                    .iter()
                    .map(|t| notation::parse_pattern(reg.schema(), t))
                    .collect::<Result<Vec<_>, _>>()?;
                let rows = reg.population_report(&categories)?;
                if self.json {
                    let rows: Vec<Value> = rows
                        .iter()
                        .map(|r| {
                            json!({
                                "category": canonical_pattern(&r.category),
                                "designated": r.designated,
                                "patterned": r.patterned,
                                "total": r.total(),
                                "cardinality": r.cardinality,
                            })
                        })
                        .collect();
                    return self.emit_json(&json!({ "records": reg.len(), "categories": rows }));
                }
                for r in rows {
                    writeln!(
                        self.out,
                        "{}: {} designated, {} by category, {} possible system types",
                        canonical_pattern(&r.category),
                        r.designated,
                        r.patterned,
                        r.cardinality
                    )?;
                }
                Ok(EXIT_OK)
            }
            RegistryCommand::Export { csv } => {
                let (_, reg) = self.open_registry(false)?;
                if *csv {
                    reg.export_csv(&mut self.out)?;
                } else {
                    writeln!(self.out, "{}", reg.to_json())?;
                }
                Ok(EXIT_OK)
            }
            RegistryCommand::Import { file, created_at } => {
                let (path, reg) = self.open_registry(true)?;
                let reader = std::fs::File::open(file).map_err(|source| Error::Io {
                    path: file.clone(),
                    source,
                })?;
                let at = parse_timestamp(created_at.as_deref())?;
                let before = reg.len();
                let reg = reg.import_csv(reader, at)?;
                reg.save(&path)?;
                let added = reg.len() - before;
                if self.json {
                    return self.emit_json(&json!({ "imported": added, "records": reg.len() }));
                }
                writeln!(self.out, "imported {added} records into {}", path.display())?;
                Ok(EXIT_OK)
            }
            RegistryCommand::Migrate => {
                let schema_path = self.schema_path.clone().ok_or_else(|| {
                    CliError::Usage(
                        "registry migrate needs --schema <FILE> naming the new schema".into(),
                    )
                })?;
                let path = self.registry_path()?.to_owned();
                let target = FactorSchema::load(&schema_path)?;
                self.migrate_file(&path, &target)
            }
        }
    }

    fn migrate_file(&mut self, path: &Path, target: &FactorSchema) -> CmdResult {
        let reg = Registry::load(path)?;
        let from = reg.schema().version_id().to_owned();
        let moved = reg.migrate(target)?;
        moved.save(path)?;
        if self.json {
            return self.emit_json(&json!({
                "from": from,
                "to": target.version_id(),
                "records": moved.len(),
            }));
        }
        writeln!(
            self.out,
            "migrated {} records from {} to {}",
            moved.len(),
            from,
            target.version_id()
        )?;
        Ok(EXIT_OK)
    }

    fn print_records(&mut self, reg: &Registry, query: &CategoryPattern) -> CmdResult {
        let hits = reg.query(query)?;
        if self.json {
            let docs: Vec<Value> = hits.iter().map(|r| r.to_document()).collect();
            return self.emit_json(&json!({
                "query": canonical_pattern(query),
                "count": docs.len(),
                "records": docs,
            }));
        }
        for r in hits {
            writeln!(
                self.out,
                "{}\t{}\t{}",
                r.record_id,
                canonical(&r.classification),
                r.display_name
            )?;
        }
        Ok(EXIT_OK)
    }

    fn schema_cmd(&mut self, cmd: &SchemaCommand) -> CmdResult {
        let schema = self.schema()?;
        match cmd {
            SchemaCommand::Show => {
                if self.json {
                    let value: Value = serde_json::from_str(&schema.to_json()).expect("json");
                    return self.emit_json(&value);
                }
                writeln!(
                    self.out,
                    "schema {} ({} factors)",
                    schema.version_id(),
                    schema.len()
                )?;
                for f in schema.factors() {
                    writeln!(
                        self.out,
                        "{}: 0 ({}) / 1 ({})",
                        f,
                        f.choice0_label(),
                        f.choice1_label()
                    )?;
                }
                Ok(EXIT_OK)
            }
            SchemaCommand::Extend {
                name,
                choice0,
                choice1,
                description,
                out,
                migrate,
            } => {
                let position = schema.system_count();
                let mut factor = aidesig::Factor::new(name, position, choice0, choice1)?;
                if let Some(d) = description {
                    factor = factor.with_description(d);
                }
                let extended = schema.extend(factor)?;
                match out {
                    None => {
                        writeln!(self.out, "{}", extended.to_json())?;
                        Ok(EXIT_OK)
                    }
                    Some(path) => {
                        extended.save(path)?;
                        if !self.json {
                            writeln!(
                                self.out,
                                "wrote schema {} to {}",
                                extended.version_id(),
                                path.display()
                            )?;
                        }
                        if *migrate {
                            let reg_path = self.registry_path()?.to_owned();
                            return self.migrate_file(&reg_path, &extended);
                        }
                        if self.json {
                            return self.emit_json(&json!({
                                "version_id": extended.version_id(),
                                "position_value": position,
                                "path": path,
                            }));
                        }
                        if let Some(reg) = &self.registry_path {
                            writeln!(
                                self.out,
                                "to move {} onto it: aidesig --registry {} --schema {} registry migrate",
                                reg.display(),
                                reg.display(),
                                path.display()
                            )?;
                        }
                        Ok(EXIT_OK)
                    }
                }
            }
        }
    }
}

/// Notation text, plus bare decimals for single systems.
///
/// A digit-only string is read as a bitstream when it is exactly `N`
/// characters of 0/1, and as a decimal `System-<n>` otherwise.
fn resolve(schema: &FactorSchema, text: &str) -> Result<Classification, Error> {
    let t = text.trim();
    let is_stream = t.chars().count() == schema.len() && t.chars().all(|c| c == '0' || c == '1');
    if !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit()) && !is_stream {
        return Ok(notation::parse(schema, &format!("System-{t}"))?.item);
    }
    Ok(notation::parse(schema, t)?.item)
}

fn resolve_designation(schema: &FactorSchema, text: &str) -> Result<Designation, Error> {
    match resolve(schema, text)? {
        Classification::Designation(d) => Ok(d),
        Classification::Pattern(p) => p.to_designation().ok_or_else(|| {
            Error::UnrecognizedSyntax(format!(
                "{} is a category, not a single system",
                text.trim()
            ))
        }),
    }
}

fn canonical(item: &Classification) -> String {
    match item {
        Classification::Designation(d) => d.to_string(),
        Classification::Pattern(p) => canonical_pattern(p),
    }
}

fn canonical_pattern(p: &CategoryPattern) -> String {
    let item = Classification::Pattern(p.clone());
    notation::format(&item, Style::CategoryName)
        .or_else(|_| notation::format(&item, Style::Bitstring))
        .expect("every pattern has a canonical form")
}

fn describe(item: &Classification) -> Value {
    match item {
        Classification::Designation(d) => json!({
            "kind": "designation",
            "text": d.to_string(),
            "value": d.value(),
            "bits": d.to_bitstring(),
            "schema_version": d.schema_version(),
            "collaborative": d.is_collaborative(),
            "sentient": d.is_sentient(),
        }),
        Classification::Pattern(p) => json!({
            "kind": "pattern",
            "text": canonical_pattern(p),
            "bits": p.to_stream(),
            "schema_version": p.schema_version(),
            "cardinality": p.cardinality(),
            "constraints": p
                .cells()
                .iter()
                .zip(p.schema().positions())
                .filter(|(c, _)| **c != Cell::Unspecified)
                .map(|(c, pos)| json!({ "position": pos, "choice": c.choice().map(Choice::bit) }))
                .collect::<Vec<_>>(),
        }),
    }
}

fn record_id(meta: &RecordMeta, name: &str) -> String {
    meta.id.clone().unwrap_or_else(|| slugify(name))
}

fn apply_meta(record: SystemRecord, meta: &RecordMeta) -> Result<SystemRecord, CliError> {
    Ok(record
        .with_tags(meta.tags.iter().cloned())
        .with_created_at(parse_timestamp(meta.created_at.as_deref())?))
}

fn parse_timestamp(text: Option<&str>) -> Result<DateTime<Utc>, CliError> {
    match text {
        None => Ok(Utc::now()),
        Some(t) => DateTime::parse_from_rfc3339(t)
            .map(|dt| dt.with_timezone(&Utc))
            .map_err(|e| CliError::Usage(format!("--created-at {t:?}: {e}"))),
    }
}

fn parse_rationale(entry: &str) -> Result<(u64, String), CliError> {
    let (pos, text) = entry
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--rationale {entry:?} must be POSITION=TEXT")))?;
    let pos = pos.trim().parse::<u64>().map_err(|_| {
        CliError::Usage(format!("--rationale {entry:?}: {pos:?} is not a position"))
    })?;
    Ok((pos, text.trim().to_owned()))
}
