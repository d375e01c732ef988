use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::process::Command;

use aidesig::{Classification, FactorSchema, Registry};
use serde_json::Value;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn aidesig(args: &[&str], cwd: &Path) -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_aidesig"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs");
    Outcome {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(o: &Outcome) -> Value {
    serde_json::from_str(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", o.stdout))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn fixture_str(name: &str) -> String {
    fixture(name).to_str().unwrap().to_owned()
}

const TS: &str = "2024-03-01T12:00:00Z";

#[test]
fn decode_prints_factor_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = aidesig(&["decode", "System-734"], dir.path());
    assert_eq!(o.code, 0);
    let rows: Vec<&str> = o.stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0], "Relationship with Humans (1): 0 (Collaborative)");
    assert_eq!(rows[9], "Sentience (512): 1 (Non-Sentient)");

    let o = aidesig(&["decode", "0"], dir.path());
    assert_eq!(o.code, 0);
    assert!(o.stdout.lines().skip(1).all(|l| l.contains(": 0 (")));

    let o = aidesig(&["decode", "System-2048"], dir.path());
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("OutOfRange"));
}

#[test]
fn decode_json_lists_the_choice_map() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&aidesig(&["--json", "decode", "1011011110"], dir.path()));
    assert_eq!(v["text"], "System-734");
    assert_eq!(v["value"], 734);
    let bits: Vec<u64> = v["choices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["choice"].as_u64().unwrap())
        .collect();
    assert_eq!(bits, vec![0, 1, 1, 1, 1, 0, 1, 1, 0, 1]);

    let v = json(&aidesig(
        &["--json", "decode", "Category-2/0-4/0"],
        dir.path(),
    ));
    assert_eq!(v["kind"], "pattern");
    assert_eq!(v["cardinality"], 256);
    assert_eq!(v["choices"][0]["label"], "Unspecified");
    assert_eq!(v["choices"][1]["label"], "Decentralized");
}

#[test]
fn encode_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = aidesig(&["encode", "--bits", "1011011110"], dir.path());
    assert_eq!((o.code, o.stdout.trim()), (0, "System-734 (1011011110)"));
    let o = aidesig(&["encode", "--bits", "1111111111"], dir.path());
    assert!(o.stdout.starts_with("System-1023"));
    let o = aidesig(&["encode", "--bits", "10110111"], dir.path());
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("BadLength"));
    let o = aidesig(&["encode", "--bits", "10110111x1"], dir.path());
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("BadChar"));

    let o = aidesig(
        &["encode", "--answers", &fixture_str("shuffler_answers.json")],
        dir.path(),
    );
    assert!(o.stdout.starts_with("System-734"));
    let o = aidesig(
        &["encode", "--answers", &fixture_str("nine_answers.json")],
        dir.path(),
    );
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("IncompleteChoices"));
    let o = aidesig(&["encode"], dir.path());
    assert_eq!(o.code, 2);
}

#[test]
fn pattern_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = aidesig(&["match", "Category-1/1", "System-1023"], dir.path());
    assert_eq!((o.code, o.stdout.trim()), (0, "true"));
    let o = aidesig(&["match", "Category-512/0", "System-734"], dir.path());
    assert_eq!((o.code, o.stdout.trim()), (1, "false"));
    let o = aidesig(&["match", "Category-2/0-2/1", "System-734"], dir.path());
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("ConflictingConstraint"));
    let o = aidesig(&["match", "Category-2/0", "Category-1/1"], dir.path());
    assert_eq!(o.code, 2);

    let o = aidesig(&["cardinality", "Category-2/0-4/0"], dir.path());
    assert_eq!(o.stdout.trim(), "256");
    let o = aidesig(&["enumerate", "Category-512/0", "--limit", "3"], dir.path());
    assert_eq!(o.stdout, "System-0\nSystem-1\nSystem-2\n");
    let o = aidesig(&["enumerate", "1011011110"], dir.path());
    assert_eq!(o.stdout, "System-734\n");
    let o = aidesig(&["enumerate", "XXXXXXXXX1"], dir.path());
    assert_eq!(o.stdout.lines().count(), 512);
}

#[test]
fn parse_reports_canonical_forms() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&aidesig(
        &["--json", "parse", "Category-4/0-2/0 Systems"],
        dir.path(),
    ));
    assert_eq!(v["forms"]["category-name"], "Category-2/0-4/0 System");
    assert_eq!(v["forms"]["bitstring"], "XXXXXXX00X");
    assert_eq!(v["source_form"], "CategoryName");
    let o = aidesig(&["parse", "System-582"], dir.path());
    assert_eq!(o.stdout, "bitstring: 1001000110\nsystem-name: System-582\n");
}

#[test]
fn classify_from_file_appends_to_registry() {
    let dir = tempfile::tempdir().unwrap();
    let answers = fixture_str("shuffler_answers.json");
    let o = aidesig(
        &[
            "--registry",
            "reg.json",
            "classify",
            "--answers",
            &answers,
            "--name",
            "Song shuffler",
            "--created-at",
            TS,
        ],
        dir.path(),
    );
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.trim_end().ends_with("System-734"));
    let reg = Registry::load(&dir.path().join("reg.json")).unwrap();
    let rec = reg.get("song-shuffler").unwrap();
    assert_eq!(rec.rationales.len(), 6);
    assert!(rec.rationales[&256].contains("unpredictable"));

    let o = aidesig(
        &[
            "--registry",
            "reg.json",
            "classify",
            "--answers",
            &answers,
            "--name",
            "Song shuffler",
        ],
        dir.path(),
    );
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("DuplicateId"));

    let o = aidesig(
        &[
            "classify",
            "--answers",
            &fixture_str("all_ones.json"),
            "--name",
            "Everything one",
        ],
        dir.path(),
    );
    assert_eq!(o.stdout.trim(), "System-1023");
    let o = aidesig(
        &[
            "classify",
            "--answers",
            &fixture_str("nine_answers.json"),
            "--name",
            "Nine",
        ],
        dir.path(),
    );
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("IncompleteChoices"));
}

fn run_in_process(args: &[&str], stdin: &str) -> (i32, String) {
    let mut input = Cursor::new(stdin.as_bytes().to_vec());
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = aidesig_cli::run(
        std::iter::once("aidesig").chain(args.iter().copied()),
        aidesig_cli::Io {
            stdin: &mut input,
            stdout: &mut out,
            stderr: &mut err,
            interactive: true,
        },
    );
    (code, String::from_utf8(out).unwrap())
}

#[test]
fn interactive_and_file_classification_write_identical_records() {
    let dir = tempfile::tempdir().unwrap();
    let file_reg = dir.path().join("file.json");
    let tty_reg = dir.path().join("tty.json");

    let answers = fixture_str("shuffler_answers.json");
    let (code, _) = run_in_process(
        &[
            "--registry",
            file_reg.to_str().unwrap(),
            "classify",
            "--answers",
            &answers,
            "--name",
            "Song shuffler",
            "--created-at",
            TS,
        ],
        "",
    );
    assert_eq!(code, 0);

    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("shuffler_answers.json")).unwrap())
            .unwrap();
    let mut script = String::new();
    for k in 0..10 {
        let entry = &doc[(1u64 << k).to_string()];
        script.push_str(&format!("{}\n", entry["choice"]));
        script.push_str(&format!("{}\n", entry["rationale"].as_str().unwrap_or("")));
    }
    let (code, shown) = run_in_process(
        &[
            "--registry",
            tty_reg.to_str().unwrap(),
            "classify",
            "--interactive",
            "--name",
            "Song shuffler",
            "--created-at",
            TS,
        ],
        &script,
    );
    assert_eq!(code, 0);
    assert!(shown.contains("[1/10] Relationship with Humans (1)"));
    assert!(shown.trim_end().ends_with("System-734"));

    assert_eq!(
        std::fs::read(&file_reg).unwrap(),
        std::fs::read(&tty_reg).unwrap()
    );
}

#[test]
fn interactive_needs_a_terminal() {
    let dir = tempfile::tempdir().unwrap();
    let o = aidesig(&["classify", "--interactive", "--name", "x"], dir.path());
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("terminal"));
}

#[test]
fn registry_session() {
    let dir = tempfile::tempdir().unwrap();
    let r = |args: &[&str]| {
        let mut full = vec!["--registry", "reg.json"];
        full.extend_from_slice(args);
        aidesig(&full, dir.path())
    };

    let o = r(&["registry", "query", "Category-1/0"]);
    assert_eq!(o.code, 3);

    let o = r(&[
        "registry",
        "add",
        "System-734",
        "--name",
        "Song shuffler",
        "--rationale",
        "256=Shuffle",
        "--created-at",
        TS,
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let o = r(&[
        "registry",
        "add",
        "System-1",
        "--name",
        "Bad",
        "--rationale",
        "3=nope",
    ]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("InvalidRationaleKey"));

    let o = r(&["registry", "query", "Category-1/0"]);
    assert_eq!(o.stdout.lines().count(), 1);
    assert!(o.stdout.starts_with("song-shuffler\tSystem-734"));
    let v = json(&r(&["--json", "registry", "query", "Category-512/0"]));
    assert_eq!(v["count"], 0);

    let v = json(&r(&[
        "--json",
        "registry",
        "stats",
        "Category-512/0",
        "Category-512/1",
    ]));
    assert_eq!(v["categories"][0]["designated"], 0);
    assert_eq!(v["categories"][1]["designated"], 1);

    let o = r(&[
        "registry",
        "import",
        &fixture_str("three_systems.csv"),
        "--created-at",
        TS,
    ]);
    assert_eq!(o.code, 2, "song-shuffler id collides");
    assert!(o.stderr.contains("DuplicateId"));

    let o = r(&["registry", "export", "--csv"]);
    assert_eq!(o.stdout, "name,bits,tag\nSong shuffler,1011011110\n");
    let exported = r(&["registry", "export"]);
    let reloaded = Registry::from_json(&exported.stdout).unwrap();
    assert_eq!(
        reloaded,
        Registry::load(&dir.path().join("reg.json")).unwrap()
    );
}

#[test]
fn csv_import_into_fresh_registry() {
    let dir = tempfile::tempdir().unwrap();
    let o = aidesig(
        &[
            "--registry",
            "reg.json",
            "--json",
            "registry",
            "import",
            &fixture_str("three_systems.csv"),
        ],
        dir.path(),
    );
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(json(&o)["imported"], 3);
    let reg = Registry::load(&dir.path().join("reg.json")).unwrap();
    assert_eq!(
        reg.get("song-shuffler").unwrap().tags,
        vec!["music", "streaming"]
    );
    assert!(matches!(
        reg.get("decentralized-mesh").unwrap().classification,
        Classification::Pattern(_)
    ));
}

#[test]
fn schema_extend_and_migrate() {
    let dir = tempfile::tempdir().unwrap();
    let o = aidesig(
        &[
            "schema",
            "extend",
            "--name",
            "X",
            "--choice0",
            "A",
            "--choice1",
            "B",
        ],
        dir.path(),
    );
    assert_eq!(o.code, 0);
    let schema = FactorSchema::from_json(&o.stdout).unwrap();
    assert_eq!(schema.len(), 11);
    assert_eq!(schema.factor_at(1024).unwrap().name(), "X");

    let o = aidesig(
        &[
            "schema",
            "extend",
            "--name",
            "Sentience",
            "--choice0",
            "A",
            "--choice1",
            "B",
        ],
        dir.path(),
    );
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("DuplicateName"));

    aidesig(
        &[
            "--registry",
            "reg.json",
            "registry",
            "add",
            "Category-1/1",
            "--name",
            "Competitors",
        ],
        dir.path(),
    );
    aidesig(
        &[
            "--registry",
            "reg.json",
            "registry",
            "add",
            "734",
            "--name",
            "Shuffler",
        ],
        dir.path(),
    );
    let o = aidesig(
        &[
            "--registry",
            "reg.json",
            "schema",
            "extend",
            "--name",
            "X",
            "--choice0",
            "A",
            "--choice1",
            "B",
            "--out",
            "ext.json",
            "--migrate",
        ],
        dir.path(),
    );
    assert_eq!(o.code, 0, "{}", o.stderr);
    let reg = Registry::load(&dir.path().join("reg.json")).unwrap();
    assert_eq!(reg.schema().version_id(), "base-10+X@1024");

    let o = aidesig(&["--registry", "reg.json", "decode", "734"], dir.path());
    assert!(o.stdout.contains("X (1024): 0 (A)"));
    let o = aidesig(
        &["--registry", "reg.json", "registry", "query", "XXXXXXXXXX1"],
        dir.path(),
    );
    assert_eq!(o.stdout.lines().count(), 1);

    let o = aidesig(&["--schema", "missing.json", "decode", "0"], dir.path());
    assert_eq!(o.code, 3);
}

#[test]
fn schema_show() {
    let dir = tempfile::tempdir().unwrap();
    let o = aidesig(&["schema", "show"], dir.path());
    assert!(o
        .stdout
        .contains("Embodiment (64): 0 (Embodied) / 1 (Non-Embodied)"));
    let v = json(&aidesig(&["--json", "schema", "show"], dir.path()));
    assert_eq!(v["version_id"], "base-10");
    assert_eq!(v["factors"].as_array().unwrap().len(), 10);
}

#[test]
fn json_errors_are_structured() {
    let dir = tempfile::tempdir().unwrap();
    let o = aidesig(&["--json", "decode", "Category-3/1"], dir.path());
    assert_eq!(o.code, 2);
    let v: Value = serde_json::from_str(o.stderr.trim()).unwrap();
    assert_eq!(v["error"], "UnknownPosition");
}
