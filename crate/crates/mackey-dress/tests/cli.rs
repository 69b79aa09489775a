use std::path::PathBuf;
use std::process::{Command, Output};

use mackey_dress::amitsur::ChainData;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

mod common;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mackey-dress")).args(args).output().unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn schema_for(args: &[&str]) -> &'static str {
    match args {
        ["group", ..] => "group",
        ["subgroups", ..] => "subgroups",
        ["tom", ..] => "tom",
        ["mackey", ..] => "mackey-validate",
        ["bqgr", ..] => "bqgr",
        ["dress", "check", ..] => "dress-check",
        ["dress", "coefficients", ..] => "dress-coefficients",
        ["dress", "cover", ..] => "dress-cover",
        ["amitsur", ..] => "amitsur",
        ["biset", "compose" | "tau", ..] => "biset-morphism",
        ["biset", "j", ..] => "biset-j",
        ["biset", "check", ..] => "biset-check",
        ["biset", "associativity", ..] => "biset-associativity",
        _ => panic!("no schema for {args:?}"),
    }
}

fn assert_valid(name: &str, v: &Value) {
    let errors: Vec<String> = schema(name).iter_errors(v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{name}: {errors:#?}");
}

#[test]
fn outputs_match_schemas() {
    for args in common::CLI_RUNS {
        let mut full = args.to_vec();
        full.push("--exit-zero");
        let out = run(&full);
        assert!(out.status.success(), "{args:?}");
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_valid(schema_for(args), &v);
    }
    assert!(!schema("tom").is_valid(&serde_json::json!({"group": "S3", "classes": []})));
    assert!(!schema("chain").is_valid(&serde_json::json!({"variant": "sideways", "ranks": [], "boundary": []})));
}

#[test]
fn exit_codes() {
    let ok = run(&["dress", "check", "--functor", "burnside", "--group", "C2", "--set", "point"]);
    assert_eq!(ok.status.code(), Some(0));
    let no = run(&["dress", "check", "--functor", "burnside", "--group", "C2", "--set", "free"]);
    assert_eq!(no.status.code(), Some(1));
    let forced = run(&["dress", "check", "--functor", "burnside", "--group", "C2", "--set", "free", "--exit-zero"]);
    assert_eq!(forced.status.code(), Some(0));
    assert_eq!(no.stdout, forced.stdout);
    let bad = run(&["tom", "Q8x"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
    let class = run(&["dress", "check", "--functor", "burnside", "--group", "S3", "--set", "V4"]);
    assert_eq!(class.status.code(), Some(2));
    assert_eq!(run(&["amitsur"]).status.code(), Some(2));
    let signed = run(&["mackey", "validate", "--functor", "signed", "--group", "C2", "--omega", "trivial-kernel"]);
    assert_eq!(signed.status.code(), Some(1));
}

#[test]
fn repair_from_file() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let dir = std::env::temp_dir().join(format!("mackey-dress-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for k in 0..5 {
        let c = common::fixture(&mut rng, true);
        let v = serde_json::to_value(&c).unwrap();
        assert_valid("chain", &v);
        let back: ChainData = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
        let path = dir.join(format!("chain{k}.json"));
        std::fs::write(&path, serde_json::to_string(&c).unwrap()).unwrap();
        let out = run(&["amitsur", "--repair", "--input", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_valid("amitsur-repair", &v);
        assert_eq!(v["certified"], Value::Bool(true), "{v}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn table_format() {
    let out = run(&["--format", "table", "tom", "S3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().filter(|l| !l.trim().is_empty()).count() >= 5, "{text}");
    let out = run(&["--format", "table", "dress", "cover", "--functor", "burnside", "--group", "S4", "--set", "cyclic", "--prime", "2"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("holds = true"));
}
