//! Golden outputs and JSON schema conformance. Set `UPDATE_GOLDEN=1` to
//! rewrite the golden files.

use std::path::{Path, PathBuf};

use jsonschema::Registry;
use lcsx::cli::run_args;
use serde_json::Value;

const FIVE: [&str; 10] = ["-t", "llet-in", "-t", "llet-e", "-t", "lapp", "-t", "cp-in", "-t", "cp-e"];

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from golden output");
}

fn run(args: &[&str]) -> String {
    run_args(args).unwrap().body
}

fn load(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(schema_file: &str, instance: &Value) {
    let dir = root().join("schemas");
    let defs = load(&dir.join("defs.schema.json"));
    let registry = Registry::new().add("https://lcsx.local/schemas/defs.schema.json", defs).unwrap().prepare().unwrap();
    let schema = load(&dir.join(schema_file));
    let v = jsonschema::options().with_registry(&registry).build(&schema).unwrap();
    let errors: Vec<String> = v.iter_errors(instance).take(5).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{schema_file}: {errors:#?}");
}

fn json(args: &[&str]) -> Value {
    let mut a = vec!["--format", "json"];
    a.extend_from_slice(args);
    serde_json::from_str(&run(&a)).unwrap()
}

#[test]
fn unify_cp_e_abs_against_copy_in_chain_context() {
    golden("unify_cp-e-abs_no-cp-e-c-abs.txt", &run(&["unify", "cp-e/abs", "no-cp-e-c/abs"]));
    golden("unify_cp-e-abs_no-cp-e-c-abs.json", &run(&["--format", "json", "unify", "cp-e/abs", "no-cp-e-c/abs"]));
}

#[test]
fn diagram_schemas_for_the_five_families() {
    let mut args = vec!["diagrams", "--max-depth", "4"];
    args.extend_from_slice(&FIVE);
    golden("diagrams_depth4.txt", &run(&args));
    let mut v = json(&args);
    let schemas = v["schemas"].take();
    golden("diagrams_depth4_schemas.json", &(serde_json::to_string_pretty(&schemas).unwrap() + "\n"));
}

#[test]
fn overlap_counts_per_pair() {
    golden("overlaps_summary.txt", &run(&["overlaps", "--summary"]));
}

#[test]
fn outputs_conform_to_schemas() {
    assert_valid("catalog.schema.json", &json(&["catalog"]));
    assert_valid("unify.schema.json", &json(&["unify", "--trace", "cp-e/abs", "no-cp-e-c/abs"]));
    assert_valid("unify.schema.json", &json(&["unify", "llet-in", "no-lapp/4"]));
    assert_valid("overlaps.schema.json", &json(&["overlaps", "--raw", "-t", "cp-e", "-n", "cp-e-c"]));
    assert_valid("overlaps.schema.json", &json(&["overlaps", "--summary"]));
    let mut args = vec!["diagrams"];
    args.extend_from_slice(&FIVE);
    assert_valid("diagrams.schema.json", &json(&args));
}
