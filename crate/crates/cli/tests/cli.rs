use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn demo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../demo")
}

fn ideaflow(out: &Path, args: &[&str]) -> Output {
    let d = demo();
    Command::new(env!("CARGO_BIN_EXE_ideaflow"))
        .arg("--config")
        .arg(d.join("config.json"))
        .args(["--set", &format!("paths.corpus={}", serde_json::to_string(&d.join("corpus")).unwrap())])
        .args(["--set", &format!("paths.manifest={}", serde_json::to_string(&d.join("manifest.csv")).unwrap())])
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn prepare_then_train_succeeds() {
    let out = tempfile::tempdir().unwrap();
    let o = ideaflow(out.path(), &["--stage", "prepare"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = ideaflow(out.path(), &["--stage", "train", "--iters", "50", "--k", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let model: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.path().join("model.json")).unwrap()).unwrap();
    assert_eq!(model["k"], 3);
    assert_eq!(model["iters"], 50);
}

#[test]
fn missing_artifact_exits_3() {
    let out = tempfile::tempdir().unwrap();
    let o = ideaflow(out.path(), &["--stage", "infer"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("cascades.json"));
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let out = tempfile::tempdir().unwrap();
    for (args, key) in [
        (vec!["--set", "lda.bogus=1"], "lda.bogus"),
        (vec!["--stage", "nope"], "stage"),
        (vec!["--tau", "2"], "cascade.tau"),
        (vec!["--set", "novalue"], "novalue"),
    ] {
        let o = ideaflow(out.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains(key), "{args:?}: {}", stderr(&o));
    }
}
