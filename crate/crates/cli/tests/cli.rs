use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::Command as Process;
use toricgit_cli::{parse_job_file, parse_resolved_job, report, resolve_job, run, sig12, Command, PartialOptions};

fn jobs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("jobs")
}

fn job_text(name: &str) -> String {
    std::fs::read_to_string(jobs_dir().join(name)).unwrap()
}

fn resolved(name: &str) -> toricgit_cli::Job {
    resolve_job(parse_job_file(&job_text(name)).unwrap(), None, &PartialOptions::default()).unwrap()
}

fn binary() -> Process {
    Process::new(env!("CARGO_BIN_EXE_toricgit"))
}

#[test]
fn every_bundled_job_succeeds_and_round_trips() {
    let mut seen = 0;
    for entry in std::fs::read_dir(jobs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let job = resolved(path.file_name().unwrap().to_str().unwrap());
        let (r, code) = report(&job);
        assert_eq!(code, 0, "{}: {}", path.display(), r["error"]);
        let echoed = parse_resolved_job(&r["input"]).unwrap();
        assert_eq!(echoed, job);
        assert_eq!(r["input_sha256"], Value::String(echoed.sha256()));
        seen += 1;
    }
    assert_eq!(seen, 14);
}

#[test]
fn classify_reports_two_stable_facets() {
    let out = run(&resolved("classify_p2.json")).unwrap();
    assert_eq!(out["stable_facets"], json!([0, 1]));
    let stable_faces = out["faces"].as_array().unwrap().iter().filter(|f| f["status"] == "stable").count();
    assert_eq!(stable_faces, 3);
}

#[test]
fn structure_sheaf_slope_is_zero() {
    assert_eq!(run(&resolved("slope_structure_sheaf.json")).unwrap()["slope"], json!("0"));
}

#[test]
fn projective_plane_has_three_subgroups() {
    let out = run(&resolved("subgroups_p2.json")).unwrap();
    assert_eq!(out["count"], json!(3));
    assert_eq!(out["upper_bound"], json!("3"));
}

#[test]
fn tangent_sheaf_is_certified_stable() {
    let out = run(&resolved("stability_tangent_p2.json")).unwrap();
    assert_eq!(out["status"], "Stable");
    assert_eq!(out["certainty"], "Certified");
    assert_eq!(out["slope"], "3/2");
}

#[test]
fn alpha_direction_matches_surface_formula() {
    let out = run(&resolved("alpha_bundle.json")).unwrap();
    assert_eq!(out["formula"], json!(["1", "6", "1", "6"]));
    assert_eq!(out["exact_supports"], json!(["9/2", "9/2", "9/2", "9/2"]));
}

#[test]
fn flags_override_the_file() {
    let file = parse_job_file(&job_text("quotient_p2.json")).unwrap();
    let job = resolve_job(file, Some(Command::MinkowskiCheck), &PartialOptions { seed: Some(3), ..Default::default() })
        .unwrap();
    assert_eq!(job.command, Command::MinkowskiCheck);
    assert_eq!(job.options.seed, 3);
    assert_eq!(run(&job).unwrap(), json!({ "holds": true, "defect": ["0"] }));
}

#[test]
fn schema_is_validated_per_command() {
    let file = parse_job_file(&job_text("quotient_p2.json")).unwrap();
    let missing = resolve_job(file.clone(), Some(Command::Slope), &PartialOptions::default()).unwrap_err();
    assert_eq!((missing.kind, missing.exit_code()), ("Schema", 1));
    let extra = resolve_job(file, Some(Command::SolveMinkowski), &PartialOptions::default()).unwrap_err();
    assert_eq!(extra.module, "cli");
    let unknown = parse_job_file(r#"{"command":"quotient","setpu":{}}"#).unwrap_err();
    assert!(unknown.message.contains("setpu"));
    assert!(parse_job_file(r#"{"command":"nonsense"}"#).is_err());
}

#[test]
fn floats_keep_twelve_significant_digits() {
    assert_eq!(sig12(0.1234567890123456), 0.123456789012);
    assert_eq!(sig12(-0.0).to_string(), "0");
}

fn write_job(dir: &Path, name: &str, body: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body.to_string()).unwrap();
    path
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let ok = binary().args(["--input"]).arg(jobs_dir().join("quotient_p2.json")).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));

    let square = json!({"n":2,"facets":[
        {"normal":[1,0],"support":"1"},{"normal":[-1,0],"support":"1"},
        {"normal":[0,1],"support":"1"},{"normal":[0,-1],"support":"1"}]});
    let not_generic = write_job(
        dir.path(),
        "ng.json",
        &json!({"command":"quotient","setup":{"polytope":square,"sublattice":[[1,1]]}}),
    );
    let out = binary().arg("--input").arg(&not_generic).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["error"]["kind"], "NotGeneric");
    assert_eq!(r["error"]["module"], "git");
    assert_eq!(r["error"]["error"], "GitError");

    let infeasible = write_job(
        dir.path(),
        "inf.json",
        &json!({"command":"solve-minkowski","normals":[[1,0],[0,1],[-1,0],[0,-1]],"targets":["2","1","1","1"]}),
    );
    let out = binary().arg("--input").arg(&infeasible).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{not json").unwrap();
    let out = binary().arg("--input").arg(&broken).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["error"]["kind"], "Schema");
    assert_eq!(r["input_sha256"].as_str().unwrap().len(), 64);

    let unbounded = write_job(
        dir.path(),
        "unb.json",
        &json!({"command":"compatible-subgroups","polytope":{"n":2,"facets":[{"normal":[1,0],"support":"0"},{"normal":[0,1],"support":"0"}]}}),
    );
    let out = binary().arg("--input").arg(&unbounded).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_file_text_format_and_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.txt");
    let status = binary()
        .arg("--input")
        .arg(jobs_dir().join("subgroups_p2.json"))
        .args(["--format", "text", "--k-max", "3", "--output"])
        .arg(&target)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.starts_with("compatible-subgroups [ok]"));
    assert!(text.contains("count: 3"));

    let run_with = |threads: &str| {
        binary()
            .env("TORICGIT_THREADS", threads)
            .arg("--input")
            .arg(jobs_dir().join("stability_tangent_p2.json"))
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run_with("1"), run_with("4"));
    let bad = binary()
        .env("TORICGIT_THREADS", "zero")
        .arg("--input")
        .arg(jobs_dir().join("slope_structure_sheaf.json"))
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
