use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use errforge::fixtures::{write_run_fixture, RunFixture};
use errforge::{PipelineConfig, ReferenceSource};

fn errforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_errforge"))
        .args(args)
        .env_remove("ERRFORGE_PROVIDER_URL")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = errforge(args);
    assert!(
        out.status.success(),
        "errforge {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(dir: &Path, pairs: usize, seed: u64) -> RunFixture {
    let cfg = PipelineConfig {
        seed,
        ..Default::default()
    };
    write_run_fixture(dir, pairs, seed, &cfg).unwrap()
}

fn reference_args(f: &RunFixture) -> Vec<String> {
    let ReferenceSource::Tagged { source, target } = &f.inputs.reference else {
        unreachable!()
    };
    vec![
        "--reference-source".into(),
        source.display().to_string(),
        "--reference-target".into(),
        target.display().to_string(),
    ]
}

fn run_args<'a>(f: &'a RunFixture, out: &'a Path, extra: &'a [String]) -> Vec<&'a str> {
    let mut args = vec![
        "run",
        "--source",
        s(&f.inputs.source),
        "--target",
        s(&f.inputs.target),
        "--replay",
        s(&f.replay),
        "--out",
        s(out),
    ];
    args.extend(extra.iter().map(String::as_str));
    args
}

#[test]
fn align_prints_golden_sequences() {
    let out = ok(&[
        "align",
        "--source",
        s(&data("learner.tagged")),
        "--target",
        s(&data("corrected.tagged")),
    ]);
    assert_eq!(
        out,
        "PRP VBD del(VB) ins(DT) ins(JJ) NN .\n\
         PRP ins(MD) VBP del(DT) DT inf(JJS) NN del(IN) ins(IN) DT typ(NN) ins(.)\n"
    );
}

#[test]
fn score_fbeta_reference_value() {
    assert_eq!(
        ok(&["score-fbeta", "--tp", "2", "--fp", "1", "--fn", "2"]).trim(),
        "0.625"
    );
    assert_eq!(
        ok(&[
            "score-fbeta",
            "--tp",
            "3",
            "--fp",
            "1",
            "--fn",
            "1",
            "--beta",
            "2"
        ])
        .trim(),
        "0.75"
    );
}

#[test]
fn piped_stages_reproduce_the_monolithic_run() {
    let tmp = tempfile::tempdir().unwrap();
    let f = fixture(&tmp.path().join("in"), 300, 11);
    let run_dir = tmp.path().join("run");
    let refs = reference_args(&f);
    let mut args = run_args(&f, &run_dir, &refs);
    args.extend(["--seed", "11"]);
    ok(&args);

    let p = |n: &str| tmp.path().join(n);
    let same = |a: PathBuf, b: PathBuf| {
        assert_eq!(
            fs::read(&a).unwrap(),
            fs::read(&b).unwrap(),
            "{} vs {}",
            a.display(),
            b.display()
        )
    };
    ok(&[
        "chunk",
        "--seed",
        "11",
        "--source",
        s(&f.inputs.source),
        "--target",
        s(&f.inputs.target),
        "--out",
        s(&p("chunks.jsonl")),
    ]);
    same(run_dir.join("chunks.jsonl"), p("chunks.jsonl"));
    ok(&[
        "translate",
        "--replay",
        s(&f.replay),
        "--input",
        s(&p("chunks.jsonl")),
        "--out",
        s(&p("nbest.jsonl")),
    ]);
    same(run_dir.join("nbest.jsonl"), p("nbest.jsonl"));
    ok(&[
        "combine",
        "--seed",
        "11",
        "--input",
        s(&p("nbest.jsonl")),
        "--out-prefix",
        s(&p("cand")),
    ]);
    for ext in ["src", "tgt", "jsonl"] {
        same(
            run_dir.join(format!("candidates.{ext}")),
            p(&format!("cand.{ext}")),
        );
    }
    ok(&[
        "align-candidates",
        "--source",
        s(&p("cand.src")),
        "--target",
        s(&p("cand.tgt")),
        "--out",
        s(&p("cand.align")),
    ]);
    same(run_dir.join("candidates.align"), p("cand.align"));

    let ref_tsv = p("ref.tsv");
    let mut est = vec!["estimate-dist", "--out", s(&ref_tsv)];
    est.extend(refs.iter().map(String::as_str));
    ok(&est);
    same(run_dir.join("reference.dist.tsv"), p("ref.tsv"));
    ok(&[
        "filter",
        "--source",
        s(&p("cand.src")),
        "--target",
        s(&p("cand.tgt")),
        "--alignments",
        s(&p("cand.align")),
        "--dist",
        s(&p("ref.tsv")),
        "--out-prefix",
        s(&p("kept")),
    ]);
    same(run_dir.join("filtered.src"), p("kept.src"));
    same(run_dir.join("filtered.tgt"), p("kept.tgt"));
}

#[test]
fn report_matches_the_live_report() {
    let tmp = tempfile::tempdir().unwrap();
    let f = fixture(&tmp.path().join("in"), 200, 12);
    let run_dir = tmp.path().join("run");
    let refs = reference_args(&f);
    let live: serde_json::Value = serde_json::from_str(&ok(&run_args(&f, &run_dir, &refs))).unwrap();
    let saved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run_dir.join("report.json")).unwrap()).unwrap();
    let rederived: serde_json::Value =
        serde_json::from_str(&ok(&["report", "--run-dir", s(&run_dir)])).unwrap();
    assert_eq!(live, saved);
    assert_eq!(live, rederived);
    assert_eq!(live["pairs_read"], 200);
}

#[test]
fn worker_count_never_changes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let f = fixture(&tmp.path().join("in"), 300, 13);
    let refs = reference_args(&f);
    let mut outputs = Vec::new();
    for jobs in ["1", "4"] {
        let dir = tmp.path().join(format!("run{jobs}"));
        let mut args = run_args(&f, &dir, &refs);
        args.extend(["--jobs", jobs]);
        ok(&args);
        outputs.push(
            ["filtered.src", "candidates.align", "report.json", "nbest.jsonl"]
                .map(|n| fs::read(dir.join(n)).unwrap()),
        );
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let f = fixture(&tmp.path().join("in"), 300, 14);
    let refs = reference_args(&f);
    let config = tmp.path().join("errforge.toml");
    fs::write(&config, "keep_ratio = 0.5\nnum_outputs = 4\n").unwrap();

    let from_file: serde_json::Value = {
        let dir = tmp.path().join("a");
        let mut args = run_args(&f, &dir, &refs);
        args.extend(["--config", s(&config)]);
        serde_json::from_str(&ok(&args)).unwrap()
    };
    let overridden: serde_json::Value = {
        let dir = tmp.path().join("b");
        let mut args = run_args(&f, &dir, &refs);
        args.extend(["--config", s(&config), "--keep-ratio", "0.25"]);
        serde_json::from_str(&ok(&args)).unwrap()
    };
    let retention = |v: &serde_json::Value| v["sentence_retention"].as_f64().unwrap();
    assert!((retention(&from_file) - 0.5).abs() < 0.01);
    assert!((retention(&overridden) - 0.25).abs() < 0.01);
    // num_outputs = 4 caps candidates per record.
    assert!(from_file["candidates_generated"].as_u64().unwrap() <= 4 * 300);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(errforge(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(errforge(&["chunk", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        errforge(&["score-fbeta", "--tp", "x", "--fp", "1", "--fn", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(errforge(&["--help"]).status.code(), Some(0));

    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.toml");
    fs::write(&config, "keep_ratio = 3.0\n").unwrap();
    let out = errforge(&[
        "score-fbeta",
        "--config",
        s(&config),
        "--tp",
        "1",
        "--fp",
        "0",
        "--fn",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("keep_ratio"));
}

#[test]
fn data_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    fs::write(&a, "one\ntwo\nthree\n").unwrap();
    fs::write(&b, "one\ntwo\n").unwrap();
    let out = errforge(&[
        "chunk",
        "--source",
        s(&a),
        "--target",
        s(&b),
        "--out",
        s(&tmp.path().join("c")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line count mismatch 3 vs 2"));

    let missing = errforge(&[
        "align",
        "--source",
        "/nonexistent/x",
        "--target",
        "/nonexistent/y",
    ]);
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(
        errforge(&["score-fbeta", "--tp", "0", "--fp", "0", "--fn", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn unreachable_provider_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let f = fixture(&tmp.path().join("in"), 20, 15);
    let chunks = tmp.path().join("chunks.jsonl");
    ok(&[
        "chunk",
        "--source",
        s(&f.inputs.source),
        "--target",
        s(&f.inputs.target),
        "--out",
        s(&chunks),
    ]);
    let config = tmp.path().join("remote.toml");
    fs::write(&config, "provider = \"remote\"\nprovider_url = \"http://192.0.2.1:9\"\nprovider_retries = 1\nprovider_timeout_secs = 2.0\n").unwrap();

    // The environment variable overrides the URL from the file.
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    let out = Command::new(env!("CARGO_BIN_EXE_errforge"))
        .args([
            "translate",
            "--config",
            s(&config),
            "--input",
            s(&chunks),
            "--out",
            s(&tmp.path().join("nb")),
        ])
        .env("ERRFORGE_PROVIDER_URL", &url)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let failures = fs::read_to_string(tmp.path().join("nb.failures.jsonl")).unwrap();
    assert_eq!(failures.lines().count(), 20);
}

#[test]
fn tag_writes_tagged_blocks() {
    let tmp = tempfile::tempdir().unwrap();
    let plain = tmp.path().join("plain.txt");
    fs::write(&plain, "We had a great time .\n\n.\n").unwrap();
    let out = ok(&["tag", "--input", s(&plain)]);
    assert_eq!(
        out,
        "We\tPRP\nhad\tVBD\na\tDT\ngreat\tJJ\ntime\tNN\n.\t.\n\n.\t.\n\n"
    );
}
