use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn alstop(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alstop"))
        .args(args)
        .current_dir(cwd)
        .env_remove("RUST_LOG")
        .env("ALSTOP_WORKERS", "2")
        .output()
        .expect("spawn alstop")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL_GRID: &str = "\
dataset = synthetic
synth.docs = 300
synth.vocab_size = 120
synth.skew = 0.4
batch_percents = 10, 20
window_sizes = 3, 1
runs = 2
output = out/exp
";

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = alstop(&["grid", "--no-such-flag"], dir.path());
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let out = alstop(&["frobnicate"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn bad_config_values_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = alstop(&["grid", "--set", "runs=lots"], dir.path());
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("runs"));
    let out = alstop(&["grid", "--set", "no_such_key=1"], dir.path());
    assert_eq!(code(&out), 2);
    let out = alstop(&["grid", "--batch-percents", "0"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn runtime_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = alstop(&["run", "--corpus", "missing.corpus"], dir.path());
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).starts_with("error: "));
    let out = alstop(&["report", "nowhere"], dir.path());
    assert_eq!(code(&out), 1);
}

#[test]
fn help_documents_every_flag() {
    let dir = tempfile::tempdir().unwrap();
    let expected: &[(&str, &[&str])] = &[
        (
            "synth",
            &[
                "--classes",
                "--vocab-size",
                "--docs",
                "--doc-len",
                "--skew",
                "--seed",
                "--out",
            ],
        ),
        ("ingest", &["--stopwords", "--min-count", "--out"]),
        (
            "run",
            &[
                "--config",
                "--set",
                "--corpus",
                "--batch-percent",
                "--category",
                "--out",
            ],
        ),
        (
            "grid",
            &[
                "--config",
                "--set",
                "--batch-percents",
                "--runs",
                "--output",
                "--shard",
                "--task",
            ],
        ),
        ("report", &["<OUTPUT>"]),
    ];
    for (cmd, flags) in expected {
        let out = alstop(&[cmd, "--help"], dir.path());
        assert_eq!(code(&out), 0);
        let text = String::from_utf8(out.stdout).unwrap();
        for flag in *flags {
            assert!(text.contains(flag), "{cmd} --help lacks {flag}");
        }
    }
    let out = alstop(&["--help"], dir.path());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("ALSTOP_WORKERS"));
}

#[test]
fn grid_writes_aggregate_at_configured_path() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.cfg"), SMALL_GRID).unwrap();
    let out = alstop(&["grid", "--config", "exp.cfg"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("out/exp/aggregate.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "method,batch_percent,window_size,n_decisions,mean_annotations,sd_annotations,mean_f,sd_f,n_exhausted"
    );
    // Oracle-99 plus two BV2009 windows at two batch percents
    assert_eq!(lines.count(), 6);
    let runs = fs::read_dir(dir.path().join("out/exp/runs"))
        .unwrap()
        .count();
    assert_eq!(runs, 4);
    assert!(dir.path().join("out/exp/experiment.cfg").exists());
}

#[test]
fn report_over_shards_matches_single_shot() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.cfg"), SMALL_GRID).unwrap();
    let single = alstop(&["grid", "-c", "exp.cfg", "-o", "single"], dir.path());
    assert_eq!(code(&single), 0, "{}", stderr(&single));
    for shard in ["0/2", "1/2"] {
        let out = alstop(
            &["grid", "-c", "exp.cfg", "-o", "sharded", "--shard", shard],
            dir.path(),
        );
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    assert!(!dir.path().join("sharded/aggregate.csv").exists());
    let out = alstop(&["report", "sharded"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let a = fs::read(dir.path().join("single/aggregate.csv")).unwrap();
    let b = fs::read(dir.path().join("sharded/aggregate.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn synth_then_run_on_cached_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = alstop(
        &[
            "synth",
            "--docs",
            "200",
            "--vocab-size",
            "80",
            "--classes",
            "3",
            "--seed",
            "5",
            "-o",
            "c.corpus",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let corpus = fs::read_to_string(dir.path().join("c.corpus")).unwrap();
    assert!(corpus.starts_with("alstop-corpus\t1\n"));

    let out = alstop(
        &[
            "run",
            "--corpus",
            "c.corpus",
            "--batch-percent",
            "10",
            "--window-sizes",
            "2",
            "-o",
            "run.jsonl",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let log = fs::read_to_string(dir.path().join("run.jsonl")).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert!(lines[0].contains("\"record\":\"header\""));
    assert_eq!(
        lines
            .iter()
            .filter(|l| l.contains("\"record\":\"stop\""))
            .count(),
        2
    );
    assert_eq!(
        lines
            .iter()
            .filter(|l| l.contains("\"record\":\"iteration\""))
            .count(),
        10
    );

    let out = alstop(
        &[
            "run",
            "--corpus",
            "c.corpus",
            "--category",
            "2",
            "--batch-percent",
            "25",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("category 2"));

    let out = alstop(
        &["run", "--corpus", "c.corpus", "--category", "7"],
        dir.path(),
    );
    assert_eq!(code(&out), 1);
}
