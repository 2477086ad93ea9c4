use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rumorsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rumorsim")).args(args).env_remove("RUMORSIM_TEST_KEY").output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn edge_lines(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).count()
}

#[test]
fn gen_network_small_world_has_200_edges_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for p in [&a, &b] {
        let args =
            ["gen-network", "--type", "small-world", "--n", "100", "--k", "4", "--beta", "0.3", "--seed", "7", "--out"];
        let stdout = ok(&rumorsim(&[&args[..], &[p.to_str().unwrap()]].concat()));
        assert!(stdout.contains("edges               200"));
    }
    assert_eq!(edge_lines(&a), 200);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn gen_network_rejects_bad_probability() {
    let out = rumorsim(&["gen-network", "--type", "erdos-renyi", "--n", "10", "--p", "1.5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn gen_network_exports_graphml_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    for (fmt, marker) in [("graphml", "<graphml"), ("dot", "graph G {")] {
        let p = dir.path().join(format!("g.{fmt}"));
        ok(&rumorsim(&[
            "gen-network",
            "--type",
            "scale-free",
            "--n",
            "20",
            "--m",
            "2",
            "--format",
            fmt,
            "--out",
            p.to_str().unwrap(),
        ]));
        assert!(fs::read_to_string(&p).unwrap().contains(marker));
        let props = ok(&rumorsim(&["props", p.to_str().unwrap()]));
        assert!(props.contains("edges               36"), "{props}");
    }
}

#[test]
fn props_on_empty_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let stdout = ok(&rumorsim(&["props", empty.to_str().unwrap()]));
    assert!(stdout.contains("nodes               0"));
    let out = rumorsim(&["props", dir.path().join("nope.txt").to_str().unwrap()]);
    assert!(!out.status.success());
}

const SPEC: &str = r#"
master_seed = 3
iterations = 100
output_dir = "out"
[network]
kind = "small_world"
n = 20
k = 4
beta = 0.3
"#;

#[test]
fn run_single_rule_spec_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, SPEC).unwrap();
    let stdout = ok(&rumorsim(&["run", spec.to_str().unwrap()]));
    assert!(stdout.starts_with("1 cells"));
    let out = dir.path().join("out");
    let trace = out.join("sw_roster_init-random_act-uniform_seed3.jsonl");
    let text = fs::read_to_string(&trace).unwrap();
    let steps = text.lines().filter(|l| l.contains("\"type\":\"step\"")).count();
    assert!(steps <= 100);
    assert!(text.lines().last().unwrap().contains("\"type\":\"summary\""));

    ok(&rumorsim(&["report", out.to_str().unwrap()]));
    let series = fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(series.lines().count(), 1 + 4 * 101);
    assert!(series.starts_with("config,rumor,iteration,fraction\n"));
    assert!(out.join("summary.json").exists());
}

#[test]
fn remote_spec_without_key_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(
        &spec,
        format!("{SPEC}\n[backend]\nkind = \"remote\"\n[backend.remote]\nbase_url = \"http://127.0.0.1:9\"\napi_key_env = \"RUMORSIM_TEST_KEY\"\n"),
    )
    .unwrap();
    let out = rumorsim(&["run", spec.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("RUMORSIM_TEST_KEY"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn sweep_writes_twelve_traces_resumes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("sweep.toml");
    fs::write(
        &spec,
        format!(
            "{}\n[sweep]\ninit_strategies = [\"random\", \"degree\"]\nactivation_strategies = [\"uniform\", \"degree\"]\nmaster_seeds = [1, 2, 3]\n",
            SPEC.replace("iterations = 100", "iterations = 30")
        ),
    )
    .unwrap();
    let stdout = ok(&rumorsim(&["run", spec.to_str().unwrap(), "--workers", "3"]));
    assert!(stdout.starts_with("12 cells"));
    let out = dir.path().join("out");
    let traces = |d: &Path| {
        let mut v: Vec<_> = fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
            .collect();
        v.sort();
        v
    };
    let first = traces(&out);
    assert_eq!(first.len(), 12);
    let bytes: Vec<Vec<u8>> = first.iter().map(|p| fs::read(p).unwrap()).collect();

    // a truncated trace is rerun, complete ones are skipped
    fs::write(&first[0], "").unwrap();
    let stdout = ok(&rumorsim(&["run", spec.to_str().unwrap()]));
    assert_eq!(stdout.matches("skipped").count(), 11);
    assert_eq!(first.iter().map(|p| fs::read(p).unwrap()).collect::<Vec<_>>(), bytes);

    let report = dir.path().join("report");
    ok(&rumorsim(&["report", out.to_str().unwrap(), "--out", report.to_str().unwrap()]));
    let matrix = fs::read_to_string(report.join("matrix.csv")).unwrap();
    assert_eq!(matrix.lines().count(), 13);
    assert!(matrix.starts_with("config,rumor_1,rumor_2,rumor_3,rumor_4\n"));
    let mean = fs::read_to_string(report.join("matrix_mean.csv")).unwrap();
    assert_eq!(mean.lines().count(), 5);
}

#[test]
fn report_on_empty_dir_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = rumorsim(&["report", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no traces"));
}

#[test]
fn shipped_desk_specs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../experiments/desk");
    for name in ["networks", "strategies", "personas"] {
        let spec = root.join(format!("{name}.toml"));
        let stdout = ok(&rumorsim(&["run", spec.to_str().unwrap(), "--dry-run"]));
        assert!(stdout.contains("cells"));
    }
}
