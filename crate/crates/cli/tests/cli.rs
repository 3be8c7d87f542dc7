use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use ddchaos::chaos::{all_conditions, clause_sets, DensityRule};
use ddchaos_cli::export::read_trace;
use ddchaos_cli::scenarios::find;
use serde_json::Value;

fn ddchaos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddchaos"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("ddchaos-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    for cmd in ["run", "describe"] {
        let o = ddchaos(&[cmd, "no-such-thing"]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("unknown scenario"));
    }
    let out = scratch("unknown").join("t.csv");
    assert_eq!(
        ddchaos(&["trace", "no-such-thing", "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn list_names_every_scenario() {
    let o = ddchaos(&["list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().count() >= 18);
    for name in [
        "totanr",
        "sunce",
        "bruk",
        "qwea",
        "count-grof",
        "example-12",
    ] {
        assert!(
            text.lines()
                .any(|l| l.split_whitespace().next() == Some(name)),
            "{name}"
        );
    }
}

#[test]
fn describe_cites_the_block_lengths() {
    let o = ddchaos(&["describe", "sunce"]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    let anchor = v["anchor"].as_str().unwrap();
    assert!(anchor.contains("b_1 = 2") && anchor.contains("a_1 = 18"));
    assert_eq!(v["trace"], true);
}

#[test]
fn run_reports_matching_claims_deterministically() {
    for name in ["totanr", "example-2"] {
        let a = ddchaos(&["run", name]);
        let b = ddchaos(&["run", name]);
        assert_eq!(
            a.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&a.stderr)
        );
        assert_eq!(a.stdout, b.stdout);
        let v = stdout_json(&a);
        assert_eq!(v["scenario"], name);
        assert_eq!(v["all_match"], true);
        assert!(v["claims"].as_array().is_some_and(|c| !c.is_empty()));
    }
}

#[test]
fn mismatch_exits_one_with_a_diff() {
    let o = ddchaos(&["run", "primena-shifts"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    assert_eq!(stdout_json(&o)["all_match"], false);
}

#[test]
fn invalid_parameters_are_usage_errors() {
    assert_eq!(
        ddchaos(&["run", "example-2", "--delta", "1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ddchaos(&["run", "example-2", "--delta", "abc"])
            .status
            .code(),
        Some(2)
    );
    let out = scratch("notrace").join("t.csv");
    assert_eq!(
        ddchaos(&["trace", "count-grof", "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn flags_override_the_config_file() {
    let dir = scratch("config");
    let cfg = dir.join("p.json");
    fs::write(&cfg, r#"{"sigma": 0.75, "seed": 7, "horizon": 300}"#).unwrap();
    let o = ddchaos(&[
        "run",
        "identity-plus-span",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let p = &stdout_json(&o)["params"];
    assert_eq!(p["sigma"], 0.75);
    assert_eq!(p["seed"], 9);
    assert_eq!(p["horizon"], 300);
}

#[test]
fn out_dir_holds_report_and_trace() {
    let dir = scratch("out");
    let o = ddchaos(&["run", "example-3", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(dir.join("example-3.json")).unwrap(), o.stdout);
    let t = read_trace(fs::File::open(dir.join("example-3.csv")).unwrap()).unwrap();
    assert!(!t.values.is_empty());
}

#[test]
fn exported_trace_reproduces_the_in_process_verdicts() {
    let dir = scratch("trace");
    for name in ["example-2", "example-9", "totan"] {
        let path = dir.join(format!("{name}.csv"));
        let o = ddchaos(&["trace", name, "--out", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        let imported = read_trace(fs::File::open(&path).unwrap()).unwrap();

        let s = find(name).unwrap();
        let p = (s.defaults)();
        let ex = (s.trace.unwrap())(&p).unwrap();
        let n = ex.trace.values.len();
        let k = ex.trace.len() as usize;
        assert_eq!(imported.values.len(), n);
        assert!(imported.values.iter().all(|row| row.len() == k));
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().take_while(|l| !l.starts_with("j,set")).count(),
            n * k + 1
        );
        assert!(imported
            .densities
            .iter()
            .all(|d| (0.0..=1.0).contains(&d.ratio)));

        let DensityRule::Checkpoints { checkpoints, .. } = &ex.rule else {
            panic!("{name} uses checkpoints")
        };
        assert_eq!(&imported.checkpoints(), checkpoints);
        let direct =
            all_conditions(&clause_sets(&ex.trace, ex.sigma, ex.eps).unwrap(), &ex.rule).unwrap();
        assert_eq!(imported.verdicts(p.delta).unwrap(), direct, "{name}");
    }
}

#[test]
fn density_and_classify_accept_inline_and_file_json() {
    let o = ddchaos(&[
        "density",
        "--set",
        r#"{"progressions":[{"offset":2,"step":3}]}"#,
    ]);
    assert!(o.status.success());
    assert_eq!(stdout_json(&o)["density"], "1/3");

    let dir = scratch("classify");
    let f = dir.join("c.json");
    fs::write(&f, r#"{"family":{"kind":"backward","weights":[{"kind":"constant","w":2.0}]},"vector":{"domain":"natural","entries":[[3,1.0]]},"horizon":50}"#).unwrap();
    let o = ddchaos(&["classify", "--scenario", &format!("@{}", f.display())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["near_zero"][0]["holds"], true);

    assert_eq!(
        ddchaos(&["density", "--set", "{not json"]).status.code(),
        Some(2)
    );
    assert_eq!(
        ddchaos(&["classify", "--scenario", "@/nonexistent/file.json"])
            .status
            .code(),
        Some(2)
    );
}
