use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use zigfast::format::to_json;
use zigfast::stats::{analytic_standard_error, MomentAccumulator};
use zigfast::tables::DEFAULT_TOLERANCE;
use zigfast::{solve_layers, DensityKind, Distribution, ExpSampler, ZigguratTables};

fn zigfast() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_zigfast"));
    cmd.env_remove("ZIGFAST_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    zigfast().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn parse_text(bytes: &[u8]) -> Vec<f64> {
    std::str::from_utf8(bytes)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect()
}

fn parse_f64le(bytes: &[u8]) -> Vec<f64> {
    assert_eq!(bytes.len() % 8, 0);
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

#[test]
fn gen_zero_draws_is_empty() {
    for format in ["text", "f64le"] {
        let o = run(&["gen", "--seed", "1", "-n", "0", "--format", format]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn gen_is_reproducible_per_seed() {
    for dist in ["exp", "normal"] {
        for algo in ["modified", "traditional"] {
            let args = [
                "gen", "--dist", dist, "--algo", algo, "--seed", "99", "-n", "5000",
            ];
            let a = run(&args);
            let b = run(&args);
            assert!(a.status.success());
            assert_eq!(a.stdout, b.stdout, "{dist} {algo}");
            let c = run(&[
                "gen", "--dist", dist, "--algo", algo, "--seed", "100", "-n", "5000",
            ]);
            assert_ne!(a.stdout, c.stdout);
        }
    }
}

#[test]
fn environment_seed_matches_flag() {
    let flag = run(&["gen", "--dist", "normal", "--seed", "31337", "-n", "1000"]);
    let env = zigfast()
        .args(["gen", "--dist", "normal", "-n", "1000"])
        .env("ZIGFAST_SEED", "31337")
        .output()
        .unwrap();
    assert!(env.status.success());
    assert_eq!(flag.stdout, env.stdout);

    let bad = zigfast()
        .args(["gen", "-n", "3"])
        .env("ZIGFAST_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn text_and_binary_agree_and_have_the_right_moments() {
    let n = 1_000_000;
    for (dist, d) in [
        ("exp", Distribution::Exponential),
        ("normal", Distribution::Normal),
    ] {
        let text = run(&["gen", "--dist", dist, "--seed", "5", "-n", &n.to_string()]);
        let bin = run(&[
            "gen",
            "--dist",
            dist,
            "--seed",
            "5",
            "-n",
            &n.to_string(),
            "--format",
            "f64le",
        ]);
        assert!(text.status.success() && bin.status.success());
        let t = parse_text(&text.stdout);
        let b = parse_f64le(&bin.stdout);
        assert_eq!(t.len(), n);
        assert_eq!(t, b, "{dist}: 17 significant digits round-trip");

        let mut acc = MomentAccumulator::new();
        acc.extend_from_slice(&b);
        for (k, m) in acc.raw_moments().iter().enumerate() {
            let k = k as u32 + 1;
            let z = (m - d.raw_moment(k)) / analytic_standard_error(d, k, n as u64);
            assert!(z.abs() <= 6.0, "{dist} moment {k}: z = {z}");
        }
    }
}

#[test]
fn gen_writes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("draws.bin");
    let o = run(&[
        "gen",
        "--seed",
        "8",
        "-n",
        "100",
        "--format",
        "f64le",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let stdout_copy = run(&["gen", "--seed", "8", "-n", "100", "--format", "f64le"]);
    assert_eq!(std::fs::read(&path).unwrap(), stdout_copy.stdout);
}

#[test]
fn tables_reports_layer_counts() {
    let o = run(&["tables"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("L_max 252"), "{s}");
    assert!(s.contains("i_max 256"));

    let o = run(&["tables", "--dist", "normal"]);
    assert!(stdout(&o).contains("L_max 253"));

    let o = run(&["tables", "--imax", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("L_max 0"));

    assert_eq!(run(&["tables", "--imax", "3"]).status.code(), Some(2));
    assert_eq!(run(&["tables", "--imax", "1"]).status.code(), Some(2));
}

fn write_and_verify(dir: &Path, name: &str, format: &str, dist: &str) {
    let path = dir.join(name);
    let p = path.to_str().unwrap();
    let o = run(&["tables", "--dist", dist, "--out", p, "--format", format]);
    assert!(o.status.success());
    let v = run(&["verify", p]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    assert!(stdout(&v).contains("0 violations"));
}

#[test]
fn table_files_verify() {
    let dir = tempfile::tempdir().unwrap();
    write_and_verify(dir.path(), "exp.json", "json", "exp");
    write_and_verify(dir.path(), "exp.bin", "bin", "exp");
    write_and_verify(dir.path(), "normal.json", "json", "normal");
}

#[test]
fn verify_flags_bad_tables_and_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = solve_layers(DensityKind::Exponential, 256, DEFAULT_TOLERANCE).unwrap();
    let mut f = good.f().to_vec();
    f[40] *= 1.0 + 1e-6;
    let bent = ZigguratTables::from_parts(
        good.kind(),
        good.i_max(),
        good.x().to_vec(),
        f,
        good.a().to_vec(),
        good.epsilon_max(),
    )
    .unwrap();
    let path = dir.path().join("bent.json");
    std::fs::write(&path, to_json(&bent)).unwrap();
    let o = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("violation"));

    let junk = dir.path().join("junk.bin");
    std::fs::write(&junk, b"not a table").unwrap();
    assert_eq!(
        run(&["verify", junk.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        run(&["verify", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn argument_errors_exit_with_two() {
    assert_eq!(run(&["gen", "--dist", "cauchy"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "--algo", "fast"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "--format", "json"]).status.code(), Some(2));
    assert_eq!(
        run(&["quality", "-n", "10", "--seed", "1", "--format", "f64le"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn quality_json_shape() {
    let o = run(&[
        "quality", "--dist", "normal", "-n", "200000", "--seed", "3", "--jobs", "2", "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["distribution"], "normal");
    assert_eq!(v["algorithm"], "modified");
    assert_eq!(v["n"], 200000);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["pass"], true);
    for key in ["moments", "expected", "standard_errors", "z_scores"] {
        assert_eq!(v[key].as_array().unwrap().len(), 5, "{key}");
    }
    assert_eq!(v["expected"][3], 3.0);
}

#[test]
fn quality_failure_exits_with_one() {
    // One draw far out in the tail puts the first moment beyond six standard
    // errors, which a one-draw run must report as a failure.
    let seed = (0u64..)
        .find(|&s| ExpSampler::from_seed(s).sample() > 7.5)
        .unwrap();
    let o = run(&["quality", "-n", "1", "--seed", &seed.to_string()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let o = run(&["quality", "-n", "100000", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn bench_smoke() {
    let start = Instant::now();
    let o = run(&[
        "bench", "-n", "1000", "--trials", "3", "--seed", "1", "--format", "json",
    ]);
    assert!(start.elapsed() < Duration::from_secs(5));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["algorithm"], "modified");
    assert_eq!(reports[0]["trials"], 3);
    assert!(reports[0]["speedup_vs_baseline"].as_f64().unwrap() > 0.0);
    assert_eq!(reports[0]["target_speedup"], 1.65);
    assert_eq!(reports[1]["speedup_vs_baseline"], 1.0);
    assert!(reports[1]["target_speedup"].is_null());

    assert_eq!(
        run(&["bench", "-n", "1000", "--trials", "2"]).status.code(),
        Some(2)
    );
}

#[test]
fn pathstats_json_shape() {
    let o = run(&[
        "pathstats",
        "-n",
        "100000",
        "--seed",
        "2",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["counts"]["draws"], 100000);
    assert_eq!(v["expected_common_fraction"], 252.0 / 256.0);
    let c = &v["counts"];
    let total = c["common"].as_u64().unwrap() + c["exceptional"].as_u64().unwrap();
    assert_eq!(total, 100000);
}
