//! The `sensor-consensus` binary: exit codes, output files, determinism and
//! the plot data mapping.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = "\
n_sensors = 800
radius = 0.15
rounds = 10
noise_grid = 0.1, 0.3
budgets = 10, 20
trials = 3
test_samples = 500
sweep_param = n_sensors
sweep_values = 500, 800
";

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sensor-consensus"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run_cmd(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    bin(&args)
}

/// Every file under `dir`, keyed by relative path.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn every_command_is_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "small.cfg", SMALL);
    for cmd in ["denoise", "learn", "sweep"] {
        let a = tmp.path().join(format!("{cmd}_a"));
        let b = tmp.path().join(format!("{cmd}_b"));
        for out in [&a, &b] {
            let o = run_cmd(cmd, &cfg, out, &["--seed", "7"]);
            assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
        let (sa, sb) = (snapshot(&a), snapshot(&b));
        assert!(!sa.is_empty());
        assert_eq!(sa, sb, "{cmd} output differs between runs");

        let csvs: Vec<String> = sa
            .keys()
            .filter(|k| k.extension().is_some_and(|e| e == "csv"))
            .map(|k| a.join(k).to_string_lossy().into_owned())
            .collect();
        let plots = [tmp.path().join(format!("{cmd}_pa")), tmp.path().join(format!("{cmd}_pb"))];
        for p in &plots {
            let mut args = vec!["plot", "--out", p.to_str().unwrap()];
            args.extend(csvs.iter().map(String::as_str));
            let o = bin(&args);
            assert!(o.status.success(), "plot: {}", String::from_utf8_lossy(&o.stderr));
        }
        let svgs = snapshot(&plots[0]);
        let stems: std::collections::BTreeSet<_> =
            csvs.iter().map(|c| Path::new(c).file_stem().unwrap().to_owned()).collect();
        assert_eq!(svgs.len(), stems.len());
        assert_eq!(svgs, snapshot(&plots[1]));
    }
}

#[test]
fn seed_and_trials_flags_override_the_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "small.cfg", SMALL);
    let read = |out: &Path| fs::read_to_string(out.join("learn_errors.csv")).unwrap();
    let one = tmp.path().join("one");
    assert!(run_cmd("learn", &cfg, &one, &["--trials", "1"]).status.success());
    let rows = read(&one).lines().count() - 1;
    assert_eq!(rows, 4 * 2, "four conditions at two budgets, one trial");

    let (s1, s2) = (tmp.path().join("s1"), tmp.path().join("s2"));
    assert!(run_cmd("learn", &cfg, &s1, &["--seed", "1", "--trials", "1"]).status.success());
    assert!(run_cmd("learn", &cfg, &s2, &["--seed", "2", "--trials", "1"]).status.success());
    assert_ne!(read(&s1), read(&s2));
}

#[test]
fn exit_codes_separate_configuration_from_runtime_errors() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let code = |o: Output| o.status.code().unwrap();

    let good = write_config(tmp.path(), "small.cfg", SMALL);
    assert_eq!(code(run_cmd("denoise", &good, &out, &["--trials", "1"])), 0);

    let missing = tmp.path().join("absent.cfg");
    assert_eq!(code(run_cmd("learn", &missing, &out, &[])), 1);
    for (k, bad) in ["radius = -1\n", "budgets = 20, 10\n", "colour = red\n", "trials\n"]
        .into_iter()
        .enumerate()
    {
        let cfg = write_config(tmp.path(), &format!("bad{k}.cfg"), bad);
        assert_eq!(code(run_cmd("learn", &cfg, &out, &[])), 1, "{bad}");
    }
    assert_eq!(code(run_cmd("learn", &good, &out, &["--trials", "0"])), 1);
    assert_eq!(code(bin(&["learn", "--out", "x"])), 1, "missing --config");
    assert_eq!(code(bin(&["fit"])), 1, "unknown command");

    let junk = tmp.path().join("junk.csv");
    fs::write(&junk, "a,b\n1,2\n").unwrap();
    assert_eq!(code(bin(&["plot", "--out", out.to_str().unwrap(), junk.to_str().unwrap()])), 2);
    let blocked = tmp.path().join("file");
    fs::write(&blocked, "").unwrap();
    assert_eq!(code(run_cmd("denoise", &good, &blocked, &["--trials", "1"])), 2);
}

fn attr(tag: &str, name: &str) -> f64 {
    let key = format!("{name}=\"");
    let start = tag.find(&key).unwrap() + key.len();
    let end = start + tag[start..].find('"').unwrap();
    tag[start..end].parse().unwrap()
}

#[test]
fn plotted_points_map_back_to_summary_means() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "small.cfg", SMALL);
    let out = tmp.path().join("learn");
    assert!(run_cmd("learn", &cfg, &out, &[]).status.success());
    let csv = out.join("learn_summary.csv");
    let plots = tmp.path().join("plots");
    let o = bin(&["plot", "--out", plots.to_str().unwrap(), csv.to_str().unwrap()]);
    assert!(o.status.success());
    let svg = fs::read_to_string(plots.join("learn_summary.svg")).unwrap();

    let root = svg.lines().next().unwrap();
    let (xmin, xmax) = (attr(root, "data-xmin"), attr(root, "data-xmax"));
    let (ymin, ymax) = (attr(root, "data-ymin"), attr(root, "data-ymax"));
    let (left, top) = (attr(root, "data-left"), attr(root, "data-top"));
    let (w, h) = (attr(root, "data-width"), attr(root, "data-height"));

    let mut plotted: BTreeMap<(String, u64), f64> = BTreeMap::new();
    for line in svg.lines().filter(|l| l.starts_with("<polyline")) {
        let series = line.split("data-series=\"").nth(1).unwrap().split('"').next().unwrap();
        let points = line.split(" points=\"").nth(1).unwrap().split('"').next().unwrap();
        for pair in points.split(' ') {
            let (px, py) = pair.split_once(',').unwrap();
            let (px, py): (f64, f64) = (px.parse().unwrap(), py.parse().unwrap());
            let x = xmin + (px - left) / w * (xmax - xmin);
            let y = ymin + (top + h - py) / h * (ymax - ymin);
            plotted.insert((series.to_string(), x.round() as u64), y);
        }
    }

    let text = fs::read_to_string(&csv).unwrap();
    let mut rows = 0;
    for row in text.lines().skip(1) {
        let f: Vec<&str> = row.split(',').collect();
        let mean: f64 = f[2].parse().unwrap();
        let y = plotted[&(f[0].to_string(), f[1].parse().unwrap())];
        // coordinates carry three decimals of a pixel
        let tol = 1e-3 / h * (ymax - ymin) + 1e-12;
        assert!((y - mean).abs() <= tol, "{row}: plotted {y}");
        rows += 1;
    }
    assert_eq!(rows, plotted.len());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "cfg") {
            sensor_consensus::harness::ExperimentConfig::from_file(&p)
                .unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
