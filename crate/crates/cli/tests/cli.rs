use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_roughlap"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("roughlap-cli-{}-{tag}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn roughlap")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn spiral_mesh_writes_mesh_and_quality() {
    let out = scratch("spiral");
    let o = run(bin()
        .args(["mesh", "--domain", "spiral", "--n-max", "4", "--h", "0.05", "--out"])
        .arg(&out));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mesh = fs::read_to_string(out.join("spiral.mesh")).unwrap();
    assert!(mesh.starts_with("# roughlap "));
    let quality = fs::read_to_string(out.join("spiral.quality.json")).unwrap();
    assert!(quality.contains("\"violations\": []"), "{quality}");
    assert!(quality.contains("\"n_max\": 4"));
}

#[test]
fn rect_union_mesh_reports_loop_counts() {
    let out = scratch("rect");
    let o = run(bin()
        .args(["mesh", "--domain", "rect-union", "--k-max", "3", "--out"])
        .arg(&out));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let quality = fs::read_to_string(out.join("rect_union.quality.json")).unwrap();
    assert!(quality.contains("\"domain_loops\": 3"), "{quality}");
    assert!(quality.contains("\"mesh_loops\": 3"), "{quality}");
}

#[test]
fn invalid_flag_combinations_exit_2() {
    for args in [
        vec!["mesh", "--domain", "spiral", "--k-max", "3"],
        vec!["mesh", "--domain", "spiral"],
        vec!["mesh", "--domain", "unit-square", "--radius", "2"],
        vec![
            "solve",
            "--domain",
            "unit-square",
            "--bc",
            "dirichlet",
            "--robin",
            "1",
            "--source",
            "sine-product",
        ],
        vec!["mesh", "--domain", "nowhere"],
        vec!["exterior"],
    ] {
        let o = run(bin().args(&args));
        assert_eq!(code(&o), 2, "{args:?}");
    }
    let o = run(bin()
        .args(["solve", "--h", "0.2", "--config"])
        .arg(config("square_dirichlet.json")));
    assert_eq!(code(&o), 2);
}

#[test]
fn config_for_another_command_exits_2() {
    let o = run(bin()
        .args(["spectrum", "--config"])
        .arg(config("square_dirichlet.json")));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not `spectrum`"));
}

#[test]
fn malformed_json_exits_2_with_location() {
    let dir = scratch("bad");
    let path = dir.join("bad.json");
    fs::write(&path, "{\n  \"command\": \"solve\",\n  \"name\": oops\n}\n").unwrap();
    let o = run(bin().args(["solve", "--config"]).arg(&path));
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json:3"), "{err}");
    assert!(err.contains("column"), "{err}");
}

#[test]
fn neumann_with_unit_load_exits_3_with_defect() {
    let out = scratch("neumann");
    let o = run(bin()
        .args([
            "solve",
            "--domain",
            "unit-square",
            "--bc",
            "neumann",
            "--source",
            "constant",
            "--value",
            "1",
            "--out",
        ])
        .arg(&out));
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("defect"), "{err}");
}

#[test]
fn unreachable_tolerance_exits_4() {
    let out = scratch("noconv");
    let o = run(bin()
        .args([
            "solve",
            "--domain",
            "unit-square",
            "--bc",
            "dirichlet",
            "--source",
            "sine-product",
            "--tol",
            "1e-30",
        ])
        .args(["--levels", "2", "--out"])
        .arg(&out));
    assert_eq!(code(&o), 4);
}

#[test]
fn dirichlet_ladder_csv_has_ratios_near_4() {
    let out = scratch("ladder");
    let o = run(bin()
        .args(["solve", "--out"])
        .arg(&out)
        .arg("--config")
        .arg(config("square_dirichlet.json")));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("square_dirichlet.csv")).unwrap();
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let head: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = head.iter().position(|c| *c == "l2_ratio").unwrap();
    let last = lines
        .next_back()
        .unwrap()
        .split(',')
        .nth(col)
        .unwrap()
        .parse::<f64>()
        .unwrap();
    assert!((last - 4.0).abs() < 0.2, "{last}");
}

#[test]
fn identical_config_gives_identical_bytes() {
    let a = scratch("repro-a");
    let b = scratch("repro-b");
    for (dir, threads) in [(&a, "2"), (&b, "2")] {
        let o = run(bin()
            .env("ROUGHLAP_THREADS", threads)
            .args(["spectrum", "--out"])
            .arg(dir)
            .arg("--config")
            .arg(config("disk_steklov.json")));
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let x = fs::read(a.join("disk_steklov.csv")).unwrap();
    let y = fs::read(b.join("disk_steklov.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn bad_thread_count_exits_2() {
    let o = run(bin()
        .env("ROUGHLAP_THREADS", "0")
        .args(["geometry-check", "--samples", "10"]));
    assert_eq!(code(&o), 2);
}

#[test]
fn geometry_check_passes_with_defaults() {
    let out = scratch("geometry");
    let o = run(bin().args(["geometry-check", "--samples", "2000", "--out"]).arg(&out));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("geometry.csv")).unwrap();
    assert!(
        csv.lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .all(|l| l.ends_with(",true")),
        "{csv}"
    );
}
