//! End-to-end tests of the `altjulia` binary.

use std::path::Path;
use std::process::{Command, Output};

use altjulia_cli::cli::classify_record;
use altjulia_core::{
    classify, parse_ppm, project_volume, read_raw_volume, render_filled_julia, sample_slice2d, sample_volume3d,
    write_escape_ppm, write_ppm, Axis4, Complex64, ConnectivityClass, IterationConfig, MapParams, Palette, SliceSpec,
    Viewport, VolumeSpec,
};

fn altjulia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_altjulia"))
        .args(args)
        .env_remove("ALTJULIA_THREADS")
        .output()
        .expect("spawn altjulia")
}

fn ok(args: &[&str]) -> String {
    let out = altjulia(args);
    assert!(
        out.status.success(),
        "altjulia {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn usage_error(args: &[&str]) -> String {
    let out = altjulia(args);
    assert_eq!(out.status.code(), Some(2), "altjulia {args:?} should be a usage error");
    assert!(out.stdout.is_empty());
    String::from_utf8(out.stderr).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_origin_is_connected() {
    let line = ok(&["classify", "--c1", "0", "--c2", "0"]);
    assert_eq!(line.lines().count(), 1);
    assert!(line.starts_with("class=connected "), "{line}");
    assert!(line.contains("fate_zero=periodic:1"), "{line}");
    assert!(line.contains("low_confidence=false"), "{line}");
}

#[test]
fn classify_record_matches_library_call() {
    let config = IterationConfig::default();
    for (c1, c2, z1, z2) in [
        (
            "-0.8+0.2i",
            "-0.4",
            Complex64::new(-0.8, 0.2),
            Complex64::new(-0.4, 0.0),
        ),
        (
            "-0.4+0.2i",
            "-0.4",
            Complex64::new(-0.4, 0.2),
            Complex64::new(-0.4, 0.0),
        ),
        ("0.2i", "-0.4", Complex64::new(0.0, 0.2), Complex64::new(-0.4, 0.0)),
        ("5", "-25", Complex64::new(5.0, 0.0), Complex64::new(-25.0, 0.0)),
        ("12", "-3+4i", Complex64::new(12.0, 0.0), Complex64::new(-3.0, 4.0)),
        ("-i", "0.3-0.5i", Complex64::new(0.0, -1.0), Complex64::new(0.3, -0.5)),
    ] {
        let expected = classify_record(&classify(&MapParams::new(z1, z2), &config));
        assert_eq!(ok(&["classify", "--c1", c1, "--c2", c2]).trim_end(), expected);
    }
}

#[test]
fn classify_record_reports_disconnected_and_totally_disconnected() {
    // 0 is a fixed point of the quartic while the other critical orbit escapes
    let line = ok(&["classify", "--c1", "5", "--c2", "-25"]);
    assert!(line.starts_with("class=disconnected "), "{line}");
    assert!(line.contains("period=1"), "{line}");
    let line = ok(&["classify", "--c1", "12", "--c2", "-3+4i"]);
    assert!(line.starts_with("class=totally_disconnected "), "{line}");
    assert!(
        line.contains("fate_zero=escaped:") && line.contains("period=none"),
        "{line}"
    );
}

#[test]
fn shared_options_reach_the_kernel() {
    let config = IterationConfig {
        max_quartic_iters: 7,
        cycle_search_budget: 16,
        cycle_tolerance: 1e-6,
        ..IterationConfig::default()
    };
    let params = MapParams::from_parts(-0.1562, 1.032, -0.1562, 1.032);
    let expected = classify_record(&classify(&params, &config));
    let got = ok(&[
        "--iters",
        "7",
        "--cycle-budget",
        "16",
        "--tol",
        "1e-6",
        "classify",
        "--c1",
        "-0.1562+1.032i",
        "--c2",
        "-0.1562+1.032i",
    ]);
    assert_eq!(got.trim_end(), expected);
}

#[test]
fn slice_with_disconnected_cells_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("slice.ppm");
    ok(&[
        "slice",
        "--fix",
        "re1=0,im1=-1.05",
        "--res",
        "256",
        "--out",
        path_str(&out),
    ]);
    let bytes = std::fs::read(&out).unwrap();
    let img = parse_ppm(&bytes).unwrap();
    assert_eq!((img.width, img.height), (256, 256));
    assert!(img.pixels.contains(&[0, 0, 255]), "no disconnected (blue) pixels");

    let spec = SliceSpec::new([(Axis4::Re1, 0.0), (Axis4::Im1, -1.05)], 256).unwrap();
    let grid = sample_slice2d(&spec, &IterationConfig::default()).unwrap();
    assert_eq!(bytes, write_ppm(&grid, &Palette::default()));
}

#[test]
fn outputs_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut slices = Vec::new();
    let mut julias = Vec::new();
    for threads in ["1", "2", "5"] {
        let s = dir.path().join(format!("s{threads}.ppm"));
        let j = dir.path().join(format!("j{threads}.ppm"));
        ok(&[
            "--threads",
            threads,
            "slice",
            "--fix",
            "re2=-0.4,im2=0",
            "--res",
            "96",
            "--out",
            path_str(&s),
        ]);
        ok(&[
            "julia",
            "--threads",
            threads,
            "--c1",
            "-0.4+0.2i",
            "--c2",
            "-0.4",
            "--res",
            "96",
            "--out",
            path_str(&j),
        ]);
        slices.push(std::fs::read(s).unwrap());
        julias.push(std::fs::read(j).unwrap());
    }
    assert!(slices.windows(2).all(|w| w[0] == w[1]));
    assert!(julias.windows(2).all(|w| w[0] == w[1]));

    // the environment variable is the fallback for --threads
    let e = dir.path().join("env.ppm");
    let out = Command::new(env!("CARGO_BIN_EXE_altjulia"))
        .args(["slice", "--fix", "re2=-0.4,im2=0", "--res", "96", "--out", path_str(&e)])
        .env("ALTJULIA_THREADS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(e).unwrap(), slices[0]);
}

#[test]
fn slice_window_options_are_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zoom.ppm");
    ok(&[
        "slice",
        "--fix",
        "im1=0.2,im2=0",
        "--res",
        "40",
        "--min",
        "-1",
        "--max",
        "0.5",
        "--out",
        path_str(&out),
    ]);
    let spec = SliceSpec::with_bounds([(Axis4::Im1, 0.2), (Axis4::Im2, 0.0)], -1.0, 0.5, 40).unwrap();
    let grid = sample_slice2d(&spec, &IterationConfig::default()).unwrap();
    assert_eq!(std::fs::read(out).unwrap(), write_ppm(&grid, &Palette::default()));
}

#[test]
fn julia_matches_library_render() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("julia.ppm");
    ok(&[
        "julia",
        "--c1",
        "0",
        "--c2",
        "0",
        "--center",
        "0.25-0.5i",
        "--half-width",
        "1.5",
        "--res",
        "64",
        "--out",
        path_str(&out),
    ]);
    let params = MapParams::from_parts(0.0, 0.0, 0.0, 0.0);
    let vp = Viewport::square(Complex64::new(0.25, -0.5), 1.5, 64);
    let grid = render_filled_julia(&params, &vp, &IterationConfig::default()).unwrap();
    let expected = write_escape_ppm(&grid, altjulia_cli::JULIA_INTERIOR, &altjulia_cli::JULIA_GRADIENT);
    assert_eq!(std::fs::read(out).unwrap(), expected);
}

#[test]
fn volume_and_projection_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("vol");
    ok(&["volume", "--fix", "im2=0", "--res", "16", "--out", path_str(&base)]);
    assert!(dir.path().join("vol.raw").exists() && dir.path().join("vol.json").exists());

    let stored = read_raw_volume(&base).unwrap();
    let spec = VolumeSpec::new((Axis4::Im2, 0.0), 16).unwrap();
    let direct = sample_volume3d(&spec, &IterationConfig::default()).unwrap();
    assert_eq!(stored.voxels, direct.voxels);

    for (class, name) in [
        (ConnectivityClass::Connected, "cl"),
        (ConnectivityClass::Disconnected, "dl"),
    ] {
        let out = dir.path().join(format!("{name}.ppm"));
        ok(&[
            "project",
            "--in",
            path_str(&base),
            "--axis",
            "re2",
            "--class",
            name,
            "--out",
            path_str(&out),
        ]);
        let mask = project_volume(&direct, Axis4::Re2, class).unwrap();
        let img = parse_ppm(&std::fs::read(out).unwrap()).unwrap();
        assert_eq!((img.width, img.height), (16, 16));
        let lit = img.pixels.iter().filter(|p| **p != [255, 255, 255]).count();
        assert_eq!(lit, mask.count_set());
    }
}

#[test]
fn malformed_complex_is_a_usage_error_naming_the_grammar() {
    let err = usage_error(&["classify", "--c1", "1+2j", "--c2", "0"]);
    assert!(err.contains("a+bi"), "{err}");
    usage_error(&["classify", "--c1", "nan", "--c2", "0"]);
    usage_error(&["classify", "--c1", "0"]);
}

#[test]
fn invalid_slice_and_volume_arguments_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let out = path_str(&out);
    assert!(usage_error(&["slice", "--fix", "re5=0,im1=0", "--res", "8", "--out", out]).contains("re5"));
    assert!(usage_error(&["slice", "--fix", "re1=0,re1=1", "--res", "8", "--out", out]).contains("twice"));
    usage_error(&["slice", "--fix", "re1=0", "--res", "8", "--out", out]);
    usage_error(&["slice", "--fix", "re1=0,im1=0", "--res", "0", "--out", out]);
    usage_error(&["slice", "--fix", "re1=0,im1=0", "--res", "-4", "--out", out]);
    usage_error(&[
        "slice",
        "--fix",
        "re1=0,im1=0",
        "--res",
        "8",
        "--min",
        "1",
        "--max",
        "1",
        "--out",
        out,
    ]);
    // 1000^3 voxels exceeds the default cap and is refused before sampling
    assert!(usage_error(&["volume", "--fix", "im2=0", "--res", "1000", "--out", out]).contains("limit"));
    usage_error(&["julia", "--c1", "0", "--c2", "0", "--half-width", "0", "--out", out]);
    usage_error(&[
        "project", "--in", out, "--axis", "re1", "--class", "purple", "--out", out,
    ]);
    assert!(!dir.path().join("x").exists());
}

#[test]
fn projecting_along_the_fixed_axis_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("vol");
    ok(&["volume", "--fix", "im2=0", "--res", "4", "--out", path_str(&base)]);
    let out = dir.path().join("p.ppm");
    usage_error(&[
        "project",
        "--in",
        path_str(&base),
        "--axis",
        "im2",
        "--class",
        "cl",
        "--out",
        path_str(&out),
    ]);
}

#[test]
fn missing_input_volume_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = altjulia(&[
        "project",
        "--in",
        path_str(&dir.path().join("absent")),
        "--axis",
        "re1",
        "--class",
        "cl",
        "--out",
        path_str(&dir.path().join("p.ppm")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}
