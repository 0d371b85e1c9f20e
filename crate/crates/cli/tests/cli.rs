use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use despeckle_core::metrics::speckle_index;
use despeckle_core::{load_gray, save_image, Image, ImageFormat, ImageGrid, RgbImage};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_despeckle"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn despeckle")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_gray(dir: &Path, name: &str, g: &ImageGrid) -> PathBuf {
    let p = dir.join(name);
    save_image(&Image::Gray(g.clone()), &p, ImageFormat::Pgm).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn blocks(w: usize, h: usize) -> ImageGrid {
    ImageGrid::from_fn(w, h, |x, y| 50.0 + ((x / 8 + y / 8) % 2) as f64 * 140.0)
}

#[test]
fn add_noise_statistics_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let clean = write_gray(dir.path(), "c.pgm", &ImageGrid::filled(256, 256, 128.0));
    let (a, b) = (dir.path().join("a.pgm"), dir.path().join("b.pgm"));
    let o = run(&[
        "add-noise",
        s(&clean),
        s(&a),
        "--looks",
        "10",
        "--seed",
        "5",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("si = "));
    let si = speckle_index(&load_gray(&a).unwrap()).unwrap();
    assert!((si - 10f64.sqrt().recip()).abs() <= 0.02, "si {si}");

    run(&[
        "add-noise",
        s(&clean),
        s(&b),
        "--looks",
        "10",
        "--seed",
        "5",
    ]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn add_noise_rejects_zero_looks_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let clean = write_gray(dir.path(), "c.pgm", &ImageGrid::filled(8, 8, 128.0));
    let out = dir.path().join("o.pgm");
    assert_eq!(
        code(&run(&["add-noise", s(&clean), s(&out), "--looks", "0"])),
        1
    );
    assert!(!out.exists());
    let missing = dir.path().join("none.pgm");
    assert_eq!(
        code(&run(&["add-noise", s(&missing), s(&out), "--looks", "1"])),
        3
    );
    assert_eq!(code(&run(&["add-noise", s(&clean)])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn denoise_clean_input_is_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let clean = write_gray(dir.path(), "c.pgm", &ImageGrid::filled(32, 32, 128.0));
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "model = proposed\nstop = relative_error\ninput = c.pgm\nreference = c.pgm\noutput = out/r.pgm\n",
    )
    .unwrap();
    fs::create_dir(dir.path().join("out")).unwrap();
    let o = run(&["denoise", "--config", s(&cfg)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(dir.path().join("out/r.pgm.report")).unwrap();
    assert_eq!(report, stdout(&o));
    let field = |k: &str| {
        report
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{k} = ")))
            .unwrap_or_else(|| panic!("no {k} in {report}"))
            .to_string()
    };
    assert!(field("iterations").parse::<usize>().unwrap() <= 2);
    assert_eq!(field("psnr"), "inf");
    let si_in = speckle_index(&load_gray(&clean).unwrap()).unwrap();
    assert!((field("si").parse::<f64>().unwrap() - si_in).abs() <= 1e-9);
}

#[test]
fn denoise_without_reference_omits_quality() {
    let dir = tempfile::tempdir().unwrap();
    let clean = write_gray(dir.path(), "c.pgm", &blocks(48, 48));
    let out = dir.path().join("r.png");
    let o = run(&[
        "denoise",
        "--model",
        "proposed",
        "--input",
        s(&clean),
        "--output",
        s(&out),
        "--set",
        "profile=bsd68",
        "--set",
        "looks=1",
        "--set",
        "seed=3",
        "--set",
        "epsilon=1e-4",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(!text.contains("psnr") && !text.contains("mssim"), "{text}");
    assert!(text.contains("si = "));
    assert!(out.exists());
}

#[test]
fn denoise_routes_rgb_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let g = blocks(24, 24);
    let c = RgbImage::new(g.clone(), g.rotate_180(), g.map(|v| 255.0 - v)).unwrap();
    let input = dir.path().join("c.ppm");
    save_image(&Image::Rgb(c), &input, ImageFormat::Ppm).unwrap();
    let out = dir.path().join("r.ppm");
    let o = run(&[
        "denoise",
        "-m",
        "tdm",
        "-i",
        s(&input),
        "-o",
        s(&out),
        "-r",
        s(&input),
        "--set",
        "looks=5",
        "--set",
        "stop=psnr_peak",
        "--set",
        "cap=40",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(matches!(
        despeckle_core::load_any(&out).unwrap(),
        Image::Rgb(_)
    ));
    assert!(stdout(&o).contains("mssim = "));
}

#[test]
fn denoise_config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let clean = write_gray(dir.path(), "c.pgm", &blocks(16, 16));
    let out = dir.path().join("r.pgm");
    let base = ["denoise", "-m", "proposed", "-i", s(&clean), "-o", s(&out)];
    let with = |extra: &[&str]| {
        let mut a: Vec<&str> = base.to_vec();
        a.extend_from_slice(extra);
        run(&a)
    };
    let o = with(&["--set", "stop=psnr_peak"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("reference"));
    let o = with(&["--set", "foo=1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("'foo'"));
    assert_eq!(code(&with(&["--set", "broken"])), 1);
    assert_eq!(code(&run(&["denoise", "-i", s(&clean), "-o", s(&out)])), 1);
    assert!(!out.exists());
}

#[test]
fn denoise_divergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let clean = write_gray(dir.path(), "c.pgm", &blocks(64, 64));
    let out = dir.path().join("r.pgm");
    let o = run(&[
        "denoise",
        "-m",
        "proposed",
        "-i",
        s(&clean),
        "-o",
        s(&out),
        "--set",
        "looks=1",
        "--set",
        "tau=10",
        "--set",
        "stop=max_iters",
        "--set",
        "cap=50",
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("divergence at iteration"));
    assert!(!out.exists());
}

#[test]
fn evaluate_rows() {
    let dir = tempfile::tempdir().unwrap();
    let a = blocks(20, 20);
    let pa = write_gray(dir.path(), "a.pgm", &a);
    let pb = write_gray(dir.path(), "b.pgm", &a.map(|v| v + 16.0));
    let pc = write_gray(dir.path(), "c.pgm", &ImageGrid::filled(10, 20, 9.0));

    let o = run(&["evaluate", s(&pa), s(&pa)]);
    assert_eq!(code(&o), 0);
    let row = stdout(&o);
    let fields: Vec<&str> = row.trim().split(',').collect();
    assert_eq!(fields[..2], ["inf", "1.0000"]);

    let o = run(&["evaluate", s(&pb), s(&pa)]);
    let psnr: f64 = stdout(&o).split(',').next().unwrap().parse().unwrap();
    assert!((psnr - 24.05).abs() <= 0.01, "{psnr}");

    let o = run(&["evaluate", s(&pc), s(&pa)]);
    assert_ne!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension mismatch"));
}

fn write_plan(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("plan.cfg");
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn benchmark_rows_in_plan_order_with_failures_recorded() {
    let dir = tempfile::tempdir().unwrap();
    write_gray(dir.path(), "flat.pgm", &ImageGrid::filled(24, 24, 128.0));
    write_gray(dir.path(), "blocks.pgm", &blocks(24, 24));
    let plan = write_plan(
        dir.path(),
        "output = t.csv\ncap = 30\n\
         [case]\nimage = blocks.pgm\nlooks = 3\nprofile = bsd68\n\
         [case]\nimage = missing.pgm\nlooks = 1\nprofile = bsd68\n\
         [case]\nimage = flat.pgm\nlooks = 10\nprofile = bsd68\n",
    );
    let o = run(&["benchmark", s(&plan)]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "image,look,model,psnr,mssim,si,iterations,seconds,status"
    );
    assert_eq!(lines.len(), 10);
    let cols = |i: usize| lines[i].split(',').map(str::to_string).collect::<Vec<_>>();
    for (i, (img, model)) in [
        ("blocks", "shan"),
        ("blocks", "tdm"),
        ("blocks", "proposed"),
        ("missing", "shan"),
        ("missing", "tdm"),
        ("missing", "proposed"),
        ("flat", "shan"),
        ("flat", "tdm"),
        ("flat", "proposed"),
    ]
    .iter()
    .enumerate()
    {
        let c = cols(i + 1);
        assert_eq!((c[0].as_str(), c[2].as_str()), (*img, *model));
        assert_eq!(c[7], "", "seconds are off by default");
        if *img == "missing" {
            assert!(c.last().unwrap().contains("error"));
        } else {
            assert_eq!(c.last().unwrap(), "ok");
        }
    }
}

#[test]
fn benchmark_psnr_peak_never_worse_than_input() {
    let dir = tempfile::tempdir().unwrap();
    write_gray(dir.path(), "blocks.pgm", &blocks(32, 32));
    let plan = write_plan(
        dir.path(),
        "output = t.csv\ncap = 60\n[case]\nimage = blocks.pgm\nlooks = 1\nprofile = bsd68\n",
    );
    let p = despeckle_cli::BenchmarkPlan::load(&plan).unwrap();
    for row in despeckle_cli::run_benchmark(&p).unwrap() {
        assert!(row.psnr.unwrap() >= row.noisy_psnr.unwrap(), "{row:?}");
    }
}

#[test]
fn benchmark_timing_fills_seconds() {
    let dir = tempfile::tempdir().unwrap();
    write_gray(dir.path(), "blocks.pgm", &blocks(16, 16));
    let plan = write_plan(
        dir.path(),
        "output = t.csv\nstop = max_iters\ncap = 3\n[case]\nimage = blocks.pgm\nlooks = 5\nprofile = bsd68\n",
    );
    let o = run(&[
        "benchmark",
        s(&plan),
        "--timing",
        "--images",
        s(&dir.path().join("img")),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        assert!(c[7].parse::<f64>().unwrap() >= 0.0);
        assert_eq!(c[6], "3");
    }
    for tag in ["noisy", "shan", "tdm", "proposed"] {
        assert!(dir.path().join(format!("img/blocks_L5_{tag}.pgm")).exists());
    }
}
