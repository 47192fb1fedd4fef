//! Experiment harness: files, CSV contracts, determinism and the CLI.

use std::path::Path;
use std::process::Command;

use holo_sps::experiment::{
    histograms, run_convergence_ab, run_histograms, run_render, run_scatter_experiment, scatter, AlgorithmKind,
    ExperimentConfig, ImageSource, HISTOGRAM_BINS,
};
use holo_sps::pgm::{encode_pgm, load_pgm, save_pgm, Normalization};
use holo_sps::{dft2, mse, Complex, ComplexField, ModulationScheme, Target, TargetImage};

fn small_config(dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        resolution: 64,
        iterations: 2_000,
        symmetry: true,
        seed: 3,
        trace_stride: 50,
        samples: 500,
        out_dir: dir.to_path_buf(),
        ..Default::default()
    }
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn pgm_file_round_trip_within_one_level() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<f64> = (0..48).map(|i| (i as f64 * 0.37).sin().abs()).collect();
    let path = dir.path().join("x.pgm");
    save_pgm(&path, 8, 6, &values, Normalization::ClampUnit).unwrap();
    let back: Target = load_pgm(&path).unwrap();
    assert_eq!(back.dims(), (8, 6));
    for (a, b) in values.iter().zip(back.mag()) {
        assert!((a - b).abs() <= 1.0 / 255.0);
    }
}

#[test]
fn missing_file_is_io_error() {
    let err = load_pgm::<f64>("/nonexistent/file.pgm").unwrap_err();
    assert!(matches!(err, holo_sps::HoloError::Io(_)));
}

#[test]
fn file_targets_are_resampled() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("in.pgm");
    let values: Vec<f64> = (0..32 * 16).map(|i| (i % 32) as f64 / 31.0).collect();
    std::fs::write(&path, encode_pgm(32, 16, &values, Normalization::ClampUnit).unwrap()).unwrap();
    let cfg = ExperimentConfig {
        image: ImageSource::File(path),
        resolution: 64,
        ..small_config(dir.path())
    };
    let t = cfg.prepare_target().unwrap();
    assert_eq!(t.dims(), (64, 64));
    let density = t.energy() / 4096.0;
    assert!((density - 1.0).abs() < 1e-12);
}

#[test]
fn zero_iterations_give_zero_improvement() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        iterations: 0,
        ..small_config(dir.path())
    };
    let r = run_convergence_ab(&cfg).unwrap();
    assert_eq!(r.improvement, Some(0.0));
    assert_eq!(r.final_error_improvement, Some(0.0));
    assert_eq!(read(dir.path(), "trace_random.csv"), read(dir.path(), "trace_sps.csv"));
}

#[test]
fn ab_outputs_and_shared_start() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let r = run_convergence_ab(&cfg).unwrap();
    assert_eq!(r.random.trace.samples()[0].mse, r.sps.trace.samples()[0].mse);
    for name in [
        "trace_random.csv",
        "trace_sps.csv",
        "replay_random.pgm",
        "replay_sps.pgm",
        "hologram_random.pgm",
        "hologram_sps.pgm",
        "target.pgm",
        "summary.txt",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let csv = read(dir.path(), "trace_sps.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iteration,mse,accepted"));
    // samples at 0, 50, ..., 2000
    assert_eq!(lines.count(), 41);
    assert!(csv.ends_with('\n') && !csv.contains('\r'));
    let summary = read(dir.path(), "summary.txt");
    for key in [
        "initial_mse = ",
        "final_mse_random = ",
        "final_mse_sps = ",
        "improvement_error_reduction = ",
        "improvement_final_error = ",
        "accepted_random = ",
        "accepted_sps = ",
        "wall_time_s = ",
    ] {
        assert!(summary.contains(key), "{key}");
    }
}

#[test]
fn csv_outputs_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for algorithm in [AlgorithmKind::DsFast, AlgorithmKind::Sa] {
        let ca = ExperimentConfig {
            algorithm,
            ..small_config(a.path())
        };
        let cb = ExperimentConfig {
            out_dir: b.path().to_path_buf(),
            ..ca.clone()
        };
        run_convergence_ab(&ca).unwrap();
        run_convergence_ab(&cb).unwrap();
        run_scatter_experiment(&ca).unwrap();
        run_scatter_experiment(&cb).unwrap();
        run_histograms(&ca).unwrap();
        run_histograms(&cb).unwrap();
        for name in [
            "trace_random.csv",
            "trace_sps.csv",
            "scatter.csv",
            "hist_magnitude.csv",
            "hist_angle.csv",
            "hist_change.csv",
            "replay_sps.pgm",
        ] {
            assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
        }
    }
}

#[test]
fn scatter_rows_and_zero_change() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        scheme: ModulationScheme::continuous_phase(),
        ..small_config(dir.path())
    };
    let r = run_scatter_experiment(&cfg).unwrap();
    assert_eq!(r.points.len(), 500);
    let csv = read(dir.path(), "scatter.csv");
    assert_eq!(csv.lines().next(), Some("pixel_index,delta,mse_change"));
    assert_eq!(csv.lines().count(), 501);
    assert!(r.pearson.unwrap() > 0.95);
}

#[test]
fn scatter_pixel_already_on_device_has_no_change() {
    // a flat target back-projects to a single DC pixel; every other pixel is 0
    // and quantises to 1, the DC pixel has magnitude sqrt(N) = 8
    let t = TargetImage::new(8, 8, vec![1.0; 64]).unwrap();
    let cfg = ExperimentConfig {
        scheme: ModulationScheme::binary_amplitude(),
        samples: 64,
        ..Default::default()
    };
    let r = scatter(&t, &cfg).unwrap();
    assert_eq!(r.points.len(), 64);
    for p in &r.points {
        if p.delta == 0.0 {
            assert!(p.mse_change.abs() < 1e-12);
        }
    }
}

#[test]
fn rank_one_change_on_zero_aperture() {
    // closed form: a change of magnitude d spreads d/sqrt(N) over every replay
    // pixel, so against a zero target the error is N * (d^2 / N) / N = d^2 / N
    let (w, h) = (16, 8);
    let n = (w * h) as f64;
    let t = TargetImage::<f64>::zeros(w, h).unwrap();
    let zero = ComplexField::<f64>::zeros(w, h).unwrap();
    let replay = dft2(&zero);
    let mut kernel = holo_sps::DeltaKernel::new(w, h).unwrap();
    for (x, y, dh) in [(0, 0, Complex::new(1.0, 0.0)), (5, 3, Complex::new(-0.3, 0.4)), (15, 7, Complex::new(2.0, -2.0))] {
        let d2: f64 = Complex::<f64>::norm_sqr(&dh);
        let predicted = kernel.candidate_mse(&replay, t.mag(), x, y, dh).unwrap();
        let mut brute = zero.clone();
        brute.set(x, y, dh);
        let brute = mse(&t, &dft2(&brute)).unwrap();
        assert!((predicted - d2 / n).abs() < 1e-15, "{predicted} vs {}", d2 / n);
        assert!((brute - d2 / n).abs() < 1e-15);
    }
}

#[test]
fn histogram_contracts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let r = run_histograms(&cfg).unwrap();
    assert_eq!(r.angle.total(), 64 * 64);
    assert_eq!(r.magnitude.total(), 64 * 64);
    assert_eq!(r.angle.counts.len(), HISTOGRAM_BINS);
    let csv = read(dir.path(), "hist_angle.csv");
    assert_eq!(csv.lines().next(), Some("bin,lower,upper,count"));
    assert_eq!(csv.lines().count(), HISTOGRAM_BINS + 1);
    // random-phase back-projection: angles uniform within 5 sigma per bin
    let mean = 4096.0 / 64.0;
    let sigma = (4096.0f64 * (1.0 / 64.0) * (63.0 / 64.0)).sqrt();
    for &c in &r.angle.counts {
        assert!((c as f64 - mean).abs() < 5.0 * sigma, "{:?}", r.angle.counts);
    }
}

#[test]
fn zero_target_histogram() {
    let t = TargetImage::<f64>::zeros(16, 16).unwrap();
    let r = histograms(&t, &ExperimentConfig::default()).unwrap();
    assert_eq!(r.magnitude.counts[0], 256);
    assert_eq!(r.magnitude.total(), 256);
}

#[test]
fn render_writes_images() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_render(&small_config(dir.path())).unwrap();
    assert!(r.final_mse < r.initial_mse);
    for name in ["trace_sps.csv", "replay.pgm", "hologram.pgm", "target.pgm", "summary.txt"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let holo: Target = load_pgm(dir.path().join("hologram.pgm")).unwrap();
    // binary phase: 0 -> 0, pi -> 0.5
    assert!(holo.mag().iter().all(|&v| v == 0.0 || (v - 128.0 / 255.0).abs() < 1e-12));
}

#[test]
fn benchmark_replay_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        resolution: 128,
        iterations: 20_000,
        seed: 0,
        symmetry: true,
        out_dir: dir.path().to_path_buf(),
        ..Default::default()
    };
    run_render(&cfg).unwrap();
    let golden = std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/replay_sps_128_seed0.pgm")).unwrap();
    assert_eq!(std::fs::read(dir.path().join("replay.pgm")).unwrap(), golden);
}

#[test]
fn cli_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        format!(
            "resolution = 64\niterations = 300\nseed = 9\nsymmetry = true\ntrace-stride = 100\nout-dir = {}\n",
            dir.path().join("from-file").display()
        ),
    )
    .unwrap();
    let out = dir.path().join("from-flag");
    let status = Command::new(env!("CARGO_BIN_EXE_holo"))
        .args(["run-ab", "--config"])
        .arg(&conf)
        .args(["--iterations", "500", "--out-dir"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = std::fs::read_to_string(out.join("trace_sps.csv")).unwrap();
    assert_eq!(csv.lines().last().unwrap().split(',').next(), Some("500"));
    assert!(!dir.path().join("from-file").exists());
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("seed = 9") && summary.contains("resolution = 64"));
}

#[test]
fn cli_rejects_bad_input() {
    let out = Command::new(env!("CARGO_BIN_EXE_holo"))
        .args(["scatter", "--resolution", "100"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("resolution"));
    let out = Command::new(env!("CARGO_BIN_EXE_holo"))
        .args(["hist", "--scheme", "hybrid:3"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
