//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Exact property criteria (1, 2, 3, 7, 8 and the exact-stub half of 6) fail
//! the process when they fail. The statistical trend criteria (4, 5 and the
//! training half of 6) are always evaluated at their stated thresholds and
//! printed; they fail the process only with `QGROW_ACCEPTANCE_STRICT=1`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qgrow::experiment::spectrum_model;
use qgrow::training::laplace::{l2_relative_error, laplace_loss, AnalyticField};
use qgrow::{
    accessible_spectrum, build_reuploader, forward, fourier_coefficients, AnsatzStyle, ExperimentConfig,
    ExperimentKind, InitSpec, Layout, RawConfig, RepeatUnit, SweepSummary, Variant,
};
use qgrow_cli::run::{execute, read_manifest, read_seed_report};

struct Outcome {
    id: u32,
    name: &'static str,
    exact: bool,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn config(kind: ExperimentKind, variant: Variant, seeds: u64, epochs: usize, out: &Path) -> ExperimentConfig {
    ExperimentConfig::resolve(RawConfig {
        experiment: Some(kind),
        variant: Some(variant.label().into()),
        seeds: Some(qgrow::experiment::SeedSpec::Count(seeds)),
        epochs: Some(epochs),
        output_dir: Some(out.join(variant.label()).to_string_lossy().into_owned()),
        jobs: Some(jobs()),
        ..RawConfig::default()
    })
    .expect("preset resolves")
}

fn read_summary(dir: &str) -> SweepSummary {
    let text = std::fs::read_to_string(Path::new(dir).join("summary.json")).expect("summary written");
    serde_json::from_str(&text).expect("summary parses")
}

fn preservation() -> (bool, String) {
    let r = qgrow::verify::preservation_suite(200, 11).expect("suite runs");
    (r.passed(), format!("{} grow events, max residual {:.2e} (< 1e-10)", r.cases, r.max_deviation))
}

fn gradients() -> (bool, String) {
    let (p, i) = qgrow::verify::gradient_suite(100, 12).expect("suite runs");
    (
        p.passed() && i.passed(),
        format!(
            "100 cases, max partial deviation {:.2e} (< 1e-6), max second-derivative deviation {:.2e} (< 1e-4)",
            p.max_deviation, i.max_deviation
        ),
    )
}

fn spectrum() -> (bool, String) {
    let mut ok = true;
    let mut ks = Vec::new();
    for layers in 1..=6 {
        let k = accessible_spectrum(&spectrum_model(1, layers, 1.0).unwrap()).unwrap()[0].k();
        ok &= k == 2 * layers + 1;
        ks.push(k);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n_qubits = rng.random_range(1..=2);
        let unit = RepeatUnit::standard(n_qubits, AnsatzStyle::RyPairs, &vec![0; n_qubits]);
        let layers = rng.random_range(1..=3);
        let init = InitSpec::Uniform {
            theta: (-3.0, 3.0),
            psi: (0.0, 1.0),
        };
        let mut model = build_reuploader(&Layout::reuploader(n_qubits, 1, unit, layers), &init, rng.random()).unwrap();
        for p in &mut model.params.psi {
            *p = rng.random_range(-2i32..=2) as f64;
        }
        let omega = &accessible_spectrum(&model).unwrap()[0];
        let grid = 4 * omega.max_abs() as usize + 9;
        let coeffs = fourier_coefficients(&model, 0, grid, &[0.0]).unwrap();
        let outside: f64 = coeffs
            .iter()
            .filter(|(k, _)| !omega.contains(**k as f64))
            .map(|(_, c)| c.norm_sqr())
            .sum();
        worst = worst.max(outside);
    }
    ok &= worst < 1e-9;
    (ok, format!("K for L=1..6: {ks:?}; max energy outside the spectrum {worst:.2e} (< 1e-9)"))
}

/// Runs the 1-qubit student-teacher sweep for all variants under `root`.
fn student_teacher(root: &Path, jobs_override: Option<usize>) -> BTreeMap<Variant, String> {
    Variant::ALL
        .into_iter()
        .map(|v| {
            let mut c = config(ExperimentKind::StudentTeacher1q, v, 10, 500, root);
            if let Some(j) = jobs_override {
                c.jobs = j;
            }
            execute(&c).expect("sweep runs");
            (v, c.output_dir)
        })
        .collect()
}

fn student_teacher_trend(dirs: &BTreeMap<Variant, String>) -> (bool, String) {
    let summaries: BTreeMap<Variant, SweepSummary> = dirs.iter().map(|(v, d)| (*v, read_summary(d))).collect();
    let baseline = summaries[&Variant::CdlRandMatched].median;
    let mut ok = true;
    let mut parts = Vec::new();
    for v in [Variant::BlockGrowth, Variant::SeqFm, Variant::IntFm] {
        let m = summaries[&v].median;
        ok &= m * 10.0 <= baseline;
        parts.push(format!("{v} median {m:.2e}"));
    }
    parts.push(format!("cdl-rand-matched median {baseline:.2e}"));
    let lowest = summaries.values().map(|s| s.mean).fold(f64::INFINITY, f64::min);
    let int_mean = summaries[&Variant::IntFm].mean;
    ok &= int_mean <= 2.0 * lowest;
    parts.push(format!("int-fm mean {int_mean:.2e} vs lowest mean {lowest:.2e}"));
    (ok, parts.join(", "))
}

fn final_losses(dir: &str) -> (f64, f64, f64) {
    let manifest = read_manifest(Path::new(dir)).unwrap();
    let (mut train, mut test, mut gap) = (0.0, 0.0, 0.0);
    for e in &manifest.seeds {
        let r = read_seed_report(&Path::new(dir).join(&e.report)).unwrap().report.unwrap();
        train += r.final_train_loss();
        test += r.final_test_loss();
        gap += r.final_test_loss() - r.final_train_loss();
    }
    let n = manifest.seeds.len() as f64;
    (train / n, test / n, gap / n)
}

fn noisy(root: &Path) -> (bool, String) {
    let run = |v| {
        let c = config(ExperimentKind::NoisySt, v, 10, 1000, root);
        execute(&c).expect("sweep runs");
        final_losses(&c.output_dir)
    };
    let (g_train, g_test, g_gap) = run(Variant::BlockGrowth);
    let (c_train, c_test, c_gap) = run(Variant::CdlIdDeep);
    let (g_ratio, c_ratio) = (g_test / g_train, c_test / c_train);
    let ok = g_gap < c_gap && c_ratio >= 3.0 * g_ratio;
    (
        ok,
        format!(
            "block train/test {g_train:.3}/{g_test:.3} gap {g_gap:.3} ratio {g_ratio:.2}; \
             cdl-id-deep train/test {c_train:.3}/{c_test:.3} gap {c_gap:.3} ratio {c_ratio:.2} (need ratio >= {:.2})",
            3.0 * g_ratio
        ),
    )
}

fn laplace_training(root: &Path) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for v in [Variant::BlockGrowth, Variant::SeqFm, Variant::IntFm] {
        let mut c = config(ExperimentKind::Laplace, v, 3, 2000, root);
        c.eval_grid = 50;
        assert_eq!((c.learning_rate, c.initial_layers, c.matched_layers), (0.02, 5, 9));
        execute(&c).expect("sweep runs");
        let manifest = read_manifest(Path::new(&c.output_dir)).unwrap();
        let errs: Vec<f64> = manifest
            .seeds
            .iter()
            .map(|e| {
                let r = read_seed_report(&Path::new(&c.output_dir).join(&e.report)).unwrap().report.unwrap();
                assert_eq!(r.final_model.n_feature_map_blocks(), 9);
                r.l2_relative_error.unwrap()
            })
            .collect();
        ok &= errs.iter().all(|&e| e < 0.15);
        let shown: Vec<String> = errs.iter().map(|e| format!("{e:.3}")).collect();
        parts.push(format!("{v} L2 [{}]", shown.join(", ")));
    }
    (ok, format!("{} (each < 0.15)", parts.join("; ")))
}

fn laplace_exact_stub() -> (bool, String) {
    let c = ExperimentConfig::resolve(RawConfig {
        experiment: Some(ExperimentKind::Laplace),
        eval_grid: Some(50),
        ..RawConfig::default()
    })
    .unwrap();
    let problem = c.laplace_problem();
    let exact = AnalyticField::exact();
    let l2 = l2_relative_error(&exact, problem.eval_grid).unwrap();
    let loss = (0..3u64)
        .flat_map(|seed| [0u64, 999, 1999].map(|epoch| laplace_loss(&exact, &problem, seed, epoch).unwrap()))
        .fold(0.0, f64::max);
    (l2 < 1e-12 && loss < 1e-20, format!("exact stub L2 {l2:.1e}, max loss {loss:.1e}"))
}

fn determinism(first: &BTreeMap<Variant, String>, root: &Path) -> (bool, String) {
    let second = student_teacher(root, Some(1));
    let mut same = 0;
    for (v, dir) in first {
        let a = std::fs::read(Path::new(dir).join("summary.json")).unwrap();
        let b = std::fs::read(Path::new(&second[v]).join("summary.json")).unwrap();
        same += usize::from(a == b);
    }
    (
        same == first.len(),
        format!("{same}/{} summary.json files byte-identical (rerun on 1 worker)", first.len()),
    )
}

fn identity_presets() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let kinds = [
        ExperimentKind::StudentTeacher1q,
        ExperimentKind::StudentTeacher2q,
        ExperimentKind::NoisySt,
        ExperimentKind::Laplace,
    ];
    let identity = [
        Variant::BlockGrowth,
        Variant::SeqFm,
        Variant::IntFm,
        Variant::CdlIdMatched,
        Variant::CdlIdDeep,
    ];
    let (mut models, mut worst) = (0, 0.0f64);
    for kind in kinds {
        for v in identity {
            let c = ExperimentConfig::resolve(RawConfig {
                experiment: Some(kind),
                variant: Some(v.label().into()),
                ..RawConfig::default()
            })
            .unwrap();
            let domain = c.domain();
            for seed in 0..3 {
                let model = c.student(seed).unwrap();
                models += 1;
                for _ in 0..64 {
                    let x = domain.sample(&mut rng);
                    worst = worst.max((forward(&model, &x).unwrap() - 1.0).abs());
                }
            }
        }
    }
    (worst <= 1e-12, format!("{models} models x 64 inputs, max |f - 1| {worst:.1e}"))
}

fn timed(
    id: u32,
    name: &'static str,
    exact: bool,
    budget: Option<Duration>,
    f: impl FnOnce() -> (bool, String),
) -> Outcome {
    let start = Instant::now();
    let (mut pass, mut detail) = f();
    let elapsed = start.elapsed();
    if let Some(b) = budget {
        if elapsed > b {
            pass = false;
            detail.push_str(&format!("; over runtime budget {}s", b.as_secs()));
        }
    }
    let o = Outcome {
        id,
        name,
        exact,
        pass,
        detail,
        elapsed,
    };
    println!(
        "{} {}. {}: {} [{:.1}s]",
        if o.pass { "PASS" } else { "FAIL" },
        o.id,
        o.name,
        o.detail,
        o.elapsed.as_secs_f64()
    );
    o
}

fn main() {
    // cargo passes harness flags such as --nocapture or a filter; a filter
    // that does not name this target means it should be skipped
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let strict = std::env::var("QGROW_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let root = tempfile::tempdir().expect("temp dir");
    let min = |m: u64| Some(Duration::from_secs(60 * m));

    let mut outcomes = vec![
        timed(1, "growth preservation", true, min(1), preservation),
        timed(2, "gradient suite", true, min(2), gradients),
        timed(3, "spectrum oracle", true, None, spectrum),
    ];
    let mut st_dirs = BTreeMap::new();
    outcomes.push(timed(4, "1-qubit student-teacher trend", false, min(30), || {
        st_dirs = student_teacher(&root.path().join("st1q"), None);
        student_teacher_trend(&st_dirs)
    }));
    outcomes.push(timed(5, "noisy regularization trend", false, min(45), || {
        noisy(&root.path().join("noisy"))
    }));
    outcomes.push(timed(6, "Laplace solver L2 error", false, min(60), || {
        laplace_training(&root.path().join("laplace"))
    }));
    outcomes.push(timed(6, "Laplace exact stub", true, None, laplace_exact_stub));
    outcomes.push(timed(7, "determinism", true, None, || {
        determinism(&st_dirs, &root.path().join("st1q-rerun"))
    }));
    outcomes.push(timed(8, "identity-init constant", true, None, identity_presets));

    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    let blocking = outcomes.iter().filter(|o| !o.pass && (o.exact || strict)).count();
    if blocking > 0 {
        std::process::exit(1);
    }
}
