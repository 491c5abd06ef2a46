//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use lpcdf::harness::{run_rate_experiment, ExperimentConfig};
use lpcdf::io::read_json;
use lpcdf::{
    default_threshold, empirical_w1, local_design, lp_weights, mc_risk, quantile, reference_design,
    smallest_eigenvalue, w1_step_vs_analytic, w1_step_vs_step, CdfEstimator, ConditionalModel,
    Dataset, GaussianCdf, MonotoneCdf, MultiIndexBasis, RandomSource, RiskMode, SteppedCdf,
};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn monomial(alpha: &[usize], x: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(x)
        .map(|(&a, &v)| v.powi(a as i32))
        .product()
}

/// Criteria 1 and 2 share one sweep: (max reproduction error, bound violations, weights checked).
fn polynomial_sweep() -> (f64, usize, usize) {
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    let mut checked = 0;
    let n = 1000;
    let h = 0.2;
    for d in 1..=2usize {
        for ell in 0..=2usize {
            let src = RandomSource::new(1000 + 10 * d as u64 + ell as u64);
            let mut rng = src.substream(&[0]);
            let xs: Vec<f64> = (0..n * d).map(|_| rng.random()).collect();
            let data = Dataset::new(d, xs, vec![0.0; n]).unwrap();
            let basis = MultiIndexBasis::<f64>::new(d, ell).unwrap();
            let thr = default_threshold(&basis, 1.0).unwrap();
            let bound = lpcdf::weight_bound(&basis, n, h, thr);
            let mut points = 0;
            while points < 50 {
                let x: Vec<f64> = (0..d).map(|_| rng.random()).collect();
                let design = local_design(&data, &basis, &x, h, thr).unwrap();
                let Some(w) = lp_weights(&design, &data, &basis).unwrap() else {
                    continue;
                };
                points += 1;
                for _ in 0..20 {
                    let coef: Vec<f64> = basis
                        .indices()
                        .iter()
                        .map(|_| rng.random_range(-1.0..1.0))
                        .collect();
                    let q = |p: &[f64]| -> f64 {
                        basis
                            .indices()
                            .iter()
                            .zip(&coef)
                            .map(|(a, c)| c * monomial(a, p))
                            .sum()
                    };
                    worst = worst.max((w.apply(|i| q(data.x(i))) - q(&x)).abs());
                }
                for &(_, wi) in &w.entries {
                    checked += 1;
                    if wi.abs() > bound {
                        violations += 1;
                    }
                }
            }
        }
    }
    (worst, violations, checked)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in 1..=2usize {
        for ell in 0..=3usize {
            let basis = MultiIndexBasis::<f64>::new(d, ell).unwrap();
            let reference = reference_design(&basis);
            let m = basis.len();
            for i in 0..m {
                for j in i..m {
                    let entry = |u: &[f64]| {
                        let v = basis.design_vector(u);
                        v[i] * v[j]
                    };
                    let q = if d == 1 {
                        adaptive_simpson(&|u| entry(&[u]), 0.0, 1.0, 1e-14)
                    } else {
                        adaptive_simpson(
                            &|u1| adaptive_simpson(&|u2| entry(&[u1, u2]), 0.0, 1.0, 1e-14),
                            0.0,
                            1.0,
                            1e-14,
                        )
                    };
                    worst = worst.max((reference[(i, j)] - q).abs());
                }
            }
        }
    }
    let basis = MultiIndexBasis::<f64>::new(1, 1).unwrap();
    let lambda = smallest_eigenvalue(&reference_design(&basis), 1e-12).unwrap();
    let exact = (4.0 - 13f64.sqrt()) / 6.0;
    let lambda_err = (lambda - exact).abs();
    outcome(
        worst <= 1e-10 && lambda_err <= 1e-12,
        format!("max |D - quadrature| = {worst:.2e}, |lambda1 - (4-sqrt13)/6| = {lambda_err:.2e}"),
    )
}

/// Equal-mass midpoint-quantile discretization of `N(mu, sigma^2)`.
fn discretized_normal(mu: f64, sigma: f64, atoms: usize) -> SteppedCdf<f64> {
    let normal = Normal::new(mu, sigma).unwrap();
    let k = atoms as f64;
    SteppedCdf {
        jump_ts: (0..atoms)
            .map(|j| normal.inverse_cdf((j as f64 + 0.5) / k))
            .collect(),
        raw_levels: (0..atoms).map(|j| (j + 1) as f64 / k).collect(),
        fallback: false,
    }
}

fn criterion_4() -> Outcome {
    let mut rng = RandomSource::new(4).substream(&[0]);
    let mut shift_err: f64 = 0.0;
    for _ in 0..20 {
        let a = rng.random_range(-2.0..2.0);
        let b = rng.random_range(-2.0..2.0);
        let sigma = rng.random_range(0.2..2.0);
        let step = discretized_normal(a, sigma, 1_000_000);
        let w = w1_step_vs_analytic(&step, &GaussianCdf::new(b, sigma)).unwrap();
        shift_err = shift_err.max((w - (a - b).abs()).abs());
    }
    let mut cross_err: f64 = 0.0;
    for _ in 0..100 {
        let mut xs: Vec<f64> = (0..50).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut ys: Vec<f64> = (0..50).map(|_| rng.random_range(-3.0..3.0)).collect();
        let atoms =
            |v: &[f64]| SteppedCdf::from_atoms(v.iter().map(|&t| (t, 1.0 / 50.0)).collect());
        let stepwise = w1_step_vs_step(&atoms(&xs), &atoms(&ys)).unwrap();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        cross_err = cross_err.max((stepwise - empirical_w1(&xs, &ys).unwrap()).abs());
    }
    outcome(
        shift_err <= 1e-6 && cross_err <= 1e-10,
        format!(
            "shift identity max err = {shift_err:.2e}, step vs empirical max err = {cross_err:.2e}"
        ),
    )
}

fn rate_criterion(file: &str, target: f64, extra: bool) -> Outcome {
    let cfg: ExperimentConfig = read_json(&configs_dir().join(file)).unwrap();
    let started = Instant::now();
    let report = match run_rate_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("experiment failed: {e}")),
    };
    let Some(fit) = report.slope(RiskMode::Raw) else {
        return outcome(false, "raw slope unavailable".into());
    };
    let mut detail = format!(
        "raw slope = {:.4} (+/- {:.4}), target {target:.4} +/- 0.15, failures = {}, {:.1} s",
        fit.slope,
        fit.stderr,
        report.failures,
        started.elapsed().as_secs_f64()
    );
    if extra {
        match report.slope(RiskMode::Repaired) {
            Some(r) => detail.push_str(&format!("; repaired slope = {:.4}", r.slope)),
            None => detail.push_str("; repaired slope unavailable"),
        }
    }
    outcome(
        (fit.slope - target).abs() <= 0.15 && report.failures == 0,
        detail,
    )
}

fn criterion_7() -> Outcome {
    let model = ConditionalModel::named("gauss-sin", 1).unwrap();
    let data = model
        .sample_dataset(1000, &mut RandomSource::new(7).substream(&[0]))
        .unwrap();
    let est = CdfEstimator::fit(data, 0, 1e-6, 0.5).unwrap();
    let risk = mc_risk(
        &model,
        &est,
        &mut RandomSource::new(7).substream(&[1]),
        4000,
        RiskMode::Raw,
    )
    .unwrap();
    let sigma = model.sigma();
    let std = Normal::new(0.0, 1.0).unwrap();
    let inner = |x: f64| {
        let mu = (2.0 * std::f64::consts::PI * x).sin() / 4.0;
        adaptive_simpson(
            &|y: f64| y.abs() * std.pdf_at((y - mu) / sigma) / sigma,
            mu - 12.0 * sigma,
            mu + 12.0 * sigma,
            1e-12,
        )
    };
    let expected = adaptive_simpson(&inner, 0.0, 1.0, 1e-10);
    let gap = (risk.mean - expected).abs();
    outcome(
        gap <= 3.0 * risk.stderr,
        format!(
            "mean = {:.6}, E|Y| = {expected:.6}, |gap| = {gap:.2e}, 3 stderr = {:.2e}",
            risk.mean,
            3.0 * risk.stderr
        ),
    )
}

trait Pdf {
    fn pdf_at(&self, z: f64) -> f64;
}

impl Pdf for Normal {
    fn pdf_at(&self, z: f64) -> f64 {
        use statrs::distribution::Continuous;
        self.pdf(z)
    }
}

fn chi_square_pushforward() -> (f64, bool) {
    let cdf = MonotoneCdf::new(vec![-1.0, 0.5, 2.0], vec![0.2, 0.7, 1.0]).unwrap();
    let masses = [0.2, 0.5, 0.3];
    let draws = 100_000;
    let mut rng = RandomSource::new(8).substream(&[0]);
    let mut counts = [0usize; 3];
    let mut stray = false;
    for _ in 0..draws {
        let y = quantile(&cdf, rng.random::<f64>());
        match cdf.jump_ts.iter().position(|&t| t == y) {
            Some(k) => counts[k] += 1,
            None => stray = true,
        }
    }
    let stat: f64 = counts
        .iter()
        .zip(masses)
        .map(|(&c, p)| {
            let e = p * draws as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let p_value = 1.0 - ChiSquared::new(2.0).unwrap().cdf(stat);
    (p_value, !stray)
}

fn run_cli(dir: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_lpcdf"))
        .args(args)
        .current_dir(dir)
        .env("LPCDF_WORKERS", "2")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn cli_session(dir: &Path) -> bool {
    let smoke = configs_dir().join("smoke.json");
    let smoke = smoke.to_str().unwrap();
    let steps: [&[&str]; 5] = [
        &[
            "gen-data",
            "--model",
            "gauss-sin",
            "--n",
            "1000",
            "--seed",
            "7",
            "--out",
            "data.csv",
        ],
        &[
            "fit", "--data", "data.csv", "--beta", "1", "--out", "est.json",
        ],
        &[
            "sample",
            "--est",
            "est.json",
            "--at",
            "0.5",
            "--k",
            "10",
            "--seed",
            "3",
            "--out",
            "samples.csv",
        ],
        &[
            "risk",
            "--est",
            "est.json",
            "--model",
            "gauss-sin",
            "--x-reps",
            "100",
            "--seed",
            "1",
            "--out",
            "risk.json",
        ],
        &["rate-bench", "--config", smoke, "--out", "bench"],
    ];
    steps.iter().all(|args| run_cli(dir, args))
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            let sub = path.strip_prefix(dir).unwrap().to_path_buf();
            out.extend(files_under(&path).into_iter().map(|f| sub.join(f)));
        } else {
            out.push(path.strip_prefix(dir).unwrap().to_path_buf());
        }
    }
    out.sort();
    out
}

/// Byte comparison of every artifact; `timing.json` carries wall-clock
/// time and is the one file exempt by design.
fn cli_determinism() -> (bool, String) {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    if !cli_session(a.path()) || !cli_session(b.path()) {
        return (false, "a CLI command failed".into());
    }
    let files = files_under(a.path());
    if files != files_under(b.path()) {
        return (false, "runs produced different file sets".into());
    }
    let compared: Vec<&PathBuf> = files
        .iter()
        .filter(|p| !p.ends_with("timing.json"))
        .collect();
    let differing: Vec<String> = compared
        .iter()
        .filter(|p| {
            std::fs::read(a.path().join(p)).unwrap() != std::fs::read(b.path().join(p)).unwrap()
        })
        .map(|p| p.display().to_string())
        .collect();
    if differing.is_empty() {
        (true, format!("{} files byte-identical", compared.len()))
    } else {
        (false, format!("differing: {}", differing.join(", ")))
    }
}

fn criterion_8() -> Outcome {
    let (p_value, clean) = chi_square_pushforward();
    let (same, detail) = cli_determinism();
    outcome(
        p_value > 0.01 && clean && same,
        format!("chi-square p = {p_value:.4}; CLI determinism: {detail}"),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let started = Instant::now();
    let (worst, violations, checked) = polynomial_sweep();
    let sweep_secs = started.elapsed().as_secs_f64();
    results.push((
        1,
        "polynomial reproduction",
        outcome(
            worst <= 1e-8 && sweep_secs < 10.0,
            format!("max error = {worst:.2e} ({sweep_secs:.2} s)"),
        ),
    ));
    results.push((
        2,
        "weight bound",
        outcome(
            violations == 0,
            format!("{violations} violations over {checked} weights"),
        ),
    ));
    results.push((3, "reference design", criterion_3()));
    results.push((4, "W1 identities", criterion_4()));
    results.push((
        5,
        "rate, beta = 1",
        rate_criterion("gauss-sin-beta1.json", -1.0 / 3.0, false),
    ));
    results.push((
        6,
        "rate, beta = 2",
        rate_criterion("gauss-sin-beta2.json", -0.4, true),
    ));
    results.push((7, "fallback cost", criterion_7()));
    results.push((8, "sampler pushforward and determinism", criterion_8()));

    let mut failed = 0;
    for (id, name, o) in &results {
        println!(
            "{} criterion {id} ({name}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
