//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use miao_core::classify::{loocv, permutation_sets, write_importance_csv, write_metrics_csv, FeatureKey};
use miao_core::config::{AnalysisConfig, ClassifierConfig};
use miao_core::irf::{closed_form_sce, impulse_response_from, raw_miao_scores, sce_from, truncated_sce};
use miao_core::pipeline::{classify_m_case, m_case, run_groups, write_scores_csv, MCase, ScoreTable, Stage};
use miao_core::prep::{adf_test, frac_diff_with, DEFAULT_WEIGHT_CUTOFF};
use miao_core::synth::{analytic_irf, benchmark, generate, Benchmark, BenchmarkConfig, SynthSpec};
use miao_core::var::{fit_var_ols, identify_svar, ljung_box, select_lag, LagSearchConfig};

struct Outcome {
    pass: bool,
    replaced: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, replaced: false, detail }
}

fn normal_walk(seed: u64, n: usize, phi: f64, integrate: bool) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            let e: f64 = StandardNormal.sample(&mut rng);
            x = if integrate { x + e } else { phi * x + e };
            x
        })
        .collect()
}

fn irf_oracle() -> Outcome {
    let started = Instant::now();
    let mut worst_sce = 0.0f64;
    let mut worst_irf = 0.0f64;
    for seed in 0..20u64 {
        let p = 1 + (seed % 3) as usize;
        let spec = SynthSpec::random_stable(3, p, 0.8, 4000, 100 + seed);
        let coeffs = spec.coeff_matrices().unwrap();
        let impact = spec.b0_inv_matrix().unwrap();
        let closed = closed_form_sce(&coeffs, &impact).unwrap();
        let long = truncated_sce(&coeffs, &impact, 5000, 0.0).values;
        worst_sce = worst_sce.max((closed - long).abs().max());

        let data = generate(&spec).unwrap();
        let lag = select_lag(&data, &LagSearchConfig::default()).unwrap().selection.chosen;
        let svar = identify_svar(fit_var_ols(&data, lag).unwrap(), &[0, 1, 2]).unwrap();
        let est = impulse_response_from(&svar.var.coeffs, &svar.b0_inv, 10);
        let truth = analytic_irf(&spec, 10).unwrap();
        worst_irf = worst_irf.max(est.max_abs_diff(&truth));
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        worst_sce < 1e-6 && worst_irf < 0.1 && secs < 120.0,
        format!("max |closed - 5000-term| = {worst_sce:.2e} (< 1e-6); max |IRF err|, k <= 10 = {worst_irf:.4} (< 0.1); {secs:.1}s (< 120s)"),
    )
}

fn calibration() -> Outcome {
    let started = Instant::now();
    let trials = 200;
    let noise_rejected = (0..trials).filter(|&s| adf_test(&normal_walk(1000 + s, 1000, 0.0, false)).unwrap().p_value < 0.05).count();
    let walk_kept = (0..trials).filter(|&s| adf_test(&normal_walk(5000 + s, 1000, 0.0, true)).unwrap().p_value >= 0.05).count();
    let flagged = (0..trials)
        .filter(|&s| {
            let cols: Vec<Vec<f64>> = (0..3).map(|j| normal_walk(9000 + 3 * s + j, 1000, 0.5, false)).collect();
            let resid = DMatrix::from_fn(1000, 3, |t, j| cols[j][t]);
            ljung_box(&resid, 1, 1).unwrap().min_p() < 0.10
        })
        .count();
    let f = |k: u64| k as f64 / trials as f64;
    let secs = started.elapsed().as_secs_f64();
    outcome(
        f(noise_rejected as u64) >= 0.95 && f(walk_kept as u64) >= 0.85 && f(flagged as u64) >= 0.99 && secs < 120.0,
        format!(
            "ADF rejects on white noise {:.3} (>= 0.95); keeps unit root on walks {:.3} (>= 0.85); Ljung-Box flags AR(1) 0.5 {:.3} (>= 0.99); {secs:.1}s",
            f(noise_rejected as u64),
            f(walk_kept as u64),
            f(flagged as u64)
        ),
    )
}

fn frac_diff_exactness() -> Outcome {
    let x: Vec<f64> = (0..300).map(|t| ((t * 37 + 11) % 101) as f64 - 20.0).collect();
    let identity = frac_diff_with(&x, 0.0, DEFAULT_WEIGHT_CUTOFF).unwrap() == x;
    let first: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let difference = frac_diff_with(&x, 1.0, DEFAULT_WEIGHT_CUTOFF).unwrap() == first;
    // w_k = Γ(k - d) / (Γ(-d) Γ(k + 1)), with Γ(-1/2) = -2√π
    let gamma_neg_half = -2.0 * std::f64::consts::PI.sqrt();
    let mut w = vec![1.0];
    for k in 1.. {
        let lnw = statrs::function::gamma::ln_gamma(k as f64 - 0.5) - statrs::function::gamma::ln_gamma(k as f64 + 1.0);
        let wk = lnw.exp() / gamma_neg_half;
        if wk.abs() < DEFAULT_WEIGHT_CUTOFF {
            break;
        }
        w.push(wk);
    }
    let leading = [1.0, -0.5, -0.125, -0.0625, -0.0390625, -0.02734375];
    let leading_ok = leading.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-15);
    let width = w.len();
    let expected: Vec<f64> = (width - 1..x.len()).map(|t| (0..width).map(|k| w[k] * x[t - k]).sum()).collect();
    let got = frac_diff_with(&x, 0.5, DEFAULT_WEIGHT_CUTOFF).unwrap();
    let err = if got.len() == expected.len() {
        got.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    outcome(
        identity && difference && leading_ok && err < 1e-12,
        format!("d=0 identity {identity}; d=1 difference {difference}; d=0.5 weights width {width}, max err {err:.2e} (< 1e-12)"),
    )
}

fn sign_semantics() -> Outcome {
    let names: Vec<String> = vec!["a".into(), "b".into()];
    // a shock to b lowers a for good; a has no effect on b
    let a1 = DMatrix::from_row_slice(2, 2, &[0.5, -0.3, 0.0, 0.4]);
    let sce = sce_from(&[a1.clone()], &DMatrix::identity(2, 2)).unwrap().values;
    let ms = raw_miao_scores(&[sce]).unwrap();
    let table = ScoreTable::from_matrix(&names, &ms, Stage::RawMs).unwrap();
    let (case_ba, d_ba) = classify_m_case(&table, "b", "a").unwrap();
    let (case_ab, _) = classify_m_case(&table, "a", "b").unwrap();
    let suppress = table.get("b", "a").unwrap() > 0.0 && case_ba == MCase::M1 && case_ab == MCase::M2;
    let d_ok = (d_ba - (table.get("b", "a").unwrap() - table.get("a", "b").unwrap()).abs()).abs() < 1e-15;

    // the table's sign conditions, one fixture per case
    let cases = [((2.0, -1.0), MCase::M1, 3.0), ((-1.0, 2.0), MCase::M2, 3.0), ((1.0, 0.5), MCase::M3, 0.5), ((-1.0, -2.0), MCase::M4, 1.0), ((0.0, 0.0), MCase::M3, 0.0)];
    let cases_ok = cases.iter().all(|((i, j), c, d)| m_case(*i, *j) == (*c, *d));

    // a lagged push reversed one step later: every response sums to nothing off the diagonal
    let l1 = DMatrix::<f64>::from_row_slice(2, 2, &[0.3, 0.4, 0.0, 0.2]);
    let l2 = DMatrix::from_row_slice(2, 2, &[0.1, -0.4, 0.0, 0.1]);
    let impact = DMatrix::<f64>::identity(2, 2);
    let cancel = raw_miao_scores(&[sce_from(&[l1.clone(), l2.clone()], &impact).unwrap().values]).unwrap();
    let cancel_trunc = raw_miao_scores(&[truncated_sce(&[l1.clone(), l2.clone()], &impact, 5000, 0.0).values]).unwrap();
    let moved: f64 = impulse_response_from(&[l1, l2], &impact, 2).get(0, 1, 1).abs();
    let residue = cancel.abs().max().max(cancel_trunc.abs().max());
    outcome(
        suppress && d_ok && cases_ok && residue < 1e-9 && moved > 0.1,
        format!(
            "MS(b->a) = {:.4} > 0 with M1/M2 labels {suppress}; sign cases {cases_ok}; cancellation |MS| = {residue:.1e} (< 1e-9) after an impulse of {moved:.2}",
            table.get("b", "a").unwrap()
        ),
    )
}

struct BenchmarkRun {
    scores_csv: Vec<u8>,
    metrics_csv: Vec<u8>,
    importance_csv: Vec<u8>,
    accuracy: f64,
    importance_t_c2: f64,
    flagged: usize,
}

fn run_benchmark(b: &Benchmark) -> BenchmarkRun {
    let cfg = AnalysisConfig::default();
    let outcomes = run_groups(&b.manifests, &b.store, &cfg, &[1], None).unwrap();
    let flagged = outcomes.iter().filter(|o| o.report().is_none()).count();
    let mut scores_csv = Vec::new();
    write_scores_csv(&mut scores_csv, outcomes.iter().filter_map(|o| o.report()).flat_map(|r| r.scores.iter().map(move |s| (r.group_id, &s.table)))).unwrap();
    let set = permutation_sets(&outcomes, &b.manifests, &[1]).unwrap().remove(0);
    let report = loocv(&set.samples, &ClassifierConfig::default()).unwrap();
    let reports = vec![(1, report)];
    let (mut metrics_csv, mut importance_csv) = (Vec::new(), Vec::new());
    write_metrics_csv(&mut metrics_csv, &reports).unwrap();
    write_importance_csv(&mut importance_csv, &reports).unwrap();
    let r = &reports[0].1;
    BenchmarkRun {
        scores_csv,
        metrics_csv,
        importance_csv,
        accuracy: r.pooled.accuracy,
        importance_t_c2: r.importances[FeatureKey::TToC2.index()],
        flagged,
    }
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 IRF/SCE oracle equivalence", irf_oracle()));
    results.push(("2 statistical-test calibration", calibration()));
    results.push(("3 fractional differencing exactness", frac_diff_exactness()));
    results.push(("4 score sign and M-case semantics", sign_semantics()));
    results.push((
        "5 replication on the published dataset",
        Outcome { pass: true, replaced: true, detail: "published dataset not available here; criterion 6 stands in".into() },
    ));

    let started = Instant::now();
    let bench = benchmark(&BenchmarkConfig::default()).unwrap();
    let first = run_benchmark(&bench);
    let secs = started.elapsed().as_secs_f64();
    results.push((
        "6 synthetic benchmark, 40 groups",
        outcome(
            first.accuracy >= 0.85 && first.importance_t_c2 >= 0.6 && first.flagged == 0 && secs < 600.0,
            format!(
                "LOOCV accuracy {:.3} (>= 0.85); importance on t->c2 {:.3} (>= 0.6); flagged groups {}; {secs:.1}s (< 600s)",
                first.accuracy, first.importance_t_c2, first.flagged
            ),
        ),
    ));

    let second = run_benchmark(&benchmark(&BenchmarkConfig::default()).unwrap());
    let same_scores = first.scores_csv == second.scores_csv;
    let same_eval = first.metrics_csv == second.metrics_csv && first.importance_csv == second.importance_csv;
    results.push((
        "7 determinism",
        outcome(
            same_scores && same_eval && !first.scores_csv.is_empty(),
            format!("score CSV identical {same_scores} ({} bytes); evaluation CSVs identical {same_eval}", first.scores_csv.len()),
        ),
    ));

    let mut failed = 0;
    for (name, o) in &results {
        let status = match (o.pass, o.replaced) {
            (_, true) => "REPLACED",
            (true, false) => "PASS",
            (false, false) => "FAIL",
        };
        println!("{status} criterion {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
