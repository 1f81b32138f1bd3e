use chrono::{Duration, FixedOffset, NaiveDate, TimeZone, Utc};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use miao_core::classify::{class_weights, fit_tree, loocv, FeatureVector};
use miao_core::config::ClassifierConfig;
use miao_core::ingest::{aggregate_daily, validate_group, ActivitySeries, CommitRecord, GroupManifest, GroupValidation, SeriesStore};
use miao_core::irf::{impulse_response, vma_coefficients};
use miao_core::pipeline::{m_case, MCase, ScoreTable, Stage};
use miao_core::prep::{adf_test, min_stationary_d, StationarityConfig};
use miao_core::synth::{analytic_irf, generate, SynthSpec};
use miao_core::var::{best_lag, fit_var_ols, identify_svar, ljung_box_lags, select_lag, LagCandidate, LagSearchConfig, VarModel};

fn day0() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 1).unwrap()
}

fn normals(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn spd3() -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-2.0f64..2.0, 9).prop_map(|v| {
        let m = DMatrix::from_vec(3, 3, v);
        &m * m.transpose() + DMatrix::identity(3, 3) * 0.1
    })
}

fn ordering() -> impl Strategy<Value = Vec<usize>> {
    Just(vec![0usize, 1, 2]).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn daily_counts_conserve_commits(offsets in proptest::collection::vec(-2_000i64..12_000, 0..100), span in 1i64..10) {
        let start = day0();
        let end = start + Duration::days(span - 1);
        let base = Utc.from_utc_datetime(&start.and_hms_opt(0, 0, 0).unwrap());
        let records: Vec<CommitRecord> = offsets
            .iter()
            .map(|m| CommitRecord { author: "a".into(), timestamp: (base + Duration::minutes(*m)).fixed_offset() })
            .collect();
        let s = aggregate_daily("p", &records, start, end, FixedOffset::east_opt(0).unwrap()).unwrap();
        let inside = records.iter().filter(|r| { let d = r.timestamp.date_naive(); d >= start && d <= end }).count() as u64;
        prop_assert_eq!(s.total(), inside);
        prop_assert_eq!(s.len() as i64, span);
    }

    #[test]
    fn validated_competitors_are_ordered(a in proptest::collection::vec(0u32..5, 400), b in proptest::collection::vec(0u32..5, 400)) {
        let mut store = SeriesStore::new();
        store.insert(ActivitySeries::new("t", day0(), vec![1; 400]).unwrap());
        store.insert(ActivitySeries::new("x", day0(), a).unwrap());
        store.insert(ActivitySeries::new("y", day0(), b).unwrap());
        let m = GroupManifest {
            group_id: 1, target: "t".into(), competitor1: "x".into(), competitor2: "y".into(), rev: false,
            start_date: day0(), end_date: day0() + Duration::days(399), split_count: 1, data_horizon: None,
        };
        match validate_group(&m, &store).unwrap() {
            GroupValidation::Accepted(v) => {
                let t1 = store.get(&v.manifest.competitor1).unwrap().total();
                let t2 = store.get(&v.manifest.competitor2).unwrap().total();
                prop_assert!(t1 >= t2);
            }
            GroupValidation::Rejected { .. } => prop_assert!(false, "full overlap rejected"),
        }
    }

    #[test]
    fn best_lag_respects_whiteness(cands in proptest::collection::vec((-50.0f64..50.0, 0.0f64..1.0), 1..15), alpha in 0.01f64..0.5) {
        let hist: Vec<LagCandidate> = cands.iter().enumerate().map(|(i, (ic, p))| LagCandidate { ic_value: *ic, lag: i + 1, whiteness_p: *p }).collect();
        let sel = best_lag(hist.clone(), alpha).unwrap();
        let chosen = hist.iter().find(|c| c.lag == sel.chosen).unwrap();
        if hist.iter().any(|c| c.whiteness_p >= alpha) {
            prop_assert!(!sel.degraded);
            prop_assert!(chosen.whiteness_p >= alpha);
            prop_assert!(hist.iter().filter(|c| c.whiteness_p >= alpha).all(|c| c.ic_value >= chosen.ic_value));
        } else {
            prop_assert!(sel.degraded);
        }
    }

    #[test]
    fn recursive_zeros_on_impact(cov in spd3(), ord in ordering()) {
        let var = VarModel::from_coefficients(vec![DMatrix::from_element(3, 3, 0.1)], DVector::zeros(3), cov).unwrap();
        let irf = impulse_response(&identify_svar(var, &ord).unwrap(), 3);
        for (pi, &i) in ord.iter().enumerate() {
            for &j in &ord[pi + 1..] {
                // i comes before j, so j's shock cannot move i on impact
                prop_assert!(irf.get(i, j, 0).abs() < 1e-12);
            }
            prop_assert!((irf.get(i, i, 0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn vma_terms_decay_geometrically(seed in 0u64..1000, p in 1usize..4, radius in 0.2f64..0.9) {
        let spec = SynthSpec::random_stable(3, p, radius, 10, seed);
        let psi = vma_coefficients(&spec.coeff_matrices().unwrap(), 400);
        let scale = psi.iter().take(20).map(|m| m.abs().max()).fold(1.0, f64::max);
        prop_assert!(psi[400].abs().max() <= 1e-6 * scale);
        prop_assert!(psi[300].abs().max() <= psi[100].abs().max() + 1e-15);
    }

    #[test]
    fn m_case_follows_signs(a in -5.0f64..5.0, b in -5.0f64..5.0, alpha in 0.01f64..100.0) {
        let (case, d) = m_case(a, b);
        let expected = if a > 0.0 && b <= 0.0 { MCase::M1 }
            else if a <= 0.0 && b > 0.0 { MCase::M2 }
            else if a >= 0.0 && b >= 0.0 { MCase::M3 }
            else { MCase::M4 };
        prop_assert_eq!(case, expected);
        prop_assert_eq!(d, (a - b).abs());
        prop_assert_eq!(m_case(alpha * a, alpha * b).0, case);
    }

    #[test]
    fn shift_average_divides_by_computed_shifts(vals in proptest::collection::vec(-10.0f64..10.0, 1..5)) {
        let names: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let tables: Vec<ScoreTable> = vals.iter().map(|v| ScoreTable::from_matrix(&names, &DMatrix::from_element(3, 3, *v), Stage::RawMs).unwrap()).collect();
        let avg = ScoreTable::average_shifts(&tables).unwrap();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        prop_assert!((avg.get("a", "b").unwrap() - mean).abs() < 1e-12);
        // each stage advances once
        prop_assert!(ScoreTable::average_shifts(std::slice::from_ref(&avg)).is_err());
        let norm = ScoreTable::integrate_splits(std::slice::from_ref(&avg), 2).unwrap();
        prop_assert!(ScoreTable::integrate_splits(std::slice::from_ref(&norm), 2).is_err());
        prop_assert!(ScoreTable::average_shifts(std::slice::from_ref(&norm)).is_err());
    }

    #[test]
    fn tree_respects_monotone_rescaling(rows in proptest::collection::vec((proptest::array::uniform6(-3.0f64..3.0), any::<bool>()), 8..40), f in 0usize..6) {
        prop_assume!(rows.iter().any(|r| r.1) && rows.iter().any(|r| !r.1));
        let x: Vec<[f64; 6]> = rows.iter().map(|r| r.0).collect();
        let y: Vec<bool> = rows.iter().map(|r| r.1).collect();
        let w = class_weights(&y).unwrap();
        let cfg = ClassifierConfig::default();
        let tree = fit_tree(&x, &y, &w, &cfg).unwrap();
        prop_assert_eq!(&tree, &fit_tree(&x, &y, &w, &cfg).unwrap());
        let sum: f64 = tree.importances.iter().sum();
        prop_assert!(sum == 0.0 || (sum - 1.0).abs() < 1e-9);
        prop_assert!(tree.depth() <= cfg.max_depth);
        let warped: Vec<[f64; 6]> = x.iter().map(|r| { let mut r = *r; r[f] = r[f].powi(3) + r[f]; r }).collect();
        let tree2 = fit_tree(&warped, &y, &w, &cfg).unwrap();
        for (a, b) in x.iter().zip(&warped) {
            prop_assert_eq!(tree.predict(a), tree2.predict(b));
        }
        prop_assert_eq!(tree.importances, tree2.importances);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn stationarity_contract(seed in 0u64..10_000, drift in 0.0f64..0.05) {
        let mut level = 0.0;
        let x: Vec<f64> = normals(seed, 800).into_iter().map(|e| { level += drift + e; level }).collect();
        let cfg = StationarityConfig::default();
        let s = min_stationary_d(&x, &cfg).unwrap();
        if !s.exhausted {
            prop_assert!(adf_test(&s.values).unwrap().p_value < cfg.significance);
        }
        prop_assert_eq!(s.values.len() + s.warm_up, x.len());
    }

    #[test]
    fn lag_search_bounds_and_determinism(seed in 0u64..10_000, max_lag in 1usize..16) {
        let spec = SynthSpec::random_stable(3, 2, 0.6, 400, seed);
        let data = generate(&spec).unwrap();
        let cfg = LagSearchConfig { max_lag, ..Default::default() };
        let s = select_lag(&data, &cfg).unwrap();
        prop_assert!((1..=max_lag).contains(&s.selection.chosen));
        prop_assert!((10..=30).contains(&ljung_box_lags(s.selection.chosen)));
        let a = fit_var_ols(&data, s.selection.chosen).unwrap();
        let b = fit_var_ols(&data, s.selection.chosen).unwrap();
        prop_assert_eq!(a.coeffs, b.coeffs);
        prop_assert_eq!(a.resid_cov, b.resid_cov);
    }

    #[test]
    fn loocv_ignores_sample_order(seed in 0u64..1000, rot in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<FeatureVector> = (0..20u32)
            .map(|i| {
                let values = [(); 6].map(|_| StandardNormal.sample(&mut rng));
                FeatureVector { group_id: i, rev: values[3] + 0.5 * values[0] > 0.0 || i < 2, values }
            })
            .collect();
        prop_assume!(data.iter().any(|s| !s.rev));
        let a = loocv(&data, &ClassifierConfig::default()).unwrap();
        let mut moved = data.clone();
        moved.rotate_left(rot);
        let b = loocv(&moved, &ClassifierConfig::default()).unwrap();
        let mut pa: Vec<(u32, bool)> = a.group_ids.iter().copied().zip(a.predictions.iter().copied()).collect();
        let mut pb: Vec<(u32, bool)> = b.group_ids.iter().copied().zip(b.predictions.iter().copied()).collect();
        pa.sort();
        pb.sort();
        prop_assert_eq!(pa, pb);
        prop_assert_eq!(a.pooled, b.pooled);
    }
}

fn mean_irf_error(length: usize) -> f64 {
    let seeds = 0..6u64;
    let n = seeds.clone().count() as f64;
    seeds
        .map(|seed| {
            let spec = SynthSpec::random_stable(3, 1, 0.6, length, 40 + seed);
            let data = generate(&spec).unwrap();
            let svar = identify_svar(fit_var_ols(&data, 1).unwrap(), &[0, 1, 2]).unwrap();
            impulse_response(&svar, 10).max_abs_diff(&analytic_irf(&spec, 10).unwrap())
        })
        .sum::<f64>()
        / n
}

#[test]
fn estimates_converge_with_sample_size() {
    let (e500, e1000, e4000, e8000) = (mean_irf_error(500), mean_irf_error(1000), mean_irf_error(4000), mean_irf_error(8000));
    assert!(e4000 < e500, "{e4000} vs {e500}");
    assert!(e8000 < e1000, "{e8000} vs {e1000}");
}

#[test]
fn walks_give_larger_adf_statistics() {
    let batch = |walk: bool| {
        (0..40u64)
            .map(|s| {
                let e = normals(700 + s, 500);
                let x: Vec<f64> = if walk { e.iter().scan(0.0, |a, v| { *a += v; Some(*a) }).collect() } else { e };
                adf_test(&x).unwrap().statistic
            })
            .sum::<f64>()
            / 40.0
    };
    assert!(batch(true) > batch(false) + 3.0);
}
