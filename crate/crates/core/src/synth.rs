//! Seeded synthetic SVAR data and the exact responses it implies.
//!
//! A spec file is JSON with matrices written as arrays of rows:
//!
//! ```json
//! {
//!   "n": 2, "lag": 1,
//!   "coeffs": [[[0.5, 0.0], [0.2, 0.3]]],
//!   "b0_inv": [[1.0, 0.0], [0.4, 1.0]],
//!   "shock_scale": [1.0, 2.0],
//!   "length": 1461, "seed": 7
//! }
//! ```
//!
//! Optional keys: `intercept`, `burn_in` (500), `trend` and `weekly`
//! (per-series slope per step and amplitude of a 7-step sine),
//! `integer_offset` (add, round, clamp at zero) and `stable` (true).

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{MiaoError, Result};
use crate::ingest::{ActivitySeries, GroupManifest, SeriesStore};
use crate::irf::{impulse_response_from, sce_from, IrfTensor, SceMatrix};
use crate::linalg::spectral_radius;
use crate::var::ShockSize;

pub const DEFAULT_BURN_IN: usize = 500;

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub lag: usize,
    /// `coeffs[i]` is `A_{i+1}`, row-major.
    pub coeffs: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intercept: Option<Vec<f64>>,
    /// Lower triangular with unit diagonal.
    pub b0_inv: Vec<Vec<f64>>,
    pub shock_scale: Vec<f64>,
    pub length: usize,
    pub seed: u64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trend: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weekly: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integer_offset: Option<f64>,
    #[serde(default = "default_true")]
    pub stable: bool,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix_of(rows: &[Vec<f64>], n: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(MiaoError::Dimension(format!("{what} must be {n}×{n}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl SynthSpec {
    pub fn new(coeffs: Vec<DMatrix<f64>>, b0_inv: DMatrix<f64>, shock_scale: Vec<f64>, length: usize, seed: u64) -> Self {
        Self {
            n: b0_inv.nrows(),
            lag: coeffs.len(),
            coeffs: coeffs.iter().map(rows_of).collect(),
            intercept: None,
            b0_inv: rows_of(&b0_inv),
            shock_scale,
            length,
            seed,
            burn_in: DEFAULT_BURN_IN,
            trend: None,
            weekly: None,
            integer_offset: None,
            stable: true,
        }
    }

    /// VAR(1) with independent unit shocks.
    pub fn var1(a: DMatrix<f64>, length: usize, seed: u64) -> Self {
        let n = a.nrows();
        Self::new(vec![a], DMatrix::identity(n, n), vec![1.0; n], length, seed)
    }

    /// Random stable spec: dense lag matrices rescaled so the companion
    /// radius equals `radius`, a random unit lower-triangular impact matrix
    /// and shock scales in `[0.5, 2)`.
    pub fn random_stable(n: usize, lag: usize, radius: f64, length: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
        let mut coeffs: Vec<DMatrix<f64>> = (0..lag)
            .map(|_| DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        let current = spectral_radius(&companion(&coeffs, n));
        if current > 0.0 {
            // scaling A_i by c^i scales every companion eigenvalue by c
            let c = radius / current;
            for (i, a) in coeffs.iter_mut().enumerate() {
                *a *= c.powi(i as i32 + 1);
            }
        }
        let b0_inv = DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Greater => rng.random_range(-0.6..0.6),
            std::cmp::Ordering::Less => 0.0,
        });
        let scale = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        Self::new(coeffs, b0_inv, scale, length, seed)
    }

    pub fn coeff_matrices(&self) -> Result<Vec<DMatrix<f64>>> {
        self.coeffs.iter().map(|a| matrix_of(a, self.n, "lag matrix")).collect()
    }

    pub fn b0_inv_matrix(&self) -> Result<DMatrix<f64>> {
        matrix_of(&self.b0_inv, self.n, "b0_inv")
    }

    /// `B₀⁻¹` for unit shocks, `B₀⁻¹ diag(scale)` for standard-deviation shocks.
    pub fn impact(&self, size: ShockSize) -> Result<DMatrix<f64>> {
        let b = self.b0_inv_matrix()?;
        Ok(match size {
            ShockSize::Unit => b,
            ShockSize::StdDev => b * DMatrix::from_diagonal(&DVector::from_column_slice(&self.shock_scale)),
        })
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        let coeffs = self.coeff_matrices()?;
        Ok(if coeffs.is_empty() { 0.0 } else { spectral_radius(&companion(&coeffs, self.n)) })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(MiaoError::Invalid("spec has no variables".into()));
        }
        if self.coeffs.len() != self.lag {
            return Err(MiaoError::Dimension(format!("lag {} but {} lag matrices", self.lag, self.coeffs.len())));
        }
        let b = self.b0_inv_matrix()?;
        for i in 0..n {
            if b[(i, i)] != 1.0 || (i + 1..n).any(|j| b[(i, j)] != 0.0) {
                return Err(MiaoError::Invalid("b0_inv must be lower triangular with unit diagonal".into()));
            }
        }
        let per_series = [("shock_scale", Some(&self.shock_scale)), ("intercept", self.intercept.as_ref()), ("trend", self.trend.as_ref()), ("weekly", self.weekly.as_ref())];
        for (name, v) in per_series {
            if let Some(v) = v {
                if v.len() != n {
                    return Err(MiaoError::Dimension(format!("{name} needs {n} entries")));
                }
            }
        }
        if self.shock_scale.iter().any(|s| !(*s > 0.0)) {
            return Err(MiaoError::Invalid("shock scales must be positive".into()));
        }
        if self.stable {
            let r = self.spectral_radius()?;
            if r >= 1.0 {
                return Err(MiaoError::Invalid(format!("spec flagged stable but companion radius is {r:.6}")));
            }
        }
        Ok(())
    }
}

fn companion(coeffs: &[DMatrix<f64>], n: usize) -> DMatrix<f64> {
    let p = coeffs.len().max(1);
    let mut c = DMatrix::zeros(n * p, n * p);
    for (i, a) in coeffs.iter().enumerate() {
        c.view_mut((0, i * n), (n, n)).copy_from(a);
    }
    for i in n..n * p {
        c[(i, i - n)] = 1.0;
    }
    c
}

/// Simulates `length × n` observations from a zero initial state,
/// discarding the burn-in.
pub fn generate(spec: &SynthSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let n = spec.n;
    let coeffs = spec.coeff_matrices()?;
    let impact = spec.impact(ShockSize::StdDev)?;
    let intercept = spec.intercept.clone().map(DVector::from_vec).unwrap_or_else(|| DVector::zeros(n));
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let total = spec.burn_in + spec.length;
    let mut hist: Vec<DVector<f64>> = Vec::with_capacity(total);
    let mut out = DMatrix::zeros(spec.length, n);
    for t in 0..total {
        let eps = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut y = &intercept + &impact * eps;
        for (i, a) in coeffs.iter().enumerate() {
            if t > i {
                y += a * &hist[t - i - 1];
            }
        }
        if t >= spec.burn_in {
            out.row_mut(t - spec.burn_in).copy_from(&y.transpose());
        }
        hist.push(y);
    }
    for t in 0..spec.length {
        let tf = t as f64;
        for j in 0..n {
            let mut v = out[(t, j)];
            if let Some(tr) = &spec.trend {
                v += tr[j] * tf;
            }
            if let Some(w) = &spec.weekly {
                v += w[j] * (2.0 * std::f64::consts::PI * tf / 7.0).sin();
            }
            if let Some(off) = spec.integer_offset {
                v = (v + off).round().max(0.0);
            }
            out[(t, j)] = v;
        }
    }
    Ok(out)
}

/// Generated data as daily count series starting at `start`.
///
/// Requires `integer_offset` so every value is a non-negative integer.
pub fn generate_series(spec: &SynthSpec, project_ids: &[&str], start: NaiveDate) -> Result<Vec<ActivitySeries>> {
    if spec.integer_offset.is_none() {
        return Err(MiaoError::Invalid("count series need an integer_offset".into()));
    }
    if project_ids.len() != spec.n {
        return Err(MiaoError::Dimension(format!("{} project ids for {} variables", project_ids.len(), spec.n)));
    }
    let data = generate(spec)?;
    project_ids
        .iter()
        .enumerate()
        .map(|(j, id)| {
            let counts = data.column(j).iter().map(|v| v.min(u32::MAX as f64) as u32).collect();
            ActivitySeries::new(*id, start, counts)
        })
        .collect()
}

/// Exact impulse responses of the spec to unit structural shocks.
pub fn analytic_irf(spec: &SynthSpec, horizon: usize) -> Result<IrfTensor<f64>> {
    analytic_irf_sized(spec, horizon, ShockSize::Unit)
}

pub fn analytic_irf_sized(spec: &SynthSpec, horizon: usize, size: ShockSize) -> Result<IrfTensor<f64>> {
    Ok(impulse_response_from(&spec.coeff_matrices()?, &spec.impact(size)?, horizon))
}

pub fn analytic_sce(spec: &SynthSpec) -> Result<SceMatrix<f64>> {
    analytic_sce_sized(spec, ShockSize::Unit)
}

pub fn analytic_sce_sized(spec: &SynthSpec, size: ShockSize) -> Result<SceMatrix<f64>> {
    sce_from(&spec.coeff_matrices()?, &spec.impact(size)?)
}

/// Parameters of a labelled benchmark of synthetic groups.
///
/// REV-like groups carry a lasting negative effect of the target on
/// competitor 2 (`A[c2, t] < 0`); every group also gets weak random
/// coupling between all pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub rev_groups: usize,
    pub neutral_groups: usize,
    /// Range of the engineered suppression coefficient's magnitude.
    pub suppression: (f64, f64),
    /// Bound on the random background coupling.
    pub coupling: f64,
    pub years: u32,
    /// Days of data past the group end, so period shifts fit.
    pub tail_days: i64,
    pub start: NaiveDate,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            rev_groups: 20,
            neutral_groups: 20,
            suppression: (0.25, 0.5),
            coupling: 0.08,
            years: 4,
            tail_days: 91,
            start: NaiveDate::from_ymd_opt(2016, 1, 1).expect("valid date"),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub manifests: Vec<GroupManifest>,
    pub store: SeriesStore,
    /// Generating spec per group, in manifest order.
    pub specs: Vec<SynthSpec>,
}

/// Mean activity of target, competitor 1 and competitor 2.
const BENCHMARK_MEANS: [f64; 3] = [60.0, 120.0, 80.0];

/// Groups alternate REV-like and neutral until one kind runs out.
pub fn benchmark(cfg: &BenchmarkConfig) -> Result<Benchmark> {
    let (lo, hi) = cfg.suppression;
    if !(0.0 <= lo && lo <= hi) || cfg.coupling < 0.0 || cfg.years == 0 || cfg.tail_days < 0 {
        return Err(MiaoError::Invalid("bad benchmark parameters".into()));
    }
    let total = cfg.rev_groups + cfg.neutral_groups;
    let mut labels = Vec::with_capacity(total);
    let (mut r, mut n) = (cfg.rev_groups, cfg.neutral_groups);
    while r + n > 0 {
        if r > 0 && (n == 0 || labels.last() != Some(&true)) {
            labels.push(true);
            r -= 1;
        } else {
            labels.push(false);
            n -= 1;
        }
    }
    let end = crate::pipeline::add_years(cfg.start, cfg.years) - chrono::Duration::days(1);
    let length = ((end - cfg.start).num_days() + 1 + cfg.tail_days) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut manifests = Vec::with_capacity(total);
    let mut store = SeriesStore::new();
    let mut specs = Vec::with_capacity(total);
    for (k, rev) in labels.into_iter().enumerate() {
        let gid = k as u32 + 1;
        let mut a = DMatrix::from_fn(3, 3, |i, j| if i == j { rng.random_range(0.3..0.6) } else { rng.random_range(-cfg.coupling..=cfg.coupling) });
        if rev {
            a[(2, 0)] = -rng.random_range(lo..=hi);
        }
        let b0_inv = DMatrix::from_fn(3, 3, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Greater => rng.random_range(-0.2..0.2),
            std::cmp::Ordering::Less => 0.0,
        });
        let scale: Vec<f64> = (0..3).map(|_| rng.random_range(4.0..7.0)).collect();
        let mu = DVector::from_row_slice(&BENCHMARK_MEANS);
        let intercept = (DMatrix::identity(3, 3) - &a) * mu;
        let mut spec = SynthSpec::new(vec![a], b0_inv, scale, length, cfg.seed.wrapping_mul(1000).wrapping_add(gid as u64));
        spec.intercept = Some(intercept.iter().copied().collect());
        spec.integer_offset = Some(0.0);
        spec.validate()?;
        let ids = [format!("g{gid}_t"), format!("g{gid}_c1"), format!("g{gid}_c2")];
        let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        for s in generate_series(&spec, &id_refs, cfg.start)? {
            store.insert(s);
        }
        let [t, c1, c2] = ids;
        manifests.push(GroupManifest {
            group_id: gid,
            target: t,
            competitor1: c1,
            competitor2: c2,
            rev,
            start_date: cfg.start,
            end_date: end,
            split_count: cfg.years.div_ceil(4),
            data_horizon: None,
        });
        specs.push(spec);
    }
    Ok(Benchmark { manifests, store, specs })
}
