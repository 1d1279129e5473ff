//! Heuristic nonnegative factorizations `A ≈ W H` in double precision.
//! A small residual is numerical evidence for an upper bound on the
//! nonnegative rank, never a proof.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Matrix;

/// Floor applied to multiplicative-update denominators.
const DENOM_FLOOR: f64 = 1e-15;

pub const DEFAULT_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NmfAlgorithm {
    MultiplicativeUpdates,
    Hals,
}

impl NmfAlgorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            NmfAlgorithm::MultiplicativeUpdates => "mu",
            NmfAlgorithm::Hals => "hals",
        }
    }
}

impl core::str::FromStr for NmfAlgorithm {
    type Err = NmfError;

    fn from_str(s: &str) -> Result<Self, NmfError> {
        match s {
            "mu" => Ok(NmfAlgorithm::MultiplicativeUpdates),
            "hals" => Ok(NmfAlgorithm::Hals),
            other => Err(NmfError::UnknownAlgorithm(other.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmfConfig {
    pub rank: usize,
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub algorithm: NmfAlgorithm,
    /// Stop when the relative residual changes by at most this fraction.
    pub tolerance: f64,
    /// Stop as soon as the relative residual drops to this value.
    pub target: f64,
}

impl Default for NmfConfig {
    fn default() -> Self {
        NmfConfig {
            rank: 1,
            max_iterations: 5000,
            restarts: 20,
            seed: 0x5eed,
            algorithm: NmfAlgorithm::Hals,
            tolerance: 0.0,
            target: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NmfError {
    EmptyInput,
    NegativeInput { row: usize, col: usize },
    NonFiniteInput { row: usize, col: usize },
    InvalidRank(usize),
    UnknownAlgorithm(alloc::string::String),
}

impl fmt::Display for NmfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NmfError::EmptyInput => write!(f, "matrix is empty"),
            NmfError::NegativeInput { row, col } => write!(f, "entry ({row}, {col}) is negative"),
            NmfError::NonFiniteInput { row, col } => write!(f, "entry ({row}, {col}) is not finite"),
            NmfError::InvalidRank(r) => write!(f, "target rank {r} must be at least 1"),
            NmfError::UnknownAlgorithm(s) => write!(f, "unknown algorithm '{s}' (expected mu or hals)"),
        }
    }
}

/// `W` is `n × r`, `H` is `r × m`, both row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub w: Vec<f64>,
    pub h: Vec<f64>,
    /// `‖A − WH‖_F / ‖A‖_F`.
    pub residual: f64,
    /// Residual after initialization and after every iteration.
    pub trace: Vec<f64>,
}

impl FactorPair {
    pub fn iterations(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }

    pub fn min_entry(&self) -> f64 {
        self.w.iter().chain(&self.h).copied().fold(f64::INFINITY, f64::min)
    }

    pub fn product(&self) -> Matrix<f64> {
        Matrix::from_fn(self.n, self.m, |i, j| (0..self.r).map(|s| self.w[i * self.r + s] * self.h[s * self.m + j]).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartSummary {
    pub restart: usize,
    pub iterations: usize,
    pub residual: f64,
    /// Continued from the previous rank's best factors.
    pub warm: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmfResult {
    pub best: FactorPair,
    pub restarts: Vec<RestartSummary>,
    /// Restarts abandoned because an iterate became non-finite.
    pub non_finite: usize,
}

struct Dense<'a> {
    a: &'a [f64],
    n: usize,
    m: usize,
    norm: f64,
}

impl Dense<'_> {
    fn residual(&self, w: &[f64], h: &[f64], r: usize) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.m {
                let mut p = 0.0;
                for k in 0..r {
                    p += w[i * r + k] * h[k * self.m + j];
                }
                let d = self.a[i * self.m + j] - p;
                s += d * d;
            }
        }
        if self.norm == 0.0 {
            libm::sqrt(s)
        } else {
            libm::sqrt(s) / self.norm
        }
    }
}

/// `Xᵀ Y` for `X` (`p × a`) and `Y` (`p × b`).
fn at_b(x: &[f64], y: &[f64], p: usize, a: usize, b: usize) -> Vec<f64> {
    let mut out = vec![0.0; a * b];
    for t in 0..p {
        for i in 0..a {
            let xi = x[t * a + i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..b {
                out[i * b + j] += xi * y[t * b + j];
            }
        }
    }
    out
}

/// `X Y` for `X` (`a × p`) and `Y` (`p × b`).
fn a_b(x: &[f64], y: &[f64], a: usize, p: usize, b: usize) -> Vec<f64> {
    let mut out = vec![0.0; a * b];
    for i in 0..a {
        for t in 0..p {
            let xi = x[i * p + t];
            if xi == 0.0 {
                continue;
            }
            for j in 0..b {
                out[i * b + j] += xi * y[t * b + j];
            }
        }
    }
    out
}

/// `X Yᵀ` for `X` (`a × p`) and `Y` (`b × p`).
fn a_bt(x: &[f64], y: &[f64], a: usize, p: usize, b: usize) -> Vec<f64> {
    let mut out = vec![0.0; a * b];
    for i in 0..a {
        for j in 0..b {
            out[i * b + j] = (0..p).map(|t| x[i * p + t] * y[j * p + t]).sum();
        }
    }
    out
}

fn transpose(x: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = x[i * cols + j];
        }
    }
    out
}

fn mu_step(d: &Dense<'_>, w: &mut [f64], h: &mut [f64], r: usize) {
    let (n, m) = (d.n, d.m);
    // H ← H ⊙ WᵀA / WᵀWH
    let wta = at_b(w, d.a, n, r, m);
    let wtw = at_b(w, w, n, r, r);
    let wtwh = a_b(&wtw, h, r, r, m);
    for i in 0..r * m {
        h[i] *= wta[i] / wtwh[i].max(DENOM_FLOOR);
    }
    // W ← W ⊙ AHᵀ / WHHᵀ
    let aht = a_bt(d.a, h, n, m, r);
    let hht = a_bt(h, h, r, m, r);
    let whht = a_b(w, &hht, n, r, r);
    for i in 0..n * r {
        w[i] *= aht[i] / whht[i].max(DENOM_FLOOR);
    }
}

/// One sweep of exact nonnegative least squares on each column of `x`
/// (`rows × r`), where the objective is `‖T − x Gᵀ‖` summarized by
/// `c = T G` (`rows × r`) and `gram = GᵀG` (`r × r`).
fn hals_block(x: &mut [f64], c: &[f64], gram: &[f64], rows: usize, r: usize) {
    for j in 0..r {
        let g = gram[j * r + j];
        if g <= 0.0 {
            continue;
        }
        for i in 0..rows {
            let mut xg = 0.0;
            for s in 0..r {
                xg += x[i * r + s] * gram[s * r + j];
            }
            let v = x[i * r + j] + (c[i * r + j] - xg) / g;
            x[i * r + j] = if v > 0.0 { v } else { 0.0 };
        }
    }
}

fn hals_step(d: &Dense<'_>, w: &mut [f64], h: &mut [f64], r: usize) {
    let (n, m) = (d.n, d.m);
    let aht = a_bt(d.a, h, n, m, r);
    let hht = a_bt(h, h, r, m, r);
    hals_block(w, &aht, &hht, n, r);
    // Hᵀ (m × r) against Aᵀ W and WᵀW
    let mut ht = transpose(h, r, m);
    let atw = at_b(d.a, w, n, m, r);
    let wtw = at_b(w, w, n, r, r);
    hals_block(&mut ht, &atw, &wtw, m, r);
    h.copy_from_slice(&transpose(&ht, m, r));
}

fn all_finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

fn random_factors(rng: &mut ChaCha8Rng, n: usize, m: usize, r: usize, scale: f64, floor: f64) -> (Vec<f64>, Vec<f64>) {
    // uniform on (0, 1]
    let mut draw = || (1.0 - rng.gen::<f64>()).max(floor) * scale;
    let w = (0..n * r).map(|_| draw()).collect();
    let h = (0..r * m).map(|_| draw()).collect();
    (w, h)
}

fn iterate(d: &Dense<'_>, mut w: Vec<f64>, mut h: Vec<f64>, r: usize, cfg: &NmfConfig) -> Option<FactorPair> {
    let mut res = d.residual(&w, &h, r);
    let mut trace = vec![res];
    for _ in 0..cfg.max_iterations {
        if res <= cfg.target {
            break;
        }
        match cfg.algorithm {
            NmfAlgorithm::MultiplicativeUpdates => mu_step(d, &mut w, &mut h, r),
            NmfAlgorithm::Hals => hals_step(d, &mut w, &mut h, r),
        }
        if !all_finite(&w) || !all_finite(&h) {
            return None;
        }
        let next = d.residual(&w, &h, r);
        trace.push(next);
        let change = (res - next).abs();
        res = next;
        if change <= cfg.tolerance * res.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Some(FactorPair { n: d.n, m: d.m, r, w, h, residual: res, trace })
}

fn validate(a: &Matrix<f64>) -> Result<Vec<f64>, NmfError> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(NmfError::EmptyInput);
    }
    let mut data = Vec::with_capacity(a.rows() * a.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let v = *a.get(i, j);
            if !v.is_finite() {
                return Err(NmfError::NonFiniteInput { row: i, col: j });
            }
            if v < 0.0 {
                return Err(NmfError::NegativeInput { row: i, col: j });
            }
            data.push(v);
        }
    }
    Ok(data)
}

fn restart_rng(seed: u64, r: usize, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((r as u64) << 32) | restart as u64);
    rng
}

fn run_inner(
    d: &Dense<'_>,
    cfg: &NmfConfig,
    warm: Option<(Vec<f64>, Vec<f64>)>,
) -> Result<NmfResult, NmfError> {
    let r = cfg.rank;
    if r == 0 {
        return Err(NmfError::InvalidRank(0));
    }
    let mean = d.a.iter().sum::<f64>() / d.a.len() as f64;
    let scale = libm::sqrt(mean / r as f64);
    let mut best: Option<FactorPair> = None;
    let mut summaries = Vec::new();
    let mut non_finite = 0;
    let mut consider = |fp: FactorPair, restart: usize, warm: bool, best: &mut Option<FactorPair>| {
        summaries.push(RestartSummary { restart, iterations: fp.iterations(), residual: fp.residual, warm });
        if best.as_ref().is_none_or(|b| fp.residual < b.residual) {
            *best = Some(fp);
        }
    };
    if let Some((w, h)) = warm {
        if let Some(fp) = iterate(d, w, h, r, cfg) {
            consider(fp, 0, true, &mut best);
        }
    }
    for restart in 0..cfg.restarts {
        let mut rng = restart_rng(cfg.seed, r, restart);
        let (w, h) = random_factors(&mut rng, d.n, d.m, r, scale, 0.0);
        let fp = match iterate(d, w, h, r, cfg) {
            Some(fp) => fp,
            None => {
                non_finite += 1;
                let (w, h) = random_factors(&mut rng, d.n, d.m, r, scale.max(DENOM_FLOOR), DENOM_FLOOR);
                match iterate(d, w, h, r, cfg) {
                    Some(fp) => fp,
                    None => {
                        non_finite += 1;
                        continue;
                    }
                }
            }
        };
        consider(fp, restart, false, &mut best);
    }
    let best = best.unwrap_or_else(|| {
        let (w, h) = (vec![0.0; d.n * r], vec![0.0; r * d.m]);
        let residual = d.residual(&w, &h, r);
        FactorPair { n: d.n, m: d.m, r, w, h, residual, trace: vec![residual] }
    });
    Ok(NmfResult { best, restarts: summaries, non_finite })
}

/// Best factorization at inner dimension `cfg.rank` over `cfg.restarts`
/// seeded random starts. Each restart has its own stream derived from the
/// seed, the rank and the restart index.
pub fn nmf_run(a: &Matrix<f64>, cfg: &NmfConfig) -> Result<NmfResult, NmfError> {
    let data = validate(a)?;
    let d = dense(&data, a);
    run_inner(&d, cfg, None)
}

fn dense<'a>(data: &'a [f64], a: &Matrix<f64>) -> Dense<'a> {
    Dense { a: data, n: a.rows(), m: a.cols(), norm: libm::sqrt(data.iter().map(|x| x * x).sum()) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbePoint {
    pub r: usize,
    pub best_residual: f64,
    pub restarts: Vec<RestartSummary>,
    pub non_finite: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub curve: Vec<ProbePoint>,
    pub threshold: f64,
    /// Smallest `r` whose best residual is at most the threshold.
    pub threshold_rank: Option<usize>,
}

impl ProbeResult {
    pub fn threshold_residual(&self) -> Option<f64> {
        let r = self.threshold_rank?;
        self.curve.iter().find(|p| p.r == r).map(|p| p.best_residual)
    }
}

/// Runs `r = 1..=r_max`. Each rank also continues from the previous rank's
/// best factors with a zero column appended to `W` and a fresh random row
/// appended to `H`, so the best residual never increases with `r` for MU
/// and HALS alike.
pub fn upper_bound_probe(a: &Matrix<f64>, r_max: usize, template: &NmfConfig, threshold: f64) -> Result<ProbeResult, NmfError> {
    let data = validate(a)?;
    let d = dense(&data, a);
    let mut curve = Vec::new();
    let mut prev: Option<FactorPair> = None;
    for r in 1..=r_max {
        let cfg = NmfConfig { rank: r, ..template.clone() };
        let warm = prev.as_ref().map(|p| {
            let mut w = vec![0.0; d.n * r];
            for i in 0..d.n {
                w[i * r..i * r + r - 1].copy_from_slice(&p.w[i * (r - 1)..(i + 1) * (r - 1)]);
            }
            let mut h = p.h.clone();
            let mut rng = restart_rng(cfg.seed, r, usize::from(u16::MAX));
            let scale = libm::sqrt(data.iter().sum::<f64>() / data.len() as f64 / r as f64);
            h.extend((0..d.m).map(|_| (1.0 - rng.gen::<f64>()) * scale));
            (w, h)
        });
        let res = run_inner(&d, &cfg, warm)?;
        curve.push(ProbePoint {
            r,
            best_residual: res.best.residual,
            restarts: res.restarts,
            non_finite: res.non_finite,
        });
        prev = Some(res.best);
    }
    let threshold_rank = curve.iter().find(|p| p.best_residual <= threshold).map(|p| p.r);
    Ok(ProbeResult { curve, threshold, threshold_rank })
}
