//! Random-walk simulation and data-driven transfer-operator estimation with
//! indicator (one-hot) features.
//!
//! From `m` pairs `(x, y)` of start and end vertices the Gram matrices are
//!
//! ```text
//! [C_xx]_ii = #{x = i} / m    [C_xy]_ij = #{x = i, y = j} / m    [C_yy]_jj = #{y = j} / m
//! ```
//!
//! and the estimators are `K = C_xx^+ C_xy`, `P = C_xx^+ C_yx` and
//! `F = C_xx^+ C_xy C_yy^+ C_yx`. With uniformly sampled starts they converge
//! to `P`, `P^T` and `Q` respectively.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{forward_backward_matrix, product, StochasticMatrix};
use crate::sparse::CsrMatrix;
use crate::spectral::{top_eigs_symmetric, EigenOptions};

/// Start/end pairs of simulated walkers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkDataset {
    pub n: usize,
    #[serde(skip)]
    pub pairs: Vec<(usize, usize)>,
    pub walk_length: usize,
    pub seed: u64,
    pub schedule_id: String,
    /// Pairs are consecutive states of one long trajectory started in
    /// equilibrium rather than independent walkers.
    #[serde(default)]
    pub equilibrated: bool,
    /// Full vertex sequences, kept only when requested.
    #[serde(skip)]
    pub trajectories: Option<Vec<Vec<usize>>>,
}

impl WalkDataset {
    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(Error::InvalidArgument("a walk dataset needs at least one pair".into()));
        }
        if let Some(&(x, y)) = self.pairs.iter().find(|&&(x, y)| x >= self.n || y >= self.n) {
            return Err(Error::IndexOutOfRange { index: x.max(y), n: self.n });
        }
        Ok(())
    }

    fn sidecar(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }

    /// Writes `x<TAB>y` lines to `path` and the metadata to `path.json`.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for &(x, y) in &self.pairs {
            writeln!(w, "{x}\t{y}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        let meta = Self::sidecar(path);
        let json = serde_json::to_string_pretty(self)?;
        fs::write(&meta, json).map_err(|e| Error::io(&meta, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let meta = Self::sidecar(path);
        let json = fs::read_to_string(&meta).map_err(|e| Error::io(&meta, e))?;
        let mut d: WalkDataset = serde_json::from_str(&json)?;
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        for (k, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse {
                path: path.display().to_string(),
                line: k + 1,
                message: msg,
            };
            let mut it = line.split('\t');
            let mut next = || -> Result<usize> {
                let f = it.next().ok_or_else(|| parse_err("expected `x<TAB>y`".into()))?;
                f.trim().parse().map_err(|_| parse_err(format!("bad vertex `{f}`")))
            };
            let (x, y) = (next()?, next()?);
            d.pairs.push((x, y));
        }
        d.validate()?;
        Ok(d)
    }
}

/// Cumulative row distributions for fast sampling.
struct Sampler {
    rows: Vec<(Vec<usize>, Vec<f64>)>,
}

impl Sampler {
    fn new(p: &StochasticMatrix) -> Self {
        let m = p.matrix();
        let rows = (0..m.nrows())
            .map(|i| {
                let (cols, vals) = m.row(i);
                let mut acc = 0.0;
                let cdf = vals
                    .iter()
                    .map(|v| {
                        acc += v;
                        acc
                    })
                    .collect();
                (cols.to_vec(), cdf)
            })
            .collect();
        Sampler { rows }
    }

    fn step(&self, i: usize, rng: &mut impl Rng) -> usize {
        let (cols, cdf) = &self.rows[i];
        let total = *cdf.last().expect("stochastic rows are non-empty");
        let u = rng.random::<f64>() * total;
        let k = cdf.partition_point(|&c| c <= u).min(cols.len() - 1);
        cols[k]
    }
}

fn cumulative(dist: &[f64]) -> Result<Vec<f64>> {
    if dist.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    if dist.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidDistribution("negative or non-finite probability".into()));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
    }
    let mut acc = 0.0;
    Ok(dist
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect())
}

fn sample_cdf(cdf: &[f64], rng: &mut impl Rng) -> usize {
    let u = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Independent random stream of walker `index`.
fn walker_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

#[derive(Debug, Clone, Default)]
pub struct WalkOptions {
    /// Label stored in the dataset metadata.
    pub schedule_id: String,
    /// Keep every walker's full vertex sequence.
    pub record_trajectories: bool,
}

/// Simulates `m` independent walkers of `length` steps each.
///
/// Step `t` uses `schedule[min(t, last)]`. Walker `i` draws from its own
/// ChaCha stream keyed by `(seed, i)`, so results do not depend on the thread
/// count.
pub fn simulate_walks(
    schedule: &[StochasticMatrix],
    m: usize,
    length: usize,
    init: &[f64],
    seed: u64,
    opts: &WalkOptions,
) -> Result<WalkDataset> {
    let first = schedule
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty transition schedule".into()))?;
    let n = first.n();
    if schedule.iter().any(|p| p.n() != n) {
        return Err(Error::InvalidArgument("schedule matrices differ in size".into()));
    }
    if length == 0 || m == 0 {
        return Err(Error::InvalidArgument("walk count and length must be positive".into()));
    }
    if init.len() != n {
        return Err(Error::InvalidDistribution(format!(
            "initial distribution has {} entries for {n} vertices",
            init.len()
        )));
    }
    let init_cdf = cumulative(init)?;
    let samplers: Vec<Sampler> = schedule.iter().map(Sampler::new).collect();
    let last = samplers.len() - 1;

    let walk = |i: usize| -> (usize, usize, Option<Vec<usize>>) {
        let mut rng = walker_rng(seed, i as u64);
        let start = sample_cdf(&init_cdf, &mut rng);
        let mut path = opts.record_trajectories.then(|| {
            let mut v = Vec::with_capacity(length + 1);
            v.push(start);
            v
        });
        let mut state = start;
        for t in 0..length {
            state = samplers[t.min(last)].step(state, &mut rng);
            if let Some(p) = path.as_mut() {
                p.push(state);
            }
        }
        (start, state, path)
    };
    let results: Vec<_> = (0..m).into_par_iter().map(walk).collect();

    let mut pairs = Vec::with_capacity(m);
    let mut trajectories = opts.record_trajectories.then(|| Vec::with_capacity(m));
    for (x, y, path) in results {
        pairs.push((x, y));
        if let (Some(all), Some(p)) = (trajectories.as_mut(), path) {
            all.push(p);
        }
    }
    Ok(WalkDataset {
        n,
        pairs,
        walk_length: length,
        seed,
        schedule_id: opts.schedule_id.clone(),
        equilibrated: false,
        trajectories,
    })
}

/// One long trajectory of a time-homogeneous walk, recorded as `m`
/// consecutive `(x_t, x_{t+1})` pairs after `burn_in` discarded steps.
pub fn simulate_trajectory(
    p: &StochasticMatrix,
    m: usize,
    burn_in: usize,
    start: usize,
    seed: u64,
) -> Result<WalkDataset> {
    let n = p.n();
    if start >= n {
        return Err(Error::IndexOutOfRange { index: start, n });
    }
    if m == 0 {
        return Err(Error::InvalidArgument("trajectory needs at least one pair".into()));
    }
    let sampler = Sampler::new(p);
    let mut rng = walker_rng(seed, 0);
    let mut state = start;
    for _ in 0..burn_in {
        state = sampler.step(state, &mut rng);
    }
    let pairs = (0..m)
        .map(|_| {
            let next = sampler.step(state, &mut rng);
            let pair = (state, next);
            state = next;
            pair
        })
        .collect();
    Ok(WalkDataset {
        n,
        pairs,
        walk_length: 1,
        seed,
        schedule_id: "trajectory".into(),
        equilibrated: true,
        trajectories: None,
    })
}

/// Empirical Gram matrices with indicator features. `C_xx` and `C_yy` are
/// diagonal and stored as vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrices {
    pub cxx: Vec<f64>,
    pub cxy: CsrMatrix,
    pub cyy: Vec<f64>,
    pub m: usize,
}

impl GramMatrices {
    pub fn n(&self) -> usize {
        self.cxx.len()
    }

    /// The `m -> infinity` limits for uniformly sampled starts and one step
    /// of `P`: `C_xx = I / n`, `C_xy = P / n`, `C_yy = diag(nu) / n`.
    pub fn limit(p: &StochasticMatrix) -> Self {
        let n = p.n();
        let inv_n = 1.0 / n as f64;
        GramMatrices {
            cxx: vec![inv_n; n],
            cxy: p.matrix().scale_rows(&vec![inv_n; n]),
            cyy: p.matrix().col_sums().into_iter().map(|v| v * inv_n).collect(),
            m: usize::MAX,
        }
    }
}

pub fn gram_matrices(d: &WalkDataset) -> Result<GramMatrices> {
    d.validate()?;
    let n = d.n;
    let inv_m = 1.0 / d.m() as f64;
    let mut cxx = vec![0.0; n];
    let mut cyy = vec![0.0; n];
    for &(x, y) in &d.pairs {
        cxx[x] += 1.0;
        cyy[y] += 1.0;
    }
    cxx.iter_mut().chain(cyy.iter_mut()).for_each(|c| *c *= inv_m);
    let ones: Vec<_> = d.pairs.iter().map(|&(x, y)| (x, y, 1.0)).collect();
    let counts = CsrMatrix::from_triplets(n, n, &ones);
    Ok(GramMatrices {
        cxx,
        cxy: counts.scale_rows(&vec![inv_m; n]),
        cyy,
        m: d.m(),
    })
}

/// How the diagonal Gram matrices are inverted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    /// Zero diagonal entries invert to zero.
    Pseudoinverse,
    /// `(C + eps I)^-1`.
    Tikhonov(f64),
}

impl Default for Regularization {
    fn default() -> Self {
        Regularization::Tikhonov(1e-8)
    }
}

fn diag_inverse(c: &[f64], reg: Regularization) -> Result<Vec<f64>> {
    match reg {
        Regularization::Pseudoinverse => Ok(c.iter().map(|&v| if v > 0.0 { 1.0 / v } else { 0.0 }).collect()),
        Regularization::Tikhonov(eps) => {
            if !(eps > 0.0) {
                return Err(Error::NonpositiveEpsilon(eps));
            }
            Ok(c.iter().map(|&v| 1.0 / (v + eps)).collect())
        }
    }
}

/// `K = C_xx^+ C_xy`.
pub fn estimate_koopman(g: &GramMatrices) -> CsrMatrix {
    let inv = diag_inverse(&g.cxx, Regularization::Pseudoinverse).expect("pseudoinverse is total");
    g.cxy.scale_rows(&inv)
}

/// `P = C_xx^+ C_yx`.
pub fn estimate_pf(g: &GramMatrices) -> CsrMatrix {
    let inv = diag_inverse(&g.cxx, Regularization::Pseudoinverse).expect("pseudoinverse is total");
    g.cxy.transpose().scale_rows(&inv)
}

/// `T = C_xx^+ C_yx` for data from one long equilibrated trajectory, where it
/// approximates the Perron-Frobenius operator with respect to the invariant
/// density. Same formula as [`estimate_pf`]; only the sampling differs.
pub fn estimate_equilibrium_pf(g: &GramMatrices) -> CsrMatrix {
    estimate_pf(g)
}

/// `F = C_xx^+ C_xy C_yy^+ C_yx`, symmetrized as `(F + F^T) / 2`.
pub fn estimate_fb(g: &GramMatrices, reg: Regularization) -> Result<CsrMatrix> {
    let inv_xx = diag_inverse(&g.cxx, reg)?;
    let inv_yy = diag_inverse(&g.cyy, reg)?;
    let left = g.cxy.scale_rows(&inv_xx).scale_cols(&inv_yy);
    let f = left.matmul(&g.cxy.transpose());
    let asym = f.max_asymmetry();
    if asym > 1e-12 {
        log::debug!("forward-backward estimate asymmetric by {asym:e} before symmetrization");
    }
    Ok(f.add_scaled(0.5, &f.transpose(), 0.5))
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub m: usize,
    pub mean_error: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    /// Second eigenvalue of `Q` from the exact transition product.
    pub reference: f64,
    pub rows: Vec<ConvergenceRow>,
}

/// Product of the first `length` steps of a schedule.
pub fn schedule_product(schedule: &[StochasticMatrix], length: usize) -> Result<StochasticMatrix> {
    if schedule.is_empty() || length == 0 {
        return Err(Error::InvalidArgument("empty schedule".into()));
    }
    let last = schedule.len() - 1;
    let steps: Vec<StochasticMatrix> = (0..length).map(|t| schedule[t.min(last)].clone()).collect();
    product(&steps)
}

/// Second-largest eigenvalue of a symmetric matrix.
fn second_eigenvalue(m: &CsrMatrix, opts: &EigenOptions) -> Result<f64> {
    let d = top_eigs_symmetric(m, 2.min(m.nrows()), opts)?;
    Ok(*d.eigenvalues.last().expect("k >= 1"))
}

/// Error of the data-driven second eigenvalue of `Q` against the exact one,
/// for each walker count in `m_grid` over `trials` repetitions.
///
/// Trial `r` uses seed `seed + r` at every grid point, so the walkers of a
/// smaller `m` are a prefix of those of a larger one (common random numbers).
pub fn convergence_study(
    schedule: &[StochasticMatrix],
    m_grid: &[usize],
    length: usize,
    trials: usize,
    seed: u64,
    reg: Regularization,
) -> Result<ConvergenceStudy> {
    if m_grid.is_empty() {
        return Err(Error::InvalidArgument("m grid is empty".into()));
    }
    if m_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("m grid must be strictly ascending".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let opts = EigenOptions::default();
    let p = schedule_product(schedule, length)?;
    let q = forward_backward_matrix(&p)?;
    let reference = second_eigenvalue(q.matrix(), &opts)?;
    let init = uniform(p.n());

    let mut rows = Vec::with_capacity(m_grid.len());
    for &m in m_grid {
        let errors: Vec<f64> = (0..trials)
            .map(|r| {
                let s = seed.wrapping_add(r as u64);
                let d = simulate_walks(schedule, m, length, &init, s, &WalkOptions::default())?;
                let f = estimate_fb(&gram_matrices(&d)?, reg)?;
                Ok((second_eigenvalue(&f, &opts)? - reference).abs())
            })
            .collect::<Result<_>>()?;
        let mean = errors.iter().sum::<f64>() / trials as f64;
        let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / trials as f64;
        rows.push(ConvergenceRow {
            m,
            mean_error: mean,
            std_error: var.sqrt(),
        });
    }
    Ok(ConvergenceStudy { reference, rows })
}
