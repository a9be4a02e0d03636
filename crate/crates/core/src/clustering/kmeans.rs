//! Lloyd's k-means with k-means++ seeding and independent restarts.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions {
            restarts: 10,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: DMatrix<f64>,
    /// Within-cluster sum of squared distances.
    pub wcss: f64,
    pub iterations: usize,
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>, c: usize) -> f64 {
    (0..points.ncols())
        .map(|d| (points[(i, d)] - centroids[(c, d)]).powi(2))
        .sum()
}

fn nearest(points: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.nrows() {
        let d = sq_dist(points, i, centroids, c);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = points.nrows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut dist: Vec<f64> = (0..n)
        .map(|i| {
            (0..points.ncols())
                .map(|d| (points[(i, d)] - points[(chosen[0], d)]).powi(2))
                .sum()
        })
        .collect();
    while chosen.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in dist.iter().enumerate() {
                if u < d {
                    pick = i;
                    break;
                }
                u -= d;
            }
            pick
        } else {
            // Every point coincides with a centre; fall back to unused indices.
            let unused: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            unused[rng.random_range(0..unused.len())]
        };
        chosen.push(next);
        for (i, di) in dist.iter_mut().enumerate() {
            let d: f64 = (0..points.ncols())
                .map(|c| (points[(i, c)] - points[(next, c)]).powi(2))
                .sum();
            *di = di.min(d);
        }
    }
    DMatrix::from_fn(k, points.ncols(), |c, d| points[(chosen[c], d)])
}

fn lloyd(points: &DMatrix<f64>, mut centroids: DMatrix<f64>, max_iter: usize) -> KMeansResult {
    let n = points.nrows();
    let k = centroids.nrows();
    let dim = points.ncols();
    let mut labels = vec![usize::MAX; n];
    let mut iterations = 0;
    loop {
        let mut changed = false;
        for (i, label) in labels.iter_mut().enumerate() {
            let (c, _) = nearest(points, i, &centroids);
            if *label != c {
                *label = c;
                changed = true;
            }
        }
        if !changed || iterations >= max_iter {
            break;
        }
        iterations += 1;

        let mut sums = DMatrix::<f64>::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            for d in 0..dim {
                sums[(c, d)] += points[(i, d)];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for d in 0..dim {
                    centroids[(c, d)] = sums[(c, d)] / counts[c] as f64;
                }
            }
        }
        // An emptied cluster takes over the point farthest from its centre.
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .filter(|&i| counts[labels[i]] > 1)
                    .max_by(|&a, &b| {
                        sq_dist(points, a, &centroids, labels[a])
                            .total_cmp(&sq_dist(points, b, &centroids, labels[b]))
                    });
                if let Some(i) = far {
                    counts[labels[i]] -= 1;
                    counts[c] = 1;
                    labels[i] = c;
                    for d in 0..dim {
                        centroids[(c, d)] = points[(i, d)];
                    }
                }
            }
        }
    }
    let wcss = labels
        .iter()
        .enumerate()
        .map(|(i, &c)| sq_dist(points, i, &centroids, c))
        .sum();
    KMeansResult {
        labels,
        centroids,
        wcss,
        iterations,
    }
}

/// Clusters the rows of `points`. Restart `r` seeds its own ChaCha stream
/// from `(seed, r)`; the lowest-WCSS restart wins, ties going to the lower
/// restart index.
pub fn kmeans_rows(points: &DMatrix<f64>, k: usize, seed: u64, opts: &KMeansOptions) -> Result<KMeansResult> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::KTooLarge { k, n });
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("embedding has non-finite entries".into()));
    }
    let restarts = opts.restarts.max(1);
    let results: Vec<KMeansResult> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let init = plus_plus(points, k, &mut rng);
            lloyd(points, init, opts.max_iter)
        })
        .collect();
    let best = results
        .into_iter()
        .reduce(|a, b| if b.wcss < a.wcss { b } else { a })
        .expect("at least one restart");
    Ok(best)
}
