//! k-means in the plane: k-means++ seeding, Lloyd iterations, best of
//! several restarts.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Labeling;
use crate::rng::{derive_seed, rng_from_seed, stage};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KmeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Lloyd stops once no centroid moves farther than this.
    pub tol: f64,
}

impl Default for KmeansConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 100,
            seed: 0,
            tol: 1e-10,
        }
    }
}

impl KmeansConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iter == 0 || !(self.tol > 0.0) {
            return Err(Error::BadParams(format!(
                "k-means restarts, max_iter and tol must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansResult {
    pub labels: Labeling,
    pub centroids: Vec<Point>,
    /// Sum of squared distances to the assigned centroid.
    pub cost: f64,
    /// Lloyd iterations of the winning restart.
    pub iterations: usize,
}

fn dist2(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Index of the nearest centroid; ties go to the lowest index.
fn nearest(p: &Point, centroids: &[Point]) -> (usize, f64) {
    let mut best = (0, dist2(p, &centroids[0]));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = dist2(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn seed_plus_plus<R: Rng>(points: &[Point], k: usize, rng: &mut R) -> Vec<Point> {
    let n = points.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave target just above the final sum
            pick.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).expect("positive total"))
        } else {
            // every point coincides with a chosen center
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(dist2(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i]).collect()
}

struct Run {
    assignments: Vec<usize>,
    centroids: Vec<Point>,
    cost: f64,
    iterations: usize,
}

fn assign(points: &[Point], centroids: &[Point], assignments: &mut [usize]) -> f64 {
    let mut cost = 0.0;
    for (a, p) in assignments.iter_mut().zip(points) {
        let (j, d) = nearest(p, centroids);
        *a = j;
        cost += d;
    }
    cost
}

/// Moves the point farthest from its centroid, taken from a cluster with
/// more than one member, into each empty cluster.
fn repair_empty(points: &[Point], centroids: &mut [Point], assignments: &mut [usize], k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        for &a in assignments.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let far = (0..points.len())
            .filter(|&i| counts[assignments[i]] > 1)
            .max_by(|&a, &b| {
                let da = dist2(&points[a], &centroids[assignments[a]]);
                let db = dist2(&points[b], &centroids[assignments[b]]);
                // prefer the lower index on equal distance
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .expect("k <= n leaves a cluster with two members");
        assignments[far] = empty;
        centroids[empty] = points[far];
    }
}

fn update_centroids(points: &[Point], assignments: &[usize], centroids: &mut [Point]) -> f64 {
    let k = centroids.len();
    let mut sums = vec![[0.0f64; 2]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        sums[a][0] += p[0];
        sums[a][1] += p[1];
        counts[a] += 1;
    }
    let mut moved: f64 = 0.0;
    for j in 0..k {
        if counts[j] > 0 {
            let c = [sums[j][0] / counts[j] as f64, sums[j][1] / counts[j] as f64];
            moved = moved.max(dist2(&c, &centroids[j]).sqrt());
            centroids[j] = c;
        }
    }
    moved
}

fn cost_of(points: &[Point], assignments: &[usize], centroids: &[Point]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| dist2(p, &centroids[a]))
        .sum()
}

fn lloyd(points: &[Point], k: usize, cfg: &KmeansConfig, seed: u64) -> Run {
    let mut rng = rng_from_seed(seed);
    let mut centroids = seed_plus_plus(points, k, &mut rng);
    let mut assignments = vec![0usize; points.len()];
    assign(points, &centroids, &mut assignments);
    repair_empty(points, &mut centroids, &mut assignments, k);
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let moved = update_centroids(points, &assignments, &mut centroids);
        let before = assignments.clone();
        assign(points, &centroids, &mut assignments);
        repair_empty(points, &mut centroids, &mut assignments, k);
        if moved <= cfg.tol || before == assignments {
            break;
        }
    }
    update_centroids(points, &assignments, &mut centroids);
    let cost = cost_of(points, &assignments, &centroids);
    Run {
        assignments,
        centroids,
        cost,
        iterations,
    }
}

/// Clusters `points` into `k` groups.
///
/// Restart `r` is seeded with `derive_seed(cfg.seed, RESTART, r)`; the
/// restart with the lowest cost wins, the lower index on equal cost.
pub fn kmeans_plane(points: &[Point], k: usize, cfg: &KmeansConfig) -> Result<KmeansResult> {
    cfg.validate()?;
    if k == 0 || k > points.len() {
        return Err(Error::TooFewPoints {
            points: points.len(),
            k,
        });
    }
    let runs: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| lloyd(points, k, cfg, derive_seed(cfg.seed, stage::RESTART, r as u64)))
        .collect();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.cost.total_cmp(&b.cost).then(ia.cmp(ib)))
        .map(|(_, run)| run)
        .expect("restarts >= 1");
    Ok(KmeansResult {
        labels: Labeling::new(best.assignments, k)?,
        centroids: best.centroids,
        cost: best.cost,
        iterations: best.iterations,
    })
}

/// Sum of squared distances of `points` to their assigned centroids.
pub fn kmeans_cost(points: &[Point], labels: &Labeling, centroids: &[Point]) -> f64 {
    cost_of(points, labels.assignments(), centroids)
}
