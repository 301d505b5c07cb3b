//! Agreement between a ground-truth labeling and a prediction.

use pathfinding::prelude::{kuhn_munkres, Matrix};

use crate::error::{Error, Result};
use crate::graph::Labeling;

fn check_lengths(truth: &Labeling, pred: &Labeling) -> Result<()> {
    if truth.len() != pred.len() {
        return Err(Error::SizeMismatch {
            expected: truth.len(),
            actual: pred.len(),
        });
    }
    Ok(())
}

/// `table[a][b]` counts vertices with truth label `a` and predicted label `b`.
pub fn contingency(truth: &Labeling, pred: &Labeling) -> Result<Vec<Vec<u64>>> {
    check_lengths(truth, pred)?;
    let mut table = vec![vec![0u64; pred.k()]; truth.k()];
    for (&a, &b) in truth.assignments().iter().zip(pred.assignments()) {
        table[a][b] += 1;
    }
    Ok(table)
}

fn choose2(x: u64) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index.
///
/// When both labelings put every vertex in one group the index is 1; when
/// exactly one does it is 0.
pub fn ari(truth: &Labeling, pred: &Labeling) -> Result<f64> {
    let table = contingency(truth, pred)?;
    let rows: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..pred.k()).map(|b| table.iter().map(|r| r[b]).sum()).collect();
    let constant = |sums: &[u64]| sums.iter().filter(|&&s| s > 0).count() <= 1;
    match (constant(&rows), constant(&cols)) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        (false, false) => {}
    }
    let n = truth.len() as u64;
    let index: f64 = table.iter().flatten().map(|&c| choose2(c)).sum();
    let sum_rows: f64 = rows.iter().map(|&c| choose2(c)).sum();
    let sum_cols: f64 = cols.iter().map(|&c| choose2(c)).sum();
    let expected = sum_rows * sum_cols / choose2(n);
    let max_index = 0.5 * (sum_rows + sum_cols);
    Ok((index - expected) / (max_index - expected))
}

/// Largest `k` handled by enumerating label permutations.
pub const PERMUTATION_LIMIT: usize = 8;

/// Minimum Hamming distance between `truth` and a relabeling of `pred`.
pub fn misclustering_error(truth: &Labeling, pred: &Labeling) -> Result<usize> {
    let table = contingency(truth, pred)?;
    let k = truth.k().max(pred.k()).max(1);
    let at = |a: usize, b: usize| -> u64 {
        table.get(a).and_then(|r| r.get(b)).copied().unwrap_or(0)
    };
    let matched = if k <= PERMUTATION_LIMIT {
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best = 0;
        permute(&mut perm, 0, &mut |p| {
            let agree: u64 = (0..k).map(|b| at(p[b], b)).sum();
            best = best.max(agree);
        });
        best
    } else {
        let weights = Matrix::from_fn(k, k, |(a, b)| at(a, b) as i64);
        kuhn_munkres(&weights).0 as u64
    };
    Ok(truth.len() - matched as usize)
}

/// Calls `visit` on every permutation of `perm[start..]`.
fn permute(perm: &mut [usize], start: usize, visit: &mut dyn FnMut(&[usize])) {
    if start == perm.len() {
        visit(perm);
        return;
    }
    for i in start..perm.len() {
        perm.swap(start, i);
        permute(perm, start + 1, visit);
        perm.swap(start, i);
    }
}
