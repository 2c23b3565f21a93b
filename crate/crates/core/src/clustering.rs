//! k-means over symptom vectors, used to group stored patient profiles into
//! cohorts for collaborative filtering.
//!
//! Initialisation is k-means++; Lloyd iterations alternate nearest-centroid
//! assignment and mean updates until the assignment stops changing. A
//! cluster that ends up empty takes over the point farthest from its current
//! centroid (among clusters that can spare one), so inertia never increases
//! from one iteration to the next.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::dataset::SymptomVector;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Default number of cohorts for the recommender.
pub const DEFAULT_COHORTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub iterations_run: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub model: KMeansModel,
    pub assignments: Vec<usize>,
    /// Inertia after each mean update.
    pub inertia_trace: Vec<f64>,
    pub converged: bool,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centroids: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

impl KMeansModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Nearest centroid by squared Euclidean distance; ties go to the lowest id.
    pub fn assign(&self, x: &[f64]) -> Result<usize> {
        let dim = self.centroids[0].len();
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.len(),
            });
        }
        Ok(nearest(&self.centroids, x).0)
    }

    pub fn assign_vector(&self, x: &SymptomVector) -> Result<usize> {
        self.assign(&x.to_f64())
    }
}

fn distinct_count(points: &[Vec<f64>]) -> usize {
    points
        .iter()
        .map(|p| p.iter().map(|v| v.to_bits()).collect::<Vec<u64>>())
        .collect::<HashSet<_>>()
        .len()
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut SplitMix64) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.below(points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let target = rng.next_f64() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (i, &d) in d2.iter().enumerate() {
            acc += d;
            if d > 0.0 && acc > target {
                chosen = Some(i);
                break;
            }
        }
        // Rounding can leave `acc` just short of `target`; fall back to the
        // last point with positive weight.
        let chosen = chosen.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).expect("k <= distinct points"));
        let c = points[chosen].clone();
        for (p, d) in points.iter().zip(d2.iter_mut()) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Nearest-centroid assignment plus empty-cluster repair; the flag reports
/// whether any repair happened.
fn assign_all(points: &[Vec<f64>], centroids: &mut [Vec<f64>]) -> (Vec<usize>, bool) {
    let k = centroids.len();
    let mut assignment: Vec<usize> = Vec::with_capacity(points.len());
    let mut dist: Vec<f64> = Vec::with_capacity(points.len());
    for p in points {
        let (c, d) = nearest(centroids, p);
        assignment.push(c);
        dist.push(d);
    }
    let mut sizes = vec![0usize; k];
    for &a in &assignment {
        sizes[a] += 1;
    }
    let mut repaired = false;
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let donor = (0..points.len())
            .filter(|&i| sizes[assignment[i]] > 1)
            .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
            .expect("some cluster has two or more points");
        sizes[assignment[donor]] -= 1;
        sizes[empty] = 1;
        assignment[donor] = empty;
        dist[donor] = 0.0;
        centroids[empty] = points[donor].clone();
        repaired = true;
    }
    (assignment, repaired)
}

fn update_means(points: &[Vec<f64>], assignment: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignment) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(p) {
            *s += v;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        s.iter_mut().for_each(|v| *v /= n as f64);
    }
    sums
}

fn inertia(points: &[Vec<f64>], assignment: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignment)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

pub fn kmeans_fit(points: &[Vec<f64>], k: usize, max_iter: usize, seed: u64) -> Result<KMeansFit> {
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    if k == 0 || max_iter == 0 {
        return Err(Error::InvalidArgument(
            "k and max_iter must both be at least 1".into(),
        ));
    }
    let distinct = distinct_count(points);
    if k > distinct {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the number of distinct points ({distinct})"
        )));
    }

    let mut rng = SplitMix64::new(seed);
    let mut centroids = plus_plus_init(points, k, &mut rng);
    let (mut assignment, _) = assign_all(points, &mut centroids);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations_run = 0;
    while iterations_run < max_iter {
        iterations_run += 1;
        centroids = update_means(points, &assignment, k);
        trace.push(inertia(points, &assignment, &centroids));
        let mut next_centroids = centroids.clone();
        let (next, repaired) = assign_all(points, &mut next_centroids);
        if !repaired && next == assignment {
            converged = true;
            break;
        }
        assignment = next;
        centroids = next_centroids;
    }
    if !converged {
        centroids = update_means(points, &assignment, k);
    }
    let final_inertia = inertia(points, &assignment, &centroids);
    Ok(KMeansFit {
        model: KMeansModel {
            centroids,
            inertia: final_inertia,
            iterations_run,
        },
        assignments: assignment,
        inertia_trace: trace,
        converged,
    })
}

/// Lowest-inertia fit over `n_init` derived seeds; ties keep the earliest.
pub fn kmeans_fit_best(
    points: &[Vec<f64>],
    k: usize,
    max_iter: usize,
    seed: u64,
    n_init: usize,
) -> Result<KMeansFit> {
    let mut best: Option<KMeansFit> = None;
    for i in 0..n_init.max(1) {
        let s = SplitMix64::derive(seed, &[i as u64]).next_u64();
        let fit = kmeans_fit(points, k, max_iter, s)?;
        if best.as_ref().is_none_or(|b| fit.model.inertia < b.model.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one run"))
}

pub fn kmeans_fit_vectors(points: &[SymptomVector], k: usize, max_iter: usize, seed: u64) -> Result<KMeansFit> {
    let points: Vec<Vec<f64>> = points.iter().map(SymptomVector::to_f64).collect();
    kmeans_fit(&points, k, max_iter, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|&v| vec![v]).collect()
    }

    /// Minimum inertia over every assignment of points to two non-empty groups.
    fn brute_force_two_partition(points: &[f64]) -> (f64, f64, f64) {
        let n = points.len();
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for mask in 1..(1u32 << n) - 1 {
            let (a, b): (Vec<f64>, Vec<f64>) = {
                let mut a = Vec::new();
                let mut b = Vec::new();
                for (i, &p) in points.iter().enumerate() {
                    if mask >> i & 1 == 1 { a.push(p) } else { b.push(p) }
                }
                (a, b)
            };
            let ma = a.iter().sum::<f64>() / a.len() as f64;
            let mb = b.iter().sum::<f64>() / b.len() as f64;
            let cost: f64 = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>()
                + b.iter().map(|x| (x - mb).powi(2)).sum::<f64>();
            if cost < best.0 {
                best = (cost, ma.min(mb), ma.max(mb));
            }
        }
        best
    }

    #[test]
    fn four_points_match_brute_force() {
        let values = [0.0, 1.0, 10.0, 11.0];
        let (cost, lo, hi) = brute_force_two_partition(&values);
        assert_eq!((cost, lo, hi), (1.0, 0.5, 10.5));
        for seed in 0..10 {
            let fit = kmeans_fit(&line(&values), 2, 100, seed).unwrap();
            let mut c: Vec<f64> = fit.model.centroids.iter().map(|c| c[0]).collect();
            c.sort_by(f64::total_cmp);
            assert_eq!(c, vec![lo, hi], "seed {seed}");
            assert!((fit.model.inertia - cost).abs() < 1e-12);
            assert!(fit.converged);
        }
    }

    #[test]
    fn k_equal_to_distinct_points_has_zero_inertia() {
        let pts = line(&[0.0, 0.0, 3.0, 7.0, 7.0]);
        let fit = kmeans_fit(&pts, 3, 50, 1).unwrap();
        assert_eq!(fit.model.inertia, 0.0);
    }

    #[test]
    fn rejects_too_many_clusters_and_empty_input() {
        assert!(kmeans_fit(&line(&[1.0, 1.0]), 2, 10, 0).is_err());
        assert!(kmeans_fit(&[], 1, 10, 0).is_err());
        assert!(kmeans_fit(&line(&[1.0]), 1, 0, 0).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let mut rng = SplitMix64::new(4);
        let pts: Vec<Vec<f64>> = (0..60).map(|_| (0..5).map(|_| f64::from(u8::from(rng.chance(0.4)))).collect()).collect();
        let a = kmeans_fit(&pts, 4, 100, 9).unwrap();
        let b = kmeans_fit(&pts, 4, 100, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn assign_ties_and_dimension() {
        let model = KMeansModel {
            centroids: vec![vec![0.5], vec![10.5]],
            inertia: 1.0,
            iterations_run: 1,
        };
        assert_eq!(model.assign(&[2.0]).unwrap(), 0);
        assert_eq!(model.assign(&[5.5]).unwrap(), 0);
        assert_eq!(model.assign(&[9.0]).unwrap(), 1);
        assert!(model.assign(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn converged_points_replay_to_their_cluster() {
        let mut rng = SplitMix64::new(77);
        let pts: Vec<Vec<f64>> = (0..80).map(|_| (0..8).map(|_| f64::from(u8::from(rng.chance(0.3)))).collect()).collect();
        let fit = kmeans_fit(&pts, 5, 200, 3).unwrap();
        assert!(fit.converged);
        for (p, &a) in pts.iter().zip(&fit.assignments) {
            assert_eq!(fit.model.assign(p).unwrap(), a);
        }
        // Centroids are the means of their members.
        let means = update_means(&pts, &fit.assignments, 5);
        for (c, m) in fit.model.centroids.iter().zip(&means) {
            for (x, y) in c.iter().zip(m) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
