//! Route mining: pairwise journey dissimilarity, cluster-count estimation,
//! k-medoids partitioning and partition agreement metrics.
//!
//! The dissimilarity matrix holds normalized full-DTW distances between every
//! pair of aligned journeys. The cluster count is estimated by embedding the
//! matrix into the plane with classical multidimensional scaling, fitting
//! diagonal-covariance Gaussian mixtures by EM for each candidate k, and
//! taking the k that maximizes the Bayesian Information Criterion. The
//! partition itself comes from PAM (build + swap) so cluster centers are
//! actual journeys — new traces are later compared against those medoids.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtw;
use crate::trace_io::AngularSpeedSeries;

#[derive(Debug, Error)]
pub enum MiningError {
    #[error("need at least 2 journeys, got {0}")]
    TooFewJourneys(usize),
    #[error("journey `{0}` has an empty series")]
    EmptySeries(String),
    #[error("k = {k} out of range 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("k_max = {k_max} must be in 1..{n}")]
    BadKMax { k_max: usize, n: usize },
    #[error("partitions cover different journey counts: {0} vs {1}")]
    MismatchedPartitions(usize, usize),
    #[error("partition is empty")]
    EmptyPartition,
}

/// Symmetric matrix of normalized DTW distances with a zero diagonal.
#[derive(Debug, Clone)]
pub struct DissimilarityMatrix {
    n: usize,
    d: Vec<f64>,
    pub ids: Vec<String>,
}

impl DissimilarityMatrix {
    pub fn from_entries(ids: Vec<String>, d: Vec<f64>) -> Self {
        let n = ids.len();
        assert_eq!(d.len(), n * n);
        Self { n, d, ids }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

/// Cluster labels, dense in `0..k`, in journey order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Relabels arbitrary cluster ids to dense `0..k` by first appearance.
    pub fn new(raw_labels: &[usize]) -> Result<Self, MiningError> {
        if raw_labels.is_empty() {
            return Err(MiningError::EmptyPartition);
        }
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut labels = Vec::with_capacity(raw_labels.len());
        for &l in raw_labels {
            let next = remap.len();
            labels.push(*remap.entry(l).or_insert(next));
        }
        let k = remap.len();
        Ok(Self { labels, k })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// One cluster of the serialized route model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RouteCluster {
    pub cluster_id: usize,
    pub medoid_id: String,
    pub member_ids: Vec<String>,
    /// Normalized-distance cutoff for later recognition against this medoid:
    /// 1.25 × the largest intra-cluster distance to the medoid.
    pub match_threshold: f64,
    pub medoid_values: Vec<f64>,
    pub medoid_mask: Vec<bool>,
}

/// The mined route model: medoids, assignments and recognition thresholds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RouteModel {
    pub format_version: u32,
    pub k: usize,
    pub tau: usize,
    pub clusters: Vec<RouteCluster>,
    /// journey id -> cluster id, in dissimilarity-matrix order
    pub assignment: Vec<(String, usize)>,
}

pub const ROUTE_MODEL_FORMAT_VERSION: u32 = 1;
/// Default significance threshold: a route is significant after more than
/// this many journeys.
pub const DEFAULT_TAU: usize = 3;
const MATCH_THRESHOLD_MARGIN: f64 = 1.25;

impl RouteModel {
    /// Assembles the model from a partition over the journeys behind `d`.
    pub fn build(
        d: &DissimilarityMatrix,
        partition: &Partition,
        medoids: &[usize],
        journeys: &[AngularSpeedSeries],
        tau: usize,
    ) -> Self {
        let mut clusters = Vec::with_capacity(medoids.len());
        for (cid, &medoid) in medoids.iter().enumerate() {
            let members: Vec<usize> = (0..d.len())
                .filter(|&i| partition.labels()[i] == cid)
                .collect();
            let max_intra = members
                .iter()
                .map(|&i| d.get(i, medoid))
                .fold(0.0, f64::max);
            clusters.push(RouteCluster {
                cluster_id: cid,
                medoid_id: d.ids[medoid].clone(),
                member_ids: members.iter().map(|&i| d.ids[i].clone()).collect(),
                match_threshold: MATCH_THRESHOLD_MARGIN * max_intra,
                medoid_values: journeys[medoid].values.clone(),
                medoid_mask: journeys[medoid].mask.clone(),
            });
        }
        RouteModel {
            format_version: ROUTE_MODEL_FORMAT_VERSION,
            k: medoids.len(),
            tau,
            clusters,
            assignment: d
                .ids
                .iter()
                .cloned()
                .zip(partition.labels().iter().copied())
                .collect(),
        }
    }

    pub fn medoid_series(&self, cluster: usize) -> AngularSpeedSeries {
        let c = &self.clusters[cluster];
        AngularSpeedSeries::with_mask(
            c.medoid_values.clone(),
            c.medoid_mask.clone(),
            c.medoid_id.clone(),
        )
    }
}

/// Pairwise normalized full-DTW distances; each pair computed once and
/// mirrored, pairs evaluated in parallel.
pub fn dissimilarity_matrix(
    journeys: &[AngularSpeedSeries],
) -> Result<DissimilarityMatrix, MiningError> {
    let n = journeys.len();
    if n < 2 {
        return Err(MiningError::TooFewJourneys(n));
    }
    for j in journeys {
        if j.is_empty() {
            return Err(MiningError::EmptySeries(j.origin_trace_id.clone()));
        }
    }
    let masked: Vec<Vec<dtw::MaskedValue>> = journeys.iter().map(dtw::masked_values).collect();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let distances: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            dtw::dtw_distance(&masked[i], &masked[j], dtw::masked_abs_diff)
                .expect("non-empty series")
        })
        .collect();
    let mut d = vec![0.0; n * n];
    for (&(i, j), &v) in pairs.iter().zip(&distances) {
        d[i * n + j] = v;
        d[j * n + i] = v;
    }
    Ok(DissimilarityMatrix {
        n,
        d,
        ids: journeys.iter().map(|j| j.origin_trace_id.clone()).collect(),
    })
}

/// Classical MDS embedding of a dissimilarity matrix into `dims` dimensions.
///
/// Double-centers the squared distances and keeps the top eigenpairs;
/// non-positive eigenvalues contribute zero coordinates.
pub fn classical_mds(d: &DissimilarityMatrix, dims: usize) -> Vec<Vec<f64>> {
    let n = d.len();
    let mut b = DMatrix::<f64>::zeros(n, n);
    let sq = |i: usize, j: usize| d.get(i, j) * d.get(i, j);
    let mut row_means = vec![0.0; n];
    let mut grand = 0.0;
    for i in 0..n {
        for j in 0..n {
            row_means[i] += sq(i, j);
        }
        grand += row_means[i];
        row_means[i] /= n as f64;
    }
    grand /= (n * n) as f64;
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = -0.5 * (sq(i, j) - row_means[i] - row_means[j] + grand);
        }
    }
    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &bb| {
        eig.eigenvalues[bb]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
    });
    let mut coords = vec![vec![0.0; dims]; n];
    for (axis, &e) in order.iter().take(dims).enumerate() {
        let lambda = eig.eigenvalues[e];
        if lambda <= 0.0 {
            continue;
        }
        let scale = lambda.sqrt();
        for (i, point) in coords.iter_mut().enumerate() {
            point[axis] = eig.eigenvectors[(i, e)] * scale;
        }
    }
    coords
}

/// Diagonal-covariance Gaussian mixture fitted by EM; returns the final
/// log-likelihood. Means start from `init_means` when given, otherwise from
/// k-means++ style seeding.
fn fit_gmm(
    points: &[Vec<f64>],
    k: usize,
    rng: &mut ChaCha8Rng,
    init_means: Option<&[Vec<f64>]>,
) -> f64 {
    let n = points.len();
    let p = points[0].len();
    let mut data_var = vec![0.0; p];
    let mut data_mean = vec![0.0; p];
    for x in points {
        for (m, v) in data_mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    for m in &mut data_mean {
        *m /= n as f64;
    }
    for x in points {
        for a in 0..p {
            data_var[a] += (x[a] - data_mean[a]).powi(2);
        }
    }
    for v in &mut data_var {
        *v = (*v / n as f64).max(1e-12);
    }
    // The variance floor is what keeps the likelihood bounded: without it a
    // component can collapse onto near-coincident points and buy arbitrary
    // log-likelihood, which BIC's penalty cannot counter. A few percent of
    // the per-axis data std sits below any real cluster's spread while
    // making degenerate collapse worthless.
    let floor: Vec<f64> = data_var.iter().map(|v| 1e-3 * v + 1e-12).collect();

    // k-means++ style seeding: the next mean is drawn proportionally to the
    // squared distance from the nearest mean so far, which reliably lands
    // one seed per blob even when blob sizes are uneven
    let mut means: Vec<Vec<f64>> = match init_means {
        Some(m) => m.to_vec(),
        None => vec![points[rng.gen_range(0..n)].clone()],
    };
    while means.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|x| {
                means
                    .iter()
                    .map(|m| {
                        x.iter()
                            .zip(m)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            means.push(points[rng.gen_range(0..n)].clone());
            continue;
        }
        let mut pick = rng.gen_range(0.0..total);
        let mut chosen = n - 1;
        for (i, &w) in d2.iter().enumerate() {
            if pick < w {
                chosen = i;
                break;
            }
            pick -= w;
        }
        means.push(points[chosen].clone());
    }
    // hard-assign points to the initial means and start from per-component
    // statistics; a data-wide initial variance would flatten the
    // responsibilities and erase the seeding in one step
    let mut vars: Vec<Vec<f64>> = vec![floor.clone(); k];
    let mut weights = vec![1.0 / k as f64; k];
    {
        let mut counts = vec![0usize; k];
        let mut sums = vec![vec![0.0; p]; k];
        let mut assign = vec![0usize; n];
        for (i, x) in points.iter().enumerate() {
            let c = (0..k)
                .min_by(|&a, &b| {
                    let da: f64 = x.iter().zip(&means[a]).map(|(v, m)| (v - m) * (v - m)).sum();
                    let db: f64 = x.iter().zip(&means[b]).map(|(v, m)| (v - m) * (v - m)).sum();
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            assign[i] = c;
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(x) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            weights[c] = counts[c] as f64 / n as f64;
            for a in 0..p {
                means[c][a] = sums[c][a] / counts[c] as f64;
            }
        }
        for (i, x) in points.iter().enumerate() {
            let c = assign[i];
            for a in 0..p {
                vars[c][a] += (x[a] - means[c][a]).powi(2) / counts[c] as f64;
            }
        }
        for c in 0..k {
            for a in 0..p {
                vars[c][a] = vars[c][a].max(floor[a]);
            }
        }
    }

    let mut log_likelihood = f64::NEG_INFINITY;
    let mut resp = vec![vec![0.0; k]; n];
    for _ in 0..300 {
        let mut ll = 0.0;
        for (i, x) in points.iter().enumerate() {
            let mut logp = vec![0.0; k];
            for c in 0..k {
                let mut acc = weights[c].max(1e-300).ln();
                for a in 0..p {
                    let var = vars[c][a];
                    acc += -0.5
                        * ((2.0 * std::f64::consts::PI * var).ln()
                            + (x[a] - means[c][a]).powi(2) / var);
                }
                logp[c] = acc;
            }
            let mx = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = mx + logp.iter().map(|v| (v - mx).exp()).sum::<f64>().ln();
            ll += lse;
            for c in 0..k {
                resp[i][c] = (logp[c] - lse).exp();
            }
        }
        for c in 0..k {
            let nk: f64 = resp.iter().map(|r| r[c]).sum::<f64>().max(1e-12);
            weights[c] = nk / n as f64;
            for a in 0..p {
                means[c][a] = resp
                    .iter()
                    .zip(points)
                    .map(|(r, x)| r[c] * x[a])
                    .sum::<f64>()
                    / nk;
            }
            for a in 0..p {
                let s: f64 = resp
                    .iter()
                    .zip(points)
                    .map(|(r, x)| r[c] * (x[a] - means[c][a]).powi(2))
                    .sum();
                vars[c][a] = (s / nk).max(floor[a]);
            }
        }
        if (ll - log_likelihood).abs() < 1e-9 * ll.abs().max(1.0) {
            log_likelihood = ll;
            break;
        }
        log_likelihood = ll;
    }
    log_likelihood
}

const GMM_RESTARTS: u64 = 5;
/// MDS embedding dimension used for cluster-count estimation.
pub const MDS_DIMS: usize = 2;

/// BIC of the best-of-restarts mixture fit for each candidate k, as
/// `(k, BIC)` rows — the cluster-count selection curve.
pub fn bic_curve(
    d: &DissimilarityMatrix,
    k_max: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>, MiningError> {
    let n = d.len();
    if k_max >= n || k_max == 0 {
        return Err(MiningError::BadKMax { k_max, n });
    }
    let coords = classical_mds(d, MDS_DIMS);
    let mut curve = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut best_ll = f64::NEG_INFINITY;
        for restart in 0..GMM_RESTARTS {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    .wrapping_add((k as u64) << 8)
                    .wrapping_add(restart),
            );
            // the first restart starts where the medoids sit; the rest
            // explore with k-means++ seeding
            let medoid_means: Option<Vec<Vec<f64>>> = if restart == 0 {
                k_medoids(d, k, seed)
                    .ok()
                    .map(|(_, m)| m.iter().map(|&i| coords[i].clone()).collect())
            } else {
                None
            };
            let ll = fit_gmm(&coords, k, &mut rng, medoid_means.as_deref());
            if ll > best_ll {
                best_ll = ll;
            }
        }
        let params = (k - 1) + 2 * k * MDS_DIMS;
        curve.push((k, 2.0 * best_ll - params as f64 * (n as f64).ln()));
    }
    Ok(curve)
}

/// Estimates the number of route clusters behind a dissimilarity matrix.
///
/// Embeds into [`MDS_DIMS`] dimensions, fits a diagonal Gaussian mixture for
/// each `k in 1..=k_max` (best of 5 seeded EM restarts) and returns the k
/// maximizing `BIC = 2·lnL − params·ln(n)`.
pub fn estimate_k(
    d: &DissimilarityMatrix,
    k_max: usize,
    seed: u64,
) -> Result<usize, MiningError> {
    let n = d.len();
    if k_max >= n || k_max == 0 {
        return Err(MiningError::BadKMax { k_max, n });
    }
    let max_entry = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| d.get(i, j))
        .fold(0.0, f64::max);
    if max_entry <= 0.0 {
        return Ok(1); // all journeys identical
    }
    let curve = bic_curve(d, k_max, seed)?;
    Ok(curve
        .iter()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap()
        .0)
}

/// PAM k-medoids: greedy build phase then best-improvement swaps, plus four
/// seeded random restarts; lowest total cost wins. Deterministic given the
/// seed.
pub fn k_medoids(
    d: &DissimilarityMatrix,
    k: usize,
    seed: u64,
) -> Result<(Partition, Vec<usize>), MiningError> {
    let n = d.len();
    if k == 0 || k > n {
        return Err(MiningError::BadK { k, n });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..5 {
        let mut medoids = if restart == 0 {
            pam_build(d, k)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart));
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let mut m: Vec<usize> = idx.into_iter().take(k).collect();
            m.sort_unstable();
            m
        };
        let cost = pam_swap(d, &mut medoids);
        if best.as_ref().map_or(true, |(c, _)| cost < *c) {
            best = Some((cost, medoids));
        }
    }
    let (_, mut medoids) = best.unwrap();
    medoids.sort_unstable();
    let labels: Vec<usize> = (0..n)
        .map(|i| {
            medoids
                .iter()
                .enumerate()
                .min_by(|(_, &a), (_, &b)| d.get(i, a).partial_cmp(&d.get(i, b)).unwrap())
                .unwrap()
                .0
        })
        .collect();
    Ok((Partition::new(&labels)?, medoids))
}

fn total_cost(d: &DissimilarityMatrix, medoids: &[usize]) -> f64 {
    (0..d.len())
        .map(|i| {
            medoids
                .iter()
                .map(|&m| d.get(i, m))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

fn pam_build(d: &DissimilarityMatrix, k: usize) -> Vec<usize> {
    let n = d.len();
    let mut medoids = Vec::with_capacity(k);
    let first = (0..n)
        .min_by(|&a, &b| {
            let ca: f64 = (0..n).map(|i| d.get(i, a)).sum();
            let cb: f64 = (0..n).map(|i| d.get(i, b)).sum();
            ca.partial_cmp(&cb).unwrap()
        })
        .unwrap();
    medoids.push(first);
    while medoids.len() < k {
        let mut best_gain = f64::NEG_INFINITY;
        let mut best_c = usize::MAX;
        for c in 0..n {
            if medoids.contains(&c) {
                continue;
            }
            let gain: f64 = (0..n)
                .map(|i| {
                    let cur = medoids
                        .iter()
                        .map(|&m| d.get(i, m))
                        .fold(f64::INFINITY, f64::min);
                    (cur - d.get(i, c)).max(0.0)
                })
                .sum();
            if gain > best_gain {
                best_gain = gain;
                best_c = c;
            }
        }
        medoids.push(best_c);
    }
    medoids.sort_unstable();
    medoids
}

fn pam_swap(d: &DissimilarityMatrix, medoids: &mut [usize]) -> f64 {
    let n = d.len();
    let mut cost = total_cost(d, medoids);
    loop {
        let mut best_delta = 0.0;
        let mut best_swap: Option<(usize, usize)> = None;
        for mi in 0..medoids.len() {
            for h in 0..n {
                if medoids.contains(&h) {
                    continue;
                }
                let old = medoids[mi];
                medoids[mi] = h;
                let new_cost = total_cost(d, medoids);
                medoids[mi] = old;
                let delta = new_cost - cost;
                if delta < best_delta {
                    best_delta = delta;
                    best_swap = Some((mi, h));
                }
            }
        }
        match best_swap {
            Some((mi, h)) => {
                medoids[mi] = h;
                cost = total_cost(d, medoids);
            }
            None => break,
        }
    }
    cost
}

/// Pairwise full-DTW distances between GPS trajectories under the
/// great-circle cost, in meters per step.
pub fn gps_dissimilarity(
    trajectories: &[Vec<crate::trace_io::GpsPoint>],
    ids: Vec<String>,
) -> DissimilarityMatrix {
    let n = trajectories.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let distances: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            crate::dtw::dtw_distance(&trajectories[i], &trajectories[j], crate::dtw::great_circle)
                .expect("non-empty trajectories")
        })
        .collect();
    let mut d = vec![0.0; n * n];
    for (&(i, j), &v) in pairs.iter().zip(&distances) {
        d[i * n + j] = v;
        d[j * n + i] = v;
    }
    DissimilarityMatrix::from_entries(ids, d)
}

/// Journeys farther apart than this are treated as living in different
/// cities and clustered separately first.
pub const CITY_SPLIT_M: f64 = 50_000.0;

/// Clusters GPS trajectories with BIC-estimated k. When some journeys are
/// more than [`CITY_SPLIT_M`] apart the set is first split into cities by
/// single linkage and each city is clustered on its own; otherwise a single
/// stage suffices. The returned labels are dense over the whole set.
pub fn cluster_gps_partition(
    d: &DissimilarityMatrix,
    k_max: usize,
    seed: u64,
) -> Result<Partition, MiningError> {
    let n = d.len();
    if n < 2 {
        return Err(MiningError::TooFewJourneys(n));
    }
    // single-linkage components under the city threshold
    let mut component = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        component[start] = next;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if component[v] == usize::MAX && d.get(u, v) < CITY_SPLIT_M {
                    component[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    let mut labels = vec![0usize; n];
    let mut offset = 0;
    for city in 0..next {
        let members: Vec<usize> = (0..n).filter(|&i| component[i] == city).collect();
        if members.len() == 1 {
            labels[members[0]] = offset;
            offset += 1;
            continue;
        }
        let m = members.len();
        let mut sub = vec![0.0; m * m];
        for (a, &i) in members.iter().enumerate() {
            for (b, &j) in members.iter().enumerate() {
                sub[a * m + b] = d.get(i, j);
            }
        }
        let sub_matrix = DissimilarityMatrix::from_entries(
            members.iter().map(|&i| d.ids[i].clone()).collect(),
            sub,
        );
        let k = estimate_k(&sub_matrix, k_max.min(m - 1).max(1), seed)?;
        let (partition, _) = k_medoids(&sub_matrix, k, seed)?;
        for (a, &i) in members.iter().enumerate() {
            labels[i] = offset + partition.labels()[a];
        }
        offset += partition.k();
    }
    Partition::new(&labels)
}

/// Clusters with more than `tau` members, largest first.
pub fn significant_routes(partition: &Partition, tau: usize) -> Vec<usize> {
    assert!(tau >= 1, "tau must be at least 1");
    let sizes = partition.cluster_sizes();
    let mut out: Vec<usize> = (0..partition.k()).filter(|&c| sizes[c] > tau).collect();
    out.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    out
}

fn contingency(a: &Partition, b: &Partition) -> (Vec<Vec<u64>>, Vec<u64>, Vec<u64>) {
    let mut table = vec![vec![0u64; b.k()]; a.k()];
    for (&la, &lb) in a.labels().iter().zip(b.labels()) {
        table[la][lb] += 1;
    }
    let row: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<u64> = (0..b.k())
        .map(|j| table.iter().map(|r| r[j]).sum())
        .collect();
    (table, row, col)
}

fn comb2(n: u64) -> f64 {
    (n as f64) * (n as f64 - 1.0) / 2.0
}

/// Adjusted (Hubert–Arabie) Rand index between two partitions of the same
/// journeys; 1 means identical up to relabeling.
pub fn corrected_rand(a: &Partition, b: &Partition) -> Result<f64, MiningError> {
    if a.len() != b.len() {
        return Err(MiningError::MismatchedPartitions(a.len(), b.len()));
    }
    let (table, row, col) = contingency(a, b);
    let n = a.len() as u64;
    let sum_cells: f64 = table.iter().flatten().map(|&c| comb2(c)).sum();
    let sum_rows: f64 = row.iter().map(|&c| comb2(c)).sum();
    let sum_cols: f64 = col.iter().map(|&c| comb2(c)).sum();
    let total = comb2(n);
    let expected = sum_rows * sum_cols / total;
    let max_index = 0.5 * (sum_rows + sum_cols);
    let denom = max_index - expected;
    if denom == 0.0 {
        // both all-singletons or both one cluster
        return Ok(if sum_cells == max_index { 1.0 } else { 0.0 });
    }
    Ok((sum_cells - expected) / denom)
}

/// Variation of information `H(a) + H(b) − 2·I(a;b)` in nats; 0 means
/// identical partitions.
pub fn variation_of_information(a: &Partition, b: &Partition) -> Result<f64, MiningError> {
    if a.len() != b.len() {
        return Err(MiningError::MismatchedPartitions(a.len(), b.len()));
    }
    let (table, row, col) = contingency(a, b);
    let n = a.len() as f64;
    let entropy = |counts: &[u64]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let mut mutual = 0.0;
    for (i, r) in table.iter().enumerate() {
        for (j, &c) in r.iter().enumerate() {
            if c > 0 {
                let p = c as f64 / n;
                mutual += p * (p * n * n / (row[i] as f64 * col[j] as f64)).ln();
            }
        }
    }
    Ok((entropy(&row) + entropy(&col) - 2.0 * mutual).max(0.0))
}
