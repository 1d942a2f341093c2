//! Dynamic time warping over scalar angular-speed series and 2D GPS
//! trajectories.
//!
//! Three variants share one O(n·m) dynamic program:
//!
//! * [`dtw_full`] — both endpoints constrained; the classic recursion
//!   `W(i,j) = d(i,j) + min{W(i,j-1), W(i-1,j), W(i-1,j-1)}` with unit step
//!   weights, normalized by `n + m`.
//! * [`dtw_open_ended`] — the query X is matched against the best *prefix*
//!   of Y; the prefix is chosen by minimum normalized distance
//!   `W(n,j)/(n+j)`, because minimizing the raw cost degenerately favors
//!   one-element prefixes.
//! * [`dtw_open_both`] — the query is matched against the best *subrange*
//!   `Y[i..=j]`, again under normalized distance. The minimum ratio over all
//!   subranges is found by parametric search: for a trial ratio λ, one DP
//!   pass with a start-index row answers "is any subrange better than λ";
//!   the trial descends until no subrange improves, which is the classic
//!   Dinkelbach iteration and terminates at the exact optimum. Reported
//!   costs are recomputed with the plain DP on the winning subrange so they
//!   are identical to what [`dtw_full`] returns for it.
//!
//! Masked samples (user-interaction gaps) cost 0 against anything, so an
//! alignment gap never penalizes route identity.

use thiserror::Error;

use crate::trace_io::{AngularSpeedSeries, GpsPoint};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Error, PartialEq)]
pub enum DtwError {
    #[error("empty input series")]
    EmptyInput,
}

/// Outcome of a warping query.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpResult {
    /// Normalized distance: `raw_cost / (n + matched_y_len)`.
    pub distance: f64,
    /// Accumulated pointwise cost along the optimal path.
    pub raw_cost: f64,
    /// Warping path as 0-based `(i, j)` index pairs, start to end.
    pub path: Vec<(usize, usize)>,
    /// Inclusive 0-based range of X covered by the path (always all of X).
    pub matched_x: (usize, usize),
    /// Inclusive 0-based range of Y covered by the path.
    pub matched_y: (usize, usize),
}

/// Scalar absolute-difference cost.
pub fn abs_diff(a: &f64, b: &f64) -> f64 {
    (a - b).abs()
}

/// A series value carrying its interaction mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskedValue {
    pub value: f64,
    pub masked: bool,
}

/// Absolute difference, zero when either side is masked.
pub fn masked_abs_diff(a: &MaskedValue, b: &MaskedValue) -> f64 {
    if a.masked || b.masked {
        0.0
    } else {
        (a.value - b.value).abs()
    }
}

pub fn masked_values(series: &AngularSpeedSeries) -> Vec<MaskedValue> {
    series
        .values
        .iter()
        .zip(&series.mask)
        .map(|(&value, &masked)| MaskedValue { value, masked })
        .collect()
}

/// Which warping variant to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarpMode {
    Full,
    OpenEnded,
    OpenBoth,
}

/// Warps two aligned 1 Hz series with the masked absolute-difference cost.
pub fn dtw_series(
    x: &AngularSpeedSeries,
    y: &AngularSpeedSeries,
    mode: WarpMode,
) -> Result<WarpResult, DtwError> {
    let xs = masked_values(x);
    let ys = masked_values(y);
    match mode {
        WarpMode::Full => dtw_full(&xs, &ys, masked_abs_diff),
        WarpMode::OpenEnded => dtw_open_ended(&xs, &ys, masked_abs_diff),
        WarpMode::OpenBoth => dtw_open_both(&xs, &ys, masked_abs_diff),
    }
}

/// Haversine great-circle distance in meters.
pub fn great_circle(p1: &GpsPoint, p2: &GpsPoint) -> f64 {
    let (lat1, lat2) = (p1.lat.to_radians(), p2.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (p2.lon - p1.lon).to_radians();
    let a = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().min(1.0).asin()
}

/// Full DTW between GPS trajectories under the great-circle cost; the
/// normalized distance is in meters per step.
pub fn dtw_gps(t1: &[GpsPoint], t2: &[GpsPoint]) -> Result<WarpResult, DtwError> {
    dtw_full(t1, t2, great_circle)
}

/// Endpoint-constrained DTW. `distance = raw_cost / (n + m)`.
pub fn dtw_full<T>(
    x: &[T],
    y: &[T],
    cost: impl Fn(&T, &T) -> f64,
) -> Result<WarpResult, DtwError> {
    if x.is_empty() || y.is_empty() {
        return Err(DtwError::EmptyInput);
    }
    let matrix = CostMatrix::build(x, y, &cost);
    let raw = matrix.get(x.len(), y.len());
    let path = matrix.backtrack(x.len(), y.len());
    Ok(WarpResult {
        distance: raw / (x.len() + y.len()) as f64,
        raw_cost: raw,
        path,
        matched_x: (0, x.len() - 1),
        matched_y: (0, y.len() - 1),
    })
}

/// Normalized full-DTW distance without path bookkeeping (two rolling rows).
pub fn dtw_distance<T>(x: &[T], y: &[T], cost: impl Fn(&T, &T) -> f64) -> Result<f64, DtwError> {
    if x.is_empty() || y.is_empty() {
        return Err(DtwError::EmptyInput);
    }
    Ok(raw_cost_rolling(x, y, &cost) / (x.len() + y.len()) as f64)
}

fn raw_cost_rolling<T>(x: &[T], y: &[T], cost: &impl Fn(&T, &T) -> f64) -> f64 {
    let m = y.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for xi in x {
        cur[0] = f64::INFINITY;
        for j in 1..=m {
            let d = cost(xi, &y[j - 1]);
            cur[j] = d + prev[j].min(cur[j - 1]).min(prev[j - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m]
}

/// Matches all of X against the best prefix of Y.
///
/// The prefix end `j*` minimizes `W(n,j)/(n+j)`; ties pick the longest
/// prefix. `matched_y` is `[0, j*-1]`.
pub fn dtw_open_ended<T>(
    x: &[T],
    y: &[T],
    cost: impl Fn(&T, &T) -> f64,
) -> Result<WarpResult, DtwError> {
    if x.is_empty() || y.is_empty() {
        return Err(DtwError::EmptyInput);
    }
    let matrix = CostMatrix::build(x, y, &cost);
    let n = x.len();
    let mut best_j = y.len();
    let mut best = matrix.get(n, y.len()) / (n + y.len()) as f64;
    for j in (1..y.len()).rev() {
        let cand = matrix.get(n, j) / (n + j) as f64;
        if cand < best {
            best = cand;
            best_j = j;
        }
    }
    let raw = matrix.get(n, best_j);
    let path = matrix.backtrack(n, best_j);
    Ok(WarpResult {
        distance: best,
        raw_cost: raw,
        path,
        matched_x: (0, n - 1),
        matched_y: (0, best_j - 1),
    })
}

/// Matches all of X against the best subrange `Y[i..=j]`.
///
/// Minimizes `dtw_full(X, Y[i..=j]).distance` over all `i <= j`. The start
/// index of the best warping path into each cell rides along in one extra
/// row, so each parametric pass stays O(n·m).
pub fn dtw_open_both<T>(
    x: &[T],
    y: &[T],
    cost: impl Fn(&T, &T) -> f64,
) -> Result<WarpResult, DtwError> {
    if x.is_empty() || y.is_empty() {
        return Err(DtwError::EmptyInput);
    }
    let n = x.len();

    // Feasible starting ratio from the open-ended answer (a subrange with
    // i = 0), then descend: each pass either finds a subrange with a strictly
    // smaller normalized distance or certifies none exists.
    let open = dtw_open_ended(x, y, &cost)?;
    let mut best_range = (0usize, open.matched_y.1);
    let mut lambda = open.distance;
    for _ in 0..64 {
        let (i, j) = parametric_pass(x, y, &cost, lambda);
        if (i, j) == best_range {
            break;
        }
        let raw = raw_cost_rolling(x, &y[i..=j], &cost);
        let cand = raw / (n + (j - i + 1)) as f64;
        if cand < lambda {
            lambda = cand;
            best_range = (i, j);
        } else {
            break;
        }
    }

    let (i, j) = best_range;
    let sub = dtw_full(x, &y[i..=j], &cost)?;
    Ok(WarpResult {
        distance: sub.distance,
        raw_cost: sub.raw_cost,
        path: sub.path.into_iter().map(|(a, b)| (a, b + i)).collect(),
        matched_x: (0, n - 1),
        matched_y: (i, j),
    })
}

/// One pass of the parametric subrange search.
///
/// Minimizes `raw - λ·len` over all paths that consume a contiguous block of
/// Y and all of X: every consumed Y column earns a `-λ` credit, and a path
/// may begin at any column of the first row. Returns the end column and the
/// tracked start column of the minimizing path (largest end, then smallest
/// start, on ties).
fn parametric_pass<T>(
    x: &[T],
    y: &[T],
    cost: &impl Fn(&T, &T) -> f64,
    lambda: f64,
) -> (usize, usize) {
    let m = y.len();
    let mut val = vec![0.0f64; m];
    let mut start = vec![0usize; m];
    // first row: x[0] against y[c]; a path either starts at c or extends the
    // row-0 path from c-1
    for c in 0..m {
        let d = cost(&x[0], &y[c]) - lambda;
        if c > 0 && val[c - 1] <= 0.0 {
            val[c] = d + val[c - 1];
            start[c] = start[c - 1];
        } else {
            val[c] = d;
            start[c] = c;
        }
    }
    let mut prev_val = val;
    let mut prev_start = start;
    let mut cur_val = vec![0.0f64; m];
    let mut cur_start = vec![0usize; m];
    for xi in x.iter().skip(1) {
        for c in 0..m {
            let d = cost(xi, &y[c]);
            // vertical step repeats column c: no new column consumed
            let mut best = prev_val[c];
            let mut best_start = prev_start[c];
            if c > 0 {
                let diag = prev_val[c - 1] - lambda;
                if diag < best || (diag == best && prev_start[c - 1] < best_start) {
                    best = diag;
                    best_start = prev_start[c - 1];
                }
                let horiz = cur_val[c - 1] - lambda;
                if horiz < best || (horiz == best && cur_start[c - 1] < best_start) {
                    best = horiz;
                    best_start = cur_start[c - 1];
                }
            }
            cur_val[c] = d + best;
            cur_start[c] = best_start;
        }
        std::mem::swap(&mut prev_val, &mut cur_val);
        std::mem::swap(&mut prev_start, &mut cur_start);
    }
    let mut best_c = m - 1;
    let mut best_v = prev_val[m - 1];
    for c in (0..m - 1).rev() {
        if prev_val[c] < best_v {
            best_v = prev_val[c];
            best_c = c;
        }
    }
    (prev_start[best_c], best_c)
}

/// Full (n+1)×(m+1) accumulated-cost matrix with backtracking.
struct CostMatrix {
    w: Vec<f64>,
    cols: usize,
}

impl CostMatrix {
    fn build<T>(x: &[T], y: &[T], cost: &impl Fn(&T, &T) -> f64) -> Self {
        let (n, m) = (x.len(), y.len());
        let cols = m + 1;
        let mut w = vec![f64::INFINITY; (n + 1) * cols];
        w[0] = 0.0;
        for (i, xi) in x.iter().enumerate() {
            let row = (i + 1) * cols;
            let prev_row = i * cols;
            for (j, yj) in y.iter().enumerate() {
                let d = cost(xi, yj);
                let best = w[prev_row + j + 1]
                    .min(w[row + j])
                    .min(w[prev_row + j]);
                w[row + j + 1] = d + best;
            }
        }
        Self { w, cols }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.cols + j]
    }

    /// Optimal path into cell (i, j), as 0-based series index pairs.
    fn backtrack(&self, mut i: usize, mut j: usize) -> Vec<(usize, usize)> {
        let mut path = Vec::with_capacity(i + j);
        while i > 0 && j > 0 {
            path.push((i - 1, j - 1));
            if i == 1 && j == 1 {
                break;
            }
            let diag = self.get(i - 1, j - 1);
            let vert = self.get(i - 1, j);
            let horiz = self.get(i, j - 1);
            if diag <= vert && diag <= horiz {
                i -= 1;
                j -= 1;
            } else if vert <= horiz {
                i -= 1;
            } else {
                j -= 1;
            }
        }
        path.reverse();
        path
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // ---- brute-force oracles ------------------------------------------
    //
    // Exhaustive monotone-path search with branch-and-bound pruning: a
    // partial path is abandoned only when its accumulated cost strictly
    // exceeds the best complete path, so the exact minimum (including ties)
    // is preserved. Costs accumulate left to right exactly like the DP.

    fn go_full(x: &[f64], y: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (x[i] - y[j]).abs();
        if acc > *best {
            return;
        }
        if i == x.len() - 1 && j == y.len() - 1 {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        if i + 1 < x.len() && j + 1 < y.len() {
            go_full(x, y, i + 1, j + 1, acc, best);
        }
        if i + 1 < x.len() {
            go_full(x, y, i + 1, j, acc, best);
        }
        if j + 1 < y.len() {
            go_full(x, y, i, j + 1, acc, best);
        }
    }

    pub(super) fn oracle_full(x: &[f64], y: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        go_full(x, y, 0, 0, 0.0, &mut best);
        best
    }

    pub(super) fn oracle_open_ended(x: &[f64], y: &[f64]) -> (f64, usize) {
        let mut best = f64::INFINITY;
        let mut best_j = 0;
        for j in (1..=y.len()).rev() {
            let raw = oracle_full(x, &y[..j]);
            let norm = raw / (x.len() + j) as f64;
            if norm < best {
                best = norm;
                best_j = j;
            }
        }
        (best, best_j)
    }

    pub(super) fn oracle_open_both(x: &[f64], y: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..y.len() {
            for j in i..y.len() {
                let raw = oracle_full(x, &y[i..=j]);
                let norm = raw / (x.len() + (j - i + 1)) as f64;
                if norm < best {
                    best = norm;
                }
            }
        }
        best
    }

    fn check_path(result: &WarpResult, n: usize) {
        let path = &result.path;
        assert_eq!(path.first().unwrap().0, 0);
        assert_eq!(path.first().unwrap().1, result.matched_y.0);
        assert_eq!(path.last().unwrap().0, n - 1);
        assert_eq!(path.last().unwrap().1, result.matched_y.1);
        for w in path.windows(2) {
            let di = w[1].0 - w[0].0;
            let dj = w[1].1 - w[0].1;
            assert!(di <= 1 && dj <= 1 && di + dj >= 1);
        }
    }

    #[test]
    fn full_identical_series_zero() {
        let x = [1.0, 2.0, 3.0];
        let r = dtw_full(&x, &x, abs_diff).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.path, vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn full_single_cell() {
        let r = dtw_full(&[0.0], &[1.0], abs_diff).unwrap();
        assert_eq!(r.raw_cost, 1.0);
        assert_eq!(r.distance, 0.5);
    }

    #[test]
    fn full_three_by_two() {
        let r = dtw_full(&[0.0, 1.0, 2.0], &[0.0, 2.0], abs_diff).unwrap();
        assert_eq!(r.raw_cost, 1.0);
        assert_eq!(r.distance, 0.2);
        assert_eq!(r.raw_cost, oracle_full(&[0.0, 1.0, 2.0], &[0.0, 2.0]));
        check_path(&r, 3);
    }

    #[test]
    fn open_ended_exact_prefix() {
        let r = dtw_open_ended(&[1.0, 2.0], &[1.0, 2.0, 9.0, 9.0], abs_diff).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.matched_y, (0, 1));
    }

    #[test]
    fn open_ended_full_prefix_when_equal() {
        let x = [1.0, 5.0, 2.0];
        let full = dtw_full(&x, &x, abs_diff).unwrap();
        let open = dtw_open_ended(&x, &x, abs_diff).unwrap();
        assert_eq!(open.distance, full.distance);
        assert_eq!(open.matched_y, (0, 2));
    }

    #[test]
    fn open_both_exact_infix() {
        let r = dtw_open_both(&[5.0, 6.0], &[9.0, 5.0, 6.0, 9.0], abs_diff).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.matched_y, (1, 2));
        check_path(&r, 2);
    }

    #[test]
    fn open_both_identical_zero() {
        let x = [1.0, 2.0, 3.0];
        let r = dtw_open_both(&x, &x, abs_diff).unwrap();
        assert_eq!(r.distance, 0.0);
    }

    #[test]
    fn seeded_random_oracle_equivalence() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let n = rng.gen_range(1..=9);
            let m = rng.gen_range(1..=9);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();

            let full = dtw_full(&x, &y, abs_diff).unwrap();
            assert_eq!(full.raw_cost, oracle_full(&x, &y));

            let open = dtw_open_ended(&x, &y, abs_diff).unwrap();
            let (oracle_norm, oracle_j) = oracle_open_ended(&x, &y);
            assert_eq!(open.distance, oracle_norm);
            assert_eq!(open.matched_y.1 + 1, oracle_j);

            let both = dtw_open_both(&x, &y, abs_diff).unwrap();
            assert_eq!(both.distance, oracle_open_both(&x, &y));

            // raw-cost inequality: less constrained never costs more
            assert!(open.raw_cost <= full.raw_cost);
        }
    }

    #[test]
    fn symmetry_of_full() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x: Vec<f64> = (0..rng.gen_range(1..15)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..rng.gen_range(1..15)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = dtw_full(&x, &y, abs_diff).unwrap();
            let b = dtw_full(&y, &x, abs_diff).unwrap();
            assert_eq!(a.distance, b.distance);
        }
    }

    #[test]
    fn masked_samples_cost_nothing() {
        let x = vec![
            MaskedValue { value: 1.0, masked: false },
            MaskedValue { value: 99.0, masked: true },
            MaskedValue { value: 3.0, masked: false },
        ];
        let y = vec![
            MaskedValue { value: 1.0, masked: false },
            MaskedValue { value: 2.0, masked: false },
            MaskedValue { value: 3.0, masked: false },
        ];
        let r = dtw_full(&x, &y, masked_abs_diff).unwrap();
        assert_eq!(r.distance, 0.0);
    }

    #[test]
    fn empty_input_rejected() {
        let empty: [f64; 0] = [];
        assert_eq!(
            dtw_full(&empty, &[1.0], abs_diff).unwrap_err(),
            DtwError::EmptyInput
        );
        assert_eq!(
            dtw_open_ended(&[1.0], &empty, abs_diff).unwrap_err(),
            DtwError::EmptyInput
        );
        assert_eq!(
            dtw_open_both(&empty, &empty, abs_diff).unwrap_err(),
            DtwError::EmptyInput
        );
    }

    #[test]
    fn great_circle_values() {
        let p = |lat, lon| GpsPoint { t: 0.0, lat, lon };
        assert_eq!(great_circle(&p(52.2, 0.12), &p(52.2, 0.12)), 0.0);
        let one_degree = great_circle(&p(0.0, 0.0), &p(0.0, 1.0));
        // 2πR/360
        assert_abs_diff_eq!(one_degree, 111_195.0, epsilon = 1.0);
        let pole_to_pole = great_circle(&p(90.0, 0.0), &p(-90.0, 0.0));
        assert_abs_diff_eq!(pole_to_pole, std::f64::consts::PI * EARTH_RADIUS_M, epsilon = 1.0);
    }

    #[test]
    fn gps_identical_zero() {
        let traj: Vec<GpsPoint> = (0..10)
            .map(|i| GpsPoint {
                t: i as f64,
                lat: 52.0 + 0.001 * i as f64,
                lon: 0.1,
            })
            .collect();
        let r = dtw_gps(&traj, &traj).unwrap();
        assert_eq!(r.distance, 0.0);
    }

    #[test]
    fn gps_parallel_lines_half_separation() {
        // two straight north-south lines 1000 m apart, same length/sampling
        let dlat = 100.0 / 111_194.93; // ~100 m steps
        let dlon = 1000.0 / 111_194.93; // ~1000 m apart at the equator
        let a: Vec<GpsPoint> = (0..20)
            .map(|i| GpsPoint { t: i as f64, lat: i as f64 * dlat, lon: 0.0 })
            .collect();
        let b: Vec<GpsPoint> = (0..20)
            .map(|i| GpsPoint { t: i as f64, lat: i as f64 * dlat, lon: dlon })
            .collect();
        let r = dtw_gps(&a, &b).unwrap();
        assert_abs_diff_eq!(r.distance, 500.0, epsilon = 2.0);
    }

    #[test]
    fn gps_resampling_robustness() {
        // same polyline, one version sampled 2x denser
        let coarse: Vec<GpsPoint> = (0..30)
            .map(|i| GpsPoint {
                t: i as f64,
                lat: 52.0 + 0.001 * i as f64,
                lon: 0.1 + 0.0004 * (i as f64 * 0.7).sin(),
            })
            .collect();
        let fine: Vec<GpsPoint> = (0..59)
            .map(|i| {
                let u = i as f64 / 2.0;
                GpsPoint {
                    t: u,
                    lat: 52.0 + 0.001 * u,
                    lon: 0.1 + 0.0004 * (u * 0.7).sin(),
                }
            })
            .collect();
        let r = dtw_gps(&coarse, &fine).unwrap();
        // bounding-box diagonal ≈ sqrt((29*111m)^2 + small lon span)
        let diagonal = great_circle(&coarse[0], &coarse[29]);
        assert!(r.distance < 0.01 * diagonal, "{} vs {}", r.distance, diagonal);
    }
}
