//! Turn extraction, maneuver strings and the grid-network uniqueness study.
//!
//! A journey's turns are recovered by integrating aligned angular speed over
//! excursions above an onset threshold, then encoded into a four-letter
//! alphabet by signed turn angle:
//!
//! | angle t (deg)      | meaning      | letter |
//! |--------------------|--------------|--------|
//! | t < −30            | right        | R      |
//! | −30 ≤ t < −15      | slight right | S      |
//! | 15 < t ≤ 30        | slight left  | T      |
//! | t > 30             | left         | L      |
//! | −15 ≤ t ≤ 15       | ignored      |        |
//!
//! Left turns (counter-clockwise, z-up) are positive. The uniqueness study
//! generates seeded shortest-path trips on a lattice road network and plots
//! the longest common turn substring against spatial overlap for every trip
//! pair.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::trace_io::AngularSpeedSeries;

/// Default onset (rad/s) above which angular speed counts as turning.
pub const TURN_ONSET: f64 = 0.1;
/// Events closer than this (s) merge into one turn: a curve taken with a
/// brief steering correction is still one turn.
pub const TURN_MERGE_GAP: f64 = 2.0;

/// One integrated turn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnEvent {
    pub t_start: f64,
    pub t_end: f64,
    /// Signed angle in degrees; positive is left (counter-clockwise).
    pub angle: f64,
}

/// Journey encoded over the turn alphabet `{L, R, S, T}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ManeuverString(pub String);

impl ManeuverString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for ManeuverString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Maximal excursions of |ω_z| above `onset` become events; the angle is the
/// integral of ω_z over the excursion (1 s steps at 1 Hz), in degrees.
/// Adjacent events separated by less than [`TURN_MERGE_GAP`] are merged.
pub fn extract_turns(series: &AngularSpeedSeries, onset: f64) -> Vec<TurnEvent> {
    assert!(onset > 0.0, "turn onset must be positive");
    let mut events: Vec<TurnEvent> = Vec::new();
    let mut current: Option<(usize, f64)> = None; // (start index, integral rad)
    for (k, (&v, &masked)) in series.values.iter().zip(&series.mask).enumerate() {
        let active = !masked && v.abs() > onset;
        match (&mut current, active) {
            (None, true) => current = Some((k, v)),
            (Some((_, integral)), true) => *integral += v,
            (Some((start, integral)), false) => {
                events.push(TurnEvent {
                    t_start: *start as f64,
                    t_end: k as f64,
                    angle: integral.to_degrees(),
                });
                current = None;
            }
            (None, false) => {}
        }
    }
    if let Some((start, integral)) = current {
        events.push(TurnEvent {
            t_start: start as f64,
            t_end: series.len() as f64,
            angle: integral.to_degrees(),
        });
    }
    // merge events separated by a short quiet gap
    let mut merged: Vec<TurnEvent> = Vec::with_capacity(events.len());
    for e in events {
        match merged.last_mut() {
            Some(last) if e.t_start - last.t_end < TURN_MERGE_GAP => {
                last.t_end = e.t_end;
                last.angle += e.angle;
            }
            _ => merged.push(e),
        }
    }
    merged
}

/// Encodes turn events by angle; the ±15° band is dropped.
pub fn encode_turns(events: &[TurnEvent]) -> ManeuverString {
    let mut s = String::with_capacity(events.len());
    for e in events {
        if let Some(c) = encode_angle(e.angle) {
            s.push(c);
        }
    }
    ManeuverString(s)
}

pub fn encode_angle(t: f64) -> Option<char> {
    if t < -30.0 {
        Some('R')
    } else if t < -15.0 {
        Some('S')
    } else if t > 30.0 {
        Some('L')
    } else if t > 15.0 {
        Some('T')
    } else {
        None
    }
}

/// Length of the longest common contiguous substring.
pub fn longest_common_turns(a: &ManeuverString, b: &ManeuverString) -> usize {
    longest_common_substring(a.as_str(), b.as_str())
}

fn longest_common_substring(a: &str, b: &str) -> usize {
    let (a, b) = (a.as_bytes(), b.as_bytes());
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut best = 0;
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for &ca in a {
        for (j, &cb) in b.iter().enumerate() {
            cur[j + 1] = if ca == cb { prev[j] + 1 } else { 0 };
            best = best.max(cur[j + 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// Length of the longest common (not necessarily contiguous) subsequence;
/// kept alongside the substring variant for comparison in the study.
pub fn longest_common_subsequence(a: &ManeuverString, b: &ManeuverString) -> usize {
    let (a, b) = (a.as_str().as_bytes(), b.as_str().as_bytes());
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for &ca in a {
        for (j, &cb) in b.iter().enumerate() {
            cur[j + 1] = if ca == cb {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// A rectangular 4-connected road lattice with uniform block spacing.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridNetwork {
    pub rows: usize,
    pub cols: usize,
    /// Block edge length, meters.
    pub spacing: f64,
}

/// A node as (row, col).
pub type GridNode = (usize, usize);

impl GridNetwork {
    pub fn new(rows: usize, cols: usize, spacing: f64) -> Self {
        assert!(rows >= 2 && cols >= 2, "grid needs at least 2x2 nodes");
        assert!(spacing > 0.0, "spacing must be positive");
        Self {
            rows,
            cols,
            spacing,
        }
    }

    pub fn contains(&self, node: GridNode) -> bool {
        node.0 < self.rows && node.1 < self.cols
    }

    /// Planar coordinates in meters: x east along columns, y north along rows.
    pub fn coords(&self, node: GridNode) -> [f64; 2] {
        [node.1 as f64 * self.spacing, node.0 as f64 * self.spacing]
    }

    pub fn neighbors(&self, node: GridNode) -> Vec<GridNode> {
        let mut out = Vec::with_capacity(4);
        let (r, c) = node;
        if r > 0 {
            out.push((r - 1, c));
        }
        if r + 1 < self.rows {
            out.push((r + 1, c));
        }
        if c > 0 {
            out.push((r, c - 1));
        }
        if c + 1 < self.cols {
            out.push((r, c + 1));
        }
        out
    }
}

/// A trip on the grid: node path plus its geometric maneuver string.
#[derive(Debug, Clone)]
pub struct GridRoute {
    pub nodes: Vec<GridNode>,
    pub maneuvers: ManeuverString,
}

impl GridRoute {
    pub fn polyline(&self, network: &GridNetwork) -> Vec<[f64; 2]> {
        self.nodes.iter().map(|&n| network.coords(n)).collect()
    }

    pub fn length_m(&self, network: &GridNetwork) -> f64 {
        (self.nodes.len().saturating_sub(1)) as f64 * network.spacing
    }

    pub fn edge_set(&self) -> HashSet<(GridNode, GridNode)> {
        path_edge_set(&self.nodes)
    }
}

fn path_edge_set(nodes: &[GridNode]) -> HashSet<(GridNode, GridNode)> {
    nodes
        .windows(2)
        .map(|w| if w[0] <= w[1] { (w[0], w[1]) } else { (w[1], w[0]) })
        .collect()
}

/// Uniformly samples one shortest lattice path from `src` to `dst`.
///
/// Shortest paths form a monotone staircase; at each node the next step goes
/// toward the destination in row or column, with probability proportional to
/// the number of remaining shortest paths through each choice, which reduces
/// to `dr/(dr+dc)`.
pub fn grid_route(
    network: &GridNetwork,
    src: GridNode,
    dst: GridNode,
    seed: u64,
) -> GridRoute {
    assert!(network.contains(src) && network.contains(dst), "node off-grid");
    assert_ne!(src, dst, "src and dst must differ");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = vec![src];
    let (mut r, mut c) = src;
    while (r, c) != dst {
        let dr = dst.0.abs_diff(r);
        let dc = dst.1.abs_diff(c);
        let step_row = dr > 0 && (dc == 0 || rng.gen_range(0..dr + dc) < dr);
        if step_row {
            r = if dst.0 > r { r + 1 } else { r - 1 };
        } else {
            c = if dst.1 > c { c + 1 } else { c - 1 };
        }
        nodes.push((r, c));
    }
    let maneuvers = maneuvers_of_path(network, &nodes);
    GridRoute { nodes, maneuvers }
}

/// Maneuver string from geometric heading changes along a node path.
pub fn maneuvers_of_path(network: &GridNetwork, nodes: &[GridNode]) -> ManeuverString {
    let mut s = String::new();
    for w in nodes.windows(3) {
        let p0 = network.coords(w[0]);
        let p1 = network.coords(w[1]);
        let p2 = network.coords(w[2]);
        let h1 = (p1[1] - p0[1]).atan2(p1[0] - p0[0]);
        let h2 = (p2[1] - p1[1]).atan2(p2[0] - p1[0]);
        let mut dh = (h2 - h1).to_degrees();
        while dh > 180.0 {
            dh -= 360.0;
        }
        while dh < -180.0 {
            dh += 360.0;
        }
        if let Some(ch) = encode_angle(dh) {
            s.push(ch);
        }
    }
    ManeuverString(s)
}

/// Total length of shared undirected edges between two grid paths, meters.
pub fn overlap_length(network: &GridNetwork, a: &[GridNode], b: &[GridNode]) -> f64 {
    let ea = path_edge_set(a);
    let eb = path_edge_set(b);
    ea.intersection(&eb).count() as f64 * network.spacing
}

/// One trip pair of the uniqueness study.
#[derive(Debug, Clone, Copy)]
pub struct StudyPoint {
    pub overlap_m: f64,
    pub lcs_turns: usize,
    pub lcs_subsequence: usize,
}

/// Output of [`uniqueness_study`].
#[derive(Debug, Clone)]
pub struct StudyResult {
    pub pairs: Vec<StudyPoint>,
    /// Per-trip turn counts and maneuver strings.
    pub trips: Vec<(usize, ManeuverString)>,
    /// `(bin_low_m, bin_high_m, pair_count, mean_lcs)` rows; the last bin is
    /// open-ended so tail bins never starve.
    pub bins: Vec<(f64, f64, usize, f64)>,
}

/// Width of one overlap bin in the study summary, meters.
pub const STUDY_BIN_WIDTH_M: f64 = 500.0;
/// Overlap at and beyond which pairs land in the final open-ended bin.
pub const STUDY_BIN_CAP_M: f64 = 2500.0;

impl StudyResult {
    pub fn mean_turns_per_trip(&self) -> f64 {
        self.trips.iter().map(|(t, _)| *t as f64).sum::<f64>() / self.trips.len() as f64
    }

    pub fn zero_overlap_mean_lcs(&self) -> f64 {
        let zero: Vec<&StudyPoint> = self
            .pairs
            .iter()
            .filter(|p| p.overlap_m == 0.0)
            .collect();
        if zero.is_empty() {
            return 0.0;
        }
        zero.iter().map(|p| p.lcs_turns as f64).sum::<f64>() / zero.len() as f64
    }
}

/// Generates `trips` seeded random shortest-path trips and compares every
/// pair: spatial overlap in meters against the longest common turn sequence
/// (both substring and subsequence variants).
///
/// Bin 0 holds exactly the zero-overlap pairs; the rest are
/// [`STUDY_BIN_WIDTH_M`]-wide with one open-ended tail from
/// [`STUDY_BIN_CAP_M`].
pub fn uniqueness_study(network: &GridNetwork, trips: usize, seed: u64) -> StudyResult {
    assert!(trips >= 2, "need at least two trips");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut routes = Vec::with_capacity(trips);
    for _ in 0..trips {
        let (src, dst) = loop {
            let src = (rng.gen_range(0..network.rows), rng.gen_range(0..network.cols));
            let dst = (rng.gen_range(0..network.rows), rng.gen_range(0..network.cols));
            if src != dst {
                break (src, dst);
            }
        };
        routes.push(grid_route(network, src, dst, rng.gen()));
    }

    let edge_sets: Vec<HashSet<(GridNode, GridNode)>> =
        routes.iter().map(|r| r.edge_set()).collect();
    let mut pairs = Vec::with_capacity(trips * (trips - 1) / 2);
    for i in 0..trips {
        for j in i + 1..trips {
            let overlap_m = edge_sets[i].intersection(&edge_sets[j]).count() as f64
                * network.spacing;
            pairs.push(StudyPoint {
                overlap_m,
                lcs_turns: longest_common_turns(&routes[i].maneuvers, &routes[j].maneuvers),
                lcs_subsequence: longest_common_subsequence(
                    &routes[i].maneuvers,
                    &routes[j].maneuvers,
                ),
            });
        }
    }

    let n_bins = (STUDY_BIN_CAP_M / STUDY_BIN_WIDTH_M) as usize + 2;
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for p in &pairs {
        let bin = if p.overlap_m == 0.0 {
            0
        } else if p.overlap_m >= STUDY_BIN_CAP_M {
            n_bins - 1
        } else {
            (p.overlap_m / STUDY_BIN_WIDTH_M) as usize + 1
        };
        sums[bin] += p.lcs_turns as f64;
        counts[bin] += 1;
    }
    let mut bins = Vec::new();
    for b in 0..n_bins {
        if counts[b] == 0 {
            continue;
        }
        // the zero bin is exactly zero overlap; bin b covers
        // ((b-1)·W, b·W] and the last bin is open-ended
        let (low, high) = if b == 0 {
            (0.0, 0.0)
        } else if b == n_bins - 1 {
            (STUDY_BIN_CAP_M, f64::INFINITY)
        } else {
            ((b - 1) as f64 * STUDY_BIN_WIDTH_M, b as f64 * STUDY_BIN_WIDTH_M)
        };
        bins.push((low, high, counts[b], sums[b] / counts[b] as f64));
    }

    StudyResult {
        pairs,
        trips: routes
            .into_iter()
            .map(|r| (r.maneuvers.len(), r.maneuvers))
            .collect(),
        bins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn series(values: Vec<f64>) -> AngularSpeedSeries {
        AngularSpeedSeries::new(values, "test")
    }

    #[test]
    fn extract_no_turns_from_quiet_series() {
        assert!(extract_turns(&series(vec![0.0; 20]), 0.1).is_empty());
    }

    #[test]
    fn extract_90_degree_plateau() {
        let mut v = vec![0.0; 5];
        v.extend([0.523; 3]);
        v.extend([0.0; 5]);
        let events = extract_turns(&series(v), 0.1);
        assert_eq!(events.len(), 1);
        assert_abs_diff_eq!(events[0].angle, 89.9, epsilon = 0.2);
    }

    #[test]
    fn extract_two_right_turns() {
        let mut v = vec![0.0; 4];
        v.extend([-0.523; 3]);
        v.extend([0.0; 4]); // 4 s quiet: beyond the merge gap
        v.extend([-0.523; 3]);
        v.extend([0.0; 4]);
        let events = extract_turns(&series(v), 0.1);
        assert_eq!(events.len(), 2);
        for e in events {
            assert_abs_diff_eq!(e.angle, -89.9, epsilon = 0.2);
        }
    }

    #[test]
    fn extract_merges_interrupted_turn() {
        let mut v = vec![0.0; 4];
        v.extend([0.4; 2]);
        v.push(0.05); // one-second dip below onset
        v.extend([0.4; 2]);
        v.extend([0.0; 4]);
        let events = extract_turns(&series(v), 0.1);
        assert_eq!(events.len(), 1);
    }

    #[test]
    fn encode_table_rules() {
        assert_eq!(encode_angle(-45.0), Some('R'));
        assert_eq!(encode_angle(20.0), Some('T'));
        assert_eq!(encode_angle(10.0), None);
        // boundaries, exactly as the table bands state
        assert_eq!(encode_angle(-30.0), Some('S'));
        assert_eq!(encode_angle(-15.0), None);
        assert_eq!(encode_angle(15.0), None);
        assert_eq!(encode_angle(30.0), Some('T'));
        assert_eq!(encode_angle(30.0001), Some('L'));
        assert_eq!(encode_angle(-30.0001), Some('R'));
    }

    #[test]
    fn encode_drops_ignore_band() {
        let events = vec![
            TurnEvent { t_start: 0.0, t_end: 1.0, angle: -45.0 },
            TurnEvent { t_start: 5.0, t_end: 6.0, angle: 10.0 },
            TurnEvent { t_start: 9.0, t_end: 10.0, angle: 95.0 },
        ];
        assert_eq!(encode_turns(&events).as_str(), "RL");
    }

    fn brute_force_lcs(a: &str, b: &str) -> usize {
        let mut best = 0;
        for i in 0..a.len() {
            for j in i + 1..=a.len() {
                if b.contains(&a[i..j]) {
                    best = best.max(j - i);
                }
            }
        }
        best
    }

    #[test]
    fn lcs_examples() {
        let m = |s: &str| ManeuverString(s.to_string());
        assert_eq!(longest_common_turns(&m("LRLR"), &m("LRLR")), 4);
        assert_eq!(longest_common_turns(&m("LRLR"), &m("RLRL")), 3);
        assert_eq!(longest_common_turns(&m(""), &m("LRLR")), 0);
        assert_eq!(longest_common_turns(&m("LRLR"), &m("")), 0);
    }

    #[test]
    fn lcs_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let alphabet = ['L', 'R', 'S', 'T'];
        for _ in 0..60 {
            let mk = |rng: &mut ChaCha8Rng| -> String {
                (0..rng.gen_range(0..12))
                    .map(|_| alphabet[rng.gen_range(0..4)])
                    .collect()
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let got = longest_common_substring(&a, &b);
            assert_eq!(got, brute_force_lcs(&a, &b), "a={a} b={b}");
            assert_eq!(got, longest_common_substring(&b, &a));
        }
    }

    #[test]
    fn lcs_bounded_by_min_and_substring_hit() {
        let m = |s: &str| ManeuverString(s.to_string());
        let a = m("LRS");
        let b = m("TLRST");
        assert_eq!(longest_common_turns(&a, &b), 3);
        assert!(longest_common_turns(&a, &b) <= a.len().min(b.len()));
    }

    #[test]
    fn grid_route_adjacent_is_straight() {
        let g = GridNetwork::new(5, 5, 100.0);
        let r = grid_route(&g, (2, 2), (2, 3), 1);
        assert_eq!(r.nodes.len(), 2);
        assert!(r.maneuvers.is_empty());
    }

    #[test]
    fn grid_route_l_shape_one_turn() {
        let g = GridNetwork::new(5, 5, 100.0);
        // forced L: (0,0) -> (0,1) is unique only when dr or dc is zero on
        // each leg, so pick dst = (1,1) and check every sampled path has one
        // 90 degree turn
        for seed in 0..10 {
            let r = grid_route(&g, (0, 0), (1, 1), seed);
            assert_eq!(r.nodes.len(), 3);
            assert_eq!(r.maneuvers.len(), 1);
        }
    }

    #[test]
    fn grid_route_maneuvers_match_heading_changes() {
        let g = GridNetwork::new(20, 20, 100.0);
        let r = grid_route(&g, (1, 2), (17, 15), 42);
        // recompute heading changes >= 15 degrees from the polyline
        let poly = r.polyline(&g);
        let mut turns = 0;
        for w in poly.windows(3) {
            let h1 = (w[1][1] - w[0][1]).atan2(w[1][0] - w[0][0]);
            let h2 = (w[2][1] - w[1][1]).atan2(w[2][0] - w[1][0]);
            let mut dh = (h2 - h1).to_degrees().abs();
            if dh > 180.0 {
                dh = 360.0 - dh;
            }
            if dh >= 15.0 {
                turns += 1;
            }
        }
        assert_eq!(r.maneuvers.len(), turns);
    }

    #[test]
    fn grid_route_shortest_length() {
        let g = GridNetwork::new(10, 10, 100.0);
        let r = grid_route(&g, (0, 0), (4, 7), 3);
        assert_eq!(r.nodes.len(), 4 + 7 + 1);
    }

    #[test]
    fn overlap_identical_full_length() {
        let g = GridNetwork::new(10, 10, 100.0);
        let r = grid_route(&g, (0, 0), (4, 7), 3);
        assert_eq!(
            overlap_length(&g, &r.nodes, &r.nodes),
            r.length_m(&g)
        );
    }

    #[test]
    fn overlap_disjoint_zero() {
        let g = GridNetwork::new(10, 10, 100.0);
        let a = vec![(0, 0), (0, 1), (0, 2)];
        let b = vec![(5, 0), (5, 1), (5, 2)];
        assert_eq!(overlap_length(&g, &a, &b), 0.0);
    }

    #[test]
    fn overlap_three_shared_edges() {
        let g = GridNetwork::new(10, 10, 100.0);
        let a = vec![(0, 0), (0, 1), (0, 2), (0, 3), (1, 3)];
        let b = vec![(1, 0), (0, 0), (0, 1), (0, 2), (0, 3), (0, 4)];
        assert_eq!(overlap_length(&g, &a, &b), 300.0);
    }

    #[test]
    fn study_two_identical_trips() {
        let g = GridNetwork::new(8, 8, 100.0);
        // craft two trips from the same seed and endpoints by calling the
        // study on a tiny grid until a duplicate pair exists is flaky;
        // instead check the invariant directly
        let r = grid_route(&g, (0, 0), (5, 6), 7);
        let overlap = overlap_length(&g, &r.nodes, &r.nodes);
        assert_eq!(overlap, r.length_m(&g));
        assert_eq!(
            longest_common_turns(&r.maneuvers, &r.maneuvers),
            r.maneuvers.len()
        );
    }

    #[test]
    fn study_deterministic() {
        let g = GridNetwork::new(10, 10, 100.0);
        let a = uniqueness_study(&g, 30, 5);
        let b = uniqueness_study(&g, 30, 5);
        assert_eq!(a.pairs.len(), b.pairs.len());
        for (x, y) in a.pairs.iter().zip(&b.pairs) {
            assert_eq!(x.overlap_m, y.overlap_m);
            assert_eq!(x.lcs_turns, y.lcs_turns);
        }
        assert_eq!(a.bins, b.bins);
    }

    #[test]
    fn study_pair_count() {
        let g = GridNetwork::new(10, 10, 100.0);
        let s = uniqueness_study(&g, 25, 5);
        assert_eq!(s.pairs.len(), 25 * 24 / 2);
        assert_eq!(s.trips.len(), 25);
    }

    #[test]
    fn subsequence_at_least_substring() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let alphabet = ['L', 'R', 'S', 'T'];
        for _ in 0..30 {
            let mk = |rng: &mut ChaCha8Rng| -> ManeuverString {
                ManeuverString(
                    (0..rng.gen_range(0..15))
                        .map(|_| alphabet[rng.gen_range(0..4)])
                        .collect(),
                )
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            assert!(longest_common_subsequence(&a, &b) >= longest_common_turns(&a, &b));
        }
    }
}
