//! The online recognition pipeline: aligned angular speed arrives in
//! batches (4 minutes each in the reference setup), the buffer is re-matched
//! against every route medoid with open-beginning/open-ended DTW after each
//! batch, and after five unmatched rounds the journey is declared a new
//! route. Open-beginning matching matters because journeys start and end in
//! car parks where turns differ between trips.

use thiserror::Error;

use crate::dtw::{dtw_open_both, masked_abs_diff, masked_values, MaskedValue};
use crate::mining::RouteModel;
use crate::trace_io::AngularSpeedSeries;

/// Batches per journey before giving up; five batches of 4 minutes is the
/// 20-minute budget.
pub const MAX_BATCHES: usize = 5;
/// Hard cap on one batch, samples (seconds at 1 Hz).
pub const BATCH_CAP: usize = 240;
/// Buffer cap: MAX_BATCHES full batches.
pub const BUFFER_CAP: usize = MAX_BATCHES * BATCH_CAP;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("verdict already decided; no further batches accepted")]
    AlreadyDecided,
    #[error("batch of {0} values exceeds the {BATCH_CAP}-value cap")]
    OversizedBatch(usize),
    #[error("empty batch")]
    EmptyBatch,
    #[error("batch_seconds {0} outside 1..={BATCH_CAP}")]
    BadBatchSeconds(usize),
}

/// Final call for one journey.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Pending,
    Matched { cluster: usize, distance: f64 },
    NewRoute,
}

impl Verdict {
    pub fn is_pending(&self) -> bool {
        matches!(self, Verdict::Pending)
    }
}

/// Per-batch recognition record.
#[derive(Debug, Clone)]
pub struct RecognitionEvent {
    pub at_batch: usize,
    pub elapsed_s: usize,
    pub verdict: Verdict,
    /// Normalized open-both distance to each medoid, model order.
    pub distances: Vec<f64>,
}

/// Accumulating match state for one journey.
#[derive(Debug, Clone)]
pub struct StreamState {
    buffered: Vec<MaskedValue>,
    batch_count: usize,
    verdict: Verdict,
}

impl Default for StreamState {
    fn default() -> Self {
        Self::new()
    }
}

impl StreamState {
    pub fn new() -> Self {
        Self {
            buffered: Vec::new(),
            batch_count: 0,
            verdict: Verdict::Pending,
        }
    }

    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    pub fn batch_count(&self) -> usize {
        self.batch_count
    }

    pub fn buffered_len(&self) -> usize {
        self.buffered.len()
    }

    /// Appends one batch, recomputes per-medoid distances over everything
    /// buffered so far and updates the verdict: matched when the best
    /// distance beats that cluster's threshold, new-route after
    /// [`MAX_BATCHES`] unmatched rounds (immediately when the model is
    /// empty), pending otherwise.
    pub fn ingest_batch(
        &mut self,
        batch: &AngularSpeedSeries,
        model: &RouteModel,
    ) -> Result<RecognitionEvent, StreamError> {
        if !self.verdict.is_pending() {
            return Err(StreamError::AlreadyDecided);
        }
        if batch.is_empty() {
            return Err(StreamError::EmptyBatch);
        }
        if batch.len() > BATCH_CAP {
            return Err(StreamError::OversizedBatch(batch.len()));
        }
        self.buffered.extend(masked_values(batch));
        self.buffered.truncate(BUFFER_CAP);
        self.batch_count += 1;

        let mut distances = Vec::with_capacity(model.k);
        let mut best: Option<(usize, f64)> = None;
        for (cid, cluster) in model.clusters.iter().enumerate() {
            let medoid = masked_values(&model.medoid_series(cid));
            let d = dtw_open_both(&self.buffered, &medoid, masked_abs_diff)
                .expect("buffered and medoid are non-empty")
                .distance;
            distances.push(d);
            if d < cluster.match_threshold
                && best.map_or(true, |(_, bd)| d < bd)
            {
                best = Some((cid, d));
            }
        }
        self.verdict = match best {
            Some((cluster, distance)) => Verdict::Matched { cluster, distance },
            None if model.k == 0 || self.batch_count >= MAX_BATCHES => Verdict::NewRoute,
            None => Verdict::Pending,
        };
        Ok(RecognitionEvent {
            at_batch: self.batch_count,
            elapsed_s: self.buffered.len(),
            verdict: self.verdict,
            distances,
        })
    }

    /// Forces a decision when the journey ended while still pending.
    pub fn finalize(&mut self) {
        if self.verdict.is_pending() {
            self.verdict = Verdict::NewRoute;
        }
    }
}

/// Replays an aligned series through the streaming recognizer in
/// `batch_seconds` chunks (a trailing partial batch is allowed). The final
/// event is never pending: a journey that ends unmatched is a new route.
pub fn replay(
    series: &AngularSpeedSeries,
    model: &RouteModel,
    batch_seconds: usize,
) -> Result<Vec<RecognitionEvent>, StreamError> {
    if batch_seconds == 0 || batch_seconds > BATCH_CAP {
        return Err(StreamError::BadBatchSeconds(batch_seconds));
    }
    if series.is_empty() {
        return Err(StreamError::EmptyBatch);
    }
    let mut state = StreamState::new();
    let mut events = Vec::new();
    let mut offset = 0;
    while offset < series.len() && state.verdict().is_pending() {
        let end = (offset + batch_seconds).min(series.len());
        let event = state.ingest_batch(&series.slice(offset, end), model)?;
        events.push(event);
        offset = end;
    }
    if state.verdict().is_pending() {
        state.finalize();
        if let Some(last) = events.last_mut() {
            last.verdict = state.verdict();
        }
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mining::{RouteCluster, RouteModel, ROUTE_MODEL_FORMAT_VERSION};

    fn model_from(medoids: Vec<(Vec<f64>, f64)>) -> RouteModel {
        let clusters: Vec<RouteCluster> = medoids
            .into_iter()
            .enumerate()
            .map(|(i, (values, threshold))| RouteCluster {
                cluster_id: i,
                medoid_id: format!("m{i}"),
                member_ids: vec![format!("m{i}")],
                match_threshold: threshold,
                medoid_mask: vec![false; values.len()],
                medoid_values: values,
            })
            .collect();
        RouteModel {
            format_version: ROUTE_MODEL_FORMAT_VERSION,
            k: clusters.len(),
            tau: 3,
            clusters,
            assignment: Vec::new(),
        }
    }

    fn series(values: Vec<f64>) -> AngularSpeedSeries {
        AngularSpeedSeries::new(values, "s")
    }

    #[test]
    fn prefix_of_medoid_matches_first_batch() {
        let medoid: Vec<f64> = (0..400).map(|i| (i as f64 * 0.13).sin() * 0.5).collect();
        let model = model_from(vec![(medoid.clone(), 0.05)]);
        let mut state = StreamState::new();
        let event = state
            .ingest_batch(&series(medoid[..240].to_vec()), &model)
            .unwrap();
        assert_eq!(event.at_batch, 1);
        match event.verdict {
            Verdict::Matched { cluster, distance } => {
                assert_eq!(cluster, 0);
                assert!(distance < 1e-12);
            }
            v => panic!("expected a match, got {v:?}"),
        }
    }

    #[test]
    fn unmatched_becomes_new_route_at_batch_five() {
        let medoid: Vec<f64> = (0..300).map(|i| (i as f64 * 0.2).sin()).collect();
        let model = model_from(vec![(medoid, 0.0001)]);
        let noise: Vec<f64> = (0..1300).map(|i| ((i * 37) % 17) as f64 * 0.2 - 1.5).collect();
        let mut state = StreamState::new();
        for b in 0..5 {
            let event = state
                .ingest_batch(&series(noise[b * 240..(b + 1) * 240].to_vec()), &model)
                .unwrap();
            if b < 4 {
                assert_eq!(event.verdict, Verdict::Pending);
            } else {
                assert_eq!(event.verdict, Verdict::NewRoute);
            }
        }
    }

    #[test]
    fn verdict_monotone_no_ingest_after_decision() {
        let model = model_from(vec![]);
        let mut state = StreamState::new();
        // empty model: first batch decides new_route immediately
        let event = state.ingest_batch(&series(vec![0.0; 10]), &model).unwrap();
        assert_eq!(event.verdict, Verdict::NewRoute);
        assert!(matches!(
            state.ingest_batch(&series(vec![0.0; 10]), &model),
            Err(StreamError::AlreadyDecided)
        ));
    }

    #[test]
    fn oversized_batch_rejected() {
        let model = model_from(vec![]);
        let mut state = StreamState::new();
        assert!(matches!(
            state.ingest_batch(&series(vec![0.0; 241]), &model),
            Err(StreamError::OversizedBatch(241))
        ));
    }

    #[test]
    fn replay_distances_match_direct_open_both() {
        use crate::dtw::{dtw_open_both, masked_abs_diff, masked_values};
        let medoid: Vec<f64> = (0..500).map(|i| (i as f64 * 0.11).sin() * 0.6).collect();
        let model = model_from(vec![(medoid.clone(), 1e-9)]); // never matches
        let journey: Vec<f64> = (0..700).map(|i| (i as f64 * 0.07).cos() * 0.4).collect();
        let s = series(journey.clone());
        let events = replay(&s, &model, 240).unwrap();
        for (b, event) in events.iter().enumerate() {
            let prefix_len = (240 * (b + 1)).min(journey.len());
            let direct = dtw_open_both(
                &masked_values(&series(journey[..prefix_len].to_vec())),
                &masked_values(&series(medoid.clone())),
                masked_abs_diff,
            )
            .unwrap()
            .distance;
            assert_eq!(event.distances[0], direct, "batch {b}");
            assert_eq!(event.elapsed_s, prefix_len);
        }
    }

    #[test]
    fn replay_short_trace_finalizes() {
        let medoid: Vec<f64> = (0..300).map(|i| (i as f64 * 0.2).sin()).collect();
        let model = model_from(vec![(medoid, 1e-9)]);
        let s = series(vec![0.7; 100]); // one partial batch, no match
        let events = replay(&s, &model, 240).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].verdict, Verdict::NewRoute);
    }

    #[test]
    fn replay_stops_early_on_match() {
        let medoid: Vec<f64> = (0..900).map(|i| (i as f64 * 0.09).sin() * 0.5).collect();
        let model = model_from(vec![(medoid.clone(), 0.05)]);
        let events = replay(&series(medoid.clone()), &model, 240).unwrap();
        assert!(events.len() <= 2);
        assert!(matches!(
            events.last().unwrap().verdict,
            Verdict::Matched { .. }
        ));
    }

    #[test]
    fn batch_seconds_validated() {
        let model = model_from(vec![]);
        assert!(matches!(
            replay(&series(vec![0.0; 10]), &model, 0),
            Err(StreamError::BadBatchSeconds(0))
        ));
        assert!(matches!(
            replay(&series(vec![0.0; 10]), &model, 500),
            Err(StreamError::BadBatchSeconds(500))
        ));
    }
}
