//! Route sensing from phone inertial sensors.
//!
//! `routewarp` recognizes repeated vehicle journeys purely from accelerometer
//! and gyroscope time series. A journey leaves a signature in the angular
//! speed the phone experiences as the vehicle turns; after rotating the
//! phone's z-axis onto the vehicle's vertical axis, that signature is
//! comparable across traversals regardless of how the phone was carried.
//!
//! The pipeline:
//!
//! 1. [`align`] — estimate gravity, build the shortest-arc quaternion, rotate
//!    gyroscope output into the vehicle frame and extract 1 Hz yaw rate.
//! 2. [`dtw`] — full, open-ended and open-beginning/open-ended dynamic time
//!    warping over yaw-rate series (and GPS trajectories for validation).
//! 3. [`mining`] — pairwise dissimilarity matrix, BIC-based cluster-count
//!    estimation, k-medoids partitioning, significant-route selection, and
//!    partition agreement metrics (adjusted Rand index, variation of
//!    information).
//! 4. [`stream`] — the online recognizer: 4-minute batches matched against
//!    route medoids with open-beginning/open-ended DTW.
//! 5. [`maneuvers`] — turn extraction, maneuver-string encoding and the
//!    grid-network uniqueness study.
//! 6. [`detect`] — windowed accelerometer features and a small decision tree
//!    gating the pipeline on driving activity.
//! 7. [`synth`] — the synthetic trace generator providing ground truth for
//!    every accuracy claim.
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `routewarp` binary for the batch CLI.

pub mod align;
pub mod cli;
pub mod detect;
pub mod dtw;
pub mod maneuvers;
pub mod mining;
pub mod stream;
pub mod synth;
pub mod trace_io;

pub use align::{align_trace, AlignmentQuaternion, GravityEstimate};
pub use dtw::{dtw_full, dtw_gps, dtw_open_both, dtw_open_ended, great_circle, WarpResult};
pub use mining::{
    corrected_rand, dissimilarity_matrix, estimate_k, k_medoids, significant_routes,
    variation_of_information, DissimilarityMatrix, Partition, RouteModel,
};
pub use trace_io::{AngularSpeedSeries, GpsPoint, ImuSample, ImuTrace};
