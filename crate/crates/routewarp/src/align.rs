//! Z-axis alignment: rotate phone-frame gyroscope output so its z-component
//! reads the vehicle's yaw rate.
//!
//! The vehicle's vertical axis coincides with gravity, so the DC component of
//! the accelerometer gives the phone-frame direction of "up". A shortest-arc
//! quaternion then rotates that direction onto `[0, 0, 1]`; applying the same
//! rotation to the gyroscope vector leaves the vehicle yaw rate in z. The x
//! and y axes stay unresolved on purpose — yaw is all the route signature
//! needs.

use thiserror::Error;

use crate::trace_io::{
    aggregate_1hz_masked, AngularSpeedSeries, ImuTrace, TraceError, STANDARD_GRAVITY,
};

/// Gyro-magnitude threshold (rad/s) treated as the user handling the phone.
/// Vehicle yaw rates rarely exceed 1 rad/s; picking the phone up easily does.
pub const INTERACTION_THRESHOLD: f64 = 2.0;
/// Minimum duration (s) the magnitude must stay above the threshold.
pub const INTERACTION_SUSTAIN: f64 = 0.5;
/// Cap (s) on the gravity-estimation window within one alignment segment.
pub const GRAVITY_WINDOW_CAP: f64 = 240.0;

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("gravity window of {requested} s outside [1, {available:.3}] s")]
    BadWindow { requested: f64, available: f64 },
    #[error("gravity estimate has zero norm")]
    ZeroGravity,
    #[error("quaternion norm {0} too far from 1")]
    NonUnitQuaternion(f64),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// DC component of the accelerometer over some window, in m/s².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityEstimate {
    pub g_p: [f64; 3],
    pub window: f64,
}

impl GravityEstimate {
    pub fn norm(&self) -> f64 {
        let [x, y, z] = self.g_p;
        (x * x + y * y + z * z).sqrt()
    }

    /// A usable estimate sits within ±50 % of standard gravity. Anything
    /// else means the accelerometer was dominated by motion or is broken.
    pub fn is_plausible(&self) -> bool {
        let n = self.norm();
        (0.5 * STANDARD_GRAVITY..=1.5 * STANDARD_GRAVITY).contains(&n)
    }
}

/// Unit quaternion `w + xi + yj + zk`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentQuaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl AlignmentQuaternion {
    pub const IDENTITY: Self = Self {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    /// Hamilton product `self * rhs`.
    pub fn hamilton(&self, rhs: &Self) -> Self {
        Self::new(
            self.w * rhs.w - self.x * rhs.x - self.y * rhs.y - self.z * rhs.z,
            self.w * rhs.x + self.x * rhs.w + self.y * rhs.z - self.z * rhs.y,
            self.w * rhs.y - self.x * rhs.z + self.y * rhs.w + self.z * rhs.x,
            self.w * rhs.z + self.x * rhs.y - self.y * rhs.x + self.z * rhs.w,
        )
    }

    /// Rotates a vector: `q v q⁻¹` with `v` as a pure quaternion.
    pub fn rotate(&self, v: [f64; 3]) -> [f64; 3] {
        let p = Self::new(0.0, v[0], v[1], v[2]);
        let r = self.hamilton(&p).hamilton(&self.conjugate());
        [r.x, r.y, r.z]
    }
}

/// Component-wise mean of the accelerometer over the first `window` seconds.
pub fn estimate_gravity(trace: &ImuTrace, window: f64) -> Result<GravityEstimate, AlignError> {
    let available = trace.duration();
    if window < 1.0 || window > available {
        return Err(AlignError::BadWindow {
            requested: window,
            available,
        });
    }
    let t0 = trace.samples()[0].t;
    let mut sum = [0.0; 3];
    let mut n = 0usize;
    for s in trace.samples() {
        if s.t - t0 > window {
            break;
        }
        for (acc, v) in sum.iter_mut().zip(s.accel) {
            *acc += v;
        }
        n += 1;
    }
    if n == 0 {
        return Err(AlignError::BadWindow {
            requested: window,
            available,
        });
    }
    Ok(GravityEstimate {
        g_p: [sum[0] / n as f64, sum[1] / n as f64, sum[2] / n as f64],
        window,
    })
}

/// Builds the unit quaternion rotating the gravity direction onto `[0,0,1]`
/// through the shortest arc.
///
/// With `ĝ_p` the unit gravity estimate and `ĝ = [0,0,1]`:
/// `ν = ĝ_p·ĝ`, `û = (ĝ_p × ĝ)/‖ĝ_p × ĝ‖`,
/// `q = √((1+ν)/2) + û·√((1−ν)/2)`.
///
/// When gravity points along −z the axis is undefined; a 180° rotation about
/// the phone x-axis is used so the output stays deterministic.
pub fn shortest_arc_quaternion(g_p: [f64; 3]) -> Result<AlignmentQuaternion, AlignError> {
    let norm = (g_p[0] * g_p[0] + g_p[1] * g_p[1] + g_p[2] * g_p[2]).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(AlignError::ZeroGravity);
    }
    let gp = [g_p[0] / norm, g_p[1] / norm, g_p[2] / norm];
    let nu = gp[2]; // ĝ_p · [0,0,1]
    if nu < -1.0 + 1e-6 {
        // antiparallel: any horizontal axis works, fix x̂
        return Ok(AlignmentQuaternion::new(0.0, 1.0, 0.0, 0.0));
    }
    let cos_half = ((1.0 + nu) / 2.0).sqrt();
    let sin_half = ((1.0 - nu).max(0.0) / 2.0).sqrt();
    // u = ĝ_p × ĝ = (gp.y, -gp.x, 0)
    let u = [gp[1], -gp[0], 0.0];
    let u_norm = (u[0] * u[0] + u[1] * u[1]).sqrt();
    if u_norm < 1e-12 {
        // already aligned
        return Ok(AlignmentQuaternion::IDENTITY);
    }
    Ok(AlignmentQuaternion::new(
        cos_half,
        u[0] / u_norm * sin_half,
        u[1] / u_norm * sin_half,
        0.0,
    ))
}

/// Rotates a gyroscope vector into the vehicle frame via `ω_r = q ω q⁻¹`.
///
/// A quaternion within 1e-6 of unit norm is renormalized; anything further
/// off is rejected.
pub fn rotate_gyro(
    q: &AlignmentQuaternion,
    omega: [f64; 3],
) -> Result<[f64; 3], AlignError> {
    let n = q.norm();
    if (n - 1.0).abs() > 1e-6 {
        return Err(AlignError::NonUnitQuaternion(n));
    }
    let q = if n == 1.0 { *q } else { q.normalized() };
    Ok(q.rotate(omega))
}

/// Maximal intervals where the gyro magnitude exceeds `threshold` for at
/// least `sustain` seconds. Intervals are `(start_s, end_s)`, sorted and
/// disjoint.
pub fn detect_interaction(
    trace: &ImuTrace,
    threshold: f64,
    sustain: f64,
) -> Vec<(f64, f64)> {
    assert!(threshold > 0.0, "interaction threshold must be positive");
    let mut intervals = Vec::new();
    let mut run_start: Option<f64> = None;
    let mut run_end = 0.0;
    for s in trace.samples() {
        if s.gyro_norm() > threshold {
            if run_start.is_none() {
                run_start = Some(s.t);
            }
            run_end = s.t;
        } else if let Some(start) = run_start.take() {
            if run_end - start >= sustain {
                intervals.push((start, run_end));
            }
        }
    }
    if let Some(start) = run_start {
        if run_end - start >= sustain {
            intervals.push((start, run_end));
        }
    }
    intervals
}

/// Result of aligning a full trace.
#[derive(Debug, Clone)]
pub struct AlignmentOutput {
    pub series: AngularSpeedSeries,
    /// Detected user-interaction intervals, `(start_s, end_s)`.
    pub interactions: Vec<(f64, f64)>,
    /// Non-fatal issues, e.g. segments dropped for implausible gravity.
    pub warnings: Vec<String>,
}

/// Full alignment pipeline for one trace.
///
/// The trace is cut into segments at user-interaction intervals. Per segment,
/// gravity is estimated over up to [`GRAVITY_WINDOW_CAP`] seconds, the
/// shortest-arc quaternion is built, every gyro sample is rotated and the
/// z-component kept. Interaction spans (and segments whose gravity estimate
/// is implausible) are emitted as masked zeros so the 1 Hz time base stays
/// intact. The per-sample stream is then block-averaged to 1 Hz.
pub fn align_trace(trace: &ImuTrace) -> Result<AlignmentOutput, AlignError> {
    align_trace_with(trace, INTERACTION_THRESHOLD, INTERACTION_SUSTAIN, "trace")
}

pub fn align_trace_with(
    trace: &ImuTrace,
    threshold: f64,
    sustain: f64,
    origin_id: &str,
) -> Result<AlignmentOutput, AlignError> {
    let interactions = detect_interaction(trace, threshold, sustain);
    let samples = trace.samples();
    let t0 = samples[0].t;
    let mut warnings = Vec::new();

    // Segment boundaries in sample indices: alternating quiet / interaction.
    let in_interaction = |t: f64| interactions.iter().any(|&(a, b)| t >= a && t <= b);

    let mut z_series: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
    let mut mask: Vec<bool> = Vec::with_capacity(samples.len());

    let mut i = 0;
    while i < samples.len() {
        if in_interaction(samples[i].t) {
            z_series.push((samples[i].t - t0, 0.0));
            mask.push(true);
            i += 1;
            continue;
        }
        // collect one quiet segment
        let seg_start = i;
        while i < samples.len() && !in_interaction(samples[i].t) {
            i += 1;
        }
        let segment = &samples[seg_start..i];
        let seg_dur = segment.last().unwrap().t - segment[0].t;
        let window_end = segment[0].t + seg_dur.min(GRAVITY_WINDOW_CAP);
        let mut sum = [0.0; 3];
        let mut n = 0usize;
        for s in segment {
            if s.t > window_end {
                break;
            }
            for (acc, v) in sum.iter_mut().zip(s.accel) {
                *acc += v;
            }
            n += 1;
        }
        let estimate = GravityEstimate {
            g_p: [sum[0] / n as f64, sum[1] / n as f64, sum[2] / n as f64],
            window: seg_dur.min(GRAVITY_WINDOW_CAP),
        };
        if !estimate.is_plausible() {
            warnings.push(format!(
                "segment at {:.1} s dropped: gravity norm {:.2} m/s² implausible",
                segment[0].t,
                estimate.norm()
            ));
            for s in segment {
                z_series.push((s.t - t0, 0.0));
                mask.push(true);
            }
            continue;
        }
        let q = shortest_arc_quaternion(estimate.g_p)?;
        for s in segment {
            let rotated = q.rotate(s.gyro);
            z_series.push((s.t - t0, rotated[2]));
            mask.push(false);
        }
    }

    let series = aggregate_1hz_masked(&z_series, &mask, origin_id)?;
    Ok(AlignmentOutput {
        series,
        interactions,
        warnings,
    })
}
