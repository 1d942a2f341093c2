//! Synthetic journey generator: routes, speed profiles and the resulting
//! noisy IMU traces under arbitrary phone orientations, with exact ground
//! truth riding along.
//!
//! The vehicle follows a planar polyline under a piecewise speed profile.
//! Heading changes at polyline corners are smoothed into yaw-rate pulses of
//! duration `turn_radius·|Δψ| / v` (at least 1.5 s); each IMU sample stores
//! the exact average of the pulse train over its sampling interval, so the
//! discrete integral of the ground-truth yaw rate equals the net heading
//! change of the route to float precision. The accelerometer sees gravity
//! plus longitudinal and centripetal acceleration. Everything is rotated
//! into the phone frame by the scenario's orientation quaternion and then
//! perturbed with white Gaussian noise.
//!
//! With `corner_speed_range` set, the vehicle brakes into corners the way a
//! real driver does: each corner draws a target speed and the profile speed
//! is capped by a braking funnel around the vertex. Corpus generation relies
//! on this — it stretches turns over several 1 Hz samples and keeps their
//! amplitudes in a narrow band, which is what makes repeated traversals of
//! one route nearly identical under warping.
//!
//! Scripted user interactions overwrite the gyro with high-magnitude bursts
//! and re-draw the orientation, which is what forces re-alignment downstream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::AlignmentQuaternion;
use crate::maneuvers::{maneuvers_of_path, GridNetwork, GridNode};
use crate::trace_io::{
    aggregate_1hz_masked, AngularSpeedSeries, GpsPoint, ImuSample, ImuTrace, TraceError,
    STANDARD_GRAVITY,
};

/// Grid corpora are anchored here when emitting GPS coordinates.
pub const BASE_LAT: f64 = 52.2;
pub const BASE_LON: f64 = 0.12;
/// Meters per degree of latitude on the mean-radius sphere.
const METERS_PER_DEG: f64 = std::f64::consts::PI * 6_371_000.0 / 180.0;

/// Minimum duration of a turn transition, seconds.
pub const MIN_TURN_S: f64 = 1.5;
/// GPS fixes are emitted noiselessly every 5 s (0.2 Hz).
pub const GPS_PERIOD_S: f64 = 5.0;
/// Default corner radius, meters.
pub const DEFAULT_TURN_RADIUS_M: f64 = 12.0;
/// Default sensor noise, consumer-MEMS order of magnitude.
pub const DEFAULT_GYRO_SIGMA: f64 = 0.005;
pub const DEFAULT_ACCEL_SIGMA: f64 = 0.05;
/// Corner target speeds for corpus traversals, m/s.
pub const CORPUS_CORNER_SPEEDS: (f64, f64) = (3.4, 7.2);
/// Corner radius for corpus traversals; generous urban corners make turns
/// span several 1 Hz samples.
pub const CORPUS_TURN_RADIUS_M: f64 = 30.0;
/// Braking funnel slope around corners, (m/s) per meter of distance.
const BRAKE_GAIN: f64 = 0.35;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("sampling rate {0} Hz outside the sensor range [10, 100]")]
    BadRate(f64),
    #[error("polyline needs at least 2 points, got {0}")]
    DegeneratePolyline(usize),
    #[error("could not sample {wanted} separated routes after {attempts} attempts")]
    RouteSampling { wanted: usize, attempts: usize },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// Piecewise target speed with smooth ramps, plus full stops.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeedProfile {
    /// `(duration_s, speed_mps)` segments, in order.
    pub segments: Vec<(f64, f64)>,
    /// `(start_t, duration_s)` full stops overlaid on the segments.
    pub stop_events: Vec<(f64, f64)>,
}

impl SpeedProfile {
    pub fn constant(speed: f64) -> Self {
        Self {
            segments: vec![(3600.0, speed)],
            stop_events: Vec::new(),
        }
    }

    fn compile(&self) -> CompiledProfile {
        assert!(
            self.segments.iter().all(|&(d, v)| d > 0.0 && v >= 0.0),
            "segment durations must be positive and speeds non-negative"
        );
        let mut pieces: Vec<(f64, f64, f64)> = Vec::new();
        let mut t = 0.0;
        for &(dur, v) in &self.segments {
            pieces.push((t, t + dur, v));
            t += dur;
        }
        for &(start, dur) in &self.stop_events {
            let end = start + dur;
            let mut next: Vec<(f64, f64, f64)> = Vec::new();
            for &(a, b, v) in &pieces {
                if b <= start || a >= end {
                    next.push((a, b, v));
                    continue;
                }
                if a < start {
                    next.push((a, start, v));
                }
                if b > end {
                    next.push((end, b, v));
                }
            }
            next.push((start, end, 0.0));
            next.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            pieces = next;
        }
        CompiledProfile { pieces }
    }
}

/// Flattened profile: sorted `(start, end, v)` pieces with linear ramps
/// spliced in around each boundary.
struct CompiledProfile {
    pieces: Vec<(f64, f64, f64)>,
}

const RAMP_HALF_S: f64 = 2.0;

impl CompiledProfile {
    /// Target speed at time `t`. Past the last piece the final speed is held
    /// (with a floor so the vehicle always finishes the route).
    fn speed(&self, t: f64) -> f64 {
        let last = self.pieces.last().unwrap();
        if t >= last.1 {
            return if last.2 < 1.0 { 8.0 } else { last.2 };
        }
        let idx = self
            .pieces
            .iter()
            .position(|&(a, b, _)| t >= a && t < b)
            .unwrap_or(0);
        let (a, b, v) = self.pieces[idx];
        if idx > 0 {
            let prev = self.pieces[idx - 1];
            let h = ramp_half(prev, self.pieces[idx]);
            if t - a < h {
                let u = (t - a + h) / (2.0 * h);
                return prev.2 + (v - prev.2) * u;
            }
        }
        if idx + 1 < self.pieces.len() {
            let next = self.pieces[idx + 1];
            let h = ramp_half(self.pieces[idx], next);
            if b - t < h {
                let u = (t - (b - h)) / (2.0 * h);
                return v + (next.2 - v) * u;
            }
        }
        v
    }
}

fn ramp_half(a: (f64, f64, f64), b: (f64, f64, f64)) -> f64 {
    RAMP_HALF_S
        .min((a.1 - a.0) / 2.0)
        .min((b.1 - b.0) / 2.0)
        .max(0.25)
}

/// Everything needed to regenerate one traversal bit-for-bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthScenario {
    /// Planar route polyline, meters.
    pub route: Vec<[f64; 2]>,
    pub profile: SpeedProfile,
    /// Phone-in-vehicle orientation as `(w, x, y, z)`; vehicle-frame vectors
    /// are seen by the phone as `r⁻¹ v r`.
    pub orientation: (f64, f64, f64, f64),
    pub gyro_noise_sigma: f64,
    pub accel_noise_sigma: f64,
    /// Scripted `(start_t, duration)` phone-handling events.
    pub interactions: Vec<(f64, f64)>,
    pub turn_radius_m: f64,
    /// When set, each corner draws a target speed from this range and the
    /// vehicle brakes into it; when `None` corners are taken at the profile
    /// speed.
    pub corner_speed_range: Option<(f64, f64)>,
    /// When set, a corner's target speed is a characteristic of its map
    /// position (hashed from these coordinates and this seed) with only a
    /// small per-traversal jitter: the same corner is driven at about the
    /// same speed on every traversal, the way a real junction is.
    pub corner_seed: Option<u64>,
    pub seed: u64,
}

impl SynthScenario {
    pub fn new(route: Vec<[f64; 2]>, profile: SpeedProfile, seed: u64) -> Self {
        Self {
            route,
            profile,
            orientation: (1.0, 0.0, 0.0, 0.0),
            gyro_noise_sigma: DEFAULT_GYRO_SIGMA,
            accel_noise_sigma: DEFAULT_ACCEL_SIGMA,
            interactions: Vec::new(),
            turn_radius_m: DEFAULT_TURN_RADIUS_M,
            corner_speed_range: None,
            corner_seed: None,
            seed,
        }
    }

    pub fn with_orientation(mut self, q: AlignmentQuaternion) -> Self {
        self.orientation = (q.w, q.x, q.y, q.z);
        self
    }

    pub fn with_noise(mut self, gyro_sigma: f64, accel_sigma: f64) -> Self {
        self.gyro_noise_sigma = gyro_sigma;
        self.accel_noise_sigma = accel_sigma;
        self
    }

    pub fn with_interactions(mut self, interactions: Vec<(f64, f64)>) -> Self {
        self.interactions = interactions;
        self
    }

    pub fn with_corner_speeds(mut self, range: (f64, f64)) -> Self {
        self.corner_speed_range = Some(range);
        self
    }

    pub fn orientation_quat(&self) -> AlignmentQuaternion {
        let (w, x, y, z) = self.orientation;
        AlignmentQuaternion::new(w, x, y, z).normalized()
    }
}

/// A generated trace with its ground truth.
#[derive(Debug, Clone)]
pub struct SynthTrace {
    pub trace: ImuTrace,
    /// Clean vehicle-frame yaw rate at 1 Hz; interaction seconds masked.
    pub truth: AngularSpeedSeries,
    pub gps: Vec<GpsPoint>,
    /// Sum of corner angles along the polyline, degrees.
    pub net_heading_change_deg: f64,
}

struct Corner {
    /// Arc-length position of the vertex.
    s: f64,
    dpsi: f64,
    /// Target speed through the corner, m/s.
    v_target: f64,
    /// Half-extent of the turn arc, meters.
    half_arc: f64,
}

struct YawPulse {
    start: f64,
    end: f64,
    rate: f64,
}

/// Generates the IMU trace for a scenario at the given sampling rate.
pub fn synth_trace(scenario: &SynthScenario, rate: f64) -> Result<SynthTrace, SynthError> {
    if !(10.0..=100.0).contains(&rate) {
        return Err(SynthError::BadRate(rate));
    }
    if scenario.route.len() < 2 {
        return Err(SynthError::DegeneratePolyline(scenario.route.len()));
    }
    let dt = 1.0 / rate;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);

    // leg geometry
    let route = &scenario.route;
    let mut leg_len = Vec::with_capacity(route.len() - 1);
    let mut leg_heading = Vec::with_capacity(route.len() - 1);
    for w in route.windows(2) {
        let dx = w[1][0] - w[0][0];
        let dy = w[1][1] - w[0][1];
        leg_len.push((dx * dx + dy * dy).sqrt());
        leg_heading.push(dy.atan2(dx));
    }
    let total_len: f64 = leg_len.iter().sum();
    let mut corners: Vec<Corner> = Vec::new();
    let mut s_acc = 0.0;
    let mut net_heading = 0.0;
    for i in 0..leg_len.len() - 1 {
        s_acc += leg_len[i];
        let mut dpsi = leg_heading[i + 1] - leg_heading[i];
        while dpsi > std::f64::consts::PI {
            dpsi -= 2.0 * std::f64::consts::PI;
        }
        while dpsi < -std::f64::consts::PI {
            dpsi += 2.0 * std::f64::consts::PI;
        }
        net_heading += dpsi;
        let v_target = match scenario.corner_speed_range {
            Some((lo, hi)) if dpsi.abs() > 1e-9 => match scenario.corner_seed {
                Some(city) => {
                    let vertex = route[i + 1];
                    let h = position_hash(city, vertex);
                    let characteristic = lo + (hi - lo) * h;
                    (characteristic + rng.gen_range(-0.25..0.25)).clamp(lo, hi)
                }
                None => rng.gen_range(lo..hi),
            },
            _ => f64::INFINITY,
        };
        corners.push(Corner {
            s: s_acc,
            dpsi,
            v_target,
            half_arc: scenario.turn_radius_m * dpsi.abs() / 2.0,
        });
    }

    // pass 1: kinematics until the route is consumed
    let profile = scenario.profile.compile();
    let mut speeds = Vec::new();
    let mut arcs = Vec::new();
    let mut pulses: Vec<YawPulse> = Vec::new();
    let mut s = 0.0;
    let mut corner_idx = 0;
    let max_samples = (4.0 * 3600.0 * rate) as usize;
    for n in 0..max_samples {
        let t = n as f64 * dt;
        let mut v = profile.speed(t + 0.5 * dt);
        // braking funnel around slow corners
        for c in &corners {
            if c.v_target.is_finite() {
                let outside = ((c.s - s).abs() - c.half_arc).max(0.0);
                v = v.min(c.v_target + BRAKE_GAIN * outside);
            }
        }
        speeds.push(v);
        arcs.push(s);
        let s_next = s + v * dt;
        while corner_idx < corners.len() && corners[corner_idx].s <= s_next {
            let c = &corners[corner_idx];
            let frac = if s_next > s { (c.s - s) / (s_next - s) } else { 0.0 };
            let t_k = t + frac * dt;
            // with a drawn corner speed the pulse shape depends only on that
            // draw, not on whether a stop happened to land on the corner
            let v_turn = if c.v_target.is_finite() {
                c.v_target
            } else {
                v.max(2.0)
            };
            let duration = (scenario.turn_radius_m * c.dpsi.abs() / v_turn).max(MIN_TURN_S);
            pulses.push(YawPulse {
                start: t_k - duration / 2.0,
                end: t_k + duration / 2.0,
                rate: c.dpsi / duration,
            });
            corner_idx += 1;
        }
        s = s_next;
        if s >= total_len && n as f64 * dt > 2.0 {
            break;
        }
    }
    let n_samples = speeds.len();
    // longitudinal acceleration by central difference over the speed samples
    let mut accels = vec![0.0; n_samples];
    for n in 0..n_samples {
        let hi = (n + 1).min(n_samples - 1);
        let lo = n.saturating_sub(1);
        accels[n] = (speeds[hi] - speeds[lo]) / ((hi - lo).max(1) as f64 * dt);
    }

    // interaction bursts and post-interaction orientations
    struct Burst {
        start: f64,
        end: f64,
        amp: f64,
        freq: f64,
        after: AlignmentQuaternion,
    }
    let base_orientation = scenario.orientation_quat();
    let mut bursts = Vec::new();
    for &(start, dur) in &scenario.interactions {
        bursts.push(Burst {
            start,
            end: start + dur,
            amp: rng.gen_range(4.0..6.0),
            freq: rng.gen_range(1.0..1.6),
            after: random_orientation(&mut rng),
        });
    }
    bursts.sort_by(|a, b| a.start.partial_cmp(&b.start).unwrap());

    let orientation_at = |t: f64| -> AlignmentQuaternion {
        let mut current = base_orientation;
        for b in &bursts {
            if t >= b.end {
                current = b.after;
            } else if t >= b.start {
                let u = (t - b.start) / (b.end - b.start);
                return slerp(&current, &b.after, u);
            } else {
                break;
            }
        }
        current
    };

    // pass 2: sensor samples
    let mut samples = Vec::with_capacity(n_samples);
    let mut truth = Vec::with_capacity(n_samples);
    let mut truth_mask = Vec::with_capacity(n_samples);
    for n in 0..n_samples {
        let t = n as f64 * dt;
        // exact average of the pulse train over [t, t+dt)
        let mut omega = 0.0;
        for p in &pulses {
            let lo = t.max(p.start);
            let hi = (t + dt).min(p.end);
            if hi > lo {
                omega += (hi - lo) / dt * p.rate;
            }
        }
        let v = speeds[n];
        let dvdt = accels[n];
        let ori = orientation_at(t);
        let inv = ori.conjugate();

        let burst = bursts.iter().find(|b| t >= b.start && t < b.end);
        let gyro = match burst {
            Some(b) => {
                let phase = 2.0 * std::f64::consts::PI * b.freq * (t - b.start);
                [b.amp * phase.cos(), b.amp * phase.sin(), 0.3 * b.amp]
            }
            None => inv.rotate([0.0, 0.0, omega]),
        };
        // specific force: centripetal (x, +right), longitudinal (y, +forward),
        // reaction to gravity (z, +up)
        let f_vehicle = [-v * omega, dvdt, STANDARD_GRAVITY];
        let accel = inv.rotate(f_vehicle);
        let wobble = if burst.is_some() { 0.3 } else { 0.0 };
        samples.push(ImuSample::new(
            t,
            [
                accel[0] + gauss(&mut rng) * (scenario.accel_noise_sigma + wobble),
                accel[1] + gauss(&mut rng) * (scenario.accel_noise_sigma + wobble),
                accel[2] + gauss(&mut rng) * (scenario.accel_noise_sigma + wobble),
            ],
            [
                gyro[0] + gauss(&mut rng) * scenario.gyro_noise_sigma,
                gyro[1] + gauss(&mut rng) * scenario.gyro_noise_sigma,
                gyro[2] + gauss(&mut rng) * scenario.gyro_noise_sigma,
            ],
        ));
        truth.push((t, omega));
        truth_mask.push(burst.is_some());
    }

    let mut samples = samples;
    if rate > 84.0 {
        low_pass_42hz(&mut samples, rate);
    }

    // GPS fixes every GPS_PERIOD_S, positioned along the polyline
    let gps_step = (GPS_PERIOD_S * rate).round() as usize;
    let mut gps = Vec::new();
    for n in (0..n_samples).step_by(gps_step.max(1)) {
        let p = position_at(route, &leg_len, arcs[n].min(total_len));
        gps.push(GpsPoint {
            t: n as f64 * dt,
            lat: BASE_LAT + p[1] / METERS_PER_DEG,
            lon: BASE_LON + p[0] / (METERS_PER_DEG * BASE_LAT.to_radians().cos()),
        });
    }

    let truth_series = aggregate_1hz_masked(&truth, &truth_mask, "truth")?;
    Ok(SynthTrace {
        trace: ImuTrace::new(samples)?,
        truth: truth_series,
        gps,
        net_heading_change_deg: net_heading.to_degrees(),
    })
}

/// Uniform hash of a map position, for corner characteristics.
fn position_hash(seed: u64, p: [f64; 2]) -> f64 {
    let mut z = seed
        ^ ((p[0].round() as i64 as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
        ^ ((p[1].round() as i64 as u64).rotate_left(32));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

fn position_at(route: &[[f64; 2]], leg_len: &[f64], s: f64) -> [f64; 2] {
    let mut remaining = s;
    for (i, &len) in leg_len.iter().enumerate() {
        if remaining <= len || i == leg_len.len() - 1 {
            let u = if len > 0.0 { (remaining / len).min(1.0) } else { 0.0 };
            return [
                route[i][0] + u * (route[i + 1][0] - route[i][0]),
                route[i][1] + u * (route[i + 1][1] - route[i][1]),
            ];
        }
        remaining -= len;
    }
    *route.last().unwrap()
}

/// RBJ biquad low-pass at 42 Hz, matching the sensor chip's internal filter.
fn low_pass_42hz(samples: &mut [ImuSample], rate: f64) {
    let w0 = 2.0 * std::f64::consts::PI * 42.0 / rate;
    let q = std::f64::consts::FRAC_1_SQRT_2;
    let alpha = w0.sin() / (2.0 * q);
    let b0 = (1.0 - w0.cos()) / 2.0;
    let b1 = 1.0 - w0.cos();
    let b2 = b0;
    let a0 = 1.0 + alpha;
    let a1 = -2.0 * w0.cos();
    let a2 = 1.0 - alpha;
    for ch in 0..6 {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        for s in samples.iter_mut() {
            let x = if ch < 3 { s.accel[ch] } else { s.gyro[ch - 3] };
            let y = (b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2) / a0;
            x2 = x1;
            x1 = x;
            y2 = y1;
            y1 = y;
            if ch < 3 {
                s.accel[ch] = y;
            } else {
                s.gyro[ch - 3] = y;
            }
        }
    }
}

/// Standard normal via Box–Muller.
fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Uniformly random unit quaternion (Shoemake's subgroup method).
pub fn random_orientation(rng: &mut ChaCha8Rng) -> AlignmentQuaternion {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
    let u3: f64 = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
    AlignmentQuaternion::new(
        (1.0 - u1).sqrt() * u2.sin(),
        (1.0 - u1).sqrt() * u2.cos(),
        u1.sqrt() * u3.sin(),
        u1.sqrt() * u3.cos(),
    )
}

fn slerp(a: &AlignmentQuaternion, b: &AlignmentQuaternion, t: f64) -> AlignmentQuaternion {
    let mut dot = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
    let mut b = *b;
    if dot < 0.0 {
        b = AlignmentQuaternion::new(-b.w, -b.x, -b.y, -b.z);
        dot = -dot;
    }
    if dot > 0.9995 {
        return AlignmentQuaternion::new(
            a.w + t * (b.w - a.w),
            a.x + t * (b.x - a.x),
            a.y + t * (b.y - a.y),
            a.z + t * (b.z - a.z),
        )
        .normalized();
    }
    let theta = dot.acos();
    let (sa, sb) = (((1.0 - t) * theta).sin(), (t * theta).sin());
    let s = theta.sin();
    AlignmentQuaternion::new(
        (a.w * sa + b.w * sb) / s,
        (a.x * sa + b.x * sb) / s,
        (a.y * sa + b.y * sb) / s,
        (a.z * sa + b.z * sb) / s,
    )
}

/// Random multi-segment speed profile, occasionally with a full stop.
pub fn random_profile(rng: &mut ChaCha8Rng) -> SpeedProfile {
    let n = rng.gen_range(4..8);
    let segments = (0..n)
        .map(|_| (rng.gen_range(40.0..100.0), rng.gen_range(7.0..16.0)))
        .collect();
    let stop_events = if rng.gen_bool(0.25) {
        vec![(rng.gen_range(40.0..150.0), rng.gen_range(5.0..10.0))]
    } else {
        Vec::new()
    };
    SpeedProfile {
        segments,
        stop_events,
    }
}

/// How traversal orientations are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrientationMode {
    Identity,
    Random,
}

/// Parameters for a labeled grid corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub routes: usize,
    pub traversals: usize,
    pub rate: f64,
    pub gyro_noise_sigma: f64,
    pub accel_noise_sigma: f64,
    /// Fraction of route edges replaced by a parallel detour per traversal;
    /// 0 disables detours.
    pub detour_fraction: f64,
    pub orientation: OrientationMode,
    /// Scripted interactions applied to every traversal.
    pub interactions: Vec<(f64, f64)>,
    pub seed: u64,
}

impl CorpusSpec {
    pub fn new(routes: usize, traversals: usize, seed: u64) -> Self {
        Self {
            routes,
            traversals,
            rate: 50.0,
            gyro_noise_sigma: DEFAULT_GYRO_SIGMA,
            accel_noise_sigma: DEFAULT_ACCEL_SIGMA,
            detour_fraction: 0.0,
            orientation: OrientationMode::Random,
            interactions: Vec::new(),
            seed,
        }
    }
}

/// One labeled traversal of the corpus.
#[derive(Debug, Clone)]
pub struct SynthJourney {
    pub trace_id: String,
    pub route_id: usize,
    pub route_nodes: Vec<GridNode>,
    pub scenario: SynthScenario,
    pub trace: ImuTrace,
    pub truth: AngularSpeedSeries,
    pub gps: Vec<GpsPoint>,
}

/// Minimum normalized DTW distance between the nominal signatures of two
/// accepted corpus routes. Routes below it re-draw: a lattice is
/// translation-invariant to the gyroscope, so distinct edges alone do not
/// make distinguishable yaw signatures.
pub const MIN_ROUTE_SEPARATION: f64 = 0.022;
/// Maximum fraction of shared edges between accepted corpus routes, so the
/// GPS view also sees distinct routes.
pub const MAX_ROUTE_EDGE_OVERLAP: f64 = 0.2;

/// Builds one traversal scenario of a route, drawing profile, orientation
/// and seed from `rng`.
pub fn traversal_scenario(
    network: &GridNetwork,
    nodes: &[GridNode],
    orientation: OrientationMode,
    city_seed: u64,
    rng: &mut ChaCha8Rng,
) -> SynthScenario {
    let polyline: Vec<[f64; 2]> = nodes.iter().map(|&n| network.coords(n)).collect();
    let q = match orientation {
        OrientationMode::Identity => AlignmentQuaternion::IDENTITY,
        OrientationMode::Random => random_orientation(rng),
    };
    let mut scenario = SynthScenario::new(polyline, random_profile(rng), rng.gen())
        .with_orientation(q)
        .with_corner_speeds(CORPUS_CORNER_SPEEDS);
    scenario.turn_radius_m = CORPUS_TURN_RADIUS_M;
    scenario.corner_seed = Some(city_seed);
    scenario
}

/// Draws `spec.routes` well-separated routes on the network and synthesizes
/// `spec.traversals` journeys per route with random speed profiles and
/// orientations.
pub fn synth_corpus(
    network: &GridNetwork,
    spec: &CorpusSpec,
) -> Result<Vec<SynthJourney>, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let routes = sample_separated_routes(network, spec.routes, &mut rng)?;

    let mut journeys = Vec::with_capacity(spec.routes * spec.traversals);
    for (route_id, nodes) in routes.iter().enumerate() {
        for trav in 0..spec.traversals {
            let nodes = if spec.detour_fraction > 0.0 {
                detour_route(network, nodes, spec.detour_fraction, rng.gen())
            } else {
                nodes.clone()
            };
            let mut scenario =
                traversal_scenario(network, &nodes, spec.orientation, spec.seed, &mut rng);
            scenario.gyro_noise_sigma = spec.gyro_noise_sigma;
            scenario.accel_noise_sigma = spec.accel_noise_sigma;
            scenario.interactions = spec.interactions.clone();
            let out = synth_trace(&scenario, spec.rate)?;
            journeys.push(SynthJourney {
                trace_id: format!("r{route_id:02}_t{trav:02}"),
                route_id,
                route_nodes: nodes,
                scenario,
                trace: out.trace,
                truth: out.truth,
                gps: out.gps,
            });
        }
    }
    Ok(journeys)
}

/// Samples routine routes as waypoint journeys: shortest-path segments
/// chained through random via points, with a per-route straightness bias.
/// The via points break the strict left/right alternation of a single
/// staircase, giving each route a yaw signature with actual entropy.
///
/// A lattice is translation invariant to the gyroscope and warping is blind
/// to gap timing, so the turn count dominates how far apart two routes can
/// ever look. The sampler therefore fills a ladder of turn counts with a
/// journey-length window per rung, plus an edge-overlap veto so the GPS view
/// also sees distinct routes.
pub fn sample_separated_routes(
    network: &GridNetwork,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<GridNode>>, SynthError> {
    // Ladder spacing follows what normalized DTW can resolve: turn-sparse
    // routes keep a roughly constant journey length, so the low rungs sit a
    // fixed turn count apart; turn-dense routes grow in duration with the
    // count, so the high rungs spread geometrically.
    let mut targets: Vec<f64> = Vec::with_capacity(count);
    let mut c = 7.0;
    for _ in 0..count {
        targets.push(c);
        c += (0.30 * c).max(9.0);
    }
    let mut routes: Vec<Vec<GridNode>> = Vec::with_capacity(count);
    let mut edge_sets: Vec<std::collections::HashSet<(GridNode, GridNode)>> =
        Vec::with_capacity(count);
    let mut attempts = 0;
    for (slot, &target) in targets.iter().enumerate() {
        // journey-length window: roughly constant for turn-sparse rungs,
        // close to the turn count for dense ones, so no rung's separation
        // gets diluted by a disproportionately long journey
        let lo = 38f64.max(1.05 * target);
        let hi = 56f64.max(1.22 * target);
        let gap = if count == 1 {
            8.0
        } else if slot + 1 < count {
            targets[slot + 1] - target
        } else {
            target - targets[slot - 1]
        };
        loop {
            attempts += 1;
            if attempts > 2000 * count.max(1) {
                return Err(SynthError::RouteSampling {
                    wanted: count,
                    attempts,
                });
            }
            let Some(nodes) = draw_targeted_route(network, target, (lo, hi), rng) else {
                continue;
            };
            let turns = maneuvers_of_path(network, &nodes).len() as f64;
            let edges = (nodes.len() - 1) as f64;
            if (turns - target).abs() > 0.25 * gap || edges < lo || edges > hi {
                continue;
            }
            let edge_set = path_edges(&nodes);
            let clear = edge_sets.iter().all(|other| {
                let shorter = edge_set.len().min(other.len()) as f64;
                (edge_set.intersection(other).count() as f64) / shorter
                    <= MAX_ROUTE_EDGE_OVERLAP
            });
            if !clear {
                continue;
            }
            routes.push(nodes);
            edge_sets.push(edge_set);
            break;
        }
    }
    Ok(routes)
}

/// Draws one waypoint route aimed at a turn count and an edge budget: leg
/// lengths split the budget and the staircase straightness is set so the
/// expected turn density lands near the target.
pub fn draw_targeted_route(
    network: &GridNetwork,
    target_turns: f64,
    edge_range: (f64, f64),
    rng: &mut ChaCha8Rng,
) -> Option<Vec<GridNode>> {
    let budget = rng.gen_range(edge_range.0..=edge_range.1);
    let max_leg = (network.rows + network.cols - 4) as f64;
    let n_legs = ((budget / max_leg).ceil() as usize).max(rng.gen_range(2..=3));
    let leg_len = budget / n_legs as f64;
    // on a balanced staircase the turn density is about (1 - straightness)
    let density = (target_turns / budget).clamp(0.05, 0.95);
    let straightness = (1.0 - 1.05 * density).clamp(0.02, 0.95);

    let mut stations: Vec<GridNode> = vec![(
        rng.gen_range(0..network.rows),
        rng.gen_range(0..network.cols),
    )];
    for _ in 0..n_legs {
        let (r, c) = *stations.last().unwrap();
        let mut tries = 0;
        let next = loop {
            tries += 1;
            if tries > 200 {
                return None;
            }
            let len = (leg_len * rng.gen_range(0.85..1.15)).round() as usize;
            if len < 4 {
                return None;
            }
            // balanced legs keep both directions available for zigzagging
            let dr_mag = rng.gen_range(len / 4..=(3 * len) / 4);
            let dc_mag = len - dr_mag;
            let dr = if rng.gen_bool(0.5) { dr_mag as isize } else { -(dr_mag as isize) };
            let dc = if rng.gen_bool(0.5) { dc_mag as isize } else { -(dc_mag as isize) };
            let nr = r as isize + dr;
            let nc = c as isize + dc;
            if nr >= 0
                && nc >= 0
                && (nr as usize) < network.rows
                && (nc as usize) < network.cols
                && !stations.contains(&(nr as usize, nc as usize))
            {
                break (nr as usize, nc as usize);
            }
        };
        stations.push(next);
    }
    let mut nodes: Vec<GridNode> = vec![stations[0]];
    for leg in stations.windows(2) {
        let seg = biased_staircase(leg[0], leg[1], straightness, rng);
        // no instant U-turn at the junction
        if nodes.len() >= 2 && seg[1] == nodes[nodes.len() - 2] {
            return None;
        }
        nodes.extend_from_slice(&seg[1..]);
    }
    if maneuvers_of_path(network, &nodes).len() < 6 {
        return None;
    }
    Some(nodes)
}

/// Shortest lattice path whose run structure follows a straightness bias:
/// when both row and column moves head toward the destination, the previous
/// direction repeats with probability `straightness`.
fn biased_staircase(
    src: GridNode,
    dst: GridNode,
    straightness: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<GridNode> {
    let mut nodes = vec![src];
    let (mut r, mut c) = src;
    let mut last_was_row: Option<bool> = None;
    while (r, c) != dst {
        let dr = dst.0.abs_diff(r);
        let dc = dst.1.abs_diff(c);
        let step_row = if dr == 0 {
            false
        } else if dc == 0 {
            true
        } else {
            match last_was_row {
                Some(was_row) => {
                    if rng.gen_bool(straightness) {
                        was_row
                    } else {
                        !was_row
                    }
                }
                None => rng.gen_range(0..dr + dc) < dr,
            }
        };
        if step_row {
            r = if dst.0 > r { r + 1 } else { r - 1 };
        } else {
            c = if dst.1 > c { c + 1 } else { c - 1 };
        }
        last_was_row = Some(step_row);
        nodes.push((r, c));
    }
    nodes
}

fn path_edges(nodes: &[GridNode]) -> std::collections::HashSet<(GridNode, GridNode)> {
    nodes
        .windows(2)
        .map(|w| if w[0] <= w[1] { (w[0], w[1]) } else { (w[1], w[0]) })
        .collect()
}

/// Clean 1 Hz yaw signature of a node path under nominal corpus kinematics
/// (cruise at 10 m/s, corners at 5 m/s), used to judge separation between
/// candidate routes.
pub fn nominal_signature(network: &GridNetwork, nodes: &[GridNode]) -> Vec<f64> {
    const V_CRUISE: f64 = 10.0;
    const V_TURN: f64 = 5.0;
    let mut sig = Vec::new();
    for w in nodes.windows(3) {
        let p0 = network.coords(w[0]);
        let p1 = network.coords(w[1]);
        let p2 = network.coords(w[2]);
        let h1 = (p1[1] - p0[1]).atan2(p1[0] - p0[0]);
        let h2 = (p2[1] - p1[1]).atan2(p2[0] - p1[0]);
        let mut dpsi = h2 - h1;
        while dpsi > std::f64::consts::PI {
            dpsi -= 2.0 * std::f64::consts::PI;
        }
        while dpsi < -std::f64::consts::PI {
            dpsi += 2.0 * std::f64::consts::PI;
        }
        let gap = ((network.spacing / V_CRUISE).round() as usize).saturating_sub(3);
        sig.extend(std::iter::repeat(0.0).take(gap));
        if dpsi.abs() > 1e-9 {
            let dur = (DEFAULT_TURN_RADIUS_M * dpsi.abs() / V_TURN).max(MIN_TURN_S);
            let steps = dur.round().max(1.0) as usize;
            sig.extend(std::iter::repeat(dpsi / dur).take(steps));
        }
    }
    if sig.is_empty() {
        sig.push(0.0);
    }
    sig
}

/// Replaces a contiguous `fraction` of the route's edges with a parallel
/// shortest detour that avoids the replaced edges. Among candidate spans the
/// one that best preserves the route's turn count wins: a driver's small
/// detour rejoins the familiar pattern rather than straightening half the
/// journey. Returns the original nodes when no alternative exists.
pub fn detour_route(
    network: &GridNetwork,
    nodes: &[GridNode],
    fraction: f64,
    seed: u64,
) -> Vec<GridNode> {
    assert!((0.0..1.0).contains(&fraction));
    let edges = nodes.len() - 1;
    let span = ((fraction * edges as f64).round() as usize).clamp(1, edges);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let original_turns = maneuvers_of_path(network, nodes).len() as isize;
    let mut best: Option<(isize, Vec<GridNode>)> = None;
    let mut found = 0;
    for _ in 0..24 {
        let a = rng.gen_range(0..=edges - span);
        let b = a + span;
        let avoid: std::collections::HashSet<(GridNode, GridNode)> = nodes[a..=b]
            .windows(2)
            .map(|w| if w[0] <= w[1] { (w[0], w[1]) } else { (w[1], w[0]) })
            .collect();
        if let Some(alt) = bfs_avoiding(network, nodes[a], nodes[b], &avoid) {
            let mut out = nodes[..=a].to_vec();
            out.extend(&alt[1..]);
            out.extend(&nodes[b + 1..]);
            let delta =
                (maneuvers_of_path(network, &out).len() as isize - original_turns).abs();
            if best.as_ref().map_or(true, |(d, _)| delta < *d) {
                best = Some((delta, out));
            }
            found += 1;
            if found >= 8 {
                break;
            }
        }
    }
    best.map_or_else(|| nodes.to_vec(), |(_, out)| out)
}

fn bfs_avoiding(
    network: &GridNetwork,
    src: GridNode,
    dst: GridNode,
    avoid: &std::collections::HashSet<(GridNode, GridNode)>,
) -> Option<Vec<GridNode>> {
    use std::collections::{HashMap, VecDeque};
    let mut prev: HashMap<GridNode, GridNode> = HashMap::new();
    let mut queue = VecDeque::new();
    queue.push_back(src);
    prev.insert(src, src);
    while let Some(u) = queue.pop_front() {
        if u == dst {
            let mut path = vec![dst];
            let mut cur = dst;
            while cur != src {
                cur = prev[&cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for v in network.neighbors(u) {
            let e = if u <= v { (u, v) } else { (v, u) };
            if avoid.contains(&e) || prev.contains_key(&v) {
                continue;
            }
            prev.insert(v, u);
            queue.push_back(v);
        }
    }
    None
}

/// Non-driving (walking-like) trace for the activity detector's null class:
/// strong per-axis bounce in the 2 Hz band plus gyro swings.
pub fn synth_null_trace(duration_s: f64, rate: f64, seed: u64) -> Result<ImuTrace, SynthError> {
    if !(10.0..=100.0).contains(&rate) {
        return Err(SynthError::BadRate(rate));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ori = random_orientation(&mut rng);
    let inv = ori.conjugate();
    let gravity = inv.rotate([0.0, 0.0, STANDARD_GRAVITY]);
    let amp: Vec<f64> = (0..3).map(|_| rng.gen_range(1.9..2.6)).collect();
    let freq: Vec<f64> = (0..3).map(|_| rng.gen_range(1.6..2.4)).collect();
    let phase: Vec<f64> = (0..3)
        .map(|_| rng.gen_range(0.0..2.0 * std::f64::consts::PI))
        .collect();
    let swing: Vec<f64> = (0..3).map(|_| rng.gen_range(0.8..1.6)).collect();
    let swing_freq: Vec<f64> = (0..3).map(|_| rng.gen_range(0.7..1.2)).collect();
    let dt = 1.0 / rate;
    let n = (duration_s * rate) as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            let mut accel = [0.0; 3];
            let mut gyro = [0.0; 3];
            for a in 0..3 {
                let bounce = amp[a] * (2.0 * std::f64::consts::PI * freq[a] * t + phase[a]).sin();
                accel[a] = gravity[a] + bounce + 0.3 * gauss(&mut rng);
                gyro[a] = swing[a]
                    * (2.0 * std::f64::consts::PI * swing_freq[a] * t + phase[a]).sin()
                    + 0.1 * gauss(&mut rng);
            }
            ImuSample::new(t, accel, gyro)
        })
        .collect();
    Ok(ImuTrace::new(samples)?)
}

/// Maneuver string of a (possibly detoured) corpus route.
pub fn route_maneuvers(
    network: &GridNetwork,
    nodes: &[GridNode],
) -> crate::maneuvers::ManeuverString {
    maneuvers_of_path(network, nodes)
}
