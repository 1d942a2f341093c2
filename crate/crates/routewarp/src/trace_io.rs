//! On-disk and in-memory representations of IMU traces, GPS trajectories and
//! derived angular-speed series.
//!
//! All file formats are plain UTF-8 CSV with `.` decimals and LF line
//! endings. Floats are written with Rust's shortest round-trip formatting, so
//! `parse(write(x)) == x` holds bit-exactly for any valid value.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("{path}:{line}: {msg}")]
    MalformedRow {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}: expected header `{expected}`, found `{found}`")]
    BadHeader {
        path: String,
        expected: &'static str,
        found: String,
    },
    #[error("non-monotone timestamp at sample {index}: {prev} -> {next}")]
    NonMonotone { index: usize, prev: f64, next: f64 },
    #[error("trace has {0} samples, need at least 2")]
    TooShort(usize),
    #[error("sample {index} has a non-finite component")]
    NonFinite { index: usize },
    #[error("negative timestamp {t} at sample {index}")]
    NegativeTime { index: usize, t: f64 },
    #[error("latitude {0} outside [-90, 90]")]
    LatitudeRange(f64),
    #[error("longitude {0} outside [-180, 180]")]
    LongitudeRange(f64),
    #[error("empty input")]
    Empty,
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// One timestamped accelerometer + gyroscope reading.
///
/// `t` is in seconds relative to the trace start, `accel` in m/s² and `gyro`
/// in rad/s, both in the phone's own coordinate frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    pub accel: [f64; 3],
    pub gyro: [f64; 3],
}

impl ImuSample {
    pub fn new(t: f64, accel: [f64; 3], gyro: [f64; 3]) -> Self {
        Self { t, accel, gyro }
    }

    pub fn gyro_norm(&self) -> f64 {
        let [x, y, z] = self.gyro;
        (x * x + y * y + z * z).sqrt()
    }

    fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.accel.iter().all(|v| v.is_finite())
            && self.gyro.iter().all(|v| v.is_finite())
    }
}

/// A validated IMU recording of one journey.
///
/// Timestamps are strictly increasing, there are at least two samples and
/// `nominal_rate` is the median reciprocal inter-sample gap in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct ImuTrace {
    samples: Vec<ImuSample>,
    nominal_rate: f64,
}

impl ImuTrace {
    /// Validates samples and infers the nominal rate.
    pub fn new(samples: Vec<ImuSample>) -> Result<Self, TraceError> {
        if samples.len() < 2 {
            return Err(TraceError::TooShort(samples.len()));
        }
        for (i, s) in samples.iter().enumerate() {
            if !s.is_finite() {
                return Err(TraceError::NonFinite { index: i });
            }
            if s.t < 0.0 {
                return Err(TraceError::NegativeTime { index: i, t: s.t });
            }
        }
        for i in 1..samples.len() {
            if samples[i].t <= samples[i - 1].t {
                return Err(TraceError::NonMonotone {
                    index: i,
                    prev: samples[i - 1].t,
                    next: samples[i].t,
                });
            }
        }
        let nominal_rate = 1.0 / median_gap(&samples);
        Ok(Self {
            samples,
            nominal_rate,
        })
    }

    pub fn samples(&self) -> &[ImuSample] {
        &self.samples
    }

    /// Median-gap-derived sampling rate, Hz.
    pub fn nominal_rate(&self) -> f64 {
        self.nominal_rate
    }

    /// Time span from first to last sample, seconds.
    pub fn duration(&self) -> f64 {
        self.samples.last().unwrap().t - self.samples[0].t
    }

    /// Jitter warning when any inter-sample gap deviates more than 20 % from
    /// the median gap. Irregular phone logs are usable, so this never errors.
    pub fn jitter_warning(&self) -> Option<String> {
        let median = median_gap(&self.samples);
        let worst = self
            .samples
            .windows(2)
            .map(|w| ((w[1].t - w[0].t) - median).abs() / median)
            .fold(0.0, f64::max);
        if worst > 0.2 {
            Some(format!(
                "sample-rate jitter up to {:.0} % of the median {:.4} s gap",
                worst * 100.0,
                median
            ))
        } else {
            None
        }
    }
}

fn median_gap(samples: &[ImuSample]) -> f64 {
    let mut gaps: Vec<f64> = samples.windows(2).map(|w| w[1].t - w[0].t).collect();
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = gaps.len();
    if n % 2 == 1 {
        gaps[n / 2]
    } else {
        0.5 * (gaps[n / 2 - 1] + gaps[n / 2])
    }
}

/// One GPS fix. Coordinates in degrees, `t` in seconds from trajectory start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpsPoint {
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
}

impl GpsPoint {
    pub fn new(t: f64, lat: f64, lon: f64) -> Result<Self, TraceError> {
        if !(-90.0..=90.0).contains(&lat) {
            return Err(TraceError::LatitudeRange(lat));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(TraceError::LongitudeRange(lon));
        }
        Ok(Self { t, lat, lon })
    }
}

/// 1 Hz vehicle-frame z-axis angular speed for one journey.
///
/// `values[k]` is the mean aligned yaw rate over second `[k, k+1)`. Seconds
/// covered by a user-interaction interval carry `mask[k] == true` and a zero
/// value; the time base is preserved so warping stays meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularSpeedSeries {
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
    pub origin_trace_id: String,
}

impl AngularSpeedSeries {
    pub fn new(values: Vec<f64>, origin_trace_id: impl Into<String>) -> Self {
        let mask = vec![false; values.len()];
        Self {
            values,
            mask,
            origin_trace_id: origin_trace_id.into(),
        }
    }

    pub fn with_mask(
        values: Vec<f64>,
        mask: Vec<bool>,
        origin_trace_id: impl Into<String>,
    ) -> Self {
        assert_eq!(values.len(), mask.len());
        Self {
            values,
            mask,
            origin_trace_id: origin_trace_id.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sub-series over `[start, end)` seconds, keeping the origin id.
    pub fn slice(&self, start: usize, end: usize) -> AngularSpeedSeries {
        AngularSpeedSeries {
            values: self.values[start..end].to_vec(),
            mask: self.mask[start..end].to_vec(),
            origin_trace_id: self.origin_trace_id.clone(),
        }
    }
}

/// Parses the IMU CSV format `t,ax,ay,az,gx,gy,gz` (s, m/s², rad/s).
pub fn parse_imu_csv(path: impl AsRef<Path>) -> Result<ImuTrace, TraceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| TraceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_imu_str(&text, &path.display().to_string())
}

pub(crate) fn parse_imu_str(text: &str, path: &str) -> Result<ImuTrace, TraceError> {
    const HEADER: &str = "t,ax,ay,az,gx,gy,gz";
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(TraceError::Empty)?;
    if header.trim() != HEADER {
        return Err(TraceError::BadHeader {
            path: path.to_string(),
            expected: HEADER,
            found: header.to_string(),
        });
    }
    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = parse_numeric_row(line, 7, path, idx + 1)?;
        let sample = ImuSample::new(
            fields[0],
            [fields[1], fields[2], fields[3]],
            [fields[4], fields[5], fields[6]],
        );
        if !sample.is_finite() {
            return Err(TraceError::MalformedRow {
                path: path.to_string(),
                line: idx + 1,
                msg: "non-finite value".to_string(),
            });
        }
        samples.push(sample);
    }
    ImuTrace::new(samples)
}

/// Parses the GPS CSV format `t,lat,lon`.
pub fn parse_gps_csv(path: impl AsRef<Path>) -> Result<Vec<GpsPoint>, TraceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| TraceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_gps_str(&text, &path.display().to_string())
}

pub(crate) fn parse_gps_str(text: &str, path: &str) -> Result<Vec<GpsPoint>, TraceError> {
    const HEADER: &str = "t,lat,lon";
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(TraceError::Empty)?;
    if header.trim() != HEADER {
        return Err(TraceError::BadHeader {
            path: path.to_string(),
            expected: HEADER,
            found: header.to_string(),
        });
    }
    let mut points: Vec<GpsPoint> = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = parse_numeric_row(line, 3, path, idx + 1)?;
        let point = GpsPoint::new(fields[0], fields[1], fields[2])?;
        if let Some(prev) = points.last() {
            if point.t <= prev.t {
                return Err(TraceError::NonMonotone {
                    index: points.len(),
                    prev: prev.t,
                    next: point.t,
                });
            }
        }
        points.push(point);
    }
    if points.len() < 2 {
        return Err(TraceError::TooShort(points.len()));
    }
    Ok(points)
}

fn parse_numeric_row(
    line: &str,
    arity: usize,
    path: &str,
    line_no: usize,
) -> Result<Vec<f64>, TraceError> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != arity {
        return Err(TraceError::MalformedRow {
            path: path.to_string(),
            line: line_no,
            msg: format!("expected {arity} fields, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            let v: f64 = f.trim().parse().map_err(|_| TraceError::MalformedRow {
                path: path.to_string(),
                line: line_no,
                msg: format!("cannot parse `{f}` as a number"),
            })?;
            if v.is_nan() {
                return Err(TraceError::MalformedRow {
                    path: path.to_string(),
                    line: line_no,
                    msg: format!("NaN in field `{f}`"),
                });
            }
            Ok(v)
        })
        .collect()
}

pub fn write_imu_csv(path: impl AsRef<Path>, trace: &ImuTrace) -> Result<(), TraceError> {
    let path = path.as_ref();
    fs::write(path, imu_to_string(trace)).map_err(|source| TraceError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn imu_to_string(trace: &ImuTrace) -> String {
    let mut out = String::from("t,ax,ay,az,gx,gy,gz\n");
    for s in trace.samples() {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.t, s.accel[0], s.accel[1], s.accel[2], s.gyro[0], s.gyro[1], s.gyro[2]
        )
        .unwrap();
    }
    out
}

pub fn write_gps_csv(path: impl AsRef<Path>, points: &[GpsPoint]) -> Result<(), TraceError> {
    let path = path.as_ref();
    let mut out = String::from("t,lat,lon\n");
    for p in points {
        writeln!(out, "{},{},{}", p.t, p.lat, p.lon).unwrap();
    }
    fs::write(path, out).map_err(|source| TraceError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes an aligned series as `t,omega_z,masked` (s, rad/s, 0/1).
pub fn write_aligned_csv(
    path: impl AsRef<Path>,
    series: &AngularSpeedSeries,
) -> Result<(), TraceError> {
    let path = path.as_ref();
    fs::write(path, aligned_to_string(series)).map_err(|source| TraceError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn aligned_to_string(series: &AngularSpeedSeries) -> String {
    let mut out = String::from("t,omega_z,masked\n");
    for (k, (v, m)) in series.values.iter().zip(&series.mask).enumerate() {
        writeln!(out, "{},{},{}", k, v, u8::from(*m)).unwrap();
    }
    out
}

/// Parses the aligned-series CSV written by [`write_aligned_csv`].
pub fn parse_aligned_csv(path: impl AsRef<Path>) -> Result<AngularSpeedSeries, TraceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| TraceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_aligned_str(&text, &path.display().to_string())
}

pub(crate) fn parse_aligned_str(text: &str, path: &str) -> Result<AngularSpeedSeries, TraceError> {
    const HEADER: &str = "t,omega_z,masked";
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(TraceError::Empty)?;
    if header.trim() != HEADER {
        return Err(TraceError::BadHeader {
            path: path.to_string(),
            expected: HEADER,
            found: header.to_string(),
        });
    }
    let mut values = Vec::new();
    let mut mask = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = parse_numeric_row(line, 3, path, idx + 1)?;
        values.push(fields[1]);
        mask.push(fields[2] != 0.0);
    }
    if values.is_empty() {
        return Err(TraceError::Empty);
    }
    let stem = Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string());
    Ok(AngularSpeedSeries::with_mask(values, mask, stem))
}

/// Block-averages timestamped samples into 1 Hz means.
///
/// Each output value covers the whole second `[k, k+1)` counted from the
/// first timestamp. A trailing partial window is kept when it holds at least
/// half the samples a full window would, and dropped otherwise.
pub fn aggregate_1hz(
    samples: &[(f64, f64)],
    origin_trace_id: impl Into<String>,
) -> Result<AngularSpeedSeries, TraceError> {
    let masked = vec![false; samples.len()];
    aggregate_1hz_masked(samples, &masked, origin_trace_id)
}

/// [`aggregate_1hz`] with a per-sample mask: a 1 Hz slot is marked masked
/// when more than half of its samples are masked.
pub fn aggregate_1hz_masked(
    samples: &[(f64, f64)],
    masked: &[bool],
    origin_trace_id: impl Into<String>,
) -> Result<AngularSpeedSeries, TraceError> {
    assert_eq!(samples.len(), masked.len());
    if samples.is_empty() {
        return Err(TraceError::Empty);
    }
    for w in samples.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(TraceError::NonMonotone {
                index: 0,
                prev: w[0].0,
                next: w[1].0,
            });
        }
    }
    let t0 = samples[0].0;
    let n_windows = samples
        .iter()
        .map(|&(t, _)| (t - t0).floor() as usize)
        .max()
        .unwrap()
        + 1;
    let mut sums = vec![0.0; n_windows];
    let mut mask_counts = vec![0usize; n_windows];
    let mut counts = vec![0usize; n_windows];
    for (&(t, v), &m) in samples.iter().zip(masked) {
        let k = (t - t0).floor() as usize;
        sums[k] += v;
        counts[k] += 1;
        if m {
            mask_counts[k] += 1;
        }
    }
    // Expected samples per full window, from the median gap.
    let mut gaps: Vec<f64> = samples.windows(2).map(|w| w[1].0 - w[0].0).collect();
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = gaps[gaps.len() / 2];
    let expected = (1.0 / median).round().max(1.0);

    let mut values = Vec::with_capacity(n_windows);
    let mut mask = Vec::with_capacity(n_windows);
    for k in 0..n_windows {
        if counts[k] == 0 {
            // a gap in the data; keep the time base with a masked zero
            values.push(0.0);
            mask.push(true);
            continue;
        }
        let last = k == n_windows - 1;
        if last && (counts[k] as f64) < 0.5 * expected {
            break;
        }
        values.push(sums[k] / counts[k] as f64);
        mask.push(mask_counts[k] * 2 > counts[k]);
    }
    if values.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok(AngularSpeedSeries::with_mask(
        values,
        mask,
        origin_trace_id,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ramp_trace(rate: f64, duration: f64) -> Vec<(f64, f64)> {
        let dt = 1.0 / rate;
        let n = (duration * rate).round() as usize;
        (0..n).map(|i| (i as f64 * dt, i as f64 * dt)).collect()
    }

    #[test]
    fn two_row_file_infers_50hz() {
        let text = "t,ax,ay,az,gx,gy,gz\n0.00,0,0,9.81,0,0,0\n0.02,0,0,9.81,0,0,0\n";
        let trace = parse_imu_str(text, "mem").unwrap();
        assert_abs_diff_eq!(trace.nominal_rate(), 50.0, epsilon = 1e-9);
        assert_eq!(trace.samples().len(), 2);
    }

    #[test]
    fn nan_row_reports_line() {
        let text = "t,ax,ay,az,gx,gy,gz\n0.00,0,0,9.81,0,0,0\n0.02,0,0,9.81,0,0,NaN\n";
        let err = parse_imu_str(text, "mem").unwrap_err();
        match err {
            TraceError::MalformedRow { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn short_field_row_reports_line() {
        let text = "t,ax,ay,az,gx,gy,gz\n0.00,0,0,9.81,0,0\n";
        let err = parse_imu_str(text, "mem").unwrap_err();
        match err {
            TraceError::MalformedRow { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_monotone_rejected() {
        let text = "t,ax,ay,az,gx,gy,gz\n0.00,0,0,9.81,0,0,0\n0.02,0,0,9.81,0,0,0\n0.01,0,0,9.81,0,0,0\n";
        assert!(matches!(
            parse_imu_str(text, "mem"),
            Err(TraceError::NonMonotone { .. })
        ));
    }

    #[test]
    fn single_sample_rejected() {
        let text = "t,ax,ay,az,gx,gy,gz\n0.00,0,0,9.81,0,0,0\n";
        assert!(matches!(
            parse_imu_str(text, "mem"),
            Err(TraceError::TooShort(1))
        ));
    }

    #[test]
    fn gps_single_point_rejected() {
        let text = "t,lat,lon\n0,52.2,0.12\n";
        assert!(matches!(
            parse_gps_str(text, "mem"),
            Err(TraceError::TooShort(1))
        ));
    }

    #[test]
    fn gps_latitude_out_of_range() {
        let text = "t,lat,lon\n0,91.0,0.12\n5,52.2,0.12\n";
        assert!(matches!(
            parse_gps_str(text, "mem"),
            Err(TraceError::LatitudeRange(_))
        ));
    }

    #[test]
    fn aggregate_constant_is_constant() {
        for rate in [10.0, 50.0, 100.0] {
            let dt = 1.0 / rate;
            let samples: Vec<(f64, f64)> = (0..(3.0 * rate) as usize)
                .map(|i| (i as f64 * dt, 0.5))
                .collect();
            let out = aggregate_1hz(&samples, "t").unwrap();
            assert_eq!(out.values, vec![0.5, 0.5, 0.5]);
        }
    }

    #[test]
    fn aggregate_step_function() {
        let mut samples = Vec::new();
        for i in 0..50 {
            samples.push((i as f64 * 0.02, 1.0));
        }
        for i in 0..50 {
            samples.push((1.0 + i as f64 * 0.02, 0.0));
        }
        let out = aggregate_1hz(&samples, "t").unwrap();
        assert_eq!(out.values, vec![1.0, 0.0]);
    }

    #[test]
    fn aggregate_ramp_matches_brute_force_mean() {
        let samples = ramp_trace(50.0, 1.0);
        // oracle: plain mean over the generated samples
        let expected: f64 = samples.iter().map(|&(_, v)| v).sum::<f64>() / samples.len() as f64;
        let out = aggregate_1hz(&samples, "t").unwrap();
        assert_eq!(out.values.len(), 1);
        assert_abs_diff_eq!(out.values[0], expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.49, epsilon = 1e-12);
    }

    #[test]
    fn aggregate_trailing_window_rule() {
        // 2.3 s at 10 Hz: the third window holds 3 of an expected 10 samples
        // and is dropped.
        let samples: Vec<(f64, f64)> = (0..23).map(|i| (i as f64 * 0.1, 1.0)).collect();
        let out = aggregate_1hz(&samples, "t").unwrap();
        assert_eq!(out.values.len(), 2);
        // 2.6 s: 6 of 10 samples, kept.
        let samples: Vec<(f64, f64)> = (0..26).map(|i| (i as f64 * 0.1, 1.0)).collect();
        let out = aggregate_1hz(&samples, "t").unwrap();
        assert_eq!(out.values.len(), 3);
    }

    #[test]
    fn aggregate_length_bound() {
        for n in [11, 25, 50, 77, 104] {
            let samples: Vec<(f64, f64)> = (0..n).map(|i| (i as f64 * 0.1, 1.0)).collect();
            let duration = samples.last().unwrap().0;
            let out = aggregate_1hz(&samples, "t").unwrap();
            assert!(out.values.len() <= duration.floor() as usize + 1);
        }
    }

    #[test]
    fn aggregate_empty_rejected() {
        assert!(matches!(
            aggregate_1hz(&[], "t"),
            Err(TraceError::Empty)
        ));
    }

    #[test]
    fn imu_roundtrip_bit_exact() {
        let samples: Vec<ImuSample> = (0..500)
            .map(|i| {
                let t = i as f64 * 0.02;
                ImuSample::new(
                    t,
                    [0.1 * (t * 1.7).sin(), -0.2 * (t * 0.3).cos(), 9.81],
                    [1e-3 * (t * 2.1).sin(), 0.0, 0.4 * (t * 0.11).cos()],
                )
            })
            .collect();
        let trace = ImuTrace::new(samples).unwrap();
        let text = imu_to_string(&trace);
        let back = parse_imu_str(&text, "mem").unwrap();
        assert_eq!(trace, back);
    }

    #[test]
    fn jitter_warning_threshold() {
        let mut samples: Vec<ImuSample> = (0..100)
            .map(|i| ImuSample::new(i as f64 * 0.02, [0.0, 0.0, 9.81], [0.0; 3]))
            .collect();
        let trace = ImuTrace::new(samples.clone()).unwrap();
        assert!(trace.jitter_warning().is_none());
        // one gap stretched to 0.03 s = 50 % off the median
        for s in samples.iter_mut().skip(50) {
            s.t += 0.01;
        }
        let trace = ImuTrace::new(samples).unwrap();
        assert!(trace.jitter_warning().is_some());
    }
}
