//! Z-axis alignment on a synthetic journey carried in a random orientation.
//!
//! Run with: cargo run --example align_journey

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use routewarp::align::align_trace;
use routewarp::maneuvers::{grid_route, GridNetwork};
use routewarp::synth::{random_orientation, synth_trace, SpeedProfile, SynthScenario};

fn main() {
    let network = GridNetwork::new(20, 20, 100.0);
    let route = grid_route(&network, (2, 1), (16, 14), 9);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let orientation = random_orientation(&mut rng);
    println!(
        "phone orientation quaternion: ({:+.3}, {:+.3}, {:+.3}, {:+.3})",
        orientation.w, orientation.x, orientation.y, orientation.z
    );

    let scenario = SynthScenario::new(route.polyline(&network), SpeedProfile::constant(11.0), 3)
        .with_orientation(orientation);
    let out = synth_trace(&scenario, 50.0).expect("synthesis");
    println!(
        "journey: {:.0} s at 50 Hz, net heading change {:+.1} deg",
        out.trace.duration(),
        out.net_heading_change_deg
    );

    let aligned = align_trace(&out.trace).expect("alignment");
    let n = aligned.series.len().min(out.truth.len());
    let mut sq = 0.0;
    let mut peak = 0.0f64;
    for k in 0..n {
        sq += (aligned.series.values[k] - out.truth.values[k]).powi(2);
        peak = peak.max(out.truth.values[k].abs());
    }
    let rmse = (sq / n as f64).sqrt();
    println!(
        "aligned 1 Hz yaw vs ground truth: rmse {:.4} rad/s ({:.2} % of peak {:.3})",
        rmse,
        100.0 * rmse / peak,
        peak
    );

    // a few rows around the first turn
    let first_turn = out
        .truth
        .values
        .iter()
        .position(|v| v.abs() > 0.05)
        .unwrap_or(0);
    println!("\n  t    truth   aligned");
    for k in first_turn.saturating_sub(2)..(first_turn + 6).min(n) {
        println!(
            "{:4}  {:+.3}  {:+.3}",
            k, out.truth.values[k], aligned.series.values[k]
        );
    }
}
