//! Turn extraction, the L/R/S/T encoding and a small run of the grid
//! uniqueness study.
//!
//! Run with: cargo run --release --example encode_maneuvers

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use routewarp::align::align_trace;
use routewarp::maneuvers::{
    encode_turns, extract_turns, maneuvers_of_path, uniqueness_study, GridNetwork,
};
use routewarp::synth::{synth_trace, traversal_scenario, OrientationMode};

fn main() {
    let network = GridNetwork::new(24, 24, 100.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    // geometric truth for a grid route vs what the gyro pipeline recovers
    let route = routewarp::maneuvers::grid_route(&network, (2, 3), (19, 17), 8);
    let geometric = maneuvers_of_path(&network, &route.nodes);
    let scenario =
        traversal_scenario(&network, &route.nodes, OrientationMode::Random, 99, &mut rng);
    let out = synth_trace(&scenario, 50.0).expect("synthesis");
    let series = align_trace(&out.trace).expect("alignment").series;
    let events = extract_turns(&series, 0.1);
    let sensed = encode_turns(&events);
    println!("geometric maneuver string: {geometric}");
    println!("gyro-sensed string:        {sensed}");
    for e in events.iter().take(4) {
        println!(
            "  turn at {:.0}..{:.0} s: {:+.1} deg",
            e.t_start, e.t_end, e.angle
        );
    }

    // how unique are turn sequences on a plain lattice?
    println!("\nuniqueness study, 300 trips on a 30x30 grid:");
    let study = uniqueness_study(&GridNetwork::new(30, 30, 100.0), 300, 1);
    println!(
        "  mean turns per trip {:.1}; zero-overlap pairs share {:.1} turns on average",
        study.mean_turns_per_trip(),
        study.zero_overlap_mean_lcs()
    );
    println!("  overlap bin -> mean longest common turn substring:");
    for (lo, hi, n, mean) in &study.bins {
        println!("  [{:6.0} m, {:6.0} m): {:6} pairs, mean LCS {:.2}", lo, hi, n, mean);
    }
}
