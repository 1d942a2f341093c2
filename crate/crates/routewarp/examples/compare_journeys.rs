//! Warping distances between journeys: two traversals of one route stay
//! close; a different route stays far, whatever the traffic did to the
//! timing.
//!
//! Run with: cargo run --example compare_journeys

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use routewarp::align::align_trace;
use routewarp::dtw::{dtw_series, WarpMode};
use routewarp::maneuvers::GridNetwork;
use routewarp::synth::{
    sample_separated_routes, synth_trace, traversal_scenario, OrientationMode,
};
use routewarp::trace_io::AngularSpeedSeries;

fn journey(
    network: &GridNetwork,
    nodes: &[(usize, usize)],
    rng: &mut ChaCha8Rng,
) -> AngularSpeedSeries {
    let scenario = traversal_scenario(network, nodes, OrientationMode::Random, 1234, rng);
    let out = synth_trace(&scenario, 50.0).expect("synthesis");
    align_trace(&out.trace).expect("alignment").series
}

fn main() {
    let network = GridNetwork::new(32, 32, 100.0);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let routes = sample_separated_routes(&network, 2, &mut rng).expect("routes");

    // two traversals of the same route with different speed profiles and
    // orientations, plus one traversal of a control route
    let a1 = journey(&network, &routes[0], &mut rng);
    let a2 = journey(&network, &routes[0], &mut rng);
    let control = journey(&network, &routes[1], &mut rng);
    println!(
        "lengths: a1={} s, a2={} s, control={} s (1 Hz samples)",
        a1.len(),
        a2.len(),
        control.len()
    );

    for mode in [WarpMode::Full, WarpMode::OpenEnded, WarpMode::OpenBoth] {
        let same = dtw_series(&a1, &a2, mode).unwrap();
        let diff = dtw_series(&a1, &control, mode).unwrap();
        println!(
            "{:?}: same-route {:.4}  control {:.4}  (ratio {:.1}x)",
            mode,
            same.distance,
            diff.distance,
            diff.distance / same.distance.max(1e-9)
        );
    }

    // a partial journey against the full reference
    let prefix = a2.slice(0, a2.len() / 3);
    let open = dtw_series(&prefix, &a1, WarpMode::OpenBoth).unwrap();
    println!(
        "first third of a2 vs a1 (open-begin/open-end): {:.4}, matched y {}..{} of {}",
        open.distance,
        open.matched_y.0,
        open.matched_y.1,
        a1.len()
    );
}
