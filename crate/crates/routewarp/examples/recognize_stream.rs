//! The live recognition loop: 4-minute batches of aligned yaw rate matched
//! against route medoids until a verdict lands.
//!
//! Run with: cargo run --release --example recognize_stream

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use routewarp::align::align_trace;
use routewarp::maneuvers::GridNetwork;
use routewarp::mining::{dissimilarity_matrix, k_medoids, RouteModel};
use routewarp::stream::{replay, Verdict};
use routewarp::synth::{
    sample_separated_routes, synth_corpus, synth_trace, traversal_scenario, CorpusSpec,
    OrientationMode,
};
use routewarp::trace_io::AngularSpeedSeries;

fn main() {
    let network = GridNetwork::new(48, 48, 100.0);
    let spec = CorpusSpec::new(8, 5, 20260810);
    println!("building an 8-route model...");
    let journeys = synth_corpus(&network, &spec).expect("corpus");
    let aligned: Vec<AngularSpeedSeries> = journeys
        .iter()
        .map(|j| {
            let mut out = align_trace(&j.trace).expect("alignment");
            out.series.origin_trace_id = j.trace_id.clone();
            out.series
        })
        .collect();
    let d = dissimilarity_matrix(&aligned).expect("matrix");
    let (partition, medoids) = k_medoids(&d, 8, 1).unwrap();
    let model = RouteModel::build(&d, &partition, &medoids, &aligned, 3);

    let mut rng = ChaCha8Rng::seed_from_u64(555);

    // a fresh traversal of a known route, new speeds, new orientation
    let known = &journeys[10]; // some traversal of route 2
    let scenario = traversal_scenario(
        &network,
        &known.route_nodes,
        OrientationMode::Random,
        spec.seed,
        &mut rng,
    );
    let out = synth_trace(&scenario, 50.0).expect("synthesis");
    let series = align_trace(&out.trace).expect("alignment").series;
    println!(
        "\nreplaying a fresh traversal of route {} ({} s):",
        known.route_id,
        series.len()
    );
    for event in replay(&series, &model, 240).unwrap() {
        println!(
            "  batch {} ({:4} s buffered): best {:.4}, verdict {:?}",
            event.at_batch,
            event.elapsed_s,
            event.distances.iter().cloned().fold(f64::INFINITY, f64::min),
            event.verdict
        );
    }

    // a journey on a route the model has never seen
    let novel = sample_separated_routes(&network, 3, &mut ChaCha8Rng::seed_from_u64(31337))
        .expect("novel routes");
    let scenario =
        traversal_scenario(&network, &novel[2], OrientationMode::Random, spec.seed, &mut rng);
    let out = synth_trace(&scenario, 50.0).expect("synthesis");
    let series = align_trace(&out.trace).expect("alignment").series;
    println!("\nreplaying an unseen route ({} s):", series.len());
    let events = replay(&series, &model, 240).unwrap();
    for event in &events {
        println!(
            "  batch {} ({:4} s buffered): best {:.4}, verdict {:?}",
            event.at_batch,
            event.elapsed_s,
            event.distances.iter().cloned().fold(f64::INFINITY, f64::min),
            event.verdict
        );
    }
    assert!(matches!(
        events.last().unwrap().verdict,
        Verdict::NewRoute | Verdict::Pending
    ));
}
