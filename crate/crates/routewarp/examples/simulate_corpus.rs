//! Writes a small labeled corpus to disk in the CLI's directory layout.
//!
//! Run with: cargo run --release --example simulate_corpus

use routewarp::maneuvers::GridNetwork;
use routewarp::synth::{synth_corpus, CorpusSpec};
use routewarp::trace_io::{write_gps_csv, write_imu_csv};

fn main() {
    let dir = std::env::temp_dir().join("routewarp-corpus-demo");
    std::fs::create_dir_all(&dir).expect("create dir");

    let network = GridNetwork::new(32, 32, 100.0);
    let spec = CorpusSpec::new(3, 4, 77);
    let journeys = synth_corpus(&network, &spec).expect("corpus");

    let mut labels = String::from("trace_id,route_id\n");
    for j in &journeys {
        write_imu_csv(dir.join(format!("trace_{}.csv", j.trace_id)), &j.trace).unwrap();
        write_gps_csv(dir.join(format!("gps_{}.csv", j.trace_id)), &j.gps).unwrap();
        labels.push_str(&format!("{},{}\n", j.trace_id, j.route_id));
        println!(
            "{}: route {}, {:5.0} s, {} turns, {} GPS fixes",
            j.trace_id,
            j.route_id,
            j.trace.duration(),
            routewarp::synth::route_maneuvers(&network, &j.route_nodes).len(),
            j.gps.len()
        );
    }
    std::fs::write(dir.join("labels.csv"), labels).unwrap();
    println!("\ncorpus written to {}", dir.display());
    println!("try: routewarp cluster {} --k auto --compare-gps", dir.display());
}
