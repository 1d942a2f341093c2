//! Route mining end to end: corpus -> dissimilarity matrix -> BIC cluster
//! count -> k-medoids -> agreement with ground truth and with GPS.
//!
//! Run with: cargo run --release --example mine_routes

use routewarp::align::align_trace;
use routewarp::maneuvers::GridNetwork;
use routewarp::mining::{
    bic_curve, cluster_gps_partition, corrected_rand, dissimilarity_matrix, estimate_k,
    gps_dissimilarity, k_medoids, significant_routes, variation_of_information, Partition,
};
use routewarp::synth::{synth_corpus, CorpusSpec};
use routewarp::trace_io::AngularSpeedSeries;

fn main() {
    let network = GridNetwork::new(48, 48, 100.0);
    let spec = CorpusSpec::new(8, 5, 20260810);
    println!("synthesizing {} routes x {} traversals...", spec.routes, spec.traversals);
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

    println!("\nBIC curve (k, BIC):");
    for (k, bic) in bic_curve(&d, 12, 1).unwrap() {
        println!("  {:2}  {:8.1}", k, bic);
    }
    let k = estimate_k(&d, 12, 1).unwrap();
    println!("estimated cluster count: {k}");

    let (partition, medoids) = k_medoids(&d, k, 1).unwrap();
    println!(
        "medoids: {:?}",
        medoids.iter().map(|&m| d.ids[m].clone()).collect::<Vec<_>>()
    );
    println!("significant routes (tau=3): {:?}", significant_routes(&partition, 3));

    let truth = Partition::new(&journeys.iter().map(|j| j.route_id).collect::<Vec<_>>()).unwrap();
    println!(
        "vs ground truth:  corrected Rand {:.3}, VI {:.3}",
        corrected_rand(&partition, &truth).unwrap(),
        variation_of_information(&partition, &truth).unwrap()
    );

    let gd = gps_dissimilarity(
        &journeys.iter().map(|j| j.gps.clone()).collect::<Vec<_>>(),
        journeys.iter().map(|j| j.trace_id.clone()).collect(),
    );
    let gps_partition = cluster_gps_partition(&gd, 12, 1).unwrap();
    println!(
        "vs GPS clustering: corrected Rand {:.3}, VI {:.3} (gps k={})",
        corrected_rand(&partition, &gps_partition).unwrap(),
        variation_of_information(&partition, &gps_partition).unwrap(),
        gps_partition.k()
    );
}
