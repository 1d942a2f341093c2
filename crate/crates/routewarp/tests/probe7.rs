// Scratch: detour monotonicity (criterion 3 shape) and streaming (criterion 5 shape).
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use routewarp::align::align_trace;
use routewarp::dtw::{dtw_series, WarpMode};
use routewarp::maneuvers::GridNetwork;
use routewarp::mining::{dissimilarity_matrix, k_medoids, Partition, RouteModel};
use routewarp::stream::{replay, Verdict};
use routewarp::synth::{
    detour_route, sample_separated_routes, synth_corpus, synth_trace, traversal_scenario,
    CorpusSpec, OrientationMode,
};
use routewarp::trace_io::AngularSpeedSeries;

fn aligned_corpus(
    network: &GridNetwork,
    spec: &CorpusSpec,
) -> (Vec<routewarp::synth::SynthJourney>, Vec<AngularSpeedSeries>) {
    let journeys = synth_corpus(network, spec).unwrap();
    let aligned = journeys
        .iter()
        .map(|j| {
            let mut out = align_trace(&j.trace).unwrap();
            out.series.origin_trace_id = j.trace_id.clone();
            out.series
        })
        .collect();
    (journeys, aligned)
}

#[test]
#[ignore]
fn probe_detours_and_streaming() {
    let network = GridNetwork::new(48, 48, 100.0);
    let spec = CorpusSpec::new(8, 5, 20260810);
    let (journeys, aligned) = aligned_corpus(&network, &spec);
    let d = dissimilarity_matrix(&aligned).unwrap();
    let labels: Vec<usize> = journeys.iter().map(|j| j.route_id).collect();
    let truth = Partition::new(&labels).unwrap();
    let (partition, medoids) = k_medoids(&d, 8, 1).unwrap();
    assert_eq!(routewarp::mining::corrected_rand(&partition, &truth).unwrap(), 1.0);
    let model = RouteModel::build(&d, &partition, &medoids, &aligned, 3);
    println!(
        "thresholds: {:?}",
        model
            .clusters
            .iter()
            .map(|c| (c.match_threshold * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );

    // medoid -> route_id mapping
    let medoid_route: Vec<usize> = medoids.iter().map(|&m| labels[m]).collect();

    // detour probe: per route, traversals at 0/5/10/20% detours
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    let mut ok_nearest = 0;
    let mut total = 0;
    let mut mean_by_frac = [0.0f64; 4];
    for (route_id, base_nodes) in journeys
        .iter()
        .step_by(5)
        .map(|j| (j.route_id, j.route_nodes.clone()))
        .collect::<Vec<_>>()
    {
        for (fi, frac) in [0.0, 0.05, 0.10, 0.20].iter().enumerate() {
            let nodes = if *frac > 0.0 {
                detour_route(&network, &base_nodes, *frac, rng.gen())
            } else {
                base_nodes.clone()
            };
            let scenario =
                traversal_scenario(&network, &nodes, OrientationMode::Random, 20260810, &mut rng);
            let out = synth_trace(&scenario, 50.0).unwrap();
            let series = align_trace(&out.trace).unwrap().series;
            let mut best = (usize::MAX, f64::INFINITY);
            let mut own = f64::INFINITY;
            for (ci, _) in model.clusters.iter().enumerate() {
                let dist = dtw_series(&series, &model.medoid_series(ci), WarpMode::Full)
                    .unwrap()
                    .distance;
                if dist < best.1 {
                    best = (ci, dist);
                }
                if medoid_route[ci] == route_id {
                    own = dist;
                }
            }
            total += 1;
            if medoid_route[best.0] == route_id {
                ok_nearest += 1;
            } else {
                println!(
                    "  DETOUR FLIP: route {route_id} frac {frac} own {own:.4} best route {} at {:.4} (turns {})",
                    medoid_route[best.0], best.1,
                    routewarp::maneuvers::maneuvers_of_path(&network, &nodes).len()
                );
            }
            mean_by_frac[fi] += own;
        }
    }
    println!("detour nearest-own: {ok_nearest}/{total}");
    println!(
        "mean own-distance by frac: {:?}",
        mean_by_frac.iter().map(|v| (v / 8.0 * 1e4).round() / 1e4).collect::<Vec<_>>()
    );

    // streaming probe: 40 fresh known replays + 10 novel
    let mut false_assign = 0;
    let mut unmatched = 0;
    let mut batches_used = Vec::new();
    for (route_id, base_nodes) in journeys
        .iter()
        .step_by(5)
        .map(|j| (j.route_id, j.route_nodes.clone()))
        .collect::<Vec<_>>()
    {
        for _ in 0..5 {
            let scenario =
                traversal_scenario(&network, &base_nodes, OrientationMode::Random, 20260810, &mut rng);
            let out = synth_trace(&scenario, 50.0).unwrap();
            let series = align_trace(&out.trace).unwrap().series;
            let events = replay(&series, &model, 240).unwrap();
            match events.last().unwrap().verdict {
                Verdict::Matched { cluster, .. } => {
                    batches_used.push(events.len());
                    if medoid_route[cluster] != route_id {
                        false_assign += 1;
                        println!(
                            "  FALSE: route {route_id} matched medoid of route {}",
                            medoid_route[cluster]
                        );
                    }
                }
                _ => {
                    unmatched += 1;
                    println!("  UNMATCHED: route {route_id}");
                }
            }
        }
    }
    println!("known replays: false={false_assign} unmatched={unmatched} batch histogram={batches_used:?}");

    let mut novel_rng = ChaCha8Rng::seed_from_u64(31337);
    let novel = sample_separated_routes(&network, 8, &mut novel_rng).unwrap();
    let mut novel_wrong = 0;
    for nodes in novel.iter().take(10) {
        let scenario = traversal_scenario(&network, nodes, OrientationMode::Random, 20260810, &mut novel_rng);
        let out = synth_trace(&scenario, 50.0).unwrap();
        let series = align_trace(&out.trace).unwrap().series;
        let events = replay(&series, &model, 240).unwrap();
        if !matches!(events.last().unwrap().verdict, Verdict::NewRoute) {
            novel_wrong += 1;
            println!("  NOVEL MATCHED (bad): {:?}", events.last().unwrap().verdict);
        }
    }
    println!("novel replays wrongly matched: {novel_wrong}/8-10");
}
