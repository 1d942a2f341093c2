// Scratch: distribution of nominal-signature distances between waypoint
// routes (removed once thresholds settle).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use routewarp::dtw;
use routewarp::maneuvers::{grid_route, maneuvers_of_path, GridNetwork};
use routewarp::synth::nominal_signature;

#[test]
#[ignore]
fn probe_signature_separation() {
    let network = GridNetwork::new(40, 40, 100.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let min_leg = network.rows.min(network.cols) / 3;
    let mut routes = Vec::new();
    'outer: while routes.len() < 25 {
        let n_way = rng.gen_range(1..=2);
        let mut stations: Vec<(usize, usize)> = Vec::new();
        for _ in 0..n_way + 2 {
            let mut tries = 0;
            let node = loop {
                tries += 1;
                if tries > 200 {
                    continue 'outer;
                }
                let cand = (rng.gen_range(0..40), rng.gen_range(0..40));
                let ok = stations.last().map_or(true, |&p: &(usize, usize)| {
                    p.0.abs_diff(cand.0) + p.1.abs_diff(cand.1) >= min_leg
                }) && !stations.contains(&cand);
                if ok {
                    break cand;
                }
            };
            stations.push(node);
        }
        let mut nodes = vec![stations[0]];
        for leg in stations.windows(2) {
            let seg = grid_route(&network, leg[0], leg[1], rng.gen());
            if nodes.len() >= 2 && seg.nodes[1] == nodes[nodes.len() - 2] {
                continue 'outer;
            }
            nodes.extend_from_slice(&seg.nodes[1..]);
        }
        if maneuvers_of_path(&network, &nodes).len() < 6 {
            continue;
        }
        routes.push(nodes);
    }
    let sigs: Vec<Vec<f64>> = routes
        .iter()
        .map(|n| nominal_signature(&network, n))
        .collect();
    let mut dists = Vec::new();
    for i in 0..sigs.len() {
        for j in i + 1..sigs.len() {
            dists.push(dtw::dtw_distance(&sigs[i], &sigs[j], dtw::abs_diff).unwrap());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!(
        "pairs {} | min {:.4} p10 {:.4} median {:.4} p90 {:.4} max {:.4}",
        dists.len(),
        dists[0],
        dists[dists.len() / 10],
        dists[dists.len() / 2],
        dists[9 * dists.len() / 10],
        dists[dists.len() - 1]
    );
    let lens: Vec<usize> = sigs.iter().map(|s| s.len()).collect();
    println!("sig lengths: {:?}", &lens[..10]);
}
