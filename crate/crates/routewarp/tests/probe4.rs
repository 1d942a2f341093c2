// Scratch: achieved separations from the production sampler.
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use routewarp::dtw;
use routewarp::maneuvers::GridNetwork;
use routewarp::synth::{nominal_signature, sample_separated_routes};

#[test]
#[ignore]
fn probe_selection() {
    let network = GridNetwork::new(48, 48, 100.0);
    for seed in [20260810u64, 1, 2, 3, 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match sample_separated_routes(&network, 8, &mut rng) {
            Ok(routes) => {
                let sigs: Vec<Vec<f64>> = routes
                    .iter()
                    .map(|n| nominal_signature(&network, n))
                    .collect();
                let mut min = f64::INFINITY;
                for i in 0..sigs.len() {
                    for j in i + 1..sigs.len() {
                        min = min.min(
                            dtw::dtw_distance(&sigs[i], &sigs[j], dtw::abs_diff).unwrap(),
                        );
                    }
                }
                let turns: Vec<usize> = routes
                    .iter()
                    .map(|n| routewarp::maneuvers::maneuvers_of_path(&network, n).len())
                    .collect();
                println!("seed {seed}: ok, min separation {min:.4}, turns {turns:?}");
            }
            Err(e) => println!("seed {seed}: ERR {e}"),
        }
    }
}
