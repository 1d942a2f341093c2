// Scratch: failing-seed geometry.
use routewarp::align::align_trace;
use routewarp::maneuvers::GridNetwork;
use routewarp::mining::{bic_curve, classical_mds, dissimilarity_matrix};
use routewarp::synth::{synth_corpus, CorpusSpec};
use routewarp::trace_io::AngularSpeedSeries;

#[test]
#[ignore]
fn probe_failing_seeds() {
    let network = GridNetwork::new(48, 48, 100.0);
    for seed in [7u64, 12345] {
        let spec = CorpusSpec::new(8, 5, seed);
        let journeys = synth_corpus(&network, &spec).unwrap();
        let aligned: Vec<AngularSpeedSeries> = journeys
            .iter()
            .map(|j| {
                let mut out = align_trace(&j.trace).unwrap();
                out.series.origin_trace_id = j.trace_id.clone();
                out.series
            })
            .collect();
        let d = dissimilarity_matrix(&aligned).unwrap();
        let curve = bic_curve(&d, 12, 1).unwrap();
        println!(
            "seed {seed} BIC: {:?}",
            curve.iter().map(|(k, b)| (*k, b.round())).collect::<Vec<_>>()
        );
        let coords = classical_mds(&d, 2);
        let labels: Vec<usize> = journeys.iter().map(|j| j.route_id).collect();
        for r in 0..8 {
            let pts: Vec<&Vec<f64>> = coords
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == r)
                .map(|(c, _)| c)
                .collect();
            let cx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
            let cy = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
            let spread = pts
                .iter()
                .map(|p| ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt())
                .fold(0.0, f64::max);
            let all: Vec<(f64, f64)> = pts.iter().map(|p| (p[0], p[1])).collect();
            println!(
                "  route {r}: center ({cx:.4},{cy:.4}) spread {spread:.4} pts {:?}",
                all.iter()
                    .map(|(x, y)| ((x * 1e3).round() / 1e3, (y * 1e3).round() / 1e3))
                    .collect::<Vec<_>>()
            );
        }
    }
}
