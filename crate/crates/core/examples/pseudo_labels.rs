//! Neighbourhood pseudo-labels: target features look up their nearest
//! labelled source features, and the labels move from the model's own
//! prediction towards that aggregate as the schedule ramps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uda_recon::adapt::{aggregate_neighbours, knn_indices, reweight, update_pseudo_labels, PseudoLabelState, Schedule};
use uda_recon::autodiff::Tensor;

fn main() -> uda_recon::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = 4;
    // Source points: three feature channels plus a depth; inside iff depth < 0.
    let n = 200;
    let mut src = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let z: f64 = rng.random_range(-0.5..0.5);
        src.extend((0..3).map(|_| rng.random_range(-1.0..1.0)));
        src.push(z);
        labels.push((z < 0.0) as u8 as f64);
    }
    let source = Tensor::matrix(n, d, src)?;
    let queries = Tensor::matrix(2, d, vec![0.0, 0.0, 0.0, -0.3, 0.0, 0.0, 0.0, 0.3])?;
    for lambda in [1.0, 256.0] {
        let agg = aggregate_neighbours(&queries, &source, &labels, 8, lambda)?;
        println!("lambda {lambda:>5}: aggregates {agg:.3?}");
    }
    let refs: Vec<f64> = (0..n).flat_map(|j| reweight(source.row(j), 256.0)).collect();
    println!("8 nearest of query 0: {:?}", knn_indices(&reweight(queries.row(0), 256.0), &refs, d, 8));

    let schedule = Schedule::default();
    let mut state = PseudoLabelState::default();
    let prediction = vec![vec![0.9, 0.1]];
    let aggregate = vec![vec![0.0, 1.0]];
    for epoch in [0, 30, 45, 60, 90] {
        update_pseudo_labels(&mut state, &prediction, &aggregate, epoch, &schedule)?;
        println!("epoch {epoch:>2}: m = {:.3}, labels {:.3?}", state.momentum, state.labels[0]);
    }
    Ok(())
}
