//! MMD between two Gaussian clouds as one of them drifts away, using the
//! median-heuristic bandwidth.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use uda_recon::adapt::{median_bandwidth, mmd_layer};
use uda_recon::autodiff::{Graph, Tensor};

fn cloud(rng: &mut ChaCha8Rng, n: usize, d: usize, shift: f64) -> Tensor {
    let data: Vec<f64> = (0..n * d)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z + shift
        })
        .collect();
    Tensor::matrix(n, d, data).expect("shape")
}

fn main() -> uda_recon::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let source = cloud(&mut rng, 128, 17, 0.0);
    println!("shift   sigma    mmd");
    for shift in [0.0, 0.1, 0.25, 0.5, 1.0, 2.0] {
        let target = cloud(&mut rng, 128, 17, shift);
        let sigma = median_bandwidth(&source, &target)?;
        let mut g = Graph::new();
        let (s, t) = (g.constant(source.clone()), g.constant(target));
        let v = mmd_layer(&mut g, s, t, sigma)?;
        println!("{shift:>5.2}  {sigma:>6.3}  {:.5}", g.scalar_value(v));
    }
    Ok(())
}
