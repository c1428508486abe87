//! Records a small computation on the tape, runs backward, and checks every
//! adaptation loss term against finite differences.

use uda_recon::adapt::gradcheck_losses;
use uda_recon::autodiff::{Graph, ParamStore, Tensor};

fn main() -> uda_recon::Result<()> {
    let mut store = ParamStore::new();
    let w = store.add("w", Tensor::matrix(2, 1, vec![0.5, -1.0])?)?;
    let b = store.add("b", Tensor::vector(vec![0.1]))?;
    let mut g = Graph::new();
    let x = g.constant(Tensor::matrix(3, 2, vec![1.0, 2.0, -1.0, 0.5, 0.0, 1.0])?);
    let (wv, bv) = (g.param(&store, w), g.param(&store, b));
    let h = g.affine(x, wv, bv)?;
    let y = g.sigmoid(h);
    let loss = g.mean(y)?;
    g.backward(loss, &mut store)?;
    println!("loss {:.6}", g.scalar_value(loss));
    println!("dL/dw {:?}", store.get(w).grad.data());
    println!("dL/db {:?}", store.get(b).grad.data());

    println!("\nterm     seed  max rel err");
    for seed in 0..3 {
        for c in gradcheck_losses(seed)? {
            println!("{:<8} {:>4}  {:.2e}", c.term, c.seed, c.report.max_rel_error);
        }
    }
    Ok(())
}
