//! End-to-end experiment with the default model and schedule: pretrain on
//! the source family, adapt to the target family, then score both models on
//! the held-out target shapes. Evaluation uses a coarser grid than the
//! default. Takes a few minutes in release mode.
//!
//!     cargo run --release --example domain_adaptation -- /tmp/uda_run

use std::path::PathBuf;

use uda_recon::train::{run_experiment, RunConfig};

fn main() -> uda_recon::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.eval.grid = 48;
    cfg.eval.samples = 4000;
    cfg.variants = vec!["full".into()];
    cfg.output_dir = std::env::args().nth(1).map(PathBuf::from);
    let outcome = run_experiment(&cfg)?;
    print!("{}", outcome.table());
    if let Some(log) = outcome.variant("full").and_then(|v| v.log.as_ref()) {
        println!("\nepoch   total     sim  source  target      mi     m");
        let f = |v: Option<f64>| v.map_or("      -".to_string(), |x| format!("{x:>7.4}"));
        for e in log.epochs.iter().step_by(10) {
            println!("{:>5} {:>7.4} {} {} {} {} {:.2}", e.epoch, e.total, f(e.sim), f(e.source), f(e.target), f(e.mi), e.m);
        }
    }
    Ok(())
}
