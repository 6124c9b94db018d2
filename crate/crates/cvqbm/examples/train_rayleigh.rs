//! Train the machine against a Rayleigh target (shortened run of the bundled
//! case study) and print the fidelity trajectory and final metrics.

use cvqbm::runner::{bundled_config, run_case};

fn main() -> cvqbm::Result<()> {
    let mut cfg = cvqbm::config::parse_config(bundled_config("rayleigh").unwrap())?;
    cfg.train.epochs = 40; // the bundled case uses 100; this is a quick tour
    cfg.outputs = std::env::temp_dir().join("cvqbm-example-rayleigh");

    let out = run_case(&cfg, false)?;
    println!("fidelity over the first epochs:");
    for (i, f) in out.result.fidelity_history.iter().enumerate().step_by(5) {
        println!("  epoch {i:3}: {f:.4}");
    }
    let s = &out.summary;
    println!(
        "final: fidelity = {:.4}, kl = {:.4}, success probability = {:.4}",
        s.fidelity, s.kl, s.success_prob
    );
    println!("artifacts in {}", s.out_dir.display());
    Ok(())
}
