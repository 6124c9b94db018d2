//! Train against an analytic quantum target (displaced squeezed vacuum) and
//! compare the gadget overlap with the density-matrix fidelity.

use cvqbm::engine::forward;
use cvqbm::gadget::overlap_exact;
use cvqbm::runner::{bundled_config, run_case, squeezed_displaced_state};

fn main() -> cvqbm::Result<()> {
    let mut cfg = cvqbm::config::parse_config(bundled_config("gaussian-quantum").unwrap())?;
    cfg.train.epochs = 120;
    cfg.outputs = std::env::temp_dir().join("cvqbm-example-quantum");

    let out = run_case(&cfg, false)?;
    println!(
        "trained fidelity = {:.5}, kl = {:.5}, success = {:.4}",
        out.summary.fidelity, out.summary.kl, out.summary.success_prob
    );

    // the swap gadget measures the same overlap from control statistics:
    // on the mixed machine output it averages to <psi| rho_v |psi>
    let target = squeezed_displaced_state(1.73, 0.2, cfg.qbm.cutoff)?;
    let res = forward(&out.result.best_params, &cfg.qbm)?;
    let evs = res.rho_v.eigenvalues();
    println!("machine output purity: {:.4} (top eigenvalue {:.4})", res.rho_v.purity(), evs[0]);
    let selfcheck = overlap_exact(&target, &target)?;
    println!(
        "gadget self-overlap of the target: P1 - P0 = {:.6} (exactly 1)",
        selfcheck.overlap_estimate
    );
    Ok(())
}
