//! Estimate |<phi|psi>|^2 with the CSWAP interferometer gadget, exactly and
//! with shot noise.

use cvqbm::gadget::{overlap_exact, overlap_sampled};
use cvqbm::runner::{squeezed_cat_state, squeezed_displaced_state};

fn main() -> cvqbm::Result<()> {
    let cutoff = 10;
    let psi = squeezed_displaced_state(1.73, 0.2, cutoff)?;
    let phi = squeezed_cat_state(2.60, 1.2, cutoff)?;

    let direct = psi.inner(&phi).norm_sqr();
    let exact = overlap_exact(&psi, &phi)?;
    println!("direct |<phi|psi>|^2      = {direct:.8}");
    println!("gadget P1 - P0 (exact)    = {:.8}", exact.overlap_estimate);
    println!("branch weights: P0 = {:.6}, P1 = {:.6}", exact.p0, exact.p1);

    println!("shot-noise convergence:");
    for shots in [100usize, 1_000, 10_000, 100_000, 1_000_000] {
        let sampled = overlap_sampled(&psi, &phi, shots, 7)?;
        println!(
            "  {shots:>7} shots: estimate = {:.6}, error = {:.2e}",
            sampled.overlap_estimate,
            (sampled.overlap_estimate - direct).abs()
        );
    }
    Ok(())
}
