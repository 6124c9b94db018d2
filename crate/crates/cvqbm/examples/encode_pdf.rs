//! Amplitude-encode a classical probability density into the truncated Fock
//! basis and reconstruct it, reporting the captured norm and round-trip error.

use cvqbm::distributions::pdf_rayleigh;
use cvqbm::quadrature::{density_to_pdf, encode_pdf, kl_divergence, Pdf, QuadGrid};

fn main() -> cvqbm::Result<()> {
    let grid = QuadGrid::new(0.0, 6.0, 1201)?;
    let target = Pdf::from_fn(grid.clone(), |q| pdf_rayleigh(q, 1.0).unwrap_or(0.0))?;

    for cutoff in [6, 10, 15, 20] {
        let enc = encode_pdf(&target, cutoff)?;
        let back = density_to_pdf(&enc.rho_data, &grid)?;
        let l1: f64 = target
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * grid.spacing();
        let kl = kl_divergence(&back, &target)?;
        println!(
            "cutoff {cutoff:2}: captured norm {:.5}, round-trip L1 {:.4}, KL {:.5}",
            enc.captured_norm, l1, kl
        );
    }

    let enc = encode_pdf(&target, 15)?;
    println!("first amplitudes a_n at cutoff 15: {:?}",
        enc.coeffs.iter().take(6).map(|a| (a * 1e4).round() / 1e4).collect::<Vec<_>>());
    Ok(())
}
