//! Overlap-estimation gadget for quantum targets: two control qumodes mixed
//! on 50:50 beam splitters around a CSWAP of the data modes, so the control
//! measurement statistics give P1 - P0 = |<phi|psi>|^2.
//!
//! The control modes live in a dimension-2 truncation: the beam splitter
//! never takes a single photon out of the {|01>, |10>} sector, and the CSWAP
//! is defined as identity on unreachable control components.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{c, CMatrix, FockVector};
use crate::gates::beam_splitter_5050;

/// Control-mode measurement statistics of one gadget evaluation.
/// `shots == 0` marks the exact (infinite-shot) mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GadgetResult {
    pub p0: f64,
    pub p1: f64,
    pub overlap_estimate: f64,
    pub shots: usize,
}

/// Three-subsystem CSWAP on (control, data, data): |0><0| ⊗ I + |1><1| ⊗ SWAP,
/// with the control truncated to {|0>, |1>}. Dimension 2 * cutoff^2.
pub fn cswap(cutoff: usize) -> CMatrix {
    let d2 = cutoff * cutoff;
    let mut m = CMatrix::zeros(2 * d2, 2 * d2);
    for i in 0..d2 {
        m[(i, i)] = c(1.0);
    }
    for d1 in 0..cutoff {
        for d2i in 0..cutoff {
            let from = d2 + d1 * cutoff + d2i;
            let to = d2 + d2i * cutoff + d1;
            m[(to, from)] = c(1.0);
        }
    }
    m
}

struct GadgetState {
    cutoff: usize,
    // index = ((c1 * 2 + c2) * cutoff + d1) * cutoff + d2
    amps: Vec<Complex64>,
}

impl GadgetState {
    fn new(psi: &FockVector, phi: &FockVector) -> Self {
        let cutoff = psi.cutoff();
        let d2 = cutoff * cutoff;
        let mut amps = vec![Complex64::default(); 4 * d2];
        // controls prepared in |0>|1>, data modes in psi ⊗ phi
        for d1 in 0..cutoff {
            for d2i in 0..cutoff {
                amps[d2 + d1 * cutoff + d2i] =
                    psi.amplitudes()[d1] * phi.amplitudes()[d2i];
            }
        }
        GadgetState { cutoff, amps }
    }

    /// Apply a 4x4 operator to the two-control block.
    fn apply_on_controls(&mut self, op: &CMatrix) {
        let d2 = self.cutoff * self.cutoff;
        let mut block = [Complex64::default(); 4];
        for data_idx in 0..d2 {
            for (k, b) in block.iter_mut().enumerate() {
                *b = self.amps[k * d2 + data_idx];
            }
            for row in 0..4 {
                let mut acc = Complex64::default();
                for (col, b) in block.iter().enumerate() {
                    acc += op[(row, col)] * *b;
                }
                self.amps[row * d2 + data_idx] = acc;
            }
        }
    }

    /// CSWAP with the first control: swap the data modes on the c1 = 1 half.
    fn apply_cswap(&mut self) {
        let cutoff = self.cutoff;
        let d2 = cutoff * cutoff;
        for c2 in 0..2 {
            let base = (2 + c2) * d2;
            for d1 in 0..cutoff {
                for d2i in (d1 + 1)..cutoff {
                    let a = base + d1 * cutoff + d2i;
                    let b = base + d2i * cutoff + d1;
                    self.amps.swap(a, b);
                }
            }
        }
    }

    /// Marginal photon-count probabilities of the first control.
    fn control_marginal(&self) -> (f64, f64) {
        let d2 = self.cutoff * self.cutoff;
        let p0: f64 = self.amps[..2 * d2].iter().map(|a| a.norm_sqr()).sum();
        let p1: f64 = self.amps[2 * d2..].iter().map(|a| a.norm_sqr()).sum();
        (p0, p1)
    }
}

fn exact_statistics(psi: &FockVector, phi: &FockVector) -> Result<(f64, f64)> {
    if psi.num_modes() != 1 || phi.num_modes() != 1 {
        return Err(Error::UnsupportedShape(
            "gadget inputs must be single-mode states".to_string(),
        ));
    }
    if psi.cutoff() != phi.cutoff() {
        return Err(Error::invalid("gadget inputs must share a cutoff"));
    }
    let bs = beam_splitter_5050(2)?;
    let mut state = GadgetState::new(psi, phi);
    state.apply_on_controls(&bs);
    state.apply_cswap();
    state.apply_on_controls(&bs);
    Ok(state.control_marginal())
}

/// Exact gadget statistics: simulate BS -> CSWAP -> BS and read the first
/// control's photon-count distribution. P1 - P0 equals |<phi|psi>|^2.
pub fn overlap_exact(psi: &FockVector, phi: &FockVector) -> Result<GadgetResult> {
    let (p0, p1) = exact_statistics(psi, phi)?;
    Ok(GadgetResult { p0, p1, overlap_estimate: p1 - p0, shots: 0 })
}

/// Shot-noise realization of the gadget: Bernoulli sampling of the exact
/// control statistics, standard error about 1/sqrt(shots).
pub fn overlap_sampled(
    psi: &FockVector,
    phi: &FockVector,
    shots: usize,
    seed: u64,
) -> Result<GadgetResult> {
    if shots == 0 {
        return Err(Error::invalid("shots must be at least 1"));
    }
    let (_, p1) = exact_statistics(psi, phi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ones = 0usize;
    for _ in 0..shots {
        if rng.gen::<f64>() < p1 {
            ones += 1;
        }
    }
    let p1_hat = ones as f64 / shots as f64;
    let p0_hat = 1.0 - p1_hat;
    Ok(GadgetResult { p0: p0_hat, p1: p1_hat, overlap_estimate: p1_hat - p0_hat, shots })
}
