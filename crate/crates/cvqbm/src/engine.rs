//! The CVQBM forward pass: entangled initial state, sequence of post-selected
//! QITE blocks, visible-mode density matrix, success probability, effective
//! Hamiltonian, and homodyne sampling.
//!
//! Mode layout during a step: visible = 0, hidden = 1, ancilla = 2. The
//! ancilla is a fresh vacuum mode per step: attached, entangled, projected
//! onto the configured photon count, and discarded. The hidden mode is never
//! acted on after the initial entangling stage.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    c, hermitian_matrix_function, partial_trace, project_mode, CMatrix, DensityMatrix, FockVector,
    MatrixFunction,
};
use crate::gates::{controlled_x, single_mode_product, xp_spectral, GateParams};
use crate::quadrature::{density_to_pdf, Pdf, QuadGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Directly write the amplitudes of the entangled seed state.
    Exact,
    /// Prepare the seed with two squeezers and a CX gate (small-delta regime).
    Circuit,
}

/// Static configuration of the machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QbmConfig {
    /// Decay constant of the entangled seed state (> 0).
    pub delta: f64,
    /// Number of QITE steps S.
    pub steps: usize,
    /// Fock cutoff n_max.
    pub cutoff: usize,
    /// Ancilla photon count kept by post-selection (0 or 1 in practice).
    pub post_select_outcome: usize,
    pub init_mode: InitMode,
}

impl QbmConfig {
    pub fn new(delta: f64, steps: usize, cutoff: usize) -> Self {
        QbmConfig { delta, steps, cutoff, post_select_outcome: 1, init_mode: InitMode::Exact }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::invalid(format!("delta must be positive, got {}", self.delta)));
        }
        if self.steps > 8 {
            return Err(Error::invalid(format!("steps must be <= 8, got {}", self.steps)));
        }
        if !(6..=20).contains(&self.cutoff) {
            return Err(Error::invalid(format!(
                "cutoff must lie in [6, 20], got {}",
                self.cutoff
            )));
        }
        if self.steps >= 1 && self.cutoff > 17 {
            return Err(Error::invalid(
                "cutoff must be <= 17 when QITE steps run (three-mode stage)",
            ));
        }
        if self.post_select_outcome >= self.cutoff {
            return Err(Error::invalid("post-selection outcome must be below the cutoff"));
        }
        Ok(())
    }
}

/// Trainable per-step gate parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QiteParams {
    steps: Vec<GateParams>,
}

impl QiteParams {
    pub fn new(steps: Vec<GateParams>) -> Self {
        QiteParams { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn step(&self, s: usize) -> &GateParams {
        &self.steps[s]
    }

    pub fn steps(&self) -> &[GateParams] {
        &self.steps
    }

    pub fn as_flat(&self) -> Vec<f64> {
        self.steps.iter().flat_map(|g| g.as_array()).collect()
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.len() % 5 != 0 {
            return Err(Error::invalid("flat parameter vector length must be a multiple of 5"));
        }
        if flat.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("parameters must be finite"));
        }
        let steps = flat
            .chunks_exact(5)
            .map(|ch| GateParams::from_array([ch[0], ch[1], ch[2], ch[3], ch[4]]))
            .collect();
        Ok(QiteParams { steps })
    }

    pub fn is_finite(&self) -> bool {
        self.steps.iter().all(|g| g.is_finite())
    }
}

/// Output of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardResult {
    pub rho_v: DensityMatrix,
    /// Product of the per-step probabilities.
    pub success_prob: f64,
    pub per_step_probs: Vec<f64>,
}

/// Entangled seed state with amplitudes proportional to e^{-delta n} on
/// |n, n>, normalized; the infinite-sum normalization is 1/(1 - e^{-2 delta}).
pub fn entangled_init_exact(delta: f64, cutoff: usize) -> FockVector {
    assert!(delta > 0.0, "delta must be positive");
    let mut amps = DVector::zeros(cutoff * cutoff);
    for n in 0..cutoff {
        amps[n * cutoff + n] = c((-delta * n as f64).exp());
    }
    FockVector::from_amplitudes(2, cutoff, amps)
        .and_then(FockVector::normalized)
        .expect("seed state is well-formed")
}

/// Circuit preparation of the seed state: the visible mode is anti-squeezed
/// in q (r_v = log(delta)/2, wide position wavefunction e^{-delta q^2 / 2}),
/// the hidden mode is squeezed in q (r_h = -log(delta)/2, narrow), and the CX
/// gate with kappa = +1 shifts the hidden position by q_v, producing the
/// positive position correlation of the seed state. Approximates
/// `entangled_init_exact` for small delta.
pub fn entangled_init_circuit(delta: f64, cutoff: usize) -> Result<FockVector> {
    if !(delta > 0.0) {
        return Err(Error::invalid("delta must be positive"));
    }
    let r_v = 0.5 * delta.ln();
    let r_h = -0.5 * delta.ln();
    let sq_v = crate::gates::squeeze(r_v, cutoff)?;
    let sq_h = crate::gates::squeeze(r_h, cutoff)?;
    let mut state = FockVector::vacuum(2, cutoff);
    state.apply_one_mode(&sq_v, 0)?;
    state.apply_one_mode(&sq_h, 1)?;
    let cx = controlled_x(1.0, cutoff)?;
    let amps = &cx * state.amplitudes();
    FockVector::from_amplitudes(2, cutoff, amps)?.normalized()
}

/// One QITE step: attach a vacuum ancilla as mode 2, apply the two-mode block
/// to (visible, ancilla), project the ancilla onto the configured outcome,
/// and renormalize. The hidden mode is untouched throughout.
pub fn qite_step(
    state: &FockVector,
    params: &GateParams,
    cfg: &QbmConfig,
) -> Result<(FockVector, f64)> {
    if state.num_modes() != 2 {
        return Err(Error::UnsupportedShape("qite_step expects a two-mode state".to_string()));
    }
    if state.cutoff() != cfg.cutoff {
        return Err(Error::invalid("state cutoff does not match the configuration"));
    }
    if !params.is_finite() {
        return Err(Error::invalid("gate parameters must be finite"));
    }
    let cutoff = cfg.cutoff;
    let ancilla = FockVector::vacuum(1, cutoff);
    let mut joint = state.tensor(&ancilla)?;

    // X(kappa) on (visible, ancilla), applied spectrally:
    // (Vx ⊗ Vp) diag(e^{-i kappa lx lp}) (Vx ⊗ Vp)†.
    let xp = xp_spectral(cutoff)?;
    joint.apply_one_mode(&xp.vx.adjoint(), 0)?;
    joint.apply_one_mode(&xp.vp.adjoint(), 2)?;
    let kappa = params.kappa;
    joint.scale_two_mode_diagonal(0, 2, |i, j| {
        Complex64::from_polar(1.0, -kappa * xp.lx[i] * xp.lp[j])
    });
    joint.apply_one_mode(&xp.vx, 0)?;
    joint.apply_one_mode(&xp.vp, 2)?;

    // remaining single-mode gates act on the visible rail
    let single = single_mode_product(params, cutoff)?;
    joint.apply_one_mode(&single, 0)?;

    project_mode(&joint, 2, cfg.post_select_outcome)
}

/// The visible-mode operator <outcome| U(params) |0>_A of one block.
///
/// With U = (M ⊗ I) X(kappa) this is M Vx diag(g) Vx† where
/// g_i = sum_j e^{-i kappa lx_i lp_j} Vp[outcome, j] conj(Vp[0, j]).
pub fn step_operator(params: &GateParams, cutoff: usize, outcome: usize) -> Result<CMatrix> {
    if outcome >= cutoff {
        return Err(Error::invalid("outcome must be below the cutoff"));
    }
    if !params.is_finite() {
        return Err(Error::invalid("gate parameters must be finite"));
    }
    let xp = xp_spectral(cutoff)?;
    let mut g = DVector::<Complex64>::zeros(cutoff);
    for i in 0..cutoff {
        let mut acc = Complex64::default();
        for j in 0..cutoff {
            let phase = Complex64::from_polar(1.0, -params.kappa * xp.lx[i] * xp.lp[j]);
            acc += phase * xp.vp[(outcome, j)] * xp.vp[(0, j)].conj();
        }
        g[i] = acc;
    }
    let mut scaled = xp.vx.clone();
    for col in 0..cutoff {
        for row in 0..cutoff {
            scaled[(row, col)] *= g[col];
        }
    }
    let contracted = &scaled * xp.vx.adjoint();
    let single = single_mode_product(params, cutoff)?;
    Ok(single * contracted)
}

/// Full forward pass: seed state, S post-selected QITE steps, partial trace
/// over the hidden mode.
pub fn forward(params: &QiteParams, cfg: &QbmConfig) -> Result<ForwardResult> {
    cfg.validate()?;
    if params.len() != cfg.steps {
        return Err(Error::invalid(format!(
            "expected {} parameter sets, got {}",
            cfg.steps,
            params.len()
        )));
    }
    let mut state = match cfg.init_mode {
        InitMode::Exact => entangled_init_exact(cfg.delta, cfg.cutoff),
        InitMode::Circuit => entangled_init_circuit(cfg.delta, cfg.cutoff)?,
    };
    let mut per_step_probs = Vec::with_capacity(cfg.steps);
    for (s, gp) in params.steps().iter().enumerate() {
        let (next, prob) = qite_step(&state, gp, cfg).map_err(|e| e.with_step(s))?;
        per_step_probs.push(prob);
        state = next;
    }
    let rho_v = partial_trace(&state, 0)?;
    let success_prob = per_step_probs.iter().product();
    Ok(ForwardResult { rho_v, success_prob, per_step_probs })
}

/// Effective Hamiltonian H = -log(rho_v) with the eigenvalue floor 1e-12.
/// Diagnostic only: exp(-H) reproduces rho_v on the unfloored spectrum.
pub fn effective_hamiltonian(rho_v: &DensityMatrix) -> Result<CMatrix> {
    let log = hermitian_matrix_function(rho_v.matrix(), MatrixFunction::Log)?;
    Ok(-log)
}

/// Inverse-CDF homodyne sampling from P(q) = <q| rho |q> on a grid.
/// Deterministic under a fixed seed.
pub fn sample_homodyne(
    rho: &DensityMatrix,
    grid: &QuadGrid,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be at least 1"));
    }
    let pdf = density_to_pdf(rho, grid)?;
    sample_pdf(&pdf, n_samples, seed)
}

/// Inverse-CDF sampling from a tabulated pdf.
pub fn sample_pdf(pdf: &Pdf, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    let grid = pdf.grid();
    let dq = grid.spacing();
    let v = pdf.values();
    let mut cdf = vec![0.0; v.len()];
    for i in 1..v.len() {
        cdf[i] = cdf[i - 1] + 0.5 * (v[i - 1] + v[i]) * dq;
    }
    let total = *cdf.last().unwrap();
    if total <= 0.0 {
        return Err(Error::invalid("pdf mass vanishes on the grid"));
    }
    for ci in &mut cdf {
        *ci /= total;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let u: f64 = rng.gen();
        let idx = cdf.partition_point(|&x| x < u).min(cdf.len() - 1).max(1);
        let (c0, c1) = (cdf[idx - 1], cdf[idx]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        samples.push(grid.q(idx - 1) + frac * dq);
    }
    Ok(samples)
}
