//! Fidelity computation, cost, gradient estimation, Adam with exponential
//! learning-rate decay, the training loop, and post-training generation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{c, hermitian_eigen, hermitian_matrix_function, DensityMatrix, MatrixFunction};
use crate::gates::SQUEEZE_CLAMP;
use crate::engine::{forward, ForwardResult, QbmConfig, QiteParams};
use crate::noise::{noisy_forward, LossPlacement};
use crate::quadrature::{density_to_pdf, kl_divergence, Pdf, QuadGrid};
use crate::engine::sample_pdf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitScheme {
    /// chi, r, chi', alpha ~ U(-0.1, 0.1), kappa ~ U(0.05, 0.3) per step.
    SmallUniform,
    /// Explicit flat start vector of length 5 * steps.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr0: f64,
    pub decay_steps: usize,
    pub decay_rate: f64,
    pub fd_step: f64,
    pub seed: u64,
    pub init_scheme: InitScheme,
    /// Optional success-probability floor: below it the cost gains a
    /// quadratic hinge penalty (floor - P)^2.
    pub success_floor: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            lr0: 0.05,
            decay_steps: 100,
            decay_rate: 0.96,
            fd_step: 1e-4,
            seed: 0,
            init_scheme: InitScheme::SmallUniform,
            success_floor: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        if !(self.lr0 > 0.0) {
            return Err(Error::invalid("lr0 must be positive"));
        }
        if self.decay_steps == 0 {
            return Err(Error::invalid("decay_steps must be at least 1"));
        }
        if !(self.decay_rate > 0.0 && self.decay_rate <= 1.0) {
            return Err(Error::invalid("decay_rate must lie in (0, 1]"));
        }
        if !(1e-6..=1e-2).contains(&self.fd_step) {
            return Err(Error::invalid("fd_step must lie in [1e-6, 1e-2]"));
        }
        if let Some(f) = self.success_floor {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::invalid("success_floor must lie in [0, 1]"));
            }
        }
        if let InitScheme::Custom(v) = &self.init_scheme {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid("custom init vector must be finite"));
            }
        }
        Ok(())
    }

    /// Exponentially decayed learning rate at iteration t (continuous decay).
    pub fn learning_rate(&self, t: usize) -> f64 {
        self.lr0 * self.decay_rate.powf(t as f64 / self.decay_steps as f64)
    }
}

/// Trained parameters plus metric history.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainResult {
    pub best_params: QiteParams,
    pub fidelity_history: Vec<f64>,
    pub final_fidelity: f64,
    pub final_kl: f64,
    pub final_success_prob: f64,
    pub seed: u64,
    pub qbm: QbmConfig,
    pub train: TrainConfig,
    /// Target density sampled on the training grid; generation computes its
    /// KL divergence against this.
    pub target_pdf: Pdf,
}

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2, with a pure-state
/// shortcut <psi| b |psi> when either argument is rank one.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.cutoff() != b.cutoff() {
        return Err(Error::invalid("fidelity requires matching cutoffs"));
    }
    if a.purity() > 1.0 - 1e-10 {
        return Ok(pure_state_fidelity(a, b));
    }
    if b.purity() > 1.0 - 1e-10 {
        return Ok(pure_state_fidelity(b, a));
    }
    fidelity_uhlmann(a, b)
}

/// <psi| rho |psi> where psi is the dominant eigenvector of the (pure) first
/// argument.
pub fn pure_state_fidelity(pure: &DensityMatrix, rho: &DensityMatrix) -> f64 {
    let (vals, vecs) = hermitian_eigen(pure.matrix());
    let mut top = 0usize;
    for i in 0..vals.len() {
        if vals[i] > vals[top] {
            top = i;
        }
    }
    let psi = vecs.column(top);
    (psi.adjoint() * rho.matrix() * psi)[(0, 0)].re.clamp(0.0, f64::INFINITY)
}

/// Full Uhlmann formula via Hermitian square roots.
pub fn fidelity_uhlmann(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.cutoff() != b.cutoff() {
        return Err(Error::invalid("fidelity requires matching cutoffs"));
    }
    let sqrt_a = hermitian_matrix_function(a.matrix(), MatrixFunction::Sqrt)?;
    let inner = &sqrt_a * b.matrix() * &sqrt_a;
    let inner = (&inner + inner.adjoint()) * c(0.5);
    let s = hermitian_matrix_function(&inner, MatrixFunction::Sqrt)?;
    let tr = s.trace().re;
    Ok(tr * tr)
}

/// Optional noise applied during cost evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSetting {
    pub transmissivity: f64,
    pub placement: LossPlacement,
}

fn run_forward(
    params: &QiteParams,
    qbm: &QbmConfig,
    noise: Option<NoiseSetting>,
) -> Result<ForwardResult> {
    match noise {
        Some(n) if n.transmissivity < 1.0 => {
            noisy_forward(params, qbm, n.transmissivity, n.placement)
        }
        _ => forward(params, qbm),
    }
}

/// Cost 1 - F(target, rho_v), plus the optional success-floor hinge penalty.
pub fn cost(
    params: &QiteParams,
    target: &DensityMatrix,
    qbm: &QbmConfig,
    train: &TrainConfig,
) -> Result<f64> {
    cost_noisy(params, target, qbm, train, None)
}

pub fn cost_noisy(
    params: &QiteParams,
    target: &DensityMatrix,
    qbm: &QbmConfig,
    train: &TrainConfig,
    noise: Option<NoiseSetting>,
) -> Result<f64> {
    let res = run_forward(params, qbm, noise)
        .map_err(|e| e.with_probe(params.as_flat()))?;
    let f = fidelity(target, &res.rho_v)?;
    let mut cost = 1.0 - f;
    if let Some(floor) = train.success_floor {
        let gap = (floor - res.success_prob).max(0.0);
        cost += gap * gap;
    }
    Ok(cost)
}

/// Central-difference gradient of an arbitrary objective. Probes that hit
/// degenerate post-selection retry with h/10 up to 3 times before reporting
/// the coordinate as unavailable.
pub fn finite_difference_gradient<F>(objective: F, x: &[f64], h0: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            let mut h = h0;
            for _attempt in 0..4 {
                let mut plus = x.to_vec();
                plus[i] += h;
                let mut minus = x.to_vec();
                minus[i] -= h;
                match (objective(&plus), objective(&minus)) {
                    (Ok(cp), Ok(cm)) => return Ok((cp - cm) / (2.0 * h)),
                    (Err(Error::DegeneratePostSelection { .. }), _)
                    | (_, Err(Error::DegeneratePostSelection { .. })) => {
                        h /= 10.0;
                    }
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                }
            }
            Err(Error::GradientUnavailable { coordinate: i })
        })
        .collect()
}

/// Gradient of the training cost with respect to the flat parameter vector.
pub fn gradient(
    params: &QiteParams,
    target: &DensityMatrix,
    qbm: &QbmConfig,
    train: &TrainConfig,
) -> Result<Vec<f64>> {
    gradient_noisy(params, target, qbm, train, None)
}

pub fn gradient_noisy(
    params: &QiteParams,
    target: &DensityMatrix,
    qbm: &QbmConfig,
    train: &TrainConfig,
    noise: Option<NoiseSetting>,
) -> Result<Vec<f64>> {
    let flat = params.as_flat();
    finite_difference_gradient(
        |x| cost_noisy(&QiteParams::from_flat(x)?, target, qbm, train, noise),
        &flat,
        train.fd_step,
    )
}

/// Adam optimizer state (beta1 = 0.9, beta2 = 0.999, eps = 1e-8).
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: usize,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        AdamState { m: vec![0.0; dim], v: vec![0.0; dim], t: 0 }
    }

    pub fn iteration(&self) -> usize {
        self.t
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// One Adam update with the exponential learning-rate schedule; squeezing
/// coordinates (index 1 mod 5) are clamped to |r| <= 2 afterwards.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut [f64],
    grads: &[f64],
    train: &TrainConfig,
) {
    debug_assert_eq!(params.len(), grads.len());
    let lr = train.learning_rate(state.t);
    state.t += 1;
    let t = state.t as f64;
    let bias1 = 1.0 - ADAM_BETA1.powf(t);
    let bias2 = 1.0 - ADAM_BETA2.powf(t);
    for i in 0..params.len() {
        state.m[i] = ADAM_BETA1 * state.m[i] + (1.0 - ADAM_BETA1) * grads[i];
        state.v[i] = ADAM_BETA2 * state.v[i] + (1.0 - ADAM_BETA2) * grads[i] * grads[i];
        let m_hat = state.m[i] / bias1;
        let v_hat = state.v[i] / bias2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        if i % 5 == 1 {
            params[i] = params[i].clamp(-SQUEEZE_CLAMP, SQUEEZE_CLAMP);
        }
    }
}

fn draw_init(scheme: &InitScheme, steps: usize, rng: &mut ChaCha8Rng) -> Result<QiteParams> {
    match scheme {
        InitScheme::SmallUniform => {
            let mut flat = Vec::with_capacity(5 * steps);
            for _ in 0..steps {
                flat.push(rng.gen_range(-0.1..0.1)); // chi
                flat.push(rng.gen_range(-0.1..0.1)); // r
                flat.push(rng.gen_range(-0.1..0.1)); // chi'
                flat.push(rng.gen_range(-0.1..0.1)); // alpha
                flat.push(rng.gen_range(0.05..0.3)); // kappa
            }
            QiteParams::from_flat(&flat)
        }
        InitScheme::Custom(v) => {
            if v.len() != 5 * steps {
                return Err(Error::invalid(format!(
                    "custom init vector must have length {}, got {}",
                    5 * steps,
                    v.len()
                )));
            }
            QiteParams::from_flat(v)
        }
    }
}

/// Train against a target density matrix. One Adam update per epoch,
/// best-cost parameters tracked, deterministic for a fixed seed.
pub fn train(
    target: &DensityMatrix,
    qbm: &QbmConfig,
    train_cfg: &TrainConfig,
    grid: &QuadGrid,
) -> Result<TrainResult> {
    train_noisy(target, qbm, train_cfg, grid, None)
}

pub fn train_noisy(
    target: &DensityMatrix,
    qbm: &QbmConfig,
    train_cfg: &TrainConfig,
    grid: &QuadGrid,
    noise: Option<NoiseSetting>,
) -> Result<TrainResult> {
    qbm.validate()?;
    train_cfg.validate()?;
    if qbm.steps == 0 {
        return Err(Error::invalid("training requires at least one QITE step"));
    }
    if target.cutoff() != qbm.cutoff {
        return Err(Error::invalid("target cutoff must match the machine cutoff"));
    }
    let target_pdf = density_to_pdf(target, grid)?;

    let mut rng = ChaCha8Rng::seed_from_u64(train_cfg.seed);
    let max_restarts = 5;
    let mut params = None;
    for _ in 0..max_restarts {
        let candidate = draw_init(&train_cfg.init_scheme, qbm.steps, &mut rng)?;
        match cost_noisy(&candidate, target, qbm, train_cfg, noise) {
            Ok(_) => {
                params = Some(candidate);
                break;
            }
            Err(Error::DegeneratePostSelection { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let mut flat = params
        .ok_or(Error::InitializationFailed { attempts: max_restarts })?
        .as_flat();

    let mut adam = AdamState::new(flat.len());
    let mut fidelity_history = Vec::with_capacity(train_cfg.epochs);
    let mut best_cost = f64::INFINITY;
    let mut best_flat = flat.clone();
    for _epoch in 0..train_cfg.epochs {
        let current = QiteParams::from_flat(&flat)?;
        let grads = gradient_noisy(&current, target, qbm, train_cfg, noise)?;
        adam_step(&mut adam, &mut flat, &grads, train_cfg);

        let updated = QiteParams::from_flat(&flat)?;
        let res = run_forward(&updated, qbm, noise)
            .map_err(|e| e.with_probe(updated.as_flat()))?;
        let f = fidelity(target, &res.rho_v)?;
        let mut epoch_cost = 1.0 - f;
        if let Some(floor) = train_cfg.success_floor {
            let gap = (floor - res.success_prob).max(0.0);
            epoch_cost += gap * gap;
        }
        fidelity_history.push(f);
        if epoch_cost < best_cost {
            best_cost = epoch_cost;
            best_flat = flat.clone();
        }
    }

    let best_params = QiteParams::from_flat(&best_flat)?;
    let best_run = run_forward(&best_params, qbm, noise)?;
    let final_fidelity = fidelity(target, &best_run.rho_v)?;
    let gen_pdf = density_to_pdf(&best_run.rho_v, grid)?;
    let final_kl = kl_divergence(&gen_pdf, &target_pdf)?;
    Ok(TrainResult {
        best_params,
        fidelity_history,
        final_fidelity,
        final_kl,
        final_success_prob: best_run.success_prob,
        seed: train_cfg.seed,
        qbm: *qbm,
        train: train_cfg.clone(),
        target_pdf,
    })
}

/// Run the trained circuit, reconstruct the generated pdf, draw homodyne
/// samples, and report the KL divergence against the stored target pdf.
pub fn generate(
    result: &TrainResult,
    qbm: &QbmConfig,
    grid: &QuadGrid,
    n_samples: usize,
    seed: u64,
) -> Result<(Pdf, Vec<f64>, f64)> {
    if grid != result.target_pdf.grid() {
        return Err(Error::invalid("generation grid must match the training grid"));
    }
    let res = forward(&result.best_params, qbm)?;
    let pdf = density_to_pdf(&res.rho_v, grid)?;
    let samples = sample_pdf(&pdf, n_samples, seed)?;
    let kl = kl_divergence(&pdf, &result.target_pdf)?;
    Ok((pdf, samples, kl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::InitMode;
    use crate::fock::CMatrix;
    use crate::fock::FockVector;
    use nalgebra::DVector;
    use num_complex::Complex64;

    fn pure_density(amps: Vec<Complex64>) -> DensityMatrix {
        let n = amps.len();
        let st = FockVector::from_amplitudes(1, n, DVector::from_vec(amps))
            .unwrap()
            .normalized()
            .unwrap();
        DensityMatrix::from_pure(&st).unwrap()
    }

    #[test]
    fn fidelity_basic_cases() {
        let rho = DensityMatrix::thermal(1.0, 8);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);

        let zero = pure_density(vec![c(1.0), c(0.0), c(0.0)]);
        let one = pure_density(vec![c(0.0), c(1.0), c(0.0)]);
        assert!(fidelity(&zero, &one).unwrap() < 1e-12);

        let mut half = CMatrix::zeros(2, 2);
        half[(0, 0)] = c(0.5);
        half[(1, 1)] = c(0.5);
        let mixed = DensityMatrix::new(half).unwrap();
        let vac = pure_density(vec![c(1.0), c(0.0)]);
        assert!((fidelity(&vac, &mixed).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_symmetry_and_shortcut_agreement() {
        let a = DensityMatrix::thermal(0.8, 8);
        let b = DensityMatrix::thermal(1.6, 8);
        let f_ab = fidelity_uhlmann(&a, &b).unwrap();
        let f_ba = fidelity_uhlmann(&b, &a).unwrap();
        assert!((f_ab - f_ba).abs() < 1e-9);
        assert!(f_ab > 0.0 && f_ab <= 1.0 + 1e-9);

        // pure argument: Uhlmann equals the shortcut
        let pure = pure_density(vec![c(0.8), c(0.5), c(0.2), c(0.0), c(0.0), c(0.0), c(0.0), c(0.0)]);
        let f_short = fidelity(&pure, &b).unwrap();
        let f_full = fidelity_uhlmann(&pure, &b).unwrap();
        assert!((f_short - f_full).abs() < 1e-9, "{f_short} vs {f_full}");
    }

    #[test]
    fn fidelity_rejects_cutoff_mismatch() {
        let a = DensityMatrix::thermal(1.0, 8);
        let b = DensityMatrix::thermal(1.0, 10);
        assert!(fidelity(&a, &b).is_err());
    }

    #[test]
    fn cost_of_thermal_matching_target_with_identity_block() {
        // with outcome 0 and all-zero parameters the block acts as identity,
        // so the S = 1 machine reproduces the S = 0 thermal state exactly
        let delta = 1.5;
        let cutoff = 10;
        let mut qbm = QbmConfig::new(delta, 1, cutoff);
        qbm.post_select_outcome = 0;
        let target = DensityMatrix::thermal(delta, cutoff);
        let params = QiteParams::from_flat(&[0.0; 5]).unwrap();
        let train_cfg = TrainConfig::default();
        let cv = cost(&params, &target, &qbm, &train_cfg).unwrap();
        assert!(cv.abs() < 1e-6, "cost {cv}");
    }

    #[test]
    fn cost_stays_in_unit_interval_without_penalty() {
        let qbm = QbmConfig::new(1.5, 1, 10);
        let target = DensityMatrix::thermal(1.5, 10);
        let train_cfg = TrainConfig::default();
        let params = QiteParams::from_flat(&[0.3, 0.2, -0.4, 0.1, 0.4]).unwrap();
        let cv = cost(&params, &target, &qbm, &train_cfg).unwrap();
        assert!((0.0..=1.0).contains(&cv), "cost {cv}");
    }

    #[test]
    fn cost_attaches_probe_params_on_degeneracy() {
        let qbm = QbmConfig::new(1.5, 1, 10);
        let target = DensityMatrix::thermal(1.5, 10);
        let train_cfg = TrainConfig::default();
        let params = QiteParams::from_flat(&[0.0; 5]).unwrap();
        match cost(&params, &target, &qbm, &train_cfg) {
            Err(Error::DegeneratePostSelection { probe: Some(p), .. }) => {
                assert_eq!(p.len(), 5)
            }
            other => panic!("expected degenerate error with probe, got {other:?}"),
        }
    }

    #[test]
    fn finite_difference_on_quadratic() {
        let f = |x: &[f64]| Ok(x.iter().map(|v| v * v).sum());
        let x = vec![1.0, 1.0, 1.0, -0.5];
        let g = finite_difference_gradient(f, &x, 1e-4).unwrap();
        for (gi, xi) in g.iter().zip(&x) {
            assert!((gi - 2.0 * xi).abs() < 1e-6, "{gi} vs {}", 2.0 * xi);
        }
    }

    #[test]
    fn finite_difference_richardson_ratio() {
        // FD error scales as h^2: successive halvings shrink differences ~4x
        let f = |x: &[f64]| Ok((2.0 * x[0]).sin() + 0.3 * x[0] * x[0]);
        let x = vec![0.4];
        let g = |h: f64| finite_difference_gradient(f, &x, h).unwrap()[0];
        let (g1, g2, g4) = (g(4e-2), g(2e-2), g(1e-2));
        let ratio = (g1 - g2) / (g2 - g4);
        assert!((ratio - 4.0).abs() < 1.2, "ratio {ratio}");
    }

    #[test]
    fn adam_first_step_and_zero_gradient() {
        let train_cfg = TrainConfig::default();
        let mut st = AdamState::new(2);
        let mut p = vec![0.0, 0.0];
        adam_step(&mut st, &mut p, &[1.0, 1.0], &train_cfg);
        for v in &p {
            let delta = v.abs();
            assert!((0.049..=0.05).contains(&delta), "first-step move {delta}");
        }

        let mut st = AdamState::new(2);
        let mut p = vec![0.7, -0.2];
        adam_step(&mut st, &mut p, &[0.0, 0.0], &train_cfg);
        assert_eq!(p, vec![0.7, -0.2]);
    }

    #[test]
    fn adam_clamps_squeezing_coordinate() {
        let train_cfg = TrainConfig { lr0: 5.0, ..TrainConfig::default() };
        let mut st = AdamState::new(5);
        let mut p = vec![0.0; 5];
        adam_step(&mut st, &mut p, &[0.0, -1.0, 0.0, 0.0, 0.0], &train_cfg);
        assert!(p[1] <= SQUEEZE_CLAMP + 1e-12, "r coordinate {}", p[1]);
    }

    #[test]
    fn learning_rate_schedule() {
        let train_cfg = TrainConfig::default();
        assert!((train_cfg.learning_rate(0) - 0.05).abs() < 1e-12);
        assert!((train_cfg.learning_rate(100) - 0.048).abs() < 1e-12);
    }

    #[test]
    fn train_thermal_target_reaches_high_fidelity() {
        let delta = 1.5;
        let cutoff = 10;
        let mut qbm = QbmConfig::new(delta, 1, cutoff);
        qbm.post_select_outcome = 0; // a near-identity solution exists
        qbm.init_mode = InitMode::Exact;
        let target = DensityMatrix::thermal(delta, cutoff);
        let grid = QuadGrid::default_grid();
        let train_cfg = TrainConfig { epochs: 200, seed: 3, ..TrainConfig::default() };
        let result = train(&target, &qbm, &train_cfg, &grid).unwrap();
        assert!(result.final_fidelity >= 0.99, "fidelity {}", result.final_fidelity);
        assert_eq!(result.fidelity_history.len(), 200);

        // best-so-far envelope is nondecreasing
        let mut best = 0.0f64;
        for f in &result.fidelity_history {
            best = best.max(*f);
            assert!(best + 1e-12 >= *f || best >= *f);
        }

        // gradient at the trained optimum is small
        let g = gradient(&result.best_params, &target, &qbm, &train_cfg).unwrap();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm < 1e-3, "gradient norm {norm}");
    }

    #[test]
    fn train_is_deterministic() {
        let delta = 1.5;
        let cutoff = 8;
        let mut qbm = QbmConfig::new(delta, 1, cutoff);
        qbm.post_select_outcome = 0;
        let target = DensityMatrix::thermal(delta, cutoff);
        let grid = QuadGrid::default_grid();
        let train_cfg = TrainConfig { epochs: 12, seed: 9, ..TrainConfig::default() };
        let a = train(&target, &qbm, &train_cfg, &grid).unwrap();
        let b = train(&target, &qbm, &train_cfg, &grid).unwrap();
        assert_eq!(a.fidelity_history, b.fidelity_history);
        assert_eq!(a.best_params.as_flat(), b.best_params.as_flat());
        assert_eq!(a.final_fidelity, b.final_fidelity);
    }

    #[test]
    fn generate_is_seeded_and_consistent() {
        let delta = 1.5;
        let cutoff = 8;
        let mut qbm = QbmConfig::new(delta, 1, cutoff);
        qbm.post_select_outcome = 0;
        let target = DensityMatrix::thermal(delta, cutoff);
        let grid = QuadGrid::default_grid();
        let train_cfg = TrainConfig { epochs: 30, seed: 4, ..TrainConfig::default() };
        let result = train(&target, &qbm, &train_cfg, &grid).unwrap();

        let (pdf_a, samples_a, kl_a) = generate(&result, &qbm, &grid, 20_000, 77).unwrap();
        let (pdf_b, samples_b, kl_b) = generate(&result, &qbm, &grid, 20_000, 77).unwrap();
        assert_eq!(samples_a, samples_b);
        assert_eq!(kl_a, kl_b);
        assert_eq!(pdf_a.values(), pdf_b.values());

        // CLT check: sample mean close to the pdf mean
        let mean_pdf = pdf_a.mean();
        let sd = pdf_a.variance().sqrt();
        let mean_s = samples_a.iter().sum::<f64>() / samples_a.len() as f64;
        let bound = 3.0 * sd / (samples_a.len() as f64).sqrt() + grid.spacing();
        assert!((mean_s - mean_pdf).abs() < bound, "{mean_s} vs {mean_pdf}");
    }

    #[test]
    fn initialization_failure_reported() {
        // outcome 1 with a custom all-zero start is degenerate at init
        let mut qbm = QbmConfig::new(1.5, 1, 10);
        qbm.post_select_outcome = 1;
        let target = DensityMatrix::thermal(1.5, 10);
        let grid = QuadGrid::default_grid();
        let train_cfg = TrainConfig {
            epochs: 5,
            init_scheme: InitScheme::Custom(vec![0.0; 5]),
            ..TrainConfig::default()
        };
        match train(&target, &qbm, &train_cfg, &grid) {
            Err(Error::InitializationFailed { .. }) => {}
            other => panic!("expected initialization failure, got {other:?}"),
        }
    }
}
