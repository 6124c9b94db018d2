//! Gaussian gate unitaries on truncated Fock spaces, the two-mode QITE block,
//! the 50:50 beam splitter, and the photon-loss Kraus channel.
//!
//! Gate conventions: R(chi) = exp(i chi n̂), S(r) = exp(r/2 (a^2 - a†^2)),
//! D(alpha) = exp(alpha (a† - a)), X(kappa) = exp(-i kappa x̂⊗p̂) with
//! x̂ = (a + a†)/sqrt(2) and p̂ = -i (a - a†)/sqrt(2). All matrices are exact
//! exponentials of the truncated generators, so anti-Hermitian generators
//! yield exactly unitary matrices at every cutoff.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    c, hermitian_eigen, identity, ladder_operators, matrix_exponential, tensor_product, CMatrix,
    DensityMatrix,
};

/// Trainable parameters of one QITE block, in gate order
/// U = R(chi) S(r) R(chi') D(alpha) X(kappa).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub chi: f64,
    pub r: f64,
    pub chi_prime: f64,
    pub alpha: f64,
    pub kappa: f64,
}

/// Squeezing bound kept during training (about 17.4 dB).
pub const SQUEEZE_CLAMP: f64 = 2.0;

impl GateParams {
    pub fn zero() -> Self {
        GateParams { chi: 0.0, r: 0.0, chi_prime: 0.0, alpha: 0.0, kappa: 0.0 }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.chi, self.r, self.chi_prime, self.alpha, self.kappa]
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        GateParams { chi: v[0], r: v[1], chi_prime: v[2], alpha: v[3], kappa: v[4] }
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }
}

/// Phase-space rotation exp(i chi n̂): exactly diagonal.
pub fn rotation(chi: f64, cutoff: usize) -> CMatrix {
    let mut m = CMatrix::zeros(cutoff, cutoff);
    for n in 0..cutoff {
        m[(n, n)] = Complex64::from_polar(1.0, chi * n as f64);
    }
    m
}

/// Squeeze gate exp(r/2 (a^2 - a†^2)).
pub fn squeeze(r: f64, cutoff: usize) -> Result<CMatrix> {
    if r.abs() > 2.5 {
        return Err(Error::SqueezingOutOfRange(r.abs()));
    }
    let (a, a_dag, _) = ladder_operators(cutoff)?;
    let gen = (&a * &a - &a_dag * &a_dag) * c(r / 2.0);
    matrix_exponential(&gen)
}

/// Displacement gate exp(alpha (a† - a)) for real alpha.
pub fn displace(alpha: f64, cutoff: usize) -> Result<CMatrix> {
    let (a, a_dag, _) = ladder_operators(cutoff)?;
    let gen = (&a_dag - &a) * c(alpha);
    matrix_exponential(&gen)
}

/// Position quadrature x̂ = (a + a†)/sqrt(2).
pub fn position_operator(cutoff: usize) -> Result<CMatrix> {
    let (a, a_dag, _) = ladder_operators(cutoff)?;
    Ok((&a + &a_dag) * c(1.0 / 2f64.sqrt()))
}

/// Momentum quadrature p̂ = -i (a - a†)/sqrt(2).
pub fn momentum_operator(cutoff: usize) -> Result<CMatrix> {
    let (a, a_dag, _) = ladder_operators(cutoff)?;
    Ok((&a - &a_dag) * Complex64::new(0.0, -1.0 / 2f64.sqrt()))
}

/// Eigendecompositions of x̂ and p̂, shared by the spectral CX paths.
pub(crate) struct XpSpectral {
    pub vx: CMatrix,
    pub lx: DVector<f64>,
    pub vp: CMatrix,
    pub lp: DVector<f64>,
}

pub(crate) fn xp_spectral(cutoff: usize) -> Result<XpSpectral> {
    let (lx, vx) = hermitian_eigen(&position_operator(cutoff)?);
    let (lp, vp) = hermitian_eigen(&momentum_operator(cutoff)?);
    Ok(XpSpectral { vx, lx, vp, lp })
}

/// Controlled-X gate exp(-i kappa x̂⊗p̂): position-controlled displacement of
/// the second mode by kappa times the first mode's position. Control = first
/// mode (x̂ factor), target = second (p̂ factor).
///
/// Built spectrally: x̂⊗p̂ = (Vx⊗Vp) diag(lx_i lp_j) (Vx⊗Vp)†.
pub fn controlled_x(kappa: f64, cutoff: usize) -> Result<CMatrix> {
    let s = xp_spectral(cutoff)?;
    let w = tensor_product(&s.vx, &s.vp);
    let dim = cutoff * cutoff;
    let mut scaled = w.clone();
    for i in 0..cutoff {
        for j in 0..cutoff {
            let phase = Complex64::from_polar(1.0, -kappa * s.lx[i] * s.lp[j]);
            let col = i * cutoff + j;
            for row in 0..dim {
                scaled[(row, col)] *= phase;
            }
        }
    }
    Ok(&scaled * w.adjoint())
}

/// 50:50 beam splitter exp(pi/4 (a†b - a b†)) on two modes of equal cutoff.
/// Maps |01> to (|01> + |10>)/sqrt(2) with real coefficients.
pub fn beam_splitter_5050(cutoff: usize) -> Result<CMatrix> {
    let (a, a_dag, _) = ladder_operators(cutoff)?;
    let gen = (tensor_product(&a_dag, &a) - tensor_product(&a, &a_dag))
        * c(std::f64::consts::FRAC_PI_4);
    matrix_exponential(&gen)
}

/// Product of the single-mode gates of one block: R(chi) S(r) R(chi') D(alpha).
pub(crate) fn single_mode_product(params: &GateParams, cutoff: usize) -> Result<CMatrix> {
    let rot = rotation(params.chi, cutoff);
    let sq = squeeze(params.r, cutoff)?;
    let rot_p = rotation(params.chi_prime, cutoff);
    let disp = displace(params.alpha, cutoff)?;
    Ok(rot * sq * rot_p * disp)
}

/// Two-mode QITE block U = R(chi) S(r) R(chi') D(alpha) X(kappa) on
/// visible⊗ancilla. X acts first; the single-mode gates act on the visible
/// mode only, with the ancilla as the CX target.
pub fn qite_block(params: &GateParams, cutoff: usize) -> Result<CMatrix> {
    if !params.is_finite() {
        return Err(Error::invalid("gate parameters must be finite"));
    }
    let single = single_mode_product(params, cutoff)?;
    let cx = controlled_x(params.kappa, cutoff)?;
    Ok(tensor_product(&single, &identity(cutoff)) * cx)
}

/// Photon-loss channel with transmissivity `transmissivity`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    pub operators: Vec<CMatrix>,
    pub transmissivity: f64,
}

/// Kraus operators K_k = sqrt((1-T)^k / k!) T^{n̂/2} a^k for k = 0..cutoff-1,
/// realizing a -> sqrt(T) a + sqrt(1-T) b on a vacuum environment.
pub fn loss_channel(transmissivity: f64, cutoff: usize) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&transmissivity) {
        return Err(Error::invalid(format!(
            "transmissivity must lie in [0, 1], got {transmissivity}"
        )));
    }
    let (a, _, _) = ladder_operators(cutoff)?;
    let mut tpow = CMatrix::zeros(cutoff, cutoff);
    for n in 0..cutoff {
        tpow[(n, n)] = c(transmissivity.powf(n as f64 / 2.0));
    }
    let mut operators = Vec::with_capacity(cutoff);
    let mut a_k = identity(cutoff);
    let mut coeff = 1.0f64;
    for k in 0..cutoff {
        if k > 0 {
            a_k = &a_k * &a;
            coeff *= (1.0 - transmissivity) / k as f64;
        }
        operators.push(&tpow * &a_k * c(coeff.sqrt()));
    }
    Ok(KrausChannel { operators, transmissivity })
}

/// Apply a Kraus channel: sum_k K rho K†, renormalized to trace one so
/// truncation leakage is absorbed.
pub fn apply_channel(rho: &DensityMatrix, channel: &KrausChannel) -> Result<DensityMatrix> {
    let cut = rho.cutoff();
    if channel.operators.iter().any(|k| k.nrows() != cut) {
        return Err(Error::invalid("channel and state cutoffs must match"));
    }
    let mut out = CMatrix::zeros(cut, cut);
    for k in &channel.operators {
        out += k * rho.matrix() * k.adjoint();
    }
    DensityMatrix::new(out)
}

/// Squeezing strength in decibels: 10 log10(e^{2|r|}).
pub fn squeezing_db(r: f64) -> f64 {
    20.0 * r.abs() * std::f64::consts::E.log10()
}

/// Inverse of `squeezing_db`.
pub fn squeezing_from_db(db: f64) -> f64 {
    db / (20.0 * std::f64::consts::E.log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{max_abs, partial_trace, FockVector};

    fn unitarity_defect(u: &CMatrix) -> f64 {
        max_abs(&(u.adjoint() * u - identity(u.nrows())))
    }

    fn apply_to_vacuum(u: &CMatrix, modes: usize, cutoff: usize) -> FockVector {
        let v = FockVector::vacuum(modes, cutoff);
        FockVector::from_amplitudes(modes, cutoff, u * v.amplitudes()).unwrap()
    }

    #[test]
    fn rotation_cases() {
        assert!(max_abs(&(rotation(0.0, 6) - identity(6))) < 1e-15);
        let r = rotation(std::f64::consts::PI, 3);
        assert!((r[(0, 0)] - c(1.0)).norm() < 1e-12);
        assert!((r[(1, 1)] - c(-1.0)).norm() < 1e-12);
        assert!((r[(2, 2)] - c(1.0)).norm() < 1e-12);
        assert!(unitarity_defect(&rotation(0.7, 12)) < 1e-12);
    }

    #[test]
    fn squeeze_identity_and_inverse() {
        assert!(max_abs(&(squeeze(0.0, 8).unwrap() - identity(8))) < 1e-12);
        let s = squeeze(0.2, 12).unwrap();
        let sm = squeeze(-0.2, 12).unwrap();
        assert!(max_abs(&(&s * &sm - identity(12))) < 1e-8);
    }

    #[test]
    fn squeeze_range_check() {
        assert!(matches!(squeeze(2.6, 10), Err(Error::SqueezingOutOfRange(_))));
        assert!(squeeze(2.4, 10).is_ok());
    }

    #[test]
    fn squeezed_vacuum_variance() {
        let cut = 20;
        let r = 0.5;
        let s = squeeze(r, cut).unwrap();
        let st = apply_to_vacuum(&s, 1, cut);
        let x = position_operator(cut).unwrap();
        let x2 = &x * &x;
        let v = st.amplitudes();
        let var = (v.adjoint() * &x2 * v)[(0, 0)].re;
        let expect = (-2.0 * r).exp() / 2.0;
        assert!((var - expect).abs() / expect < 0.02, "var {var} expect {expect}");
    }

    #[test]
    fn squeeze_parity_structure() {
        // S changes photon number by even amounts only
        let s = squeeze(0.6, 14).unwrap();
        for m in 0..14 {
            for n in 0..14 {
                if (m + n) % 2 == 1 {
                    assert!(s[(m, n)].norm() < 1e-10, "odd element at ({m},{n})");
                }
            }
        }
    }

    #[test]
    fn displacement_identity_and_mean_photon() {
        assert!(max_abs(&(displace(0.0, 8).unwrap() - identity(8))) < 1e-12);
        let cut = 15;
        let d = displace(0.5, cut).unwrap();
        let st = apply_to_vacuum(&d, 1, cut);
        let mean_n: f64 = (0..cut).map(|n| n as f64 * st.amplitudes()[n].norm_sqr()).sum();
        assert!((mean_n - 0.25).abs() < 1e-4);
    }

    #[test]
    fn coherent_state_is_poisson() {
        let cut = 20;
        let d = displace(1.0, cut).unwrap();
        let st = apply_to_vacuum(&d, 1, cut);
        let mut log_fact = 0.0;
        for n in 0..cut {
            if n > 0 {
                log_fact += (n as f64).ln();
            }
            let poisson = (-1.0f64 - log_fact).exp();
            let prob = st.amplitudes()[n].norm_sqr();
            assert!((prob - poisson).abs() < 1e-3, "n={n} prob={prob} poisson={poisson}");
        }
    }

    #[test]
    fn controlled_x_identity_and_unitarity() {
        let cut = 12;
        assert!(max_abs(&(controlled_x(0.0, cut).unwrap() - identity(cut * cut))) < 1e-10);
        assert!(unitarity_defect(&controlled_x(0.5, cut).unwrap()) < 1e-8);
    }

    #[test]
    fn controlled_x_matches_generic_exponential() {
        let cut = 8;
        let kappa = 0.7;
        let spectral = controlled_x(kappa, cut).unwrap();
        let x = position_operator(cut).unwrap();
        let p = momentum_operator(cut).unwrap();
        let gen = tensor_product(&x, &p) * Complex64::new(0.0, -kappa);
        let direct = matrix_exponential(&gen).unwrap();
        assert!(max_abs(&(&spectral - &direct)) < 1e-10);
    }

    #[test]
    fn controlled_x_vacuum_correlator() {
        let cut = 15;
        let kappa = 0.3;
        let u = controlled_x(kappa, cut).unwrap();
        let st = apply_to_vacuum(&u, 2, cut);
        let x = position_operator(cut).unwrap();
        let xx = tensor_product(&x, &x);
        let v = st.amplitudes();
        let corr = (v.adjoint() * &xx * v)[(0, 0)].re;
        assert!((corr - 0.15).abs() / 0.15 < 0.01, "corr {corr}");
    }

    #[test]
    fn controlled_x_displaces_target_mean() {
        let cut = 16;
        let kappa = 0.4;
        let d = displace(0.8, cut).unwrap();
        let mut st = FockVector::vacuum(2, cut);
        st.apply_one_mode(&d, 0).unwrap();
        let x = position_operator(cut).unwrap();
        let mean1 = {
            let obs = tensor_product(&x, &identity(cut));
            (st.amplitudes().adjoint() * &obs * st.amplitudes())[(0, 0)].re
        };
        let u = controlled_x(kappa, cut).unwrap();
        let out = FockVector::from_amplitudes(2, cut, &u * st.amplitudes()).unwrap();
        let obs2 = tensor_product(&identity(cut), &x);
        let mean2 = (out.amplitudes().adjoint() * &obs2 * out.amplitudes())[(0, 0)].re;
        let expect = kappa * mean1;
        assert!((mean2 - expect).abs() / expect.abs() < 0.02, "mean2 {mean2} expect {expect}");
    }

    #[test]
    fn beam_splitter_action() {
        let cut = 6;
        let bs = beam_splitter_5050(cut).unwrap();
        // vacuum invariant
        let v = FockVector::vacuum(2, cut);
        let out = &bs * v.amplitudes();
        assert!((out[0] - c(1.0)).norm() < 1e-12);

        // |01> -> equal superposition
        let st = FockVector::basis(&[0, 1], cut).unwrap();
        let out = &bs * st.amplitudes();
        let p01 = out[1].norm_sqr();
        let p10 = out[cut].norm_sqr();
        assert!((p01 - 0.5).abs() < 1e-10);
        assert!((p10 - 0.5).abs() < 1e-10);

        // applying twice swaps the photon (up to sign)
        let twice = &bs * &out;
        assert!((twice[cut].norm() - 1.0).abs() < 1e-10);
        assert!(twice[1].norm() < 1e-10);
    }

    #[test]
    fn qite_block_zero_params_is_identity() {
        let cut = 8;
        let u = qite_block(&GateParams::zero(), cut).unwrap();
        assert!(max_abs(&(&u - identity(cut * cut))) < 1e-10);
    }

    #[test]
    fn qite_block_unitary_in_table_ranges() {
        let cut = 12;
        // parameter draws spanning the trained ranges seen in the case studies
        let cases = [
            GateParams { chi: 0.3, r: 0.299, chi_prime: -0.8, alpha: 0.8, kappa: 0.08 },
            GateParams { chi: -1.2, r: 0.6, chi_prime: 0.4, alpha: 1.3, kappa: 1.7 },
            GateParams { chi: 2.0, r: 1.774, chi_prime: -2.4, alpha: 0.01, kappa: 0.45 },
            GateParams { chi: 0.0, r: -1.0, chi_prime: 1.1, alpha: 0.51, kappa: 0.9 },
        ];
        for p in &cases {
            let u = qite_block(p, cut).unwrap();
            assert!(unitarity_defect(&u) < 1e-8, "defect {} for {:?}", unitarity_defect(&u), p);
        }
    }

    #[test]
    fn qite_block_kappa_zero_factorizes() {
        let cut = 10;
        let p = GateParams { chi: 0.4, r: 0.3, chi_prime: -0.2, alpha: 0.5, kappa: 0.0 };
        let u = qite_block(&p, cut).unwrap();
        let st = apply_to_vacuum(&u, 2, cut);
        let rho_ancilla = partial_trace(&st, 1).unwrap();
        assert!((rho_ancilla.matrix()[(0, 0)].re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn loss_channel_identity_and_vacuum_limits() {
        let cut = 10;
        let ch1 = loss_channel(1.0, cut).unwrap();
        let rho = DensityMatrix::thermal(1.0, cut);
        let out = apply_channel(&rho, &ch1).unwrap();
        assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-12);

        let ch0 = loss_channel(0.0, cut).unwrap();
        let out0 = apply_channel(&rho, &ch0).unwrap();
        assert!((out0.matrix()[(0, 0)].re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn loss_channel_scales_mean_photon_number() {
        let cut = 20;
        let d = displace(1.0, cut).unwrap();
        let st = apply_to_vacuum(&d, 1, cut);
        let rho = DensityMatrix::from_pure(&st).unwrap();
        assert!((rho.mean_photon_number() - 1.0).abs() < 1e-6);
        let ch = loss_channel(0.7, cut).unwrap();
        let out = apply_channel(&rho, &ch).unwrap();
        assert!((out.mean_photon_number() - 0.7).abs() < 1e-3);

        // thermal input halves under T = 0.5
        let th = DensityMatrix::thermal(1.5, 12);
        let ch5 = loss_channel(0.5, 12).unwrap();
        let out5 = apply_channel(&th, &ch5).unwrap();
        assert!((out5.mean_photon_number() - 0.5 * th.mean_photon_number()).abs() < 1e-3);
    }

    #[test]
    fn loss_channel_completeness() {
        let cut = 12;
        for t in [0.0, 0.3, 0.7, 1.0] {
            let ch = loss_channel(t, cut).unwrap();
            let mut sum = CMatrix::zeros(cut, cut);
            for k in &ch.operators {
                sum += k.adjoint() * k;
            }
            for i in 0..=cut / 2 {
                for j in 0..=cut / 2 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((sum[(i, j)].re - expect).abs() < 1e-6);
                    assert!(sum[(i, j)].im.abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn loss_channel_rejects_bad_transmissivity() {
        assert!(loss_channel(-0.1, 8).is_err());
        assert!(loss_channel(1.1, 8).is_err());
    }

    #[test]
    fn channel_output_stays_physical() {
        let cut = 10;
        let p = GateParams { chi: 0.2, r: 0.4, chi_prime: 0.9, alpha: 0.6, kappa: 0.0 };
        let m = single_mode_product(&p, cut).unwrap();
        let st = apply_to_vacuum(&m, 1, cut);
        let rho = DensityMatrix::from_pure(&st).unwrap();
        let ch = loss_channel(0.6, cut).unwrap();
        let out = apply_channel(&rho, &ch).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-9);
        assert!(out.eigenvalues().iter().all(|&l| l >= -1e-9));
    }

    #[test]
    fn apply_channel_rejects_cutoff_mismatch() {
        let rho = DensityMatrix::thermal(1.0, 8);
        let ch = loss_channel(0.5, 10).unwrap();
        assert!(apply_channel(&rho, &ch).is_err());
    }

    #[test]
    fn squeezing_decibel_conversion() {
        assert_eq!(squeezing_db(0.0), 0.0);
        assert!((squeezing_db(0.3) - 2.606).abs() < 1e-3);
        assert!((squeezing_db(1.774) - 15.41).abs() < 5e-3);
        assert!((squeezing_from_db(squeezing_db(0.77)) - 0.77).abs() < 1e-12);
    }
}
