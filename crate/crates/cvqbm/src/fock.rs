//! Dense complex linear algebra over truncated Fock spaces: ladder operators,
//! matrix functions, tensor products, partial trace, and projective
//! post-selection.
//!
//! Index convention used throughout the crate: a multi-mode amplitude vector
//! is addressed by base-`cutoff` digits with mode 0 most significant, so a
//! two-mode state stores |n0, n1> at index `n0 * cutoff + n1`. Kronecker
//! products follow the same order (left factor = mode 0).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[inline]
pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Annihilation, creation, and number operators at the given cutoff.
///
/// `a[m][n] = sqrt(n)` when `m = n - 1`, `a_dag = a†`, `n = a† a`.
pub fn ladder_operators(cutoff: usize) -> Result<(CMatrix, CMatrix, CMatrix)> {
    if cutoff < 2 {
        return Err(Error::invalid(format!("cutoff must be >= 2, got {cutoff}")));
    }
    let mut a = CMatrix::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        a[(n - 1, n)] = c((n as f64).sqrt());
    }
    let a_dag = a.adjoint();
    let num = &a_dag * &a;
    Ok((a, a_dag, num))
}

/// Matrix exponential of a square complex matrix (scaling-and-squaring Padé).
pub fn matrix_exponential(m: &CMatrix) -> Result<CMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::invalid(format!(
            "matrix exponential requires a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("matrix exponential requires finite entries"));
    }
    Ok(m.clone().exp())
}

/// Kronecker product with the crate's mode ordering (left factor most significant).
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub(crate) fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Largest entry magnitude; handy for matrix-equality assertions.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = max_abs(m).max(1.0);
    max_abs(&(m - m.adjoint())) <= tol * scale
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues plus the
/// unitary of column eigenvectors. Caller guarantees Hermiticity.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFunction {
    Sqrt,
    Log,
}

/// Apply `sqrt` or `log` to a Hermitian matrix through its eigendecomposition.
///
/// For `Sqrt`, small negative eigenvalues from round-off are floored at 0.
/// For `Log`, eigenvalues are floored at 1e-12 so rank-deficient density
/// matrices still produce a finite effective Hamiltonian.
pub fn hermitian_matrix_function(m: &CMatrix, f: MatrixFunction) -> Result<CMatrix> {
    if !is_hermitian(m, 1e-9) {
        return Err(Error::invalid("matrix function requires a Hermitian input"));
    }
    let (vals, vecs) = hermitian_eigen(m);
    // eigenvalues at round-off scale are treated as exact zeros before the
    // square root, which would otherwise amplify them to sqrt-scale noise
    let scale = vals.iter().fold(0.0f64, |a, &l| a.max(l.abs())).max(1.0);
    let mapped: Vec<Complex64> = vals
        .iter()
        .map(|&l| match f {
            MatrixFunction::Sqrt => {
                let l = if l < 1e-14 * scale { 0.0 } else { l };
                c(l.sqrt())
            }
            MatrixFunction::Log => c(l.max(1e-12).ln()),
        })
        .collect();
    let mut scaled = vecs.clone();
    for (j, w) in mapped.iter().enumerate() {
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= *w;
        }
    }
    let out = &scaled * vecs.adjoint();
    // symmetrize away round-off
    Ok((&out + out.adjoint()) * c(0.5))
}

/// Pure multi-mode state in the truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    num_modes: usize,
    cutoff: usize,
    amps: CVector,
}

impl FockVector {
    pub fn vacuum(num_modes: usize, cutoff: usize) -> Self {
        let dim = cutoff.pow(num_modes as u32);
        let mut amps = CVector::zeros(dim);
        amps[0] = c(1.0);
        FockVector { num_modes, cutoff, amps }
    }

    /// Basis state |n0, n1, ...>.
    pub fn basis(occupations: &[usize], cutoff: usize) -> Result<Self> {
        if occupations.is_empty() {
            return Err(Error::invalid("basis state needs at least one mode"));
        }
        if let Some(&bad) = occupations.iter().find(|&&n| n >= cutoff) {
            return Err(Error::invalid(format!(
                "occupation {bad} exceeds cutoff {cutoff}"
            )));
        }
        let num_modes = occupations.len();
        let mut state = FockVector::vacuum(num_modes, cutoff);
        state.amps[0] = c(0.0);
        let idx = occupations.iter().fold(0usize, |acc, &n| acc * cutoff + n);
        state.amps[idx] = c(1.0);
        Ok(state)
    }

    pub fn from_amplitudes(num_modes: usize, cutoff: usize, amps: CVector) -> Result<Self> {
        let dim = cutoff.pow(num_modes as u32);
        if amps.len() != dim {
            return Err(Error::invalid(format!(
                "amplitude vector length {} does not match cutoff^modes = {dim}",
                amps.len()
            )));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("amplitudes must be finite"));
        }
        Ok(FockVector { num_modes, cutoff, amps })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn amplitude(&self, occupations: &[usize]) -> Complex64 {
        debug_assert_eq!(occupations.len(), self.num_modes);
        let idx = occupations.iter().fold(0usize, |acc, &n| acc * self.cutoff + n);
        self.amps[idx]
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n < 1e-12 {
            return Err(Error::invalid("cannot normalize a near-zero state"));
        }
        self.amps.scale_mut(1.0 / n);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// <self|other>.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    /// |self> ⊗ |other>, self's modes most significant.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.cutoff != other.cutoff {
            return Err(Error::invalid("tensor product requires matching cutoffs"));
        }
        let amps = self.amps.kronecker(&other.amps);
        FockVector::from_amplitudes(self.num_modes + other.num_modes, self.cutoff, amps)
    }

    pub(crate) fn mode_stride(&self, mode: usize) -> usize {
        self.cutoff.pow((self.num_modes - 1 - mode) as u32)
    }

    /// Apply a single-mode operator to one mode in place.
    pub fn apply_one_mode(&mut self, op: &CMatrix, mode: usize) -> Result<()> {
        if mode >= self.num_modes {
            return Err(Error::invalid(format!(
                "mode {mode} out of range for {}-mode state",
                self.num_modes
            )));
        }
        if op.nrows() != self.cutoff || op.ncols() != self.cutoff {
            return Err(Error::invalid("operator dimension must equal the cutoff"));
        }
        let cut = self.cutoff;
        let stride = self.mode_stride(mode);
        let block = stride * cut;
        let total = self.amps.len();
        let mut scratch = vec![Complex64::default(); cut];
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (r, s) in scratch.iter_mut().enumerate() {
                    let mut acc = Complex64::default();
                    for col in 0..cut {
                        acc += op[(r, col)] * self.amps[base + col * stride];
                    }
                    *s = acc;
                }
                for (r, s) in scratch.iter().enumerate() {
                    self.amps[base + r * stride] = *s;
                }
            }
        }
        Ok(())
    }

    /// Multiply every amplitude by a phase that depends on the digits of two
    /// chosen modes. Used for spectral application of two-mode diagonal gates.
    pub(crate) fn scale_two_mode_diagonal<F>(&mut self, mode_a: usize, mode_b: usize, phase: F)
    where
        F: Fn(usize, usize) -> Complex64,
    {
        let cut = self.cutoff;
        let sa = self.mode_stride(mode_a);
        let sb = self.mode_stride(mode_b);
        for idx in 0..self.amps.len() {
            let da = (idx / sa) % cut;
            let db = (idx / sb) % cut;
            self.amps[idx] *= phase(da, db);
        }
    }
}

/// Single-qumode density matrix: Hermitian, PSD, trace one.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    cutoff: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validate Hermiticity, symmetrize round-off, and normalize the trace.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::invalid("density matrix must be square"));
        }
        if !is_hermitian(&mat, 1e-8) {
            return Err(Error::invalid("density matrix must be Hermitian"));
        }
        let cutoff = mat.nrows();
        let herm = (&mat + mat.adjoint()) * c(0.5);
        let tr = herm.trace().re;
        if tr.abs() < 1e-12 {
            return Err(Error::invalid("density matrix has near-zero trace"));
        }
        Ok(DensityMatrix { cutoff, mat: herm * c(1.0 / tr) })
    }

    /// |psi><psi| for a single-mode pure state.
    pub fn from_pure(state: &FockVector) -> Result<Self> {
        if state.num_modes() != 1 {
            return Err(Error::UnsupportedShape(
                "pure density matrix requires a single-mode state".to_string(),
            ));
        }
        let v = state.amplitudes();
        DensityMatrix::new(v * v.adjoint())
    }

    /// Thermal state diag(e^{-2 delta n}) / Z at the given cutoff.
    pub fn thermal(delta: f64, cutoff: usize) -> Self {
        let mut mat = CMatrix::zeros(cutoff, cutoff);
        for n in 0..cutoff {
            mat[(n, n)] = c((-2.0 * delta * n as f64).exp());
        }
        let tr = mat.trace().re;
        DensityMatrix { cutoff, mat: mat * c(1.0 / tr) }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Tr(rho A) for a Hermitian observable A.
    pub fn expectation(&self, observable: &CMatrix) -> f64 {
        (&self.mat * observable).trace().re
    }

    /// Mean photon number Tr(rho n̂).
    pub fn mean_photon_number(&self) -> f64 {
        (0..self.cutoff).map(|n| n as f64 * self.mat[(n, n)].re).sum()
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// Eigenvalues sorted in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let (vals, _) = hermitian_eigen(&self.mat);
        let mut v: Vec<f64> = vals.iter().copied().collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    }
}

/// Reduce a two-mode pure state to the density matrix of one mode.
pub fn partial_trace(state: &FockVector, keep_mode: usize) -> Result<DensityMatrix> {
    if state.num_modes() != 2 {
        return Err(Error::UnsupportedShape(format!(
            "partial trace requires a two-mode state, got {} modes",
            state.num_modes()
        )));
    }
    if keep_mode > 1 {
        return Err(Error::invalid("keep_mode must be 0 or 1"));
    }
    let cut = state.cutoff();
    let amps = state.amplitudes();
    let mut rho = CMatrix::zeros(cut, cut);
    for m in 0..cut {
        for n in 0..cut {
            let mut acc = Complex64::default();
            for k in 0..cut {
                let (im, in_) = if keep_mode == 0 {
                    (m * cut + k, n * cut + k)
                } else {
                    (k * cut + m, k * cut + n)
                };
                acc += amps[im] * amps[in_].conj();
            }
            rho[(m, n)] = acc;
        }
    }
    DensityMatrix::new(rho)
}

/// Reduce a two-mode density matrix (dimension cutoff^2) to one mode.
pub fn partial_trace_density(joint: &CMatrix, cutoff: usize, keep_mode: usize) -> Result<DensityMatrix> {
    let dim = cutoff * cutoff;
    if joint.nrows() != dim || joint.ncols() != dim {
        return Err(Error::UnsupportedShape(format!(
            "expected a {dim}x{dim} two-mode density matrix, got {}x{}",
            joint.nrows(),
            joint.ncols()
        )));
    }
    if keep_mode > 1 {
        return Err(Error::invalid("keep_mode must be 0 or 1"));
    }
    let mut rho = CMatrix::zeros(cutoff, cutoff);
    for m in 0..cutoff {
        for n in 0..cutoff {
            let mut acc = Complex64::default();
            for k in 0..cutoff {
                let (im, in_) = if keep_mode == 0 {
                    (m * cutoff + k, n * cutoff + k)
                } else {
                    (k * cutoff + m, k * cutoff + n)
                };
                acc += joint[(im, in_)];
            }
            rho[(m, n)] = acc;
        }
    }
    DensityMatrix::new(rho)
}

/// Project one mode onto a photon-number outcome.
///
/// Returns the renormalized reduced state over the remaining modes plus the
/// outcome probability. A probability below 1e-14 signals parameters that
/// never populate the outcome and is reported as an error.
pub fn project_mode(state: &FockVector, mode: usize, outcome: usize) -> Result<(FockVector, f64)> {
    if state.num_modes() < 2 {
        return Err(Error::UnsupportedShape(
            "projection needs at least two modes to leave a reduced state".to_string(),
        ));
    }
    if mode >= state.num_modes() {
        return Err(Error::invalid(format!("mode {mode} out of range")));
    }
    let cut = state.cutoff();
    if outcome >= cut {
        return Err(Error::invalid(format!(
            "outcome {outcome} must be below the cutoff {cut}"
        )));
    }
    let stride = state.mode_stride(mode);
    let block = stride * cut;
    let reduced_dim = state.amplitudes().len() / cut;
    let mut reduced = CVector::zeros(reduced_dim);
    let mut out_idx = 0usize;
    for outer in (0..state.amplitudes().len()).step_by(block) {
        for inner in 0..stride {
            reduced[out_idx] = state.amplitudes()[outer + inner + outcome * stride];
            out_idx += 1;
        }
    }
    let prob = reduced.norm_squared();
    if prob < 1e-14 {
        return Err(Error::degenerate(prob));
    }
    reduced.scale_mut(1.0 / prob.sqrt());
    let fv = FockVector::from_amplitudes(state.num_modes() - 1, cut, reduced)?;
    Ok((fv, prob))
}
