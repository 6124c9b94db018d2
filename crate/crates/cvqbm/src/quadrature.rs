//! Harmonic-oscillator wavefunctions, quadrature grids, encoding of
//! continuous PDFs into Fock-basis pure states, PDF reconstruction from
//! density matrices, and KL divergence.

use std::io::{BufRead, Write};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{c, CMatrix, DensityMatrix};

/// Uniform quadrature grid. Trapezoid rule is used for every integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub points: usize,
}

impl QuadGrid {
    pub fn new(q_min: f64, q_max: f64, points: usize) -> Result<Self> {
        if points < 101 {
            return Err(Error::invalid(format!("grid needs at least 101 points, got {points}")));
        }
        if !(q_max > q_min) {
            return Err(Error::invalid("grid requires q_max > q_min"));
        }
        Ok(QuadGrid { q_min, q_max, points })
    }

    /// Default grid covering the oscillator support up to cutoff ~15.
    pub fn default_grid() -> Self {
        QuadGrid { q_min: -8.0, q_max: 8.0, points: 1601 }
    }

    pub fn spacing(&self) -> f64 {
        (self.q_max - self.q_min) / (self.points - 1) as f64
    }

    pub fn q(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.spacing()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.q(i)).collect()
    }
}

/// Probability density sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pdf {
    grid: QuadGrid,
    values: Vec<f64>,
}

impl Pdf {
    pub fn new(grid: QuadGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points {
            return Err(Error::invalid(format!(
                "pdf has {} values for a {}-point grid",
                values.len(),
                grid.points
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("pdf values must be finite and non-negative"));
        }
        Ok(Pdf { grid, values })
    }

    /// Tabulate a function on the grid and normalize it.
    pub fn from_fn(grid: QuadGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = grid.values().iter().map(|&q| f(q).max(0.0)).collect();
        Pdf::new(grid, values)?.normalized()
    }

    pub fn grid(&self) -> &QuadGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.grid.spacing())
    }

    pub fn normalized(mut self) -> Result<Self> {
        let z = self.integral();
        if z <= 0.0 || !z.is_finite() {
            return Err(Error::invalid("pdf integrates to a non-positive value"));
        }
        for v in &mut self.values {
            *v /= z;
        }
        Ok(self)
    }

    pub fn mean(&self) -> f64 {
        let dq = self.grid.spacing();
        let weighted: Vec<f64> =
            self.values.iter().enumerate().map(|(i, v)| self.grid.q(i) * v).collect();
        trapezoid(&weighted, dq)
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        let dq = self.grid.spacing();
        let weighted: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (self.grid.q(i) - mu).powi(2) * v)
            .collect();
        trapezoid(&weighted, dq)
    }

    /// Two-column CSV: `q,density`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "q,density")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.grid.q(i), v)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut qs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('q')) {
                continue;
            }
            let mut parts = line.split(',');
            let q: f64 = parse_field(parts.next(), lineno + 1)?;
            let v: f64 = parse_field(parts.next(), lineno + 1)?;
            qs.push(q);
            vs.push(v);
        }
        if qs.len() < 101 {
            return Err(Error::Parse {
                message: format!("pdf csv has only {} rows", qs.len()),
                offset: None,
                line: None,
                column: None,
            });
        }
        let grid = QuadGrid::new(qs[0], *qs.last().unwrap(), qs.len())?;
        Pdf::new(grid, vs)
    }
}

fn parse_field(field: Option<&str>, line: usize) -> Result<f64> {
    let s = field.ok_or_else(|| Error::Parse {
        message: "missing csv column".into(),
        offset: None,
        line: Some(line),
        column: None,
    })?;
    s.trim().parse().map_err(|e| Error::Parse {
        message: format!("bad number `{s}`: {e}"),
        offset: None,
        line: Some(line),
        column: None,
    })
}

pub(crate) fn trapezoid(values: &[f64], dq: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    dq * (0.5 * (values[0] + values[values.len() - 1]) + inner)
}

/// n-th harmonic-oscillator eigenfunction at position q, via the normalized
/// three-term recurrence (no factorial overflow up to n = 60).
pub fn oscillator_wavefunction(n: usize, q: f64) -> Result<f64> {
    if n > 60 {
        return Err(Error::Unsupported(format!("wavefunction order {n} exceeds 60")));
    }
    let psi0 = std::f64::consts::PI.powf(-0.25) * (-q * q / 2.0).exp();
    if n == 0 {
        return Ok(psi0);
    }
    let mut prev = psi0;
    let mut cur = 2f64.sqrt() * q * psi0;
    for k in 2..=n {
        let kf = k as f64;
        let next = (2.0 / kf).sqrt() * q * cur - ((kf - 1.0) / kf).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Wavefunction table: row n holds Psi_n on the grid, n = 0..n_max inclusive.
pub(crate) fn wavefunction_table(n_max: usize, grid: &QuadGrid) -> Result<Vec<Vec<f64>>> {
    if n_max > 60 {
        return Err(Error::Unsupported(format!("wavefunction order {n_max} exceeds 60")));
    }
    let qs = grid.values();
    let mut rows = Vec::with_capacity(n_max + 1);
    let row0: Vec<f64> =
        qs.iter().map(|&q| std::f64::consts::PI.powf(-0.25) * (-q * q / 2.0).exp()).collect();
    rows.push(row0);
    if n_max >= 1 {
        let row1: Vec<f64> =
            qs.iter().zip(&rows[0]).map(|(&q, &p0)| 2f64.sqrt() * q * p0).collect();
        rows.push(row1);
    }
    for n in 2..=n_max {
        let nf = n as f64;
        let row: Vec<f64> = qs
            .iter()
            .enumerate()
            .map(|(i, &q)| {
                (2.0 / nf).sqrt() * q * rows[n - 1][i] - ((nf - 1.0) / nf).sqrt() * rows[n - 2][i]
            })
            .collect();
        rows.push(row);
    }
    Ok(rows)
}

/// Result of encoding a classical PDF into a Fock-basis pure state.
#[derive(Debug, Clone)]
pub struct EncodedPdf {
    /// Renormalized amplitudes a_n.
    pub coeffs: Vec<f64>,
    /// Rank-one target density matrix, rho_mn = a_m a_n.
    pub rho_data: DensityMatrix,
    /// Fraction of the square-root-encoded norm captured below the cutoff.
    pub captured_norm: f64,
}

/// Amplitude-encode sqrt(P) into the truncated oscillator basis:
/// a_n = integral Psi_n(q) sqrt(P(q)) dq, then renormalize.
///
/// The positive branch of the square root is taken everywhere; the captured
/// norm before renormalization is reported, and a fraction below 0.9 is an
/// error carrying the measured value.
pub fn encode_pdf(p: &Pdf, cutoff: usize) -> Result<EncodedPdf> {
    if cutoff > 40 {
        return Err(Error::invalid(format!("encode cutoff {cutoff} exceeds 40")));
    }
    if (p.integral() - 1.0).abs() > 1e-3 {
        return Err(Error::invalid("pdf must be normalized before encoding"));
    }
    let dq = p.grid().spacing();
    let table = wavefunction_table(cutoff - 1, p.grid())?;
    let sqrt_p: Vec<f64> = p.values().iter().map(|&v| v.sqrt()).collect();
    let mut coeffs = Vec::with_capacity(cutoff);
    for row in &table {
        let integrand: Vec<f64> = row.iter().zip(&sqrt_p).map(|(a, b)| a * b).collect();
        coeffs.push(trapezoid(&integrand, dq));
    }
    let captured_norm: f64 = coeffs.iter().map(|a| a * a).sum();
    if captured_norm < 0.9 {
        return Err(Error::CutoffInsufficient { captured: captured_norm });
    }
    let scale = captured_norm.sqrt();
    for a in &mut coeffs {
        *a /= scale;
    }
    let mut rho = CMatrix::zeros(cutoff, cutoff);
    for m in 0..cutoff {
        for n in 0..cutoff {
            rho[(m, n)] = c(coeffs[m] * coeffs[n]);
        }
    }
    Ok(EncodedPdf { coeffs, rho_data: DensityMatrix::new(rho)?, captured_norm })
}

/// Reconstruct P(q) = sum_mn rho_mn Psi_m(q) Psi_n(q) on a grid.
pub fn density_to_pdf(rho: &DensityMatrix, grid: &QuadGrid) -> Result<Pdf> {
    let cutoff = rho.cutoff();
    let table = wavefunction_table(cutoff - 1, grid)?;
    let m = rho.matrix();
    let mut values = vec![0.0; grid.points];
    for (i, v) in values.iter_mut().enumerate() {
        let psi = DVector::from_iterator(cutoff, table.iter().map(|row| c(row[i])));
        let val = (psi.adjoint() * m * &psi)[(0, 0)].re;
        *v = if val < 0.0 { 0.0 } else { val };
    }
    Pdf::new(grid.clone(), values)
}

/// KL divergence sum_q gen(q) log(gen(q) / max(target(q), eps)) dq with
/// eps = 1e-12; grid points where gen vanishes contribute zero.
pub fn kl_divergence(gen: &Pdf, target: &Pdf) -> Result<f64> {
    if gen.grid() != target.grid() {
        return Err(Error::invalid("KL divergence requires a shared grid"));
    }
    let dq = gen.grid().spacing();
    let mut total = 0.0;
    for (g, t) in gen.values().iter().zip(target.values()) {
        if *g < 1e-12 {
            continue;
        }
        total += g * (g / t.max(1e-12)).ln();
    }
    Ok(total * dq)
}

/// Affine change of variable with Jacobian-corrected density; the integral is
/// preserved exactly.
pub fn rescale_support(p: &Pdf, new_min: f64, new_max: f64) -> Result<Pdf> {
    if !(new_max > new_min) {
        return Err(Error::invalid("rescale requires new_max > new_min"));
    }
    let old_span = p.grid().q_max - p.grid().q_min;
    let scale = (new_max - new_min) / old_span;
    let grid = QuadGrid::new(new_min, new_max, p.grid().points)?;
    let values: Vec<f64> = p.values().iter().map(|v| v / scale).collect();
    Pdf::new(grid, values)
}

/// Gaussian kernel density estimate of a weighted histogram, evaluated on a
/// grid and normalized there. Bandwidth follows Scott's rule
/// h = sigma_hat * m^{-1/5} with m the effective sample count 1 / sum w^2;
/// a degenerate spread falls back to the grid spacing.
pub fn kde_smooth(centers: &[f64], probs: &[f64], grid: &QuadGrid) -> Result<Pdf> {
    if centers.len() != probs.len() {
        return Err(Error::invalid("kde needs matching centers and probabilities"));
    }
    let total: f64 = probs.iter().sum();
    if total <= 0.0 || probs.iter().all(|&p| p <= 0.0) {
        return Err(Error::invalid("kde needs at least one nonzero bin"));
    }
    let w: Vec<f64> = probs.iter().map(|p| p / total).collect();
    let mu: f64 = centers.iter().zip(&w).map(|(c, w)| c * w).sum();
    let var: f64 = centers.iter().zip(&w).map(|(c, w)| (c - mu).powi(2) * w).sum();
    let neff = 1.0 / w.iter().map(|w| w * w).sum::<f64>();
    let mut h = var.sqrt() * neff.powf(-0.2);
    if h < 1e-9 {
        h = grid.spacing();
    }
    let norm = 1.0 / (h * (2.0 * std::f64::consts::PI).sqrt());
    let values: Vec<f64> = grid
        .values()
        .iter()
        .map(|&q| {
            centers
                .iter()
                .zip(&w)
                .map(|(cq, wq)| wq * norm * (-0.5 * ((q - cq) / h).powi(2)).exp())
                .sum()
        })
        .collect();
    Pdf::new(grid.clone(), values)?.normalized()
}
