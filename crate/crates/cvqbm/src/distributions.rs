//! Analytic target-distribution library (Gaussian, Rayleigh, Gamma, Weibull,
//! ET-IB) plus ingestion of 8-bit grayscale intensity histograms from PGM
//! images or 256-count CSV files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Declarative description of a training target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub kind: TargetKind,
    /// Support hint (min, max); used to default the quadrature grid.
    pub support: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TargetKind {
    Gaussian { mean: f64, std: f64 },
    Rayleigh { sigma: f64 },
    Gamma { shape: f64, scale: f64 },
    Weibull { lambda: f64, shape: f64 },
    Etib { alpha: f64, beta: f64, lambda: f64, phi: f64 },
    Histogram { source: String, rescale: (f64, f64), smoothing: HistogramSmoothing },
    QuantumState(QuantumTarget),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HistogramSmoothing {
    GaussianFit,
    Kde,
}

/// Analytically constructed quantum target states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum QuantumTarget {
    /// D(alpha) S(r) |0> with the squeezing given in dB.
    SqueezedDisplaced { r_db: f64, alpha: f64 },
    /// Even squeezed cat, S(r) (D(d) + D(-d)) |0>, squeezing in dB.
    SqueezedCat { r_db: f64, displacement: f64 },
}

impl TargetSpec {
    /// Validate the kind-specific parameter constraints.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            TargetKind::Gaussian { std, .. } => {
                if *std <= 0.0 {
                    return Err(Error::invalid("gaussian std must be positive"));
                }
            }
            TargetKind::Rayleigh { sigma } => {
                if *sigma <= 0.0 {
                    return Err(Error::invalid("rayleigh sigma must be positive"));
                }
            }
            TargetKind::Gamma { shape, scale } => {
                if *shape <= 0.0 || *scale <= 0.0 {
                    return Err(Error::invalid("gamma shape and scale must be positive"));
                }
            }
            TargetKind::Weibull { lambda, shape } => {
                if *lambda <= 0.0 || *shape <= 0.0 {
                    return Err(Error::invalid("weibull lambda and shape must be positive"));
                }
            }
            TargetKind::Etib { alpha, beta, lambda, phi } => {
                if *alpha <= 0.0 || *beta <= 0.0 || *phi <= 0.0 || lambda.abs() >= 1.0 {
                    return Err(Error::invalid(
                        "etib requires alpha, beta, phi > 0 and |lambda| < 1",
                    ));
                }
            }
            TargetKind::Histogram { source, rescale, .. } => {
                if source.is_empty() {
                    return Err(Error::invalid("histogram source must be set"));
                }
                if !(rescale.1 > rescale.0) {
                    return Err(Error::invalid("histogram rescale needs max > min"));
                }
            }
            TargetKind::QuantumState(q) => match q {
                QuantumTarget::SqueezedDisplaced { r_db, .. }
                | QuantumTarget::SqueezedCat { r_db, .. } => {
                    if *r_db < 0.0 {
                        return Err(Error::invalid("squeezing in dB must be non-negative"));
                    }
                }
            },
        }
        if let Some((lo, hi)) = self.support {
            if !(hi > lo) {
                return Err(Error::invalid("support hint needs max > min"));
            }
        }
        Ok(())
    }
}

/// Rayleigh density x/sigma^2 exp(-x^2 / 2 sigma^2) for x >= 0.
pub fn pdf_rayleigh(x: f64, sigma: f64) -> Result<f64> {
    if sigma <= 0.0 {
        return Err(Error::invalid("rayleigh sigma must be positive"));
    }
    if x < 0.0 {
        return Ok(0.0);
    }
    Ok(x / (sigma * sigma) * (-x * x / (2.0 * sigma * sigma)).exp())
}

/// Gamma density x^{k-1} / (Gamma(k) theta^k) exp(-x/theta), via log-gamma.
pub fn pdf_gamma(x: f64, k: f64, theta: f64) -> Result<f64> {
    if k <= 0.0 || theta <= 0.0 {
        return Err(Error::invalid("gamma parameters must be positive"));
    }
    if x < 0.0 {
        return Ok(0.0);
    }
    if x == 0.0 {
        return Ok(if k > 1.0 {
            0.0
        } else if k == 1.0 {
            1.0 / theta
        } else {
            f64::INFINITY
        });
    }
    let ln_gamma_k = statrs::function::gamma::ln_gamma(k);
    Ok(((k - 1.0) * x.ln() - x / theta - ln_gamma_k - k * theta.ln()).exp())
}

/// Weibull density (k/lambda)(x/lambda)^{k-1} e^{-(x/lambda)^k}.
pub fn pdf_weibull(x: f64, lambda: f64, k: f64) -> Result<f64> {
    if lambda <= 0.0 || k <= 0.0 {
        return Err(Error::invalid("weibull parameters must be positive"));
    }
    if x < 0.0 {
        return Ok(0.0);
    }
    if x == 0.0 {
        return Ok(if k > 1.0 {
            0.0
        } else if k == 1.0 {
            1.0 / lambda
        } else {
            f64::INFINITY
        });
    }
    let z = x / lambda;
    Ok(k / lambda * z.powf(k - 1.0) * (-z.powf(k)).exp())
}

/// Regularized incomplete beta function I_z(alpha, beta).
pub fn regularized_incomplete_beta(z: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::invalid(format!("z must lie in [0, 1], got {z}")));
    }
    if alpha <= 0.0 || beta <= 0.0 {
        return Err(Error::invalid("incomplete beta requires alpha, beta > 0"));
    }
    Ok(beta_reg(alpha, beta, z))
}

/// Exponentiated transmuted-inverted beta density.
pub fn pdf_etib(x: f64, alpha: f64, beta: f64, lambda: f64, phi: f64) -> Result<f64> {
    if alpha <= 0.0 || beta <= 0.0 || phi <= 0.0 {
        return Err(Error::invalid("etib requires alpha, beta, phi > 0"));
    }
    if lambda.abs() >= 1.0 {
        return Err(Error::invalid("etib requires |lambda| < 1"));
    }
    if x < 0.0 {
        return Ok(0.0);
    }
    if x == 0.0 {
        return Ok(if alpha > 1.0 { 0.0 } else { f64::INFINITY });
    }
    let z = x / (1.0 + x);
    let i = regularized_incomplete_beta(z, alpha, beta)?;
    // beta-prime factor via log-gamma for stability
    let log_base = (alpha - 1.0) * x.ln() - (alpha + beta) * (1.0 + x).ln() - ln_beta(alpha, beta);
    let base = log_base.exp();
    let transmuted = (1.0 + lambda - 2.0 * lambda * i) * (1.0 + lambda - lambda * i).powf(phi - 1.0);
    Ok(phi * base * i.powf(phi - 1.0) * transmuted)
}

/// Normalized 256-bin intensity histogram from a PGM image (P2 or P5) or a
/// CSV of 256 counts, dispatched on the leading bytes.
pub fn load_intensity_histogram(path: &Path) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path)?;
    histogram_from_bytes(&bytes)
}

pub fn histogram_from_bytes(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        load_histogram_pgm(bytes)
    } else {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
            message: format!("histogram source is neither PGM nor UTF-8 CSV: {e}"),
            offset: Some(e.valid_up_to()),
            line: None,
            column: None,
        })?;
        load_histogram_csv(text)
    }
}

struct PgmCursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> PgmCursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { message: message.into(), offset: Some(self.pos), line: None, column: None }
    }

    fn skip_separators(&mut self) {
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn read_number(&mut self) -> Result<usize> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected an unsigned integer"));
        }
        let text = std::str::from_utf8(&self.data[start..self.pos]).unwrap();
        text.parse().map_err(|e| self.err(format!("bad integer `{text}`: {e}")))
    }
}

/// Parse a P2 (ASCII) or P5 (binary) PGM with maxval <= 255 into a normalized
/// 256-bin intensity histogram. Malformed input reports the byte offset.
pub fn load_histogram_pgm(bytes: &[u8]) -> Result<Vec<f64>> {
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => {
            return Err(Error::Parse {
                message: "missing PGM magic (P2 or P5)".into(),
                offset: Some(0),
                line: None,
                column: None,
            })
        }
    };
    let mut cur = PgmCursor { data: bytes, pos: 2 };
    let width = cur.read_number()?;
    let height = cur.read_number()?;
    let maxval = cur.read_number()?;
    if maxval == 0 || maxval > 255 {
        return Err(cur.err(format!("maxval must be in 1..=255, got {maxval}")));
    }
    let pixels = width * height;
    if pixels == 0 {
        return Err(Error::invalid("image has no pixels"));
    }
    let mut counts = vec![0u64; 256];
    if binary {
        // single whitespace byte separates the header from raster data
        if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
            return Err(cur.err("expected a whitespace byte before binary raster"));
        }
        cur.pos += 1;
        if bytes.len() - cur.pos < pixels {
            cur.pos = bytes.len();
            return Err(cur.err(format!(
                "raster truncated: expected {pixels} bytes, found {}",
                bytes.len() - cur.pos
            )));
        }
        for &b in &bytes[cur.pos..cur.pos + pixels] {
            if b as usize > maxval {
                return Err(cur.err(format!("pixel value {b} exceeds maxval {maxval}")));
            }
            counts[b as usize] += 1;
        }
    } else {
        for _ in 0..pixels {
            let v = cur.read_number()?;
            if v > maxval {
                return Err(cur.err(format!("pixel value {v} exceeds maxval {maxval}")));
            }
            counts[v] += 1;
        }
    }
    normalize_counts(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>())
}

/// Parse a CSV of exactly 256 non-negative counts (commas and/or newlines).
pub fn load_histogram_csv(text: &str) -> Result<Vec<f64>> {
    let mut counts = Vec::with_capacity(256);
    let mut offset = 0usize;
    for token in text.split(|ch: char| ch == ',' || ch.is_whitespace()) {
        if token.is_empty() {
            offset += 1;
            continue;
        }
        let v: f64 = token.parse().map_err(|e| Error::Parse {
            message: format!("bad count `{token}`: {e}"),
            offset: Some(offset),
            line: None,
            column: None,
        })?;
        if v < 0.0 || !v.is_finite() {
            return Err(Error::Parse {
                message: format!("counts must be finite and non-negative, got {v}"),
                offset: Some(offset),
                line: None,
                column: None,
            });
        }
        counts.push(v);
        offset += token.len() + 1;
    }
    if counts.len() != 256 {
        return Err(Error::Parse {
            message: format!("expected 256 counts, found {}", counts.len()),
            offset: Some(text.len()),
            line: None,
            column: None,
        });
    }
    normalize_counts(&counts)
}

fn normalize_counts(counts: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("histogram has no nonzero counts"));
    }
    Ok(counts.iter().map(|c| c / total).collect())
}

/// Moment-matched (mu, sigma) of a histogram over bin centers 0..len-1.
pub fn fit_gaussian(probs: &[f64]) -> Result<(f64, f64)> {
    let nonzero = probs.iter().filter(|&&p| p > 0.0).count();
    if nonzero < 2 {
        return Err(Error::invalid("gaussian fit needs at least two nonzero bins"));
    }
    let total: f64 = probs.iter().sum();
    let mu: f64 = probs.iter().enumerate().map(|(i, p)| i as f64 * p).sum::<f64>() / total;
    let var: f64 =
        probs.iter().enumerate().map(|(i, p)| (i as f64 - mu).powi(2) * p).sum::<f64>() / total;
    Ok((mu, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = if n % 2 == 0 { n } else { n + 1 };
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let coeff = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += coeff * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn rayleigh_values_and_mode() {
        assert_eq!(pdf_rayleigh(0.0, 1.0).unwrap(), 0.0);
        assert!((pdf_rayleigh(1.0, 1.0).unwrap() - (-0.5f64).exp()).abs() < 1e-12);
        assert!(pdf_rayleigh(1.0, 0.0).is_err());

        let sigma = 1.3;
        let dq = 0.001;
        let mut best = (0.0, 0.0);
        let mut x = 0.0;
        while x < 8.0 {
            let v = pdf_rayleigh(x, sigma).unwrap();
            if v > best.1 {
                best = (x, v);
            }
            x += dq;
        }
        assert!((best.0 - sigma).abs() <= dq + 1e-12);
    }

    #[test]
    fn gamma_values_mode_and_normalization() {
        assert!((pdf_gamma(0.0, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((pdf_gamma(2.0, 1.0, 1.0).unwrap() - (-2.0f64).exp()).abs() < 1e-12);
        assert!(pdf_gamma(1.0, -1.0, 1.0).is_err());

        let (k, theta) = (2.5, 0.5);
        let dq = 0.0005;
        let mut best = (0.0, 0.0);
        let mut x = 0.0;
        while x < 10.0 {
            let v = pdf_gamma(x, k, theta).unwrap();
            if v > best.1 {
                best = (x, v);
            }
            x += dq;
        }
        assert!((best.0 - (k - 1.0) * theta).abs() <= dq + 1e-12);

        let integral = simpson(|x| pdf_gamma(x, k, theta).unwrap(), 0.0, 20.0, 20000);
        assert!((integral - 1.0).abs() < 1e-4, "integral {integral}");
    }

    #[test]
    fn weibull_cases() {
        // k = 1 reduces to an exponential with rate 1/lambda
        for x in [0.0, 0.5, 2.0] {
            let w = pdf_weibull(x, 2.0, 1.0).unwrap();
            assert!((w - 0.5 * (-x / 2.0).exp()).abs() < 1e-12);
        }
        assert!(pdf_weibull(1.0, 0.0, 1.0).is_err());

        let (lambda, k) = (161.2, 5.4);
        let integral = simpson(|x| pdf_weibull(x, lambda, k).unwrap(), 0.0, 400.0, 40000);
        assert!((integral - 1.0).abs() < 1e-4, "integral {integral}");

        // closed-form median lambda (ln 2)^{1/k}
        let median = lambda * 2f64.ln().powf(1.0 / k);
        let cdf = simpson(|x| pdf_weibull(x, lambda, k).unwrap(), 0.0, median, 200000);
        assert!((cdf - 0.5).abs() < 1e-6, "cdf at median {cdf}");
    }

    #[test]
    fn incomplete_beta_cases() {
        assert_eq!(regularized_incomplete_beta(0.0, 2.0, 3.0).unwrap(), 0.0);
        assert_eq!(regularized_incomplete_beta(1.0, 2.0, 3.0).unwrap(), 1.0);
        for a in [0.5, 1.0, 2.5, 7.0] {
            let v = regularized_incomplete_beta(0.5, a, a).unwrap();
            assert!((v - 0.5).abs() < 1e-10, "symmetry at a={a}: {v}");
        }
        assert!(regularized_incomplete_beta(1.5, 1.0, 1.0).is_err());
        assert!(regularized_incomplete_beta(0.5, 0.0, 1.0).is_err());

        // quadrature oracle for I_0.3(2, 3)
        let b23 = (ln_beta(2.0, 3.0)).exp();
        let oracle = simpson(|t| t * (1.0 - t) * (1.0 - t), 0.0, 0.3, 100000) / b23;
        let v = regularized_incomplete_beta(0.3, 2.0, 3.0).unwrap();
        assert!((v - oracle).abs() < 1e-8, "{v} vs oracle {oracle}");
    }

    #[test]
    fn incomplete_beta_monotone_in_z() {
        let mut prev = 0.0;
        for i in 0..=100 {
            let z = i as f64 / 100.0;
            let v = regularized_incomplete_beta(z, 3.2, 1.7).unwrap();
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn etib_reduces_to_beta_prime() {
        let (a, b) = (4.0, 5.0);
        let lnb = ln_beta(a, b);
        for x in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let etib = pdf_etib(x, a, b, 0.0, 1.0).unwrap();
            let beta_prime =
                ((a - 1.0) * x.ln() - (a + b) * (1.0 + x).ln() - lnb).exp();
            assert!((etib - beta_prime).abs() < 1e-10, "x={x}: {etib} vs {beta_prime}");
        }
    }

    #[test]
    fn etib_reference_parameters_normalize() {
        let f = |x: f64| pdf_etib(x, 4.0, 5.0, 0.1, 2.0).unwrap();
        let integral = simpson(f, 0.0, 50.0, 50000);
        assert!((integral - 1.0).abs() < 1e-3, "integral {integral}");
    }

    #[test]
    fn etib_nonnegative_over_random_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let a = rng.gen_range(0.5..8.0);
            let b = rng.gen_range(0.5..8.0);
            let l = rng.gen_range(-0.95..0.95);
            let phi = rng.gen_range(0.2..5.0);
            for i in 0..10_000 {
                let x = i as f64 * 0.002;
                let v = pdf_etib(x, a, b, l, phi).unwrap();
                assert!(v >= 0.0, "negative density at x={x} for ({a},{b},{l},{phi})");
            }
        }
    }

    #[test]
    fn etib_rejects_bad_parameters() {
        assert!(pdf_etib(1.0, 0.0, 1.0, 0.0, 1.0).is_err());
        assert!(pdf_etib(1.0, 1.0, 1.0, 1.2, 1.0).is_err());
    }

    #[test]
    fn histogram_from_uniform_p2_image() {
        let mut pgm = String::from("P2\n# test image\n4 2 255\n");
        for _ in 0..8 {
            pgm.push_str("128 ");
        }
        let h = load_histogram_pgm(pgm.as_bytes()).unwrap();
        assert!((h[128] - 1.0).abs() < 1e-12);
        assert!(h.iter().enumerate().all(|(i, &p)| i == 128 || p == 0.0));
    }

    #[test]
    fn histogram_from_p5_image() {
        let mut bytes = b"P5 3 2 255\n".to_vec();
        bytes.extend_from_slice(&[10, 10, 20, 20, 20, 30]);
        let h = load_histogram_pgm(&bytes).unwrap();
        assert!((h[10] - 2.0 / 6.0).abs() < 1e-12);
        assert!((h[20] - 3.0 / 6.0).abs() < 1e-12);
        assert!((h[30] - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_parse_errors_carry_offsets() {
        let bad = b"P5 3 2 255\n\x01\x02";
        match load_histogram_pgm(bad) {
            Err(Error::Parse { offset: Some(_), .. }) => {}
            other => panic!("expected parse error with offset, got {other:?}"),
        }
        let garbage = b"P2 x 2 255\n";
        match load_histogram_pgm(garbage) {
            Err(Error::Parse { offset: Some(o), .. }) => assert!(o >= 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn histogram_from_csv() {
        let mut csv = String::from("1,1");
        csv.push_str(&",0".repeat(254));
        let h = load_histogram_csv(&csv).unwrap();
        assert!((h[0] - 0.5).abs() < 1e-12);
        assert!((h[1] - 0.5).abs() < 1e-12);

        let empty = "0,".repeat(255) + "0";
        assert!(load_histogram_csv(&empty).is_err());
        assert!(load_histogram_csv("1,2,3").is_err());
    }

    #[test]
    fn fit_gaussian_cases() {
        let mut probs = vec![0.0; 256];
        probs[100] = 0.5;
        probs[200] = 0.5;
        let (mu, sigma) = fit_gaussian(&probs).unwrap();
        assert!((mu - 150.0).abs() < 1e-9);
        assert!((sigma - 50.0).abs() < 1e-9);

        probs = vec![0.0; 256];
        probs[42] = 1.0;
        assert!(fit_gaussian(&probs).is_err());
    }

    #[test]
    fn generate_then_fit_recovers_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (gen_mu, gen_sigma) = (120.0, 30.0);
        let mut pixels = Vec::with_capacity(40_000);
        for _ in 0..40_000 {
            // Box-Muller
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            let v = (gen_mu + gen_sigma * z).round().clamp(0.0, 255.0) as u8;
            pixels.push(v);
        }
        let mut pgm = b"P5 200 200 255\n".to_vec();
        pgm.extend_from_slice(&pixels);
        let h = load_histogram_pgm(&pgm).unwrap();
        let (mu, sigma) = fit_gaussian(&h).unwrap();
        assert!((mu - gen_mu).abs() < 2.0, "fitted mean {mu}");
        assert!((sigma - gen_sigma).abs() / gen_sigma < 0.02, "fitted sigma {sigma}");
    }

    #[test]
    fn target_spec_validation() {
        let ok = TargetSpec { kind: TargetKind::Rayleigh { sigma: 1.0 }, support: Some((0.0, 6.0)) };
        assert!(ok.validate().is_ok());
        let bad = TargetSpec { kind: TargetKind::Rayleigh { sigma: -1.0 }, support: None };
        assert!(bad.validate().is_err());
        let bad_support =
            TargetSpec { kind: TargetKind::Rayleigh { sigma: 1.0 }, support: Some((2.0, 1.0)) };
        assert!(bad_support.validate().is_err());
    }
}
