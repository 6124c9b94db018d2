//! Experiment runner: builds targets from their declarative specs, executes
//! case studies and noise sweeps, and writes the report artifacts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{AssertSpec, ExperimentConfig};
use crate::distributions::{
    fit_gaussian, histogram_from_bytes, load_intensity_histogram, pdf_etib, pdf_gamma,
    pdf_rayleigh, pdf_weibull, HistogramSmoothing, QuantumTarget, TargetKind,
};
use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockVector};
use crate::gates::{displace, squeeze, squeezing_from_db};
use crate::noise::{sweep, LossPlacement, NoiseSweepConfig, SweepTable};
use crate::quadrature::{density_to_pdf, encode_pdf, kde_smooth, Pdf};
use crate::trainer::{generate, train, TrainResult};

/// Names of the built-in case studies, runnable without config edits.
pub fn list_bundled() -> Vec<&'static str> {
    vec![
        "gaussian-quantum",
        "cat-quantum",
        "rayleigh",
        "gamma",
        "weibull-sea",
        "etib",
        "forest-histogram",
    ]
}

/// The embedded config document for a bundled case study.
pub fn bundled_config(name: &str) -> Option<&'static str> {
    match name {
        "gaussian-quantum" => Some(include_str!("../configs/gaussian-quantum.json")),
        "cat-quantum" => Some(include_str!("../configs/cat-quantum.json")),
        "rayleigh" => Some(include_str!("../configs/rayleigh.json")),
        "gamma" => Some(include_str!("../configs/gamma.json")),
        "weibull-sea" => Some(include_str!("../configs/weibull-sea.json")),
        "etib" => Some(include_str!("../configs/etib.json")),
        "forest-histogram" => Some(include_str!("../configs/forest-histogram.json")),
        _ => None,
    }
}

/// Load a config from a bundled name or a file path.
pub fn resolve_config(arg: &str) -> Result<ExperimentConfig> {
    if let Some(text) = bundled_config(arg) {
        return crate::config::parse_config(text);
    }
    let text = fs::read_to_string(arg).map_err(|e| Error::Config {
        path: arg.to_string(),
        message: format!("cannot read config: {e}"),
    })?;
    crate::config::parse_config(&text)
}

/// Displaced squeezed vacuum D(alpha) S(r) |0>.
pub fn squeezed_displaced_state(r_db: f64, alpha: f64, cutoff: usize) -> Result<FockVector> {
    let r = squeezing_from_db(r_db);
    let mut st = FockVector::vacuum(1, cutoff);
    st.apply_one_mode(&squeeze(r, cutoff)?, 0)?;
    st.apply_one_mode(&displace(alpha, cutoff)?, 0)?;
    st.normalized()
}

/// Even squeezed cat S(r) (D(d) + D(-d)) |0>, normalized at the cutoff.
pub fn squeezed_cat_state(r_db: f64, displacement: f64, cutoff: usize) -> Result<FockVector> {
    let r = squeezing_from_db(r_db);
    let vac = FockVector::vacuum(1, cutoff);
    let plus = displace(displacement, cutoff)? * vac.amplitudes();
    let minus = displace(-displacement, cutoff)? * vac.amplitudes();
    let s = squeeze(r, cutoff)?;
    FockVector::from_amplitudes(1, cutoff, s * (plus + minus))?.normalized()
}

fn gaussian_density(mean: f64, std: f64) -> impl Fn(f64) -> f64 {
    move |q| {
        (-0.5 * ((q - mean) / std).powi(2)).exp() / (std * (2.0 * std::f64::consts::PI).sqrt())
    }
}

/// Resolve a histogram source: `bundled:forest` or a filesystem path.
fn load_histogram_source(source: &str) -> Result<Vec<f64>> {
    if let Some(bundled) = source.strip_prefix("bundled:") {
        match bundled {
            "forest" => {
                histogram_from_bytes(include_bytes!("../assets/forest_histogram.csv"))
            }
            other => Err(Error::Config {
                path: "target.source".into(),
                message: format!("unknown bundled histogram `{other}`"),
            }),
        }
    } else {
        load_intensity_histogram(Path::new(source))
    }
}

/// Construct the training target: its density matrix at the machine cutoff
/// plus the pdf of the target on the case grid.
pub fn build_target(cfg: &ExperimentConfig) -> Result<(DensityMatrix, Pdf)> {
    let cutoff = cfg.qbm.cutoff;
    let grid = &cfg.grid;
    let target_pdf = match &cfg.target.kind {
        TargetKind::Gaussian { mean, std } => Pdf::from_fn(grid.clone(), gaussian_density(*mean, *std))?,
        TargetKind::Rayleigh { sigma } => {
            let s = *sigma;
            Pdf::from_fn(grid.clone(), move |q| pdf_rayleigh(q, s).unwrap_or(0.0))?
        }
        TargetKind::Gamma { shape, scale } => {
            let (k, th) = (*shape, *scale);
            Pdf::from_fn(grid.clone(), move |q| {
                let v = pdf_gamma(q, k, th).unwrap_or(0.0);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            })?
        }
        TargetKind::Weibull { lambda, shape } => {
            let (l, k) = (*lambda, *shape);
            Pdf::from_fn(grid.clone(), move |q| {
                let v = pdf_weibull(q, l, k).unwrap_or(0.0);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            })?
        }
        TargetKind::Etib { alpha, beta, lambda, phi } => {
            let (a, b, l, p) = (*alpha, *beta, *lambda, *phi);
            Pdf::from_fn(grid.clone(), move |q| {
                let v = pdf_etib(q, a, b, l, p).unwrap_or(0.0);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            })?
        }
        TargetKind::Histogram { source, rescale, smoothing } => {
            let hist = load_histogram_source(source)?;
            let scale = (rescale.1 - rescale.0) / 255.0;
            match smoothing {
                HistogramSmoothing::GaussianFit => {
                    let (mu, sigma) = fit_gaussian(&hist)?;
                    let mu_r = rescale.0 + mu * scale;
                    let sigma_r = sigma * scale;
                    Pdf::from_fn(grid.clone(), gaussian_density(mu_r, sigma_r))?
                }
                HistogramSmoothing::Kde => {
                    let centers: Vec<f64> =
                        (0..hist.len()).map(|i| rescale.0 + i as f64 * scale).collect();
                    kde_smooth(&centers, &hist, grid)?
                }
            }
        }
        TargetKind::QuantumState(q) => {
            let state = match q {
                QuantumTarget::SqueezedDisplaced { r_db, alpha } => {
                    squeezed_displaced_state(*r_db, *alpha, cutoff)?
                }
                QuantumTarget::SqueezedCat { r_db, displacement } => {
                    squeezed_cat_state(*r_db, *displacement, cutoff)?
                }
            };
            let rho = DensityMatrix::from_pure(&state)?;
            let pdf = density_to_pdf(&rho, grid)?;
            return Ok((rho, pdf));
        }
    };
    let encoded = encode_pdf(&target_pdf, cutoff)?;
    Ok((encoded.rho_data, target_pdf))
}

/// Summary of one completed case study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseSummary {
    pub name: String,
    pub fidelity: f64,
    pub kl: f64,
    pub success_prob: f64,
    pub out_dir: PathBuf,
}

/// Full in-memory outcome of `run_case`.
#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub summary: CaseSummary,
    pub result: TrainResult,
    pub generated_pdf: Pdf,
    pub target_pdf: Pdf,
    pub samples: Vec<f64>,
}

#[derive(Serialize)]
struct Report<'a> {
    name: &'a str,
    #[serde(flatten)]
    result: &'a TrainResult,
    generated_kl: f64,
    n_samples: usize,
}

/// Train a case study, generate from the trained machine, and write
/// `report.json`, `pdf.csv`, `samples.csv`, and `params.json` into the
/// configured output directory. With `check_assertions`, threshold misses
/// from the config's `assert` block become errors (CLI exit code 4).
pub fn run_case(cfg: &ExperimentConfig, check_assertions: bool) -> Result<CaseOutcome> {
    cfg.validate()?;
    let (target, _analytic_pdf) = build_target(cfg)?;
    let result = train(&target, &cfg.qbm, &cfg.train, &cfg.grid)?;
    let (generated_pdf, samples, kl) =
        generate(&result, &cfg.qbm, &cfg.grid, cfg.samples, cfg.train.seed)?;
    let target_pdf = result.target_pdf.clone();

    fs::create_dir_all(&cfg.outputs)?;
    let report = Report {
        name: &cfg.name,
        result: &result,
        generated_kl: kl,
        n_samples: cfg.samples,
    };
    fs::write(
        cfg.outputs.join("report.json"),
        serde_json::to_string_pretty(&report).map_err(|e| Error::invalid(e.to_string()))?,
    )?;

    let mut pdf_csv = Vec::new();
    writeln!(pdf_csv, "q,target,generated")?;
    for i in 0..cfg.grid.points {
        writeln!(
            pdf_csv,
            "{},{},{}",
            cfg.grid.q(i),
            target_pdf.values()[i],
            generated_pdf.values()[i]
        )?;
    }
    fs::write(cfg.outputs.join("pdf.csv"), pdf_csv)?;

    let mut samples_csv = Vec::new();
    for s in &samples {
        writeln!(samples_csv, "{s}")?;
    }
    fs::write(cfg.outputs.join("samples.csv"), samples_csv)?;

    fs::write(
        cfg.outputs.join("params.json"),
        serde_json::to_string_pretty(&result.best_params)
            .map_err(|e| Error::invalid(e.to_string()))?,
    )?;

    let summary = CaseSummary {
        name: cfg.name.clone(),
        fidelity: result.final_fidelity,
        kl,
        success_prob: result.final_success_prob,
        out_dir: cfg.outputs.clone(),
    };
    if check_assertions {
        check_assert(&cfg.assert, &summary)?;
    }
    Ok(CaseOutcome { summary, result, generated_pdf, target_pdf, samples })
}

fn check_assert(assert: &AssertSpec, s: &CaseSummary) -> Result<()> {
    if let Some(min) = assert.min_fidelity {
        if s.fidelity < min {
            return Err(Error::AssertionFailed(format!(
                "fidelity {:.6} below the required {min}",
                s.fidelity
            )));
        }
    }
    if let Some(max) = assert.max_kl {
        if s.kl > max {
            return Err(Error::AssertionFailed(format!(
                "KL divergence {:.6} above the allowed {max}",
                s.kl
            )));
        }
    }
    if let Some(min) = assert.min_success {
        if s.success_prob < min {
            return Err(Error::AssertionFailed(format!(
                "success probability {:.6} below the required {min}",
                s.success_prob
            )));
        }
    }
    Ok(())
}

/// Run a noise sweep over the given transmissivities on a base case config.
/// Writes `sweep_runs.csv` (per run) and `sweep.csv` (aggregates).
pub fn run_sweep(
    cfg: &ExperimentConfig,
    t_values: &[f64],
    repeats: usize,
    placement: LossPlacement,
) -> Result<SweepTable> {
    cfg.validate()?;
    let sweep_cfg =
        NoiseSweepConfig { t_values: t_values.to_vec(), repeats, placement };
    sweep_cfg.validate()?;
    if t_values.iter().any(|&t| t < 1.0) && cfg.qbm.cutoff > 12 {
        return Err(Error::Config {
            path: "qbm.cutoff".into(),
            message: "noisy sweeps require cutoff <= 12".into(),
        });
    }
    let (target, _) = build_target(cfg)?;
    let table = sweep(&target, &cfg.qbm, &cfg.train, &cfg.grid, &sweep_cfg)?;

    fs::create_dir_all(&cfg.outputs)?;
    let mut runs = Vec::new();
    table.write_runs_csv(&mut runs)?;
    fs::write(cfg.outputs.join("sweep_runs.csv"), runs)?;
    let mut agg = Vec::new();
    table.write_aggregate_csv(&mut agg)?;
    fs::write(cfg.outputs.join("sweep.csv"), agg)?;
    Ok(table)
}
