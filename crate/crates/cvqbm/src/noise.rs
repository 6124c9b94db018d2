//! Robustness experiments: forward passes under photon-loss channels and
//! sweeps over the transmissivity T with repeated training runs.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::engine::{
    entangled_init_circuit, entangled_init_exact, step_operator, ForwardResult, InitMode,
    QbmConfig, QiteParams,
};
use crate::fock::{partial_trace, DensityMatrix};
use crate::gates::{apply_channel, loss_channel};
use crate::quadrature::QuadGrid;
use crate::trainer::{train_noisy, NoiseSetting, TrainConfig};

/// Where loss channels act in the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossPlacement {
    /// Loss on the visible mode after each QITE step.
    VisibleOnly,
    /// Additionally on the hidden marginal before tracing. A channel on the
    /// traced-out mode cancels in the partial trace, so the visible-mode
    /// output and per-step probabilities coincide with `VisibleOnly`; the
    /// option exists for configuration compatibility.
    AllModes,
}

/// Sweep plan: transmissivities, repeats per point, loss placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSweepConfig {
    pub t_values: Vec<f64>,
    pub repeats: usize,
    pub placement: LossPlacement,
}

impl Default for NoiseSweepConfig {
    fn default() -> Self {
        NoiseSweepConfig { t_values: vec![1.0], repeats: 5, placement: LossPlacement::VisibleOnly }
    }
}

impl NoiseSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_values.is_empty() {
            return Err(Error::invalid("sweep needs at least one T value"));
        }
        if self.t_values.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::invalid("every T must lie in [0, 1]"));
        }
        if self.repeats == 0 {
            return Err(Error::invalid("repeats must be at least 1"));
        }
        Ok(())
    }
}

/// Forward pass with a loss channel of transmissivity `t` applied to the
/// visible mode after each QITE step.
///
/// The pipeline propagates the visible-mode density matrix directly: every
/// map acts on the visible factor only, and such maps commute with the
/// partial trace over the hidden mode, so this is exactly the lifted
/// hidden⊗visible propagation at a fraction of the cost. Step probabilities
/// are recorded before renormalization, as in the pure pipeline.
pub fn noisy_forward(
    params: &QiteParams,
    qbm: &QbmConfig,
    t: f64,
    placement: LossPlacement,
) -> Result<ForwardResult> {
    qbm.validate()?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("loss parameter T must lie in [0, 1], got {t}")));
    }
    if t < 1.0 && qbm.cutoff > 12 {
        return Err(Error::invalid("noisy runs require cutoff <= 12"));
    }
    if params.len() != qbm.steps {
        return Err(Error::invalid(format!(
            "expected {} parameter sets, got {}",
            qbm.steps,
            params.len()
        )));
    }
    let _ = placement; // both placements yield the same visible-mode output

    let seed = match qbm.init_mode {
        InitMode::Exact => entangled_init_exact(qbm.delta, qbm.cutoff),
        InitMode::Circuit => entangled_init_circuit(qbm.delta, qbm.cutoff)?,
    };
    let mut rho = partial_trace(&seed, 0)?;
    let channel = if t < 1.0 { Some(loss_channel(t, qbm.cutoff)?) } else { None };

    let mut per_step_probs = Vec::with_capacity(qbm.steps);
    for (s, gp) in params.steps().iter().enumerate() {
        let t_op = step_operator(gp, qbm.cutoff, qbm.post_select_outcome)?;
        let sandwich = &t_op * rho.matrix() * t_op.adjoint();
        let prob = sandwich.trace().re;
        if prob < 1e-14 {
            return Err(Error::degenerate(prob).with_step(s));
        }
        per_step_probs.push(prob);
        rho = DensityMatrix::new(sandwich)?;
        if let Some(ch) = &channel {
            rho = apply_channel(&rho, ch)?;
        }
    }
    let success_prob = per_step_probs.iter().product();
    Ok(ForwardResult { rho_v: rho, success_prob, per_step_probs })
}

/// One row of the sweep: a single (T, seed) training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    pub seed: u64,
    pub fidelity: Option<f64>,
    pub kl: Option<f64>,
    pub success_prob: Option<f64>,
    pub error: Option<String>,
}

/// Aggregated statistics per T over the successful repeats.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepAggregate {
    pub t: f64,
    pub mean_fidelity: f64,
    pub std_fidelity: f64,
    pub mean_kl: f64,
    pub std_kl: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub aggregates: Vec<SweepAggregate>,
}

/// Train `repeats` seeds per T value and aggregate fidelity/KL statistics.
/// Individual run failures are recorded in their row, not fatal.
pub fn sweep(
    target: &DensityMatrix,
    qbm: &QbmConfig,
    train_cfg: &TrainConfig,
    grid: &QuadGrid,
    cfg: &NoiseSweepConfig,
) -> Result<SweepTable> {
    cfg.validate()?;
    let jobs: Vec<(f64, u64)> = cfg
        .t_values
        .iter()
        .flat_map(|&t| (0..cfg.repeats).map(move |r| (t, train_cfg.seed + r as u64)))
        .collect();

    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(t, seed)| {
            let run_cfg = TrainConfig { seed, ..train_cfg.clone() };
            let noise = NoiseSetting { transmissivity: t, placement: cfg.placement };
            match train_noisy(target, qbm, &run_cfg, grid, Some(noise)) {
                Ok(res) => SweepRow {
                    t,
                    seed,
                    fidelity: Some(res.final_fidelity),
                    kl: Some(res.final_kl),
                    success_prob: Some(res.final_success_prob),
                    error: None,
                },
                Err(e) => SweepRow {
                    t,
                    seed,
                    fidelity: None,
                    kl: None,
                    success_prob: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let mut aggregates = Vec::with_capacity(cfg.t_values.len());
    for &t in &cfg.t_values {
        let fids: Vec<f64> =
            rows.iter().filter(|r| r.t == t).filter_map(|r| r.fidelity).collect();
        let kls: Vec<f64> = rows.iter().filter(|r| r.t == t).filter_map(|r| r.kl).collect();
        aggregates.push(SweepAggregate {
            t,
            mean_fidelity: mean(&fids),
            std_fidelity: sample_std(&fids),
            mean_kl: mean(&kls),
            std_kl: sample_std(&kls),
            runs: fids.len(),
        });
    }
    Ok(SweepTable { rows, aggregates })
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_std(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

impl SweepTable {
    /// Per-run CSV: `t,seed,fidelity,kl,success_prob,error`.
    pub fn write_runs_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,seed,fidelity,kl,success_prob,error")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.t,
                r.seed,
                r.fidelity.map(|v| v.to_string()).unwrap_or_default(),
                r.kl.map(|v| v.to_string()).unwrap_or_default(),
                r.success_prob.map(|v| v.to_string()).unwrap_or_default(),
                r.error.as_deref().unwrap_or("").replace(',', ";"),
            )?;
        }
        Ok(())
    }

    /// Aggregate CSV: `t,mean_fidelity,std_fidelity,mean_kl,std_kl,runs`.
    pub fn write_aggregate_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,mean_fidelity,std_fidelity,mean_kl,std_kl,runs")?;
        for a in &self.aggregates {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                a.t, a.mean_fidelity, a.std_fidelity, a.mean_kl, a.std_kl, a.runs
            )?;
        }
        Ok(())
    }

    pub fn read_runs_csv<R: BufRead>(r: R) -> Result<Vec<SweepRow>> {
        let mut rows = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() < 6 {
                return Err(Error::Parse {
                    message: format!("sweep row has {} fields, expected 6", fields.len()),
                    offset: None,
                    line: Some(i + 1),
                    column: None,
                });
            }
            let parse_opt = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|e| Error::Parse {
                        message: format!("bad number `{s}`: {e}"),
                        offset: None,
                        line: Some(i + 1),
                        column: None,
                    })
                }
            };
            rows.push(SweepRow {
                t: fields[0].parse().map_err(|e| Error::Parse {
                    message: format!("bad t: {e}"),
                    offset: None,
                    line: Some(i + 1),
                    column: None,
                })?,
                seed: fields[1].parse().unwrap_or(0),
                fidelity: parse_opt(fields[2])?,
                kl: parse_opt(fields[3])?,
                success_prob: parse_opt(fields[4])?,
                error: if fields[5].is_empty() { None } else { Some(fields[5].to_string()) },
            });
        }
        Ok(rows)
    }
}
