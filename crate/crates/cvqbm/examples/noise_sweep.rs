//! Train the forest case under photon loss at several transmissivities and
//! watch fidelity degrade and KL divergence grow.

use cvqbm::noise::{LossPlacement, NoiseSweepConfig, sweep};
use cvqbm::runner::{build_target, bundled_config};
use cvqbm::trainer::TrainConfig;

fn main() -> cvqbm::Result<()> {
    let cfg = cvqbm::config::parse_config(bundled_config("forest-histogram").unwrap())?;
    let (target, _) = build_target(&cfg)?;
    let train_cfg = TrainConfig { epochs: 40, lr0: 0.1, seed: 100, ..cfg.train.clone() };
    let sweep_cfg = NoiseSweepConfig {
        t_values: vec![1.0, 0.9, 0.7, 0.5],
        repeats: 3,
        placement: LossPlacement::VisibleOnly,
    };
    let table = sweep(&target, &cfg.qbm, &train_cfg, &cfg.grid, &sweep_cfg)?;
    println!("T      mean F   std F    mean KL  std KL");
    for a in &table.aggregates {
        println!(
            "{:<6} {:.4}   {:.4}   {:.4}   {:.4}",
            a.t, a.mean_fidelity, a.std_fidelity, a.mean_kl, a.std_kl
        );
    }
    Ok(())
}
