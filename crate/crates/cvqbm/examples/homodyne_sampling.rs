//! Draw homodyne samples from a trained machine and compare their moments
//! with the reconstructed output distribution.

use cvqbm::engine::{forward, sample_homodyne};
use cvqbm::quadrature::density_to_pdf;
use cvqbm::runner::{bundled_config, run_case};

fn main() -> cvqbm::Result<()> {
    let mut cfg = cvqbm::config::parse_config(bundled_config("forest-histogram").unwrap())?;
    cfg.train.epochs = 30;
    cfg.outputs = std::env::temp_dir().join("cvqbm-example-homodyne");
    let out = run_case(&cfg, false)?;

    let res = forward(&out.result.best_params, &cfg.qbm)?;
    let pdf = density_to_pdf(&res.rho_v, &cfg.grid)?;
    let samples = sample_homodyne(&res.rho_v, &cfg.grid, 50_000, 42)?;
    let mean: f64 = samples.iter().sum::<f64>() / samples.len() as f64;
    let var: f64 =
        samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / samples.len() as f64;

    println!("pdf mean / variance:     {:.4} / {:.4}", pdf.mean(), pdf.variance());
    println!("sample mean / variance:  {mean:.4} / {var:.4}  (50k homodyne shots)");
    println!("first samples: {:?}", &samples[..6]);
    Ok(())
}
