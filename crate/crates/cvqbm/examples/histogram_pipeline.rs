//! The image-intensity pipeline: load an 8-bit histogram, fit a Gaussian,
//! rescale the axes into the quadrature window, and encode the target.

use cvqbm::distributions::{fit_gaussian, load_histogram_csv};
use cvqbm::quadrature::{encode_pdf, kde_smooth, Pdf, QuadGrid};

static FOREST: &str = include_str!("../assets/forest_histogram.csv");

fn main() -> cvqbm::Result<()> {
    let hist = load_histogram_csv(FOREST)?;
    let (mu, sigma) = fit_gaussian(&hist)?;
    println!("fitted intensity Gaussian: mu = {mu:.2}, sigma = {sigma:.2} (8-bit gray levels)");

    // rescale [0, 255] -> [0, 4] so the problem fits the quadrature window
    let scale = 4.0 / 255.0;
    let (mu_r, sigma_r) = (mu * scale, sigma * scale);
    println!("rescaled target: mu = {mu_r:.4}, sigma = {sigma_r:.4}");

    let grid = QuadGrid::new(-1.0, 6.0, 1401)?;
    let target = Pdf::from_fn(grid.clone(), move |q| {
        (-0.5 * ((q - mu_r) / sigma_r).powi(2)).exp()
            / (sigma_r * (2.0 * std::f64::consts::PI).sqrt())
    })?;
    let enc = encode_pdf(&target, 12)?;
    println!("encoded at cutoff 12: captured norm {:.6}", enc.captured_norm);

    // the kde route keeps the raw histogram shape instead of the fit
    let centers: Vec<f64> = (0..hist.len()).map(|i| i as f64 * scale).collect();
    let smoothed = kde_smooth(&centers, &hist, &grid)?;
    println!(
        "kde-smoothed histogram: mean {:.4}, integral {:.4}",
        smoothed.mean(),
        smoothed.integral()
    );
    Ok(())
}
