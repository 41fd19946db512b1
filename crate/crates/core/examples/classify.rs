// Martingale classification of several volatility models.

use bubble_bs::classify::{classify_martingale, Probe};
use bubble_bs::VolModel;

pub fn run_example() -> bubble_bs::Result<()> {
    let models = [
        ("sigma x^2", VolModel::power(1.0, 2.0)?),
        ("sigma x^1.5", VolModel::power(1.0, 1.5)?),
        ("gbm", VolModel::gbm(0.2)?),
        ("sigma x ln x", VolModel::power_log(1.0)?),
        ("tabulated", VolModel::tabulated(vec![(1.0, 1.0), (10.0, 100.0), (100.0, 10_000.0)], 2.0)?),
    ];
    for (name, model) in &models {
        let v = classify_martingale(model, &Probe::default())?;
        println!(
            "{name:>14}: {:<24} eta {:.3} eps {:.3}",
            v.verdict.as_str(),
            v.evidence.fitted_eta,
            v.evidence.fitted_eps
        );
    }
    Ok(())
}

fn main() -> bubble_bs::Result<()> {
    run_example()
}
