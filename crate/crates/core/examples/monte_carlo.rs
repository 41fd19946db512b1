// Exact sampling for the quadratic model, the martingale defect, and
// absorbed Euler paths for GBM.

use bubble_bs::closed_form::price_x2;
use bubble_bs::mc::{estimate_price, martingale_defect, simulate_terminal, PathConfig};
use bubble_bs::{MarketSpec, Payoff, VolModel};

pub fn run_example() -> bubble_bs::Result<()> {
    let bubble = MarketSpec::zero_rate(VolModel::power(1.0, 2.0)?, 1.0)?;
    let samples = simulate_terminal(&bubble, 1.0, &PathConfig::exact(100_000, 42))?;
    let est = estimate_price(&samples, &Payoff::Identity)?;
    println!(
        "E X(1) = {:.5} ± {:.5} (closed form {:.5})",
        est.mean,
        est.stderr,
        price_x2(1.0, 1.0, 1.0)
    );
    let d = martingale_defect(&bubble, 1.0, 1.0, &PathConfig::exact(100_000, 43))?;
    println!("defect = {:.5} ± {:.5}", d.mean, d.stderr);

    let gbm = MarketSpec::zero_rate(VolModel::gbm(0.2)?, 1.0)?;
    let g = martingale_defect(&gbm, 1.0, 1.0, &PathConfig::euler(50_000, 100, 42))?;
    println!("GBM defect = {:.5} ± {:.5}", g.mean, g.stderr);

    let barrier = PathConfig {
        upper_barrier: Some(2.0),
        ..PathConfig::euler(50_000, 200, 42)
    };
    let capped = estimate_price(&simulate_terminal(&bubble, 1.0, &barrier)?, &Payoff::Identity)?;
    println!("stopped at 2: E X = {:.5} ± {:.5}", capped.mean, capped.stderr);
    Ok(())
}

fn main() -> bubble_bs::Result<()> {
    run_example()
}
