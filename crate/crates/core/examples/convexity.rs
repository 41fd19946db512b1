// Shape of prices in x and their ordering in volatility.

use bubble_bs::analysis::{convexity_profile_in, grid_tolerance_in, vol_monotonicity, SolveInputs};
use bubble_bs::pde::solve_minimal;
use bubble_bs::{MarketSpec, Payoff, VolModel};

pub fn run_example() -> bubble_bs::Result<()> {
    let inputs = SolveInputs::default();
    let window = (0.0, 5.0);
    for (name, model, payoff) in [
        ("x under sigma x^2", VolModel::power(1.0, 2.0)?, Payoff::Identity),
        ("call under sigma x^2", VolModel::power(1.0, 2.0)?, Payoff::call(1.0)?),
        ("call under gbm", VolModel::gbm(0.3)?, Payoff::call(1.0)?),
    ] {
        let market = MarketSpec::zero_rate(model, 1.0)?;
        let (s, _) = solve_minimal(&market, &payoff, &inputs.policy, &inputs.schedule, &inputs.config)?;
        let v = convexity_profile_in(&s, 0, grid_tolerance_in(&s, 0, window), window)?;
        println!("{name:>22}: {} at t = 0", v.verdict.as_str());
    }

    let id = vol_monotonicity(
        &VolModel::power(0.5, 2.0)?,
        &VolModel::power(1.0, 2.0)?,
        &Payoff::Identity,
        1.0,
        &inputs,
    )?;
    println!("identity, sigma 0.5 vs 1: {} (worst gap {:.1e})", id.direction, id.worst_gap);
    let put = vol_monotonicity(&VolModel::gbm(0.1)?, &VolModel::gbm(0.3)?, &Payoff::put(1.0)?, 1.0, &inputs)?;
    println!("put, gbm 0.1 vs 0.3: {} (worst gap {:.1e})", put.direction, put.worst_gap);
    Ok(())
}

fn main() -> bubble_bs::Result<()> {
    run_example()
}
