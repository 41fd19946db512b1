// The smallest nonnegative solution of the pricing equation, reached by
// capping the payoff at M and letting M grow.

use bubble_bs::closed_form::price_x2;
use bubble_bs::pde::{solve_minimal, CapSchedule, GridPolicy, SolveConfig};
use bubble_bs::{MarketSpec, Payoff, VolModel};

pub fn run_example() -> bubble_bs::Result<()> {
    let market = MarketSpec::zero_rate(VolModel::power(1.0, 2.0)?, 1.0)?;
    let (surface, report) = solve_minimal(
        &market,
        &Payoff::Identity,
        &GridPolicy::default(),
        &CapSchedule::default(),
        &SolveConfig::default(),
    )?;
    for (cap, diff) in report.caps[1..].iter().zip(&report.sup_diffs) {
        println!("M = {cap:>5}: sup change on the window {diff:.2e}");
    }
    for x in [0.5, 1.0, 2.0, 5.0] {
        let exact = price_x2(x, 1.0, 1.0);
        println!("u({x}, 0) = {:.6}   closed form {exact:.6}", surface.price(x));
    }
    if let Some(path) = std::env::args().nth(1) {
        surface.save_csv(&path)?;
        println!("surface written to {path}");
    }
    Ok(())
}

fn main() -> bubble_bs::Result<()> {
    run_example()
}
