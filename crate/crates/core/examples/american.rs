// American and Bermudan values by projected SOR, plus the capped-volatility
// and stopped approximations.

use bubble_bs::american::{capped_vol_american, solve_american, solve_bermudan, stopped_american, LCPConfig};
use bubble_bs::grid::Grid1D;
use bubble_bs::{MarketSpec, Payoff, VolModel};

pub fn run_example() -> bubble_bs::Result<()> {
    let market = MarketSpec::zero_rate(VolModel::power(1.0, 2.0)?, 1.0)?;
    let grid = Grid1D::uniform(20.0, 401, 200)?;
    let cfg = LCPConfig::default();

    for (name, g) in [("identity", Payoff::Identity), ("call", Payoff::call(1.0)?), ("put", Payoff::put(1.0)?)] {
        let a = solve_american(&market, &g, &grid, &cfg)?;
        println!("{name:>8}: U(1, 0) = {:.4}", a.surface.price(1.0));
    }

    // Early exercise only pays once money earns interest.
    let rate = MarketSpec::new(VolModel::power(1.0, 2.0)?, 0.05, 1.0)?;
    let put = Payoff::put(1.0)?;
    for k in [1, 2, 4, 8, 16] {
        let b = solve_bermudan(&rate, &put, k, &grid, &cfg)?;
        println!("bermudan put k = {k:>2}: U(0.5, 0) = {:.5}", b.surface.price(0.5));
    }
    let a = solve_american(&rate, &put, &grid, &cfg)?;
    println!("american put:        U(0.5, 0) = {:.5}", a.surface.price(0.5));

    for m in [5.0, 10.0, 20.0] {
        let c = capped_vol_american(&market, &Payoff::call(1.0)?, m, 0.1, &grid, &cfg)?;
        let s = stopped_american(&market, &Payoff::put(1.0)?, m, &grid, &cfg)?;
        println!(
            "M = {m:>4}: capped-vol call {:.4}, stopped put {:.4}",
            c.surface.price(1.0),
            s.surface.price(1.0)
        );
    }

    let concave = solve_american(&rate, &Payoff::min_with(1.0)?, &grid, &cfg)?;
    println!("min(x, 1) at r = 0.05: U - g >= {:.1e}", concave.obstacle_gap());
    Ok(())
}

fn main() -> bubble_bs::Result<()> {
    run_example()
}
