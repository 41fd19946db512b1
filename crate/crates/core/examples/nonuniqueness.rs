// A nonzero solution with zero terminal and boundary data, and the
// solution picked by pinning the far boundary to the payoff.

use bubble_bs::grid::Grid1D;
use bubble_bs::pde::{
    nonuniqueness_family, pde_residual, solve_minimal, solve_uncapped, CapSchedule, GridPolicy, SolveConfig,
};
use bubble_bs::{FarBoundary, MarketSpec, Payoff, VolModel};

pub fn run_example() -> bubble_bs::Result<()> {
    let model = VolModel::power(1.0, 2.0)?;
    for n in [101, 201, 401] {
        let grid = Grid1D::uniform(10.0, n, n)?;
        let v = nonuniqueness_family(1.0, 1.0, 1.0, &grid)?;
        let r = pde_residual(&v, &model)?.sup_norm_in(&v, (0.0, 5.0), (0.0, 0.75));
        println!("n = {n}: v(1, 0) = {:.6}, residual {r:.2e}", v.price(1.0));
    }

    let market = MarketSpec::zero_rate(model, 1.0)?;
    let policy = GridPolicy::default();
    let (minimal, _) = solve_minimal(&market, &Payoff::Identity, &policy, &CapSchedule::default(), &SolveConfig::default())?;
    let grid = policy.grid_for(&Payoff::Identity, 512.0)?;
    let pinned = solve_uncapped(
        &market,
        &Payoff::Identity,
        &grid,
        &SolveConfig::default().with_far_boundary(FarBoundary::PinnedPayoff),
    )?;
    for x in [0.5, 1.0, 2.0] {
        println!("x = {x}: minimal {:.4}, pinned {:.4}", minimal.price(x), pinned.price(x));
    }
    Ok(())
}

fn main() -> bubble_bs::Result<()> {
    run_example()
}
