// Put-call parity fails by the martingale defect, whatever the strike.

use bubble_bs::analysis::{parity_gap_x2, ParityRoute, SolveInputs};
use bubble_bs::mc::PathConfig;

pub fn run_example() -> bubble_bs::Result<()> {
    let pde = ParityRoute::Pde(SolveInputs::default());
    let mc = ParityRoute::MonteCarlo(PathConfig::exact(100_000, 42));
    for k in [0.5, 1.0, 2.0] {
        let a = parity_gap_x2(1.0, k, 1.0, 1.0, &pde)?;
        let b = parity_gap_x2(1.0, k, 1.0, 1.0, &mc)?;
        println!(
            "K = {k}: C = {:.4}, P = {:.4}, gap {:.5} (MC {:.5} ± {:.5})",
            a.call, a.put, a.gap, b.gap, b.stderr
        );
    }
    Ok(())
}

fn main() -> bubble_bs::Result<()> {
    run_example()
}
