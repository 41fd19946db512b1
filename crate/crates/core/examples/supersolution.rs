// A supersolution certificate for the quadratic model and its failure
// under GBM.

use bubble_bs::supersolution::{default_params, supersolution_h, verify_supersolution, CheckGrid};
use bubble_bs::VolModel;

pub fn run_example() -> bubble_bs::Result<()> {
    let model = VolModel::power(1.0, 2.0)?;
    let grid = CheckGrid::new((0.0, 100.0), (0.0, 1.0), 401, 201);
    let params = default_params(&model, 0.5, 1.0, &grid)?;
    println!("beta {}, m {}, M {:.3}", params.beta, params.m, params.big_m);
    for x in [0.0, 1.0, 10.0, 100.0] {
        println!("h({x}, 1) = {:.4}", supersolution_h(x, 1.0, &params));
    }
    let ok = verify_supersolution(&model, &params, &grid);
    println!("sigma x^2: {} failing of {}", ok.failing_points.len(), ok.n_checked);
    let gbm = verify_supersolution(&VolModel::gbm(0.2)?, &params, &grid);
    println!("gbm: {} failing of {}", gbm.failing_points.len(), gbm.n_checked);
    Ok(())
}

fn main() -> bubble_bs::Result<()> {
    run_example()
}
