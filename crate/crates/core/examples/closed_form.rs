// Closed forms for `dX = σX² dW`: price, terminal density, gamma and the
// large-x limit.

use bubble_bs::closed_form::{density_x2, gamma_x2, price_x2, price_x2_limit};

pub fn run_example() -> bubble_bs::Result<()> {
    let (tau, sigma) = (1.0, 1.0);
    println!("{:>8} {:>10} {:>10} {:>10}", "x", "E X(T)", "defect", "u_xx");
    for x in [0.25, 0.5, 1.0, 2.0, 5.0, 100.0] {
        let u = price_x2(x, tau, sigma);
        println!("{x:>8} {u:>10.6} {:>10.6} {:>10.6}", x - u, gamma_x2(x, tau, sigma));
    }
    println!("limit as x -> inf: {:.6}", price_x2_limit(tau, sigma));

    // Terminal law from x = 1: it integrates to 1 but its mean falls short of 1.
    let n = 200_000;
    let (lo, hi) = (1e-4_f64.ln(), 1e4_f64.ln());
    let h = (hi - lo) / n as f64;
    let (mut mass, mut mean) = (0.0, 0.0);
    for k in 0..n {
        let y = (lo + (k as f64 + 0.5) * h).exp();
        let w = density_x2(1.0, tau, sigma, y) * y * h;
        mass += w;
        mean += w * y;
    }
    println!("density mass {mass:.6}, mean {mean:.6}");
    assert!((mean - price_x2(1.0, tau, sigma)).abs() < 1e-4);
    Ok(())
}

fn main() -> bubble_bs::Result<()> {
    run_example()
}
