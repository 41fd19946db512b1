use bubble_bs::american::{capped_vol_american, solve_american, solve_bermudan, stopped_american, LCPConfig};
use bubble_bs::grid::Grid1D;
use bubble_bs::pde::{solve_capped, SolveConfig};
use bubble_bs::surface::read_node_csv;
use bubble_bs::{MarketSpec, Payoff, VolModel};

fn grid() -> Grid1D {
    Grid1D::uniform(20.0, 201, 100).unwrap()
}

fn bubble(sigma: f64, rate: f64) -> MarketSpec {
    MarketSpec::new(VolModel::power(sigma, 2.0).unwrap(), rate, 1.0).unwrap()
}

#[test]
fn value_dominates_payoff_and_mask_marks_expiry() {
    let put = Payoff::put(1.0).unwrap();
    let a = solve_american(&bubble(1.0, 0.05), &put, &grid(), &LCPConfig::default()).unwrap();
    assert!(a.obstacle_gap() >= -1e-9);
    let last = a.surface.ts.len() - 1;
    for (i, &x) in a.surface.xs.iter().enumerate() {
        if put.eval(x) > 0.0 {
            assert!(a.exercised[i][last], "x = {x}");
        }
    }
}

#[test]
fn no_premium_for_call_on_a_true_martingale() {
    let gbm = MarketSpec::zero_rate(VolModel::gbm(0.2).unwrap(), 1.0).unwrap();
    let g = Grid1D::uniform(400.0, 801, 200).unwrap();
    let call = Payoff::call(100.0).unwrap();
    let a = solve_american(&gbm, &call, &g, &LCPConfig::default()).unwrap();
    let config = SolveConfig::default().with_scheme(bubble_bs::Scheme::ImplicitEuler);
    let e = solve_capped(&gbm, &call, 1e6, &g, &config).unwrap();
    assert!((a.surface.price(100.0) - e.price(100.0)).abs() < 1e-6);
}

#[test]
fn bermudan_values_rise_with_dates() {
    let put = Payoff::put(1.0).unwrap();
    let market = bubble(1.0, 0.05);
    let cfg = LCPConfig::default();
    let mut prev = 0.0;
    for k in [1, 2, 4, 8, 16] {
        let u = solve_bermudan(&market, &put, k, &grid(), &cfg).unwrap().surface.price(0.5);
        assert!(u >= prev - 1e-9, "k = {k}: {u} < {prev}");
        prev = u;
    }
    let american = solve_american(&market, &put, &grid(), &cfg).unwrap().surface.price(0.5);
    assert!(prev <= american + 1e-9);
    assert!(american - prev < 2e-3);
}

#[test]
fn american_call_increases_in_volatility() {
    let call = Payoff::call(1.0).unwrap();
    let cfg = LCPConfig::default();
    let lo = solve_american(&bubble(0.5, 0.0), &call, &grid(), &cfg).unwrap();
    let hi = solve_american(&bubble(1.0, 0.0), &call, &grid(), &cfg).unwrap();
    for (a, b) in lo.surface.values.iter().zip(&hi.surface.values) {
        for (u, v) in a.iter().zip(b) {
            assert!(*v >= u - 1e-9);
        }
    }
}

#[test]
fn uncapped_volatility_matches_plain_solve() {
    let gbm = MarketSpec::zero_rate(VolModel::gbm(0.3).unwrap(), 1.0).unwrap();
    let call = Payoff::call(1.0).unwrap();
    let cfg = LCPConfig::default();
    let plain = solve_american(&gbm, &call, &grid(), &cfg).unwrap();
    let capped = capped_vol_american(&gbm, &call, 1e3, 0.0, &grid(), &cfg).unwrap();
    assert_eq!(plain.surface.values, capped.surface.values);
}

#[test]
fn stopped_at_grid_edge_matches_full_put() {
    let put = Payoff::put(1.0).unwrap();
    let cfg = LCPConfig::default();
    let market = bubble(1.0, 0.0);
    let full = solve_american(&market, &put, &grid(), &cfg).unwrap();
    let stopped = stopped_american(&market, &put, 20.0, &grid(), &cfg).unwrap();
    // Only the far-field rule differs (forced exercise vs zero slope).
    assert!((full.surface.price(1.0) - stopped.surface.price(1.0)).abs() < 2e-2);
    assert!(stopped.surface.price(1.0) <= full.surface.price(1.0) + 1e-9);
}

#[test]
fn level_beyond_grid_is_rejected() {
    let r = stopped_american(&bubble(1.0, 0.0), &Payoff::put(1.0).unwrap(), 50.0, &grid(), &LCPConfig::default());
    assert!(r.is_err());
}

#[test]
fn exercise_mask_round_trip() {
    let a = solve_american(&bubble(1.0, 0.05), &Payoff::put(1.0).unwrap(), &grid(), &LCPConfig::default()).unwrap();
    let mut buf = Vec::new();
    a.write_exercise_csv(&mut buf).unwrap();
    let table = read_node_csv(buf.as_slice()).unwrap();
    assert_eq!(table.column, "exercised");
    for (row, mask) in table.cells.iter().zip(&a.exercised) {
        for (c, &m) in row.iter().zip(mask) {
            assert_eq!(c == "1" || c == "true", m, "cell {c}");
        }
    }
}
