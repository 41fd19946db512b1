//! Batch front end: `bubble-bs <command> [--config FILE] [overrides]`.
//!
//! Every command prints one JSON envelope on stdout with the fields
//! `command`, `inputs`, `scalars`, `artifacts`, `wall_ms` and `version`.
//! Artifacts (CSV) are written only when an output directory is configured.
//! Exit status is 0 on success, 2 for configuration errors and 3 for numeric
//! failures.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::american::{solve_american, solve_bermudan};
use crate::analysis::{
    convexity_profile, convexity_profile_in, grid_tolerance, grid_tolerance_in, parity_gap, vol_monotonicity, ParityRoute, Shape,
    SolveInputs,
};
use crate::classify::{classify_martingale, Probe};
use crate::closed_form::price_x2;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::mc::{estimate_price, exact_sample_x2, martingale_defect, simulate_terminal, PathConfig, TerminalSamples};
use crate::model::Payoff;
use crate::pde::{nonuniqueness_family, pde_residual, solve_minimal, solve_uncapped, SolveConfig};
use crate::supersolution::{default_params, verify_supersolution, CheckGrid, SupersolutionParams};
use crate::surface::{FarBoundary, PriceSurface};

#[derive(Debug, Parser)]
#[command(name = "bubble-bs", version, about = "Option pricing under strict local martingale models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command. Overrides win over the config file.
#[derive(Debug, Clone, Default, Args)]
struct Common {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for CSV artifacts.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Volatility family: power, gbm, power-log, tabulated.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rate: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    horizon: Option<f64>,
    /// Payoff kind: identity, call, put, capped-call, constant, min, piecewise-linear.
    #[arg(long)]
    payoff: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    strike: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
struct McArgs {
    /// Starting point of the paths (default `mc.x0`).
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// exact or euler.
    #[arg(long)]
    scheme: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// European price by the capped-payoff minimal solution.
    PriceEuro {
        #[command(flatten)]
        common: Common,
    },
    /// American (or Bermudan) price by projected SOR.
    PriceAmer {
        #[command(flatten)]
        common: Common,
        /// Exercise only at k equally spaced dates.
        #[arg(long)]
        bermudan: Option<usize>,
    },
    /// Monte Carlo price of the configured payoff.
    Mc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Monte Carlo martingale defect `x0 − E X(T)`.
    Defect {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Strict local martingale or true martingale.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// The zero-data solution family and the pinned-boundary solve.
    Nonunique {
        #[command(flatten)]
        common: Common,
        /// Expiry of the family member (default: the horizon).
        #[arg(long)]
        t_tilde: Option<f64>,
    },
    /// Price monotonicity across a list of volatility levels.
    SweepVol {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1.0")]
        sigmas: Vec<f64>,
    },
    /// Convexity verdict for every time slice of the minimal solution.
    Shape {
        #[command(flatten)]
        common: Common,
    },
    /// Put-call parity gap `C − P − (x0 − K)`.
    Parity {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        strikes: Vec<f64>,
        /// Price with Monte Carlo instead of the PDE.
        #[arg(long)]
        mc: bool,
        #[command(flatten)]
        paths: McArgs,
    },
    /// Check the supersolution inequality on a grid.
    VerifySupersolution {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        /// Exponent m; derived from the model when omitted.
        #[arg(long)]
        m: Option<f64>,
        /// Constant M; derived from the model when omitted.
        #[arg(long)]
        big_m: Option<f64>,
        #[arg(long, default_value_t = 100.0)]
        x_max: f64,
    },
    /// Closed form vs PDE vs Monte Carlo, concavity, nonuniqueness and defect
    /// for the quadratic model, with a summary table on stderr.
    ReproducePaper {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::PriceEuro { .. } => "price-euro",
            Command::PriceAmer { .. } => "price-amer",
            Command::Mc { .. } => "mc",
            Command::Defect { .. } => "defect",
            Command::Classify { .. } => "classify",
            Command::Nonunique { .. } => "nonunique",
            Command::SweepVol { .. } => "sweep-vol",
            Command::Shape { .. } => "shape",
            Command::Parity { .. } => "parity",
            Command::VerifySupersolution { .. } => "verify-supersolution",
            Command::ReproducePaper { .. } => "reproduce-paper",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::PriceEuro { common }
            | Command::PriceAmer { common, .. }
            | Command::Mc { common, .. }
            | Command::Defect { common, .. }
            | Command::Classify { common }
            | Command::Nonunique { common, .. }
            | Command::SweepVol { common, .. }
            | Command::Shape { common }
            | Command::Parity { common, .. }
            | Command::VerifySupersolution { common, .. }
            | Command::ReproducePaper { common } => common,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ScalarValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scalar {
    pub value: ScalarValue,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    /// Units or definition.
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultEnvelope {
    pub command: String,
    pub inputs: Value,
    pub scalars: BTreeMap<String, Scalar>,
    pub artifacts: Vec<String>,
    pub wall_ms: u64,
    pub version: String,
}

/// Collects a command's outputs.
struct Run {
    cfg: RunConfig,
    options: serde_json::Map<String, Value>,
    scalars: BTreeMap<String, Scalar>,
    artifacts: Vec<String>,
}

impl Run {
    fn num(&mut self, key: impl Into<String>, value: f64, note: &str) {
        self.scalars.insert(
            key.into(),
            Scalar {
                value: ScalarValue::Number(value),
                stderr: None,
                note: note.into(),
            },
        );
    }

    fn est(&mut self, key: impl Into<String>, value: f64, stderr: f64, note: &str) {
        self.scalars.insert(
            key.into(),
            Scalar {
                value: ScalarValue::Number(value),
                stderr: Some(stderr),
                note: note.into(),
            },
        );
    }

    fn text(&mut self, key: impl Into<String>, value: &str, note: &str) {
        self.scalars.insert(
            key.into(),
            Scalar {
                value: ScalarValue::Text(value.into()),
                stderr: None,
                note: note.into(),
            },
        );
    }

    fn option(&mut self, key: &str, value: impl Serialize) {
        self.options
            .insert(key.into(), serde_json::to_value(value).expect("option serialises"));
    }

    fn out_path(&self, name: &str) -> Result<Option<PathBuf>> {
        match &self.cfg.output.dir {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                Ok(Some(dir.join(name)))
            }
            None => Ok(None),
        }
    }

    fn artifact(&mut self, name: &str, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
        if let Some(path) = self.out_path(name)? {
            write(&path)?;
            self.artifacts.push(path.display().to_string());
        }
        Ok(())
    }

    fn surface(&mut self, name: &str, s: &PriceSurface) -> Result<()> {
        self.artifact(name, |p| s.save_csv(p))
    }

    fn probes(&self) -> Vec<f64> {
        self.cfg.output.probes.clone()
    }
}

fn build_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &common.out_dir {
        cfg.output.dir = Some(v.clone());
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = &common.model {
        cfg.market.family = v.clone();
    }
    if let Some(v) = common.sigma {
        cfg.market.sigma = v;
    }
    if let Some(v) = common.p {
        cfg.market.p = v;
    }
    if let Some(v) = common.rate {
        cfg.market.rate = v;
    }
    if let Some(v) = common.horizon {
        cfg.market.horizon = v;
    }
    if let Some(v) = &common.payoff {
        cfg.payoff.kind = v.clone();
    }
    if let Some(v) = common.strike {
        cfg.payoff.strike = v;
    }
    if let Some(v) = common.nx {
        cfg.grid.nx = v;
    }
    if let Some(v) = common.nt {
        cfg.grid.nt = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn apply_mc(cfg: &mut RunConfig, mc: &McArgs) -> Result<()> {
    if let Some(v) = mc.x0 {
        cfg.mc.x0 = v;
    }
    if let Some(v) = mc.paths {
        cfg.mc.n_paths = v;
    }
    if let Some(v) = mc.steps {
        cfg.mc.n_steps = v;
    }
    if let Some(v) = &mc.scheme {
        cfg.mc.scheme = v.clone();
    }
    cfg.validate()
}

fn solve_inputs(cfg: &RunConfig) -> Result<SolveInputs> {
    Ok(SolveInputs {
        policy: cfg.policy(),
        schedule: cfg.schedule()?,
        config: cfg.solve_config()?,
    })
}

fn minimal(cfg: &RunConfig) -> Result<(PriceSurface, crate::pde::ConvergenceReport)> {
    let inputs = solve_inputs(cfg)?;
    solve_minimal(&cfg.market()?, &cfg.payoff()?, &inputs.policy, &inputs.schedule, &inputs.config)
}

/// Parses `argv` (program name first), runs the command and returns its
/// envelope without printing it. Parse failures come back as config errors.
pub fn run<I, T>(argv: I) -> Result<ResultEnvelope>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Config(e.to_string()))?;
    execute(cli.command)
}

/// Entry point of the binary. Prints the envelope, returns the exit status.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(env) => {
            let mut out = std::io::stdout().lock();
            let text = serde_json::to_string_pretty(&env).expect("envelope serialises");
            if writeln!(out, "{text}").is_err() {
                return 2;
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<ResultEnvelope> {
    let start = Instant::now();
    let name = command.name();
    let cfg = build_config(command.common())?;
    let mut run = Run {
        cfg,
        options: serde_json::Map::new(),
        scalars: BTreeMap::new(),
        artifacts: Vec::new(),
    };
    match &command {
        Command::PriceEuro { .. } => price_euro(&mut run)?,
        Command::PriceAmer { bermudan, .. } => price_amer(&mut run, *bermudan)?,
        Command::Mc { mc, .. } => monte_carlo(&mut run, mc)?,
        Command::Defect { mc, .. } => defect(&mut run, mc)?,
        Command::Classify { .. } => classify(&mut run)?,
        Command::Nonunique { t_tilde, .. } => nonunique(&mut run, *t_tilde)?,
        Command::SweepVol { sigmas, .. } => sweep_vol(&mut run, sigmas)?,
        Command::Shape { .. } => shape(&mut run)?,
        Command::Parity { strikes, mc, paths, .. } => parity(&mut run, strikes, *mc, paths)?,
        Command::VerifySupersolution {
            beta, m, big_m, x_max, ..
        } => supersolution(&mut run, *beta, *m, *big_m, *x_max)?,
        Command::ReproducePaper { .. } => reproduce(&mut run)?,
    }
    let mut inputs = serde_json::to_value(&run.cfg).expect("config serialises");
    inputs["options"] = Value::Object(run.options);
    Ok(ResultEnvelope {
        command: name.into(),
        inputs,
        scalars: run.scalars,
        artifacts: run.artifacts,
        wall_ms: start.elapsed().as_millis() as u64,
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

fn price_euro(run: &mut Run) -> Result<()> {
    let (surface, report) = minimal(&run.cfg)?;
    for x in run.probes() {
        run.num(format!("price(x={x})"), surface.price(x), "u(x, 0), minimal solution, payoff units");
    }
    run.num("cap_rounds", report.rounds() as f64, "cap refinements after M0");
    run.num(
        "final_cap",
        *report.caps.last().unwrap(),
        "largest cap M used, payoff units",
    );
    run.num(
        "final_sup_diff",
        report.sup_diffs.last().copied().unwrap_or(f64::NAN),
        "sup |u_M - u_{M/g}| on [0, x_report] x [0, T]",
    );
    run.num(
        "monotonicity_violation",
        report.monotonicity_violation(),
        "largest decrease of u between successive caps",
    );
    run.surface("surface.csv", &surface)
}

fn price_amer(run: &mut Run, bermudan: Option<usize>) -> Result<()> {
    let market = run.cfg.market()?;
    let payoff = run.cfg.payoff()?;
    let grid = run.cfg.american_grid()?;
    let lcp = run.cfg.lcp()?;
    run.option("bermudan", bermudan);
    let amer = match bermudan {
        Some(k) => solve_bermudan(&market, &payoff, k, &grid, &lcp)?,
        None => solve_american(&market, &payoff, &grid, &lcp)?,
    };
    for x in run.probes() {
        run.num(format!("price(x={x})"), amer.surface.price(x), "U(x, 0), payoff units");
    }
    let exercised = amer.exercised.iter().filter(|r| r[0]).count() as f64 / amer.exercised.len() as f64;
    run.num("exercised_fraction_t0", exercised, "share of nodes in the exercise region at t = 0");
    run.num("obstacle_gap", amer.obstacle_gap(), "min over nodes of U - g");
    run.surface("surface.csv", &amer.surface)?;
    run.artifact("exercise.csv", |p| amer.save_exercise_csv(p))
}

fn monte_carlo(run: &mut Run, mc: &McArgs) -> Result<()> {
    apply_mc(&mut run.cfg, mc)?;
    let market = run.cfg.market()?;
    let payoff = run.cfg.payoff()?;
    let config = run.cfg.path_config()?;
    let x0 = run.cfg.mc.x0;
    let samples = simulate_terminal(&market, x0, &config)?;
    let est = estimate_price(&samples, &payoff)?;
    run.est("price", est.mean, est.stderr, "sample mean of discounted g(X(T)), payoff units");
    run.num("n", est.n as f64, "paths");
    run.num("absorbed_fraction", est.absorbed_fraction, "share of paths absorbed at 0");
    run.text("clamped", if est.clamped { "yes" } else { "no" }, "any Euler increment hit the clamp");
    if let (Some(sigma), Payoff::Identity) = (market.vol.quadratic_sigma(), &payoff) {
        run.num("closed_form", price_x2(x0, market.horizon, sigma), "E X(T) in closed form");
    }
    run.artifact("samples.csv", |p| samples.save_csv(p))
}

fn defect(run: &mut Run, mc: &McArgs) -> Result<()> {
    apply_mc(&mut run.cfg, mc)?;
    let market = run.cfg.market()?;
    let config = run.cfg.path_config()?;
    let x0 = run.cfg.mc.x0;
    let est = martingale_defect(&market, x0, market.horizon, &config)?;
    run.est("defect", est.mean, est.stderr, "x0 - E X(T), price units");
    run.num("absorbed_fraction", est.absorbed_fraction, "share of paths absorbed at 0");
    if let Some(sigma) = market.vol.quadratic_sigma() {
        run.num(
            "closed_form",
            x0 - price_x2(x0, market.horizon, sigma),
            "x0 - E X(T) in closed form",
        );
    }
    Ok(())
}

fn classify(run: &mut Run) -> Result<()> {
    let v = classify_martingale(&run.cfg.vol()?, &Probe::default())?;
    run.text("verdict", v.verdict.as_str(), "martingale classification of the price process");
    run.num("fitted_eta", v.evidence.fitted_eta, "log-log slope of alpha on the upper probe range");
    run.num("fitted_eps", v.evidence.fitted_eps, "alpha(x) >= eps x^eta fitted on the probe range");
    run.num("linear_growth_c", v.evidence.linear_growth_c, "max alpha(x) / (1 + x) on the probe range");
    Ok(())
}

fn nonunique(run: &mut Run, t_tilde: Option<f64>) -> Result<()> {
    let market = run.cfg.market()?;
    let sigma = market
        .vol
        .quadratic_sigma()
        .ok_or_else(|| Error::Config("market.family: nonunique needs power with p = 2".into()))?;
    let horizon = market.horizon;
    let t_tilde = t_tilde.unwrap_or(horizon);
    run.option("t_tilde", t_tilde);
    let (x_report, nx, nt) = (run.cfg.grid.x_report, run.cfg.grid.nx, run.cfg.grid.nt);
    let grid = Grid1D::uniform(4.0 * x_report, nx.min(401), nt.min(401))?;
    let v = nonuniqueness_family(sigma, t_tilde, horizon, &grid)?;
    for x in run.probes() {
        run.num(format!("v(x={x})"), v.price(x), "x - E X(T~) at t = 0, a solution with zero data");
    }
    let residual = pde_residual(&v, &market.vol)?;
    run.num(
        "residual_sup",
        residual.sup_norm_in(&v, (0.0, x_report), (0.0, 0.75 * t_tilde)),
        "sup |u_t + alpha^2 u_xx / 2| of the sampled family on [0, x_report] x [0, 0.75 T~]",
    );
    run.surface("family.csv", &v)?;

    let payoff = run.cfg.payoff()?;
    let (minimal, _) = minimal(&run.cfg)?;
    let schedule = run.cfg.schedule()?;
    let pgrid = run.cfg.policy().grid_for(&payoff, *schedule.caps().last().unwrap())?;
    let pinned = solve_uncapped(
        &market,
        &payoff,
        &pgrid,
        &SolveConfig {
            far_boundary: FarBoundary::PinnedPayoff,
            ..run.cfg.solve_config()?
        },
    )?;
    for x in run.probes() {
        run.num(
            format!("pinned_gap(x={x})"),
            pinned.price(x) - minimal.price(x),
            "pinned-boundary solve minus minimal solution at t = 0",
        );
    }
    run.surface("pinned.csv", &pinned)
}

fn sweep_vol(run: &mut Run, sigmas: &[f64]) -> Result<()> {
    if sigmas.len() < 2 || sigmas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("sigmas: need at least two increasing values".into()));
    }
    run.option("sigmas", sigmas);
    let inputs = solve_inputs(&run.cfg)?;
    let payoff = run.cfg.payoff()?;
    let horizon = run.cfg.market.horizon;
    let models = sigmas
        .iter()
        .map(|&s| {
            let mut c = run.cfg.clone();
            c.market.sigma = s;
            c.vol()
        })
        .collect::<Result<Vec<_>>>()?;
    for (k, pair) in models.windows(2).enumerate() {
        let rep = vol_monotonicity(&pair[0], &pair[1], &payoff, horizon, &inputs)?;
        let (lo, hi) = (sigmas[k], sigmas[k + 1]);
        run.num(
            format!("worst_gap(sigma={lo}->{hi})"),
            rep.worst_gap,
            "min over nodes of the predicted-ordering difference; negative breaks monotonicity",
        );
        run.text(format!("direction(sigma={lo}->{hi})"), &rep.direction, "predicted ordering");
        for x in run.probes() {
            if k == 0 {
                run.num(format!("price(sigma={lo},x={x})"), rep.lo.price(x), "u(x, 0), payoff units");
            }
            run.num(format!("price(sigma={hi},x={x})"), rep.hi.price(x), "u(x, 0), payoff units");
        }
    }
    Ok(())
}

fn shape(run: &mut Run) -> Result<()> {
    let (surface, _) = minimal(&run.cfg)?;
    let nt = surface.ts.len();
    let window = (0.0, run.cfg.grid.x_report);
    // The last two steps sit in the terminal layer, where the payoff kink
    // has not yet been smoothed.
    let mut rows = Vec::with_capacity(nt - 2);
    let mut counts = BTreeMap::new();
    for j in 0..nt - 2 {
        let v = convexity_profile_in(&surface, j, grid_tolerance_in(&surface, j, window), window)?;
        *counts.entry(v.verdict.as_str()).or_insert(0usize) += 1;
        rows.push((surface.ts[j], v));
    }
    for s in [Shape::Convex, Shape::Concave, Shape::Linear, Shape::Mixed] {
        let n = counts.get(s.as_str()).copied().unwrap_or(0);
        run.num(format!("slices_{}", s.as_str()), n as f64, "time slices with this verdict on [0, x_report]");
    }
    run.text("shape(t=0)", rows[0].1.verdict.as_str(), "verdict of the t = 0 slice on [0, x_report]");
    run.num("worst_violation(t=0)", rows[0].1.worst_violation, "largest second difference against the verdict");
    let full = convexity_profile(&surface, 0, grid_tolerance(&surface, 0))?;
    run.text("shape_full_grid(t=0)", full.verdict.as_str(), "verdict at t = 0 over the whole grid");
    run.artifact("shape.csv", |p| {
        let mut out = std::io::BufWriter::new(fs::File::create(p)?);
        writeln!(out, "t,verdict,worst_violation,x,tol")?;
        for (t, v) in &rows {
            writeln!(
                out,
                "{t},{},{},{},{}",
                v.verdict.as_str(),
                v.worst_violation,
                surface.xs[v.location],
                v.tol
            )?;
        }
        out.flush()?;
        Ok(())
    })
}

fn parity(run: &mut Run, strikes: &[f64], mc: bool, paths: &McArgs) -> Result<()> {
    apply_mc(&mut run.cfg, paths)?;
    let market = run.cfg.market()?;
    let x0 = run.cfg.mc.x0;
    run.option("strikes", strikes);
    run.option("x0", x0);
    run.option("route", if mc { "mc" } else { "pde" });
    let route = if mc {
        ParityRoute::MonteCarlo(run.cfg.path_config()?)
    } else {
        ParityRoute::Pde(solve_inputs(&run.cfg)?)
    };
    for &k in strikes {
        let g = parity_gap(&market, k, x0, &route)?;
        let note = "C - P - (x0 - K); zero when parity holds";
        if mc {
            run.est(format!("gap(K={k})"), g.gap, g.stderr, note);
        } else {
            run.num(format!("gap(K={k})"), g.gap, note);
        }
        run.num(format!("call(K={k})"), g.call, "call price at x0");
        run.num(format!("put(K={k})"), g.put, "put price at x0");
    }
    Ok(())
}

fn supersolution(run: &mut Run, beta: f64, m: Option<f64>, big_m: Option<f64>, x_max: f64) -> Result<()> {
    let vol = run.cfg.vol()?;
    let horizon = run.cfg.market.horizon;
    let grid = CheckGrid::new((0.0, x_max), (0.0, horizon), 401, 201);
    let params = match (m, big_m) {
        (Some(m), Some(big_m)) => SupersolutionParams::new(beta, m, big_m)?,
        (None, None) => default_params(&vol, beta, horizon, &grid)?,
        _ => return Err(Error::Config("m, big_m: give both or neither".into())),
    };
    run.option("beta", params.beta);
    run.option("m", params.m);
    run.option("big_m", params.big_m);
    run.option("x_max", x_max);
    let rep = verify_supersolution(&vol, &params, &grid);
    run.text("clean", if rep.is_clean() { "yes" } else { "no" }, "no grid point violates the inequality");
    run.num("failing_points", rep.failing_points.len() as f64, "grid points with negative residual");
    run.num("n_checked", rep.n_checked as f64, "grid points checked");
    run.num("min_residual", rep.min_residual, "min of the inequality residual over the grid");
    if !rep.failing_points.is_empty() {
        run.artifact("failing.csv", |p| {
            let mut out = std::io::BufWriter::new(fs::File::create(p)?);
            writeln!(out, "x,tau,residual")?;
            for (x, tau, r) in &rep.failing_points {
                writeln!(out, "{x},{tau},{r}")?;
            }
            out.flush()?;
            Ok(())
        })?;
    }
    Ok(())
}

fn reproduce(run: &mut Run) -> Result<()> {
    let market = run.cfg.market()?;
    let sigma = market
        .vol
        .quadratic_sigma()
        .ok_or_else(|| Error::Config("market.family: reproduce-paper needs power with p = 2".into()))?;
    let tau = market.horizon;
    run.cfg.payoff.kind = "identity".into();
    let (surface, report) = minimal(&run.cfg)?;
    let n = run.cfg.mc.n_paths;
    let seed = run.cfg.seed;

    let mut table = vec![format!(
        "{:>8} {:>12} {:>12} {:>12} {:>10}",
        "x", "closed form", "PDE", "MC", "MC stderr"
    )];
    let mut csv = String::from("x,closed_form,pde,mc,mc_stderr\n");
    for (k, x) in run.probes().into_iter().enumerate() {
        let exact = price_x2(x, tau, sigma);
        let pde = surface.price(x);
        let samples = TerminalSamples {
            values: exact_sample_x2(x, tau, sigma, n, seed.wrapping_add(k as u64))?,
            clamped: false,
        };
        let est = estimate_price(&samples, &Payoff::Identity)?;
        run.num(format!("closed_form(x={x})"), exact, "E X(T) in closed form");
        run.num(format!("pde(x={x})"), pde, "minimal PDE solution u(x, 0)");
        run.est(format!("mc(x={x})"), est.mean, est.stderr, "exact-sampler mean of X(T)");
        table.push(format!(
            "{x:>8} {exact:>12.6} {pde:>12.6} {:>12.6} {:>10.2e}",
            est.mean, est.stderr
        ));
        csv.push_str(&format!("{x},{exact},{pde},{},{}\n", est.mean, est.stderr));
    }

    let nt = surface.ts.len();
    let window = (0.0, run.cfg.grid.x_report);
    let mut concave = 0;
    for j in 0..nt - 2 {
        let v = convexity_profile_in(&surface, j, grid_tolerance_in(&surface, j, window), window)?;
        if v.verdict == Shape::Concave {
            concave += 1;
        }
    }
    run.num("concave_slices", concave as f64, "slices of the PDE surface concave on [0, x_report]");
    run.num("checked_slices", (nt - 2) as f64, "slices checked (terminal layer excluded)");

    let vgrid = Grid1D::uniform(4.0 * run.cfg.grid.x_report, 401, 401)?;
    let v = nonuniqueness_family(sigma, tau, tau, &vgrid)?;
    let v1 = v.price(1.0);
    run.num("v(x=1)", v1, "zero-data solution x - E X(T) at x = 1, t = 0");

    let defect = martingale_defect(&market, 1.0, tau, &PathConfig::exact(n, seed))?;
    run.est("defect(x=1)", defect.mean, defect.stderr, "x0 - E X(T) at x0 = 1 by exact sampling");
    run.num("cap_rounds", report.rounds() as f64, "cap refinements after M0");

    table.push(String::new());
    table.push(format!("concave slices on [0, {}]: {concave}/{}", window.1, nt - 2));
    table.push(format!("v(1, 0) = {v1:.6}"));
    table.push(format!("defect(1) = {:.6} ± {:.1e}", defect.mean, defect.stderr));
    table.push(format!("cap rounds: {}", report.rounds()));
    eprintln!("{}", table.join("\n"));

    run.artifact("summary.csv", |p| Ok(fs::write(p, &csv)?))?;
    run.surface("surface.csv", &surface)?;
    run.surface("family.csv", &v)
}
