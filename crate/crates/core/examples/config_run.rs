// Driving a run from a TOML configuration, as the command-line tool does.

use bubble_bs::cli;

const CONFIG: &str = r#"
seed = 7

[market]
family = "power"
sigma = 1.0
p = 2.0

[payoff]
kind = "call"
strike = 1.0

[grid]
nx = 400
nt = 400
"#;

pub fn run_example() -> bubble_bs::Result<()> {
    let dir = std::env::temp_dir().join(format!("bubble-bs-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("run.toml");
    std::fs::write(&path, CONFIG)?;
    let env = cli::run(["bubble-bs", "price-euro", "--config", path.to_str().unwrap()])?;
    for (name, s) in &env.scalars {
        println!("{name:>24} = {:?}  ({})", s.value, s.note);
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> bubble_bs::Result<()> {
    run_example()
}
