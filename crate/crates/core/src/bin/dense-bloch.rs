use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dense_bloch::cli::{self, EXIT_CONFIG};
use dense_bloch::config::Scenario;

/// Dense-medium Bloch equation scenarios.
#[derive(Parser, Debug)]
#[command(name = "dense-bloch", version)]
struct Args {
    /// decay | spectrum | holstein | bistability | rates
    scenario: String,
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check the configuration and print resolved parameters only.
    #[arg(long)]
    validate: bool,
    /// Add the collective light shift column to the rates scenario.
    #[arg(long)]
    light_shift: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let code = real_main(args);
    ExitCode::from(code as u8)
}

fn real_main(args: Args) -> i32 {
    let Some(scenario) = Scenario::from_name(&args.scenario) else {
        eprintln!("config error: unknown scenario {}", args.scenario);
        return EXIT_CONFIG;
    };
    if let Err(e) = cli::configure_threads() {
        eprintln!("config error: {e}");
        return EXIT_CONFIG;
    }
    let mut cfg = match cli::load(&args.config, Some(scenario), args.out.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    if args.light_shift {
        match &mut cfg.params {
            dense_bloch::config::ScenarioParams::Rates { light_shift, .. } => *light_shift = true,
            _ => {
                eprintln!("config error: --light-shift applies to the rates scenario only");
                return EXIT_CONFIG;
            }
        }
    }
    if args.validate {
        print!("{}", cli::validate_report(&cfg));
        return 0;
    }
    match cli::run(&cfg) {
        Ok(rep) => {
            for f in &rep.files {
                println!("{}", f.display());
            }
            if rep.markov_violated {
                eprintln!("warning: Markov approximation violated; results written anyway");
            }
            rep.exit_code()
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
