use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use conetool::cli::{run_command, run_demo, Command, Overrides, INPUT_ERROR_EXIT};
use conetool::scenario::{bundled, load_scenario};

/// Exact cone and tiling certificates for scenario files.
///
/// Commands: validate, tile-check, fundamental-domain, decompose,
/// stabilizer, descend, pipeline-effective, pipeline-nef, product, and
/// `demo <name>` for the bundled scenarios (pell, quadrant-swap, dihedral,
/// schoen-toy). A bundled name may be used in place of a scenario path.
/// The element cap for orbit balls is read from CONETOOL_BUDGET_CAP.
#[derive(Parser, Debug)]
#[command(name = "conetool", version)]
struct Args {
    command: String,
    /// Scenario file, or the demo name for `demo`.
    scenario: String,
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    fuel: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Prose summary instead of JSON.
    #[arg(long)]
    human: bool,
    /// With `demo`, print the bundled scenario file instead of running it.
    #[arg(long)]
    emit: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            // Exit 2 means refuted here, so usage errors count as input errors.
            return if e.use_stderr() {
                ExitCode::from(INPUT_ERROR_EXIT as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let flags = Overrides {
        radius: args.radius,
        fuel: args.fuel,
        samples: args.samples,
        seed: args.seed,
    };
    let result = if args.command == "demo" {
        if args.emit {
            match bundled(&args.scenario) {
                Some(text) => {
                    print!("{text}");
                    return ExitCode::SUCCESS;
                }
                None => Err(conetool::cli::CliError::UnknownDemo(args.scenario.clone())),
            }
        } else {
            run_demo(&args.scenario, &flags)
                .map(|d| (if args.human { d.human() } else { d.to_json() }, d.exit_status))
        }
    } else {
        args.command
            .parse::<Command>()
            .and_then(|cmd| {
                let s = load_scenario(&args.scenario)?;
                run_command(cmd, &s, &flags)
            })
            .map(|r| (if args.human { r.human() } else { r.to_json() }, r.exit_status))
    };
    match result {
        Ok((text, code)) => {
            // A closed pipe is not worth a panic.
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("conetool: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
