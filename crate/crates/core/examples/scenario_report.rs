//! Runs one command on a scenario file (or bundled name) and prints the
//! JSON report, as the command-line tool does.
//!
//!     cargo run --example scenario_report -- decompose pell

use conetool::cli::{run_command, Command, Overrides};
use conetool::scenario::load_scenario;

fn main() {
    let mut args = std::env::args().skip(1);
    let command: Command = args.next().unwrap_or_else(|| "validate".into()).parse().unwrap();
    let path = args.next().unwrap_or_else(|| "quadrant-swap".into());
    let scenario = match load_scenario(&path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    let report = run_command(command, &scenario, &Overrides::default()).unwrap();
    println!("{}", report.to_json());
    eprintln!("{}", report.human());
}
