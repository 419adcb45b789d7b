//! Acceptance suite: runs every criterion in order, prints one PASS/FAIL
//! line each (with its details indented below), and exits nonzero if any
//! criterion fails. Optional arguments select suites by key or number.

use std::process::ExitCode;

use krcore::verify::{run, suite_keys, summary_tsv};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let keys: Vec<String> = if args.is_empty() {
        suite_keys().into_iter().map(String::from).collect()
    } else {
        args
    };
    let mut outcomes = Vec::new();
    for k in &keys {
        let o = match run(k) {
            Ok(o) => o,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::FAILURE;
            }
        };
        println!("{}", o.line());
        for d in &o.details {
            println!("        {d}");
        }
        outcomes.push(o);
    }
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.passed())
        .map(|o| o.key)
        .collect();
    println!();
    print!("{}", summary_tsv(&outcomes));
    println!(
        "{} of {} criteria pass",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
