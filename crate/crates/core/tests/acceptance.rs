//! Reproduction criteria. Prints one PASS/FAIL line per criterion, followed
//! by the numbers it was judged on, and exits non-zero if any criterion fails.
//!
//! Run with `cargo test -p privdel-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use privdel::checks;

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    let mut ran = 0;
    for (id, check) in checks::ALL {
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        match check() {
            Ok(outcome) => {
                print!("{outcome}");
                println!("    time {:.1}s\n", start.elapsed().as_secs_f64());
                if !outcome.passed {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("[FAIL] {id}: did not run: {e}\n");
                failed.push(id);
            }
        }
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
