//! Drive the library through a problem file, exactly like the binary.
//!
//! Problem files declare field towers, rings, generator sets, and
//! derivations, and end with a single task line. This example parses
//! and runs one file from the bundled corpus and prints both renderings
//! of the report: the stable JSON document and the human-readable
//! trace.
//!
//! Run with: `cargo run --example run_problem [-- path/to/file.prob]`

use std::path::{Path, PathBuf};

use polyembed::cli;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("problems/embed_quadratic.prob")
    });
    let text = std::fs::read_to_string(&path)?;
    let base = path.parent().unwrap_or(Path::new("."));

    println!("== {} ==", path.display());
    for line in text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#')) {
        println!("  {line}");
    }

    let report = match cli::execute(&text, base, &cli::Overrides::default()) {
        Ok(report) => report,
        Err(err) => {
            eprintln!("error: {err} (exit code {})", err.exit_code());
            std::process::exit(err.exit_code().into());
        }
    };

    println!("\n-- JSON report --");
    print!("{}", cli::emit_json(&report));
    println!("\n-- trace --");
    print!("{}", cli::emit_trace(&report));
    Ok(())
}
