//! Parse a document, run its default task and print the report.

use pathgeom::cli::{run, Command, Input, RunOptions};

fn main() {
    let input = Input::from_text(include_str!("../data/chains.pg")).unwrap();
    println!("{}", pathgeom::dsl::serialize(&input.doc));
    let report = run(Command::VerifyChains, &input, &RunOptions::default()).unwrap();
    print!("{}", report.to_text());
    println!("exit code {}", report.exit_code());
}
