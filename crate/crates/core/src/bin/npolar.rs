use std::process::ExitCode;

use clap::Parser;
use nested_polar::cli::{main_with, Args};

fn main() -> ExitCode {
    main_with(Args::parse())
}
