// SPDX-License-Identifier: Apache-2.0

use std::process::ExitCode;

use clap::Parser;
use geofcs::cli::{execute, Cli};

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
