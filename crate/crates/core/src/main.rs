// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

fn main() {
    let quiet = std::env::args().any(|a| a == "--quiet");
    let level = if quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let mut stdout = std::io::stdout().lock();
    let code = polydiff::cli::run(std::env::args_os(), &mut stdout);
    let _ = stdout.flush();
    std::process::exit(code);
}
