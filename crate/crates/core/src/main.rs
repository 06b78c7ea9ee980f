// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(alpine::cli::run_from_args(std::env::args_os()));
}
