// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(paramp::cli::main_entry());
}
