// SPDX-License-Identifier: Apache-2.0

fn main() {
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = chaos_trng::cli::run(std::env::args_os(), &mut stdout) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
