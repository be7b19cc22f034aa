use std::io::Write;

fn main() {
    let outcome = remest_cli::run(std::env::args_os());
    let mut stdout = std::io::stdout().lock();
    if stdout
        .write_all(&outcome.stdout)
        .and_then(|()| stdout.flush())
        .is_err()
    {
        std::process::exit(remest_cli::EXIT_USAGE);
    }
    eprint!("{}", outcome.stderr);
    std::process::exit(outcome.code);
}
