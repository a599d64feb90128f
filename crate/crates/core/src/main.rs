fn main() {
    let slack = std::env::var(kgt::cli::SLACK_ENV).ok();
    let outcome = kgt::cli::main_with(std::env::args_os(), slack.as_deref());
    print!("{}", outcome.stdout);
    if !outcome.stderr.is_empty() {
        eprintln!("{}", outcome.stderr.trim_end());
    }
    std::process::exit(outcome.code);
}
