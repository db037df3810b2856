fn main() {
    std::process::exit(wiretap_bounds::cli::run_from(std::env::args_os()));
}
