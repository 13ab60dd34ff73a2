fn main() {
    std::process::exit(mfbalance::cli::run(std::env::args_os()));
}
