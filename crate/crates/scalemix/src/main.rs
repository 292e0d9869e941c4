fn main() {
    std::process::exit(scalemix::cli::run_from_env());
}
