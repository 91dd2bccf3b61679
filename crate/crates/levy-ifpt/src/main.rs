fn main() {
    std::process::exit(levy_ifpt::cli::run(std::env::args_os()));
}
