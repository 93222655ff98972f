fn main() {
    std::process::exit(vortical::cli::run(std::env::args_os()));
}
