fn main() {
    std::process::exit(gksched::cli::run(std::env::args_os()));
}
