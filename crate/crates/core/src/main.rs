fn main() {
    std::process::exit(homcorr::cli::run(std::env::args_os()));
}
