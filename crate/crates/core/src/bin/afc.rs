fn main() {
    std::process::exit(afc_drl::cli::run(std::env::args_os()));
}
