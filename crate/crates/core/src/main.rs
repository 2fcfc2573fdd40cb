fn main() {
    std::process::exit(rcpsp_ttpnr::cli::run(std::env::args_os()));
}
