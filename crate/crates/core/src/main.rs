fn main() {
    std::process::exit(riemann_dn::cli::run(std::env::args_os()));
}
