fn main() {
    std::process::exit(robust_v2x::cli::parse_and_dispatch(std::env::args_os()));
}
