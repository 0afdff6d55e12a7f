fn main() {
    std::process::exit(lplr::run_cli(std::env::args_os()));
}
