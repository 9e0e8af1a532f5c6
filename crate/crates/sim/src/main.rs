fn main() {
    std::process::exit(coop_oam::cli::main_with_args(std::env::args_os()));
}
