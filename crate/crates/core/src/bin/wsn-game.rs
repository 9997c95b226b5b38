fn main() {
    std::process::exit(wsn_game::cli::main_with_args(std::env::args_os()));
}
