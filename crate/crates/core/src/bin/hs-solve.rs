fn main() {
    std::process::exit(hs_games::cli::main_with_args(std::env::args_os()));
}
