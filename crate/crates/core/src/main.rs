fn main() {
    std::process::exit(consensus_game::cli::run(std::env::args_os()));
}
