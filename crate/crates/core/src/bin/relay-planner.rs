fn main() {
    std::process::exit(relay_planner::cli::run(std::env::args_os()));
}
