fn main() {
    std::process::exit(shapebench_cli::dispatch(std::env::args_os()));
}
