fn main() {
    std::process::exit(bubble_bs::cli::dispatch(std::env::args_os()));
}
