fn main() {
    std::process::exit(safe_kernel::cli::run(std::env::args_os()));
}
