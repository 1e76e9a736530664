fn main() {
    std::process::exit(dircomm::cli::main_with(std::env::args_os()));
}
