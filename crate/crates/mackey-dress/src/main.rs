fn main() {
    std::process::exit(mackey_dress::cli::run(std::env::args_os()));
}
