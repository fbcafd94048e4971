fn main() {
    std::process::exit(pulsed_mirror::cli::run(std::env::args_os()));
}
