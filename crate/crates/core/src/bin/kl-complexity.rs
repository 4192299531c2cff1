fn main() {
    std::process::exit(kl_complexity::cli::run(std::env::args_os()));
}
