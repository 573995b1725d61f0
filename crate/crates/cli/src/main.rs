fn main() {
    std::process::exit(psaws::run(std::env::args_os()));
}
