fn main() {
    std::process::exit(hashreuse::run(std::env::args_os()));
}
