fn main() {
    std::process::exit(mds53::cli::run(std::env::args_os()));
}
