fn main() {
    std::process::exit(mhdbox::cli::run(std::env::args_os()));
}
