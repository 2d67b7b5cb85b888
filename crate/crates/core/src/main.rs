fn main() {
    std::process::exit(cmtrace::cli::run(std::env::args_os()));
}
