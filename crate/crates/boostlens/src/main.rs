fn main() {
    std::process::exit(boostlens::cli::run(std::env::args_os()));
}
