fn main() {
    std::process::exit(boole_bell::cli::run(std::env::args_os()));
}
