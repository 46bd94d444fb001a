fn main() {
    std::process::exit(scratch_perfumes::cli::run(std::env::args_os()));
}
