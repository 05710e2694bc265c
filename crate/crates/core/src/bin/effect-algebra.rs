fn main() {
    std::process::exit(effect_algebra::cli::main_with_args(std::env::args_os()));
}
