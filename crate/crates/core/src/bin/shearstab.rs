fn main() {
    std::process::exit(shearstab::cli::main_with_args(std::env::args_os()));
}
