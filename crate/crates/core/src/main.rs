fn main() {
    std::process::exit(donor_gfactor::cli::main_with(std::env::args_os()));
}
