fn main() {
    std::process::exit(jacobi_sumrules::cli::run(std::env::args_os()));
}
