fn main() {
    std::process::exit(odfset::cli::run(std::env::args_os()));
}
