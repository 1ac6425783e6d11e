fn main() {
    std::process::exit(boris_drift::cli_io::cli_main(std::env::args_os()));
}
