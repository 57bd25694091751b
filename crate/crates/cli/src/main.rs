fn main() {
    std::process::exit(mapvol_cli::run(std::env::args_os()));
}
