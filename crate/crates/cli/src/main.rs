fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(lmoments_cli::dispatch(&argv));
}
