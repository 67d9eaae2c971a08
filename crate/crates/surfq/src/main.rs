fn main() {
    if let Err(e) = surfq::cli::run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
