fn main() {
    std::process::exit(gbsamp::run(std::env::args_os()));
}
