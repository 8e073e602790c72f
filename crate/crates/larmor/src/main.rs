fn main() {
    std::process::exit(larmor::harness::run(std::env::args_os()));
}
