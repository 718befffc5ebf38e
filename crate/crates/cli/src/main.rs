fn main() {
    std::process::exit(adamxlab::main_with_args(std::env::args_os()));
}
