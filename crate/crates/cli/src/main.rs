fn main() {
    std::process::exit(newsxplain_cli::run(std::env::args_os()));
}
