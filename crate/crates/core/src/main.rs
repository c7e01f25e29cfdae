fn main() {
    std::process::exit(frw_chiellini::cli::run(std::env::args_os()));
}
