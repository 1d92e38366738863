fn main() {
    std::process::exit(hdl_mend_core::cli::main_with_args(std::env::args_os()));
}
