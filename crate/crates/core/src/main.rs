fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(lcsx::cli::main_with(std::env::args_os()))
}
