use clap::Parser;

fn main() -> std::process::ExitCode {
    let cli = framecert::cli::Cli::parse();
    std::process::ExitCode::from(framecert::cli::run(cli) as u8)
}
