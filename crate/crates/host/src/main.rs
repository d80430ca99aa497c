use clap::Parser;

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .init();
    assistvr::cli::execute(assistvr::cli::Cli::parse())
}
