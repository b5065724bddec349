use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "badw", version, about = "Weighted badly approximable points on fractals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Placeholder while subcommands land.
    Noop,
}

fn main() {
    let cli = Cli::parse();
    match cli.command {
        Command::Noop => {}
    }
}
