use std::io;

fn main() {
    let status = mdtool::cli::run(
        std::env::args_os(),
        &mut io::stdin(),
        &mut io::stdout(),
        &mut io::stderr(),
    );
    std::process::exit(status);
}
