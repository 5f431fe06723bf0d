use std::io;

fn main() {
    let code = gibbs_mixing::cli::run_from_args(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    std::process::exit(code);
}
