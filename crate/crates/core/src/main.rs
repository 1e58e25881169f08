use clap::Parser;
use gengap::cli::{emit, run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GENGAP_LOG", "warn")).format_timestamp(None).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let report = run(&cli);
    std::process::exit(emit(&cli.opts, &report));
}
