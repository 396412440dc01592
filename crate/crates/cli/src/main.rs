use clap::Parser;

fn main() {
    let cli = match csc::args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = csc::apply_dim_cap_env()
        .and_then(|()| csc::resolve(&cli))
        .and_then(|cfg| csc::execute(&cfg));
    match result {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            if let Some(m) = &report.manifest {
                eprintln!("wrote {}", m.display());
            }
        }
        Err(e) => {
            eprintln!("csc: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
