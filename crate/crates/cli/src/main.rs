use std::process::ExitCode;

use gbq_cli::{emit, parse_args, run, CliError};

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("GBQ_THREADS") {
        let threads: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Parameter(format!("GBQ_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Parameter(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match parse_args(std::env::args().collect()) {
        Ok(cli) => cli,
        Err(CliError::Usage(e)) => e.exit(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = configure_threads().and_then(|_| run(&cli.command)).and_then(|report| {
        emit(&report, cli.command.opts())?;
        Ok(report)
    });
    match result {
        Ok(report) if report.all_pass() => ExitCode::SUCCESS,
        Ok(report) => {
            for c in report.failures() {
                eprintln!("FAILED {} (value {:e}, tolerance {:e})", c.name, c.value, c.tolerance);
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
