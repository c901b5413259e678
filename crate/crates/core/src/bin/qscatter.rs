use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = io::BufWriter::new(stdout.lock());
    let code = qscatter::cli::main_with_args(std::env::args_os(), &mut out, &mut stderr.lock());
    if out.flush().is_err() && code == 0 {
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}
