use std::io::Write;

fn main() {
    let (out, code) = dop::cli::run(std::env::args_os());
    if !out.is_empty() {
        // a closed pipe is not an error for a filter-style tool
        let _ = if code == 1 || code == 4 {
            writeln!(std::io::stderr(), "{out}")
        } else {
            writeln!(std::io::stdout(), "{out}")
        };
    }
    std::process::exit(code);
}
