use qmsdf_cli::{run, Io};

fn main() {
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    let mut io = Io {
        stdout: &mut stdout,
        stderr: &mut stderr,
        env: std::env::vars().collect(),
    };
    let code = run(std::env::args_os(), &mut io);
    drop(io);
    std::process::exit(code);
}
