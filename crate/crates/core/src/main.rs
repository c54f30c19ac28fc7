use std::io::Write;

fn main() {
    let out = mackeylab::cli::run(std::env::args_os());
    if out.code == 0 {
        print!("{}", out.text);
        let _ = std::io::stdout().flush();
    } else {
        eprint!("{}", out.text);
    }
    std::process::exit(out.code);
}
