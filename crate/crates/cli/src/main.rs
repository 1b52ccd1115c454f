use hessq_lab::{main_with_args, Hooks};

fn main() {
    let code = main_with_args(std::env::args_os(), &Hooks::default(), &mut std::io::stdout().lock(), &mut std::io::stderr());
    std::process::exit(code);
}
