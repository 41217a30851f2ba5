fn main() {
    let code = shuttle_sched_cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
