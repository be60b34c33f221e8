use qunip_cli::{execute, max_qubits_from_env, parse_args};

fn main() {
    let mut plan = parse_args(std::env::args_os()).unwrap_or_else(|e| e.exit());
    match max_qubits_from_env() {
        Ok(Some(cap)) => plan.max_qubits = cap,
        Ok(None) => {}
        Err(e) => e.exit(),
    }
    std::process::exit(execute(&plan));
}
