use hsumma::experiment::{run_validation, ValidateOptions};

fn main() {
    let report = run_validation(&ValidateOptions::default()).unwrap();
    print!("{}", report.to_csv());
    println!("all checks passed: {}", report.passed());
}
