//! Seeded cross-check of the Routh, threshold and eigenvalue routes.

use vi_stab::verify::run_verify;

fn main() -> vi_stab::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(42);
    let r = run_verify(10_000, seed)?;
    let a = &r.agreement;
    println!(
        "seed {seed}: {} samples, {} stable",
        a.samples, a.stable_samples
    );
    println!("  routh vs eigen      {}", a.routh_vs_eigen);
    println!("  theorem vs routh    {}", a.theorem_vs_routh);
    println!("  ordering violations {}", a.ordering_violations);
    println!(
        "  proof violations    {} over {} cases",
        r.proof.violations, r.proof.cases
    );
    println!("passed: {}", r.passed);
    Ok(())
}
