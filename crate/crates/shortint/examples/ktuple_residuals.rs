//! Residuals of k-tuple Lambda-product sums against their singular-series
//! main term S(D) N, monitored against the square-root-cancellation
//! envelope sqrt(N) log^2 N.
//!
//! Run with: cargo run --release --example ktuple_residuals

use shortint::moments::ktuple_residual;
use shortint::singular::TupleD;

fn main() -> shortint::Result<()> {
    println!(
        "{:>12} {:>10} {:>14} {:>14} {:>12} {:>14}",
        "D", "N", "sum", "S(D) N", "residual", "sqrt(N) log^2 N"
    );
    for offsets in [vec![1u64], vec![1, 3], vec![1, 3, 7]] {
        let d = TupleD::new(offsets)?;
        for n in [10_000u64, 100_000, 1_000_000] {
            let r = ktuple_residual(&d, n)?;
            let nf = n as f64;
            println!(
                "{:>12} {:>10} {:>14.3} {:>14.3} {:>12.3} {:>14.1}",
                format!("{{{d}}}"),
                n,
                r.sum,
                r.main,
                r.residual,
                nf.sqrt() * nf.ln() * nf.ln()
            );
        }
    }
    println!("\n(a tuple with a vanishing series, D = {{1,2}}: the sum itself is the residual)");
    let d = TupleD::new(vec![1, 2])?;
    let r = ktuple_residual(&d, 1_000_000)?;
    println!("sum = {:.3}, S = {}, residual = {:.3}", r.sum, r.singular, r.residual);
    Ok(())
}
