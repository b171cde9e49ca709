//! Distribution of the standardized window sums D(n)/sqrt(H log(N/H)) with
//! an ASCII histogram and the Kolmogorov-Smirnov distance to the standard
//! normal.
//!
//! Run with: cargo run --release --example normality [N] [H]

use shortint::moments::distribution;

fn main() -> shortint::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: u64 = args
        .next()
        .map(|s| s.parse().expect("N"))
        .unwrap_or(1_000_000);
    let h: u64 = args.next().map(|s| s.parse().expect("H")).unwrap_or(500);

    let rep = distribution(n, h, 48)?;
    let peak = *rep.counts.iter().max().unwrap() as f64;
    println!("N = {n}, H = {h}, standardized by sqrt(H log(N/H)) = {:.3}\n", rep.standardization.sqrt());
    for (i, &c) in rep.counts.iter().enumerate() {
        let lo = rep.edges[i];
        if !(-4.0..4.0).contains(&lo) || c == 0 {
            continue;
        }
        let bar = "#".repeat((c as f64 / peak * 60.0).round() as usize);
        println!("{lo:>6.2} {c:>9} {bar}");
    }
    println!("\nsample mean      = {:+.5}", rep.sample_mean);
    println!("sample variance  = {:.5}  (1.0 would match the standardization exactly)", rep.sample_variance);
    println!("KS vs Phi        = {:.5} (binned {:.5})", rep.ks_exact.unwrap_or(f64::NAN), rep.ks_binned);
    if let Some(w) = rep.warning {
        println!("note: {w}");
    }
    Ok(())
}
