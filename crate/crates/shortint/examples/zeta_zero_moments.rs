//! Moments of the cosine sum over zeta-zero ordinates,
//! Int_1^X (sum_{gamma <= T} cos(gamma log x))^k dx, against the diagonal
//! reference mu_k X (T/(4 pi) log T)^{k/2}. Uses the bundled table of the
//! first 100 ordinates; pass a path to use a bigger one.
//!
//! Run with: cargo run --release --example zeta_zero_moments [table]

use shortint::analogues::{load_zeros, zero_moment};

fn main() -> shortint::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/zeta_zeros_100.txt").to_string()
    });
    let table = load_zeros(&path)?;
    println!(
        "{}: {} ordinates, first {:.6}, last {:.6}\n",
        path,
        table.len(),
        table.ordinates()[0],
        table.max_ordinate()
    );

    let t = table.max_ordinate();
    for k in 1..=4u32 {
        let r = zero_moment(&table, t, 1e4, k)?;
        println!(
            "k = {k}:  lhs = {:>14.4e}   rhs = {:>14.4e}   ratio = {}",
            r.lhs,
            r.rhs,
            r.ratio.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
        );
    }

    println!("\nratio drift in X at k = 2 (the band is wide at this scale):");
    for x in [1e3, 1e4, 1e5] {
        let r = zero_moment(&table, t, x, 2)?;
        println!("  X = {x:>8e}: ratio = {:.4}", r.ratio.unwrap());
    }
    Ok(())
}
