//! The singular series of small offset tuples: the twin-prime constant,
//! tuples killed by a full residue class, the centered transform s0 and its
//! exact round trip back to the series.
//!
//! Run with: cargo run --release --example twin_prime_constant

use shortint::singular::{s0, s_from_s0, singular_series, SeriesConfig, TupleD};

fn main() -> shortint::Result<()> {
    let cfg = SeriesConfig::default();

    let twin = TupleD::new(vec![1, 3])?;
    let s = singular_series(&twin, &cfg);
    println!("S({{1,3}}) = {s:.10}   (twin-prime constant 2 Pi_2 = 1.3203236316...)");

    for offsets in [vec![1u64, 2], vec![1, 3, 5], vec![1, 7, 11], vec![2, 6, 8, 12]] {
        let d = TupleD::new(offsets)?;
        println!("S({{{d}}}) = {:.10}", singular_series(&d, &cfg));
    }

    println!("\ncentered transform:");
    for offsets in [vec![5u64], vec![1, 3], vec![1, 3, 7]] {
        let d = TupleD::new(offsets)?;
        let v0 = s0(&d, &cfg)?;
        let back = s_from_s0(&d, &cfg)?;
        let direct = singular_series(&d, &cfg);
        println!(
            "  D = {{{d}}}:  s0 = {v0:>12.8}   sum of s0 over subsets = {back:.10}   drift = {:.2e}",
            back - direct
        );
    }
    Ok(())
}
