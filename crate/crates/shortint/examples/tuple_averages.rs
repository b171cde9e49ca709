//! Averages of the singular series over [1, h]: the centered sums R_k(h)
//! against mu_k (-h log h + A h)^(k/2), the pair sum against
//! h^2 - h log h + B h, and the binomial bridge tying the two families
//! together.
//!
//! Run with: cargo run --release --example tuple_averages

use shortint::constants::B;
use shortint::singular::{gallagher_sum, pair_sum, r_k, r_k_asymptotic, SeriesConfig};

fn main() -> shortint::Result<()> {
    let cfg = SeriesConfig::default();

    println!("R_2(h) against -h log h + A h:");
    for h in [50u64, 100, 300, 1000] {
        let v = r_k(h, 2, &cfg)?;
        let a = r_k_asymptotic(h, 2);
        println!("  h = {h:>5}: R_2 = {v:>12.3}   smooth = {a:>12.3}   diff = {:>7.3}", v - a);
    }

    println!("\npair sums against h^2 - h log h + B h:");
    for h in [100u64, 500, 1000] {
        let v = pair_sum(h, &cfg)?;
        let hf = h as f64;
        let p = hf * hf - hf * hf.ln() + B * hf;
        println!("  h = {h:>5}: sum = {v:>13.3}   smooth = {p:>13.3}   diff = {:>7.3}", v - p);
    }

    // Gallagher sums decompose over the centered averages:
    // sum_D S(D) = sum_r C(k,r) R_r(h) (h-r)...(h-k+1)
    let h = 40u64;
    let k = 3u32;
    let lhs = gallagher_sum(h, k, &cfg)?;
    let mut rhs = 0.0;
    for r in 0..=k {
        let mut falling = 1.0;
        for j in r..k {
            falling *= (h - j as u64) as f64;
        }
        let choose = match r {
            0 | 3 => 1.0,
            _ => 3.0,
        };
        rhs += choose * r_k(h, r, &cfg)? * falling;
    }
    println!("\nbinomial bridge at h = {h}, k = {k}:");
    println!("  direct tuple sum     = {lhs:.6}");
    println!("  bridge via R_r       = {rhs:.6}   (rel diff {:.2e})", (lhs - rhs).abs() / rhs);
    Ok(())
}
