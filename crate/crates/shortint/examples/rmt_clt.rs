//! The random-matrix trace analogue: S = sum_{i=1}^{N} cos(2 pi X_i) with
//! independent uniform X_i has exactly the distribution of Re Trace A^M
//! for Haar-random unitary A when |M| >= N. Monte Carlo moments are
//! compared with the exact k = 2, 4 values and with the limiting normal
//! moments mu_k (N/2)^{k/2}.
//!
//! Run with: cargo run --release --example rmt_clt [N] [trials] [seed]

use shortint::analogues::{rmt_moments, MCConfig};
use shortint::constants::normal_moment;

fn main() -> shortint::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: u64 = args.next().map(|s| s.parse().expect("N")).unwrap_or(50);
    let trials: u64 = args
        .next()
        .map(|s| s.parse().expect("trials"))
        .unwrap_or(100_000);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(0);

    let cfg = MCConfig { n, trials, seed };
    let nf = n as f64;
    println!("N = {n}, trials = {trials}, seed = {seed}\n");
    println!(
        "{:>2} {:>14} {:>12} {:>14} {:>14}",
        "k", "empirical", "std error", "exact", "normal limit"
    );
    for r in rmt_moments(&cfg, 6)? {
        let exact = match r.k {
            k if k % 2 == 1 => Some(0.0),
            2 => Some(nf / 2.0),
            4 => Some(3.0 * nf * (nf - 1.0) / 4.0 + 3.0 * nf / 8.0),
            _ => None,
        };
        let gauss = if r.k % 2 == 0 {
            normal_moment(r.k) * (nf / 2.0).powi(r.k as i32 / 2)
        } else {
            0.0
        };
        println!(
            "{:>2} {:>14.4} {:>12.4} {:>14} {:>14.2}",
            r.k,
            r.mean,
            r.std_error,
            exact.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into()),
            gauss
        );
    }
    Ok(())
}
