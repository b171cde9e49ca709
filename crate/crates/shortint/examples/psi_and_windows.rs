//! Streaming sieve basics: primes in a range, prime-power events, psi, and
//! sliding window sums psi(n+H) - psi(n) - H.
//!
//! Run with: cargo run --release --example psi_and_windows

use shortint::sieve;

fn main() -> shortint::Result<()> {
    println!("primes in [1, 50]: {:?}", sieve::primes_in(1, 50)?);
    println!("primes in [90, 96]: {:?}", sieve::primes_in(90, 96)?);

    println!("\nprime-power events in [2, 32]:");
    for e in sieve::lambda_events(2, 32)? {
        println!("  n = {:>2} = {}^{}   Lambda = log {} = {:.6}", e.n, e.p, e.exponent, e.p, e.log_p);
    }

    for x in [10.0, 100.0, 1e6] {
        println!("psi({x}) = {:.6}", sieve::psi(x)?);
    }

    let h = 100u64;
    println!("\nwindow sums D(n) = psi(n+{h}) - psi(n) - {h}:");
    for (n, d) in sieve::window_sums(1_000_000, h)?.step_by(200_000) {
        println!("  n = {n:>8}   D(n) = {d:>10.4}");
    }
    Ok(())
}
