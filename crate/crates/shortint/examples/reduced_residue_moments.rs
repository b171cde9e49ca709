//! Exact reduced-residue moments for primorial moduli: m_k(q;h), the
//! normalized V_k(q;h), the V_2 closed form through Ramanujan sums, and the
//! normal-main-term comparison mu_k V_2^{k/2}. Everything except the final
//! report is exact rational arithmetic.
//!
//! Run with: cargo run --release --example reduced_residue_moments

use shortint::residues::{m_k_direct, normal_main_report, v_2_closed, v_k, ModulusQ};

fn main() -> shortint::Result<()> {
    let q = ModulusQ::new(30)?;
    println!("q = 30 = {:?}, phi = {}", q.factors(), q.phi());
    for h in [3u64, 6, 15] {
        let m2 = m_k_direct(&q, h, 2)?;
        let v2 = v_k(&q, h, 2)?;
        let closed = v_2_closed(&q, h);
        println!("  h = {h:>2}:  m_2 = {m2:>10}   V_2 = {v2:>10}   closed form = {closed}");
        assert_eq!(v2, closed);
    }

    println!("\nnormal-moment comparison for q = 2310 (V_k vs mu_k V_2^(k/2)):");
    let q = ModulusQ::new(2310)?;
    for k in 2..=6u32 {
        let r = normal_main_report(&q, 50, k)?;
        println!(
            "  k = {k}:  V_k = {:>14.4}   main = {:>14.4}   ratio = {}",
            r.v_k,
            r.main,
            r.ratio.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
        );
    }
    println!("\n(odd k have no main term; the ratio column stays empty)");
    Ok(())
}
