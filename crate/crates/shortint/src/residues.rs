//! Exact moments of reduced residues to a squarefree modulus.
//!
//! Everything in this module is exact rational arithmetic: the centered
//! moments m_k(q;h), their normalized form V_k(q;h), the closed form for
//! V_2 through Ramanujan sums, and the defining multiple sum of V_k
//! evaluated by integer exponential-sum folding. Identity tests against
//! these routes are equality tests, not tolerance tests.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::constants::normal_moment;
use crate::error::{Error, Result};

pub type RationalValue = BigRational;

/// A squarefree modulus together with its prime factorization.
#[derive(Debug, Clone)]
pub struct ModulusQ {
    q: u64,
    factors: Vec<u64>,
}

impl ModulusQ {
    pub fn new(q: u64) -> Result<Self> {
        if q < 1 {
            return Err(Error::Argument("modulus must be >= 1".into()));
        }
        let mut m = q;
        let mut factors = Vec::new();
        let mut d = 2u64;
        while d * d <= m {
            if m.is_multiple_of(d) {
                m /= d;
                if m.is_multiple_of(d) {
                    return Err(Error::Argument(format!("{q} is not squarefree")));
                }
                factors.push(d);
            }
            d += 1;
        }
        if m > 1 {
            factors.push(m);
        }
        Ok(ModulusQ { q, factors })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn phi(&self) -> u64 {
        self.factors.iter().map(|p| p - 1).product()
    }

    /// All divisors, ascending; q is squarefree so these are the subset
    /// products of the prime factors.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &p in &self.factors {
            let n = divs.len();
            for i in 0..n {
                divs.push(divs[i] * p);
            }
        }
        divs.sort_unstable();
        divs
    }
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn phi_u64(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .map(|(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

fn moebius_u64(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        return 0;
    }
    if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Ramanujan's sum c_d(m), by the multiplicative closed form
/// mu(d/g) phi(d) / phi(d/g) with g = gcd(d, |m|).
pub fn ramanujan(d: u64, m: i64) -> i64 {
    assert!(d >= 1, "ramanujan sum needs d >= 1");
    let g = num_integer::gcd(d, m.unsigned_abs());
    let dg = d / g;
    moebius_u64(dg) * (phi_u64(d) / phi_u64(dg)) as i64
}

/// Ramanujan's sum by the von Sterneck divisor form
/// sum over e | gcd(d, m) of e mu(d/e); the independent route used by the
/// dual-formula identity tests.
pub fn ramanujan_divisor_sum(d: u64, m: i64) -> i64 {
    assert!(d >= 1, "ramanujan sum needs d >= 1");
    let g = num_integer::gcd(d, m.unsigned_abs());
    let mut acc = 0i64;
    let mut e = 1u64;
    while e * e <= g {
        if g.is_multiple_of(e) {
            acc += e as i64 * moebius_u64(d / e);
            let e2 = g / e;
            if e2 != e {
                acc += e2 as i64 * moebius_u64(d / e2);
            }
        }
        e += 1;
    }
    acc
}

/// Sum over reduced residues a mod d of |E(a/d)|^2, folded exactly:
/// phi(d) h + 2 sum_{m=1}^{h} (h-m) c_d(m).
pub fn e_power_sum(d: u64, h: u64) -> RationalValue {
    let mut acc = BigInt::from(phi_u64(d)) * BigInt::from(h);
    for m in 1..h {
        acc += BigInt::from(2 * (h - m)) * BigInt::from(ramanujan(d, m as i64));
    }
    BigRational::from_integer(acc)
}

/// The same quantity by the unfolded route: sum over |m| < h of
/// (h - |m|) c_d(m), with the Ramanujan sums taken from the divisor form.
/// Must equal `e_power_sum` exactly.
pub fn e_power_sum_unfolded(d: u64, h: u64) -> RationalValue {
    let mut acc = BigInt::zero();
    let hi = h as i64;
    for m in (1 - hi)..hi {
        acc += BigInt::from(hi - m.abs()) * BigInt::from(ramanujan_divisor_sum(d, m));
    }
    BigRational::from_integer(acc)
}

const ENUMERATION_BUDGET: u128 = 100_000_000;

fn check_qh_budget(q: u64, h: u64) -> Result<()> {
    if (q as u128) * (h as u128) > ENUMERATION_BUDGET {
        return Err(Error::Budget(format!(
            "m_k enumeration is O(q h); q*h = {} exceeds {ENUMERATION_BUDGET}",
            q as u128 * h as u128
        )));
    }
    Ok(())
}

/// Bit-packed coprimality flags for residues 0..q.
fn coprime_flags(q: &ModulusQ) -> Vec<u64> {
    let n = q.q as usize;
    let mut words = vec![!0u64; n.div_ceil(64)];
    for &p in &q.factors {
        let mut m = 0usize;
        while m < n {
            words[m / 64] &= !(1 << (m % 64));
            m += p as usize;
        }
    }
    words
}

#[inline]
fn flag(words: &[u64], i: usize) -> u64 {
    (words[i / 64] >> (i % 64)) & 1
}

/// The k-th centered moment of the count of reduced residues mod q in a
/// window of h consecutive integers, exact:
/// sum_{n=1}^{q} (#{m <= h : (m+n, q) = 1} - h phi(q)/q)^k.
pub fn m_k_direct(q: &ModulusQ, h: u64, k: u32) -> Result<RationalValue> {
    if k < 1 {
        return Err(Error::Argument("moment order k must be >= 1".into()));
    }
    if h < 1 {
        return Err(Error::Argument("window length h must be >= 1".into()));
    }
    check_qh_budget(q.q, h)?;
    let flags = coprime_flags(q);
    // count for n = 1: residues (1+1 .. 1+h) mod q
    let mut count: i64 = (2..=1 + h)
        .map(|j| flag(&flags, (j % q.q) as usize) as i64)
        .sum();
    let hphi = (h * q.phi()) as i64;
    let qi = q.q as i64;
    // centered value scaled by q: q*count - h*phi(q); final division by q^k.
    // |base| <= q h <= 1e8, so base^k fits i128 for k <= 4 and the exact
    // sum is chunked into BigInt before the i128 partial can overflow.
    let fast = k <= 4;
    let mut total = BigInt::zero();
    let mut partial: i128 = 0;
    let chunk: i128 = if fast {
        let max_term = (q.q as i128 * h as i128).pow(k);
        (i128::MAX / max_term.max(1)).max(1)
    } else {
        1
    };
    let mut in_chunk: i128 = 0;
    for n in 1..=q.q {
        let base = (qi * count - hphi) as i128;
        if fast {
            partial += base.pow(k);
            in_chunk += 1;
            if in_chunk >= chunk {
                total += BigInt::from(partial);
                partial = 0;
                in_chunk = 0;
            }
        } else {
            total += BigInt::from(base).pow(k);
        }
        // slide: window (n+1 .. n+h] -> drop n+1, add n+1+h
        count -= flag(&flags, ((n + 1) % q.q) as usize) as i64;
        count += flag(&flags, ((n + 1 + h) % q.q) as usize) as i64;
    }
    total += BigInt::from(partial);
    Ok(BigRational::new(total, BigInt::from(q.q).pow(k)))
}

/// V_k(q;h) = m_k(q;h) / ( q (phi(q)/q)^k ), exact.
pub fn v_k(q: &ModulusQ, h: u64, k: u32) -> Result<RationalValue> {
    let m = m_k_direct(q, h, k)?;
    let scale = BigRational::new(
        BigInt::from(q.q).pow(k - 1),
        BigInt::from(q.phi()).pow(k),
    );
    Ok(m * scale)
}

/// The closed form for V_2(q;h): sum over divisors d > 1 of q of
/// mu(d)^2/phi(d)^2 times the reduced-residue power sum of |E|^2, all
/// rational.
pub fn v_2_closed(q: &ModulusQ, h: u64) -> RationalValue {
    let mut acc = BigRational::zero();
    for d in q.divisors() {
        if d == 1 {
            continue;
        }
        let phi = BigInt::from(phi_u64(d));
        acc += e_power_sum(d, h) / BigRational::from_integer(&phi * &phi);
    }
    acc
}

const VK_DIRECT_BUDGET: u128 = 10_000_000;

/// The defining multiple sum for V_k, evaluated exactly: enumerate divisor
/// tuples q_i | q, q_i > 1, fold the d-sums into E-products and reduce the
/// admissible a-sums prime by prime to integers.
pub fn v_k_direct(q: &ModulusQ, h: u64, k: u32) -> Result<RationalValue> {
    if k < 1 {
        return Err(Error::Argument("moment order k must be >= 1".into()));
    }
    if h < 1 {
        return Err(Error::Argument("window length h must be >= 1".into()));
    }
    let divs: Vec<u64> = q.divisors().into_iter().filter(|&d| d > 1).collect();
    let tuples = (divs.len().max(1) as u128 * h as u128).pow(k);
    if tuples > VK_DIRECT_BUDGET {
        return Err(Error::Budget(format!(
            "v_k_direct enumerates (tau(q)-1)^k h^k = {tuples} tuples, budget {VK_DIRECT_BUDGET}"
        )));
    }
    if divs.is_empty() {
        return Ok(BigRational::zero());
    }
    let ku = k as usize;
    let mut acc = BigRational::zero();
    let mut qidx = vec![0usize; ku];
    let mut mvec = vec![1u64; ku];
    loop {
        // weight prod mu(q_i)/phi(q_i)
        let qs: Vec<u64> = qidx.iter().map(|&i| divs[i]).collect();
        let mut sign = 1i64;
        let mut den = BigInt::from(1u64);
        for &qi in &qs {
            sign *= moebius_u64(qi);
            den *= BigInt::from(phi_u64(qi));
        }
        if sign != 0 {
            // primes appearing in the tuple
            let mut ps: Vec<u64> = Vec::new();
            for &qi in &qs {
                for (p, _) in factorize(qi) {
                    if !ps.contains(&p) {
                        ps.push(p);
                    }
                }
            }
            // sum over m in [1,h]^k of A(q; m)
            let mut inner: i128 = 0;
            mvec.iter_mut().for_each(|m| *m = 1);
            'msum: loop {
                let mut a_val: i128 = 1;
                for &p in &ps {
                    // A_p = (1/p) sum_r prod_{i: p|q_i} (p [m_i = r mod p] - 1)
                    let mut s: i128 = 0;
                    for r in 0..p {
                        let mut f: i128 = 1;
                        for i in 0..ku {
                            if qs[i].is_multiple_of(p) {
                                f *= if mvec[i] % p == r { p as i128 - 1 } else { -1 };
                            }
                        }
                        s += f;
                    }
                    debug_assert_eq!(s % p as i128, 0);
                    a_val *= s / p as i128;
                    if a_val == 0 {
                        break;
                    }
                }
                inner += a_val;
                // odometer over m
                let mut t = 0;
                loop {
                    if t == ku {
                        break 'msum;
                    }
                    mvec[t] += 1;
                    if mvec[t] <= h {
                        break;
                    }
                    mvec[t] = 1;
                    t += 1;
                }
            }
            if inner != 0 {
                let num = BigInt::from(sign) * BigInt::from(inner);
                acc += BigRational::new(num, den);
            }
        }
        // odometer over divisor tuple
        let mut t = 0;
        loop {
            if t == ku {
                return Ok(acc);
            }
            qidx[t] += 1;
            if qidx[t] < divs.len() {
                break;
            }
            qidx[t] = 0;
            t += 1;
        }
    }
}

/// Normality comparison for V_k: the moment, the matching normal main term
/// mu_k V_2^(k/2), and their difference. Reporting only; no asymptotic is
/// asserted at these scales.
#[derive(Debug, Clone)]
pub struct NormalMomentReport {
    pub v_k: f64,
    pub v_2: f64,
    pub main: f64,
    pub residual: f64,
    pub ratio: Option<f64>,
}

pub fn normal_main_report(q: &ModulusQ, h: u64, k: u32) -> Result<NormalMomentReport> {
    let vk = v_k(q, h, k)?.to_f64().unwrap_or(f64::NAN);
    let v2 = v_k(q, h, 2)?.to_f64().unwrap_or(f64::NAN);
    let main = if k.is_multiple_of(2) {
        normal_moment(k) * v2.powi(k as i32 / 2)
    } else {
        0.0
    };
    let residual = vk - main;
    let ratio = (main != 0.0).then(|| vk / main);
    Ok(NormalMomentReport {
        v_k: vk,
        v_2: v2,
        main,
        residual,
        ratio,
    })
}
