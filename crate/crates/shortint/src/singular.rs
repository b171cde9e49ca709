//! Singular series for offset tuples and their averages over [1, h].
//!
//! The series for a tuple D is the Euler product over primes of
//! (1 - 1/p)^(-k) (1 - nu_p(D)/p), where nu_p counts distinct residues of D
//! mod p. For p beyond the tuple's span the factor depends only on k, so the
//! product splits into a short tuple-specific part, a cached generic part up
//! to the cutoff y, and an analytic tail computed from prime zeta values.
//! The centered transform s0 and the tuple sums R_k, pair sums and Gallagher
//! sums are built on top.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use crate::constants::{normal_moment, A};
use crate::error::{Error, Result};
use crate::kahan::Kahan;
use crate::sieve;

/// A sorted set of distinct integer offsets, all >= 1. Empty is allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TupleD {
    offsets: Vec<u64>,
}

impl TupleD {
    pub fn new(mut offsets: Vec<u64>) -> Result<Self> {
        offsets.sort_unstable();
        if offsets.first().is_some_and(|&d| d < 1) {
            return Err(Error::Argument("offsets must be >= 1".into()));
        }
        if offsets.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Argument("offsets must be distinct".into()));
        }
        Ok(TupleD { offsets })
    }

    pub fn empty() -> Self {
        TupleD { offsets: Vec::new() }
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn k(&self) -> usize {
        self.offsets.len()
    }

    pub fn span(&self) -> u64 {
        match (self.offsets.first(), self.offsets.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0,
        }
    }

    pub fn translate(&self, c: u64) -> Self {
        TupleD {
            offsets: self.offsets.iter().map(|d| d + c).collect(),
        }
    }
}

impl fmt::Display for TupleD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.offsets.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for TupleD {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut v = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let d: u64 = part
                .parse()
                .map_err(|_| Error::Argument(format!("bad offset {part:?}")))?;
            v.push(d);
        }
        TupleD::new(v)
    }
}

/// Truncation control for the Euler product.
#[derive(Debug, Clone)]
pub struct SeriesConfig {
    /// Starting prime cutoff y; None picks max(2 * span, 10^5). The cutoff
    /// doubles until the value moves by less than `target_rel_tol`.
    pub prime_cutoff: Option<u64>,
    pub target_rel_tol: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            prime_cutoff: None,
            target_rel_tol: 1e-9,
        }
    }
}

// ---------------------------------------------------------------------------
// prime zeta tail
// ---------------------------------------------------------------------------

/// Riemann zeta at integer s >= 2, by direct summation with an
/// Euler-Maclaurin tail at M = 1000.
fn zeta_int(s: i32) -> f64 {
    debug_assert!(s >= 2);
    if s > 64 {
        let mut acc = 1.0;
        let mut n = 2u64;
        loop {
            let t = (n as f64).powi(-s);
            if t < 1e-22 {
                break;
            }
            acc += t;
            n += 1;
        }
        return acc;
    }
    const M: f64 = 1000.0;
    let mut acc = Kahan::new();
    let mut n = 1u64;
    while (n as f64) < M {
        acc.add((n as f64).powi(-s));
        n += 1;
    }
    let sf = s as f64;
    acc.add(M.powi(1 - s) / (sf - 1.0));
    acc.add(M.powi(-s) / 2.0);
    acc.add(sf * M.powi(-s - 1) / 12.0);
    acc.add(-sf * (sf + 1.0) * (sf + 2.0) * M.powi(-s - 3) / 720.0);
    acc.value()
}

fn moebius_small(n: u32) -> i32 {
    let mut m = n;
    let mut count = 0;
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            m /= d;
            if m.is_multiple_of(d) {
                return 0;
            }
            count += 1;
        }
        d += 1;
    }
    if m > 1 {
        count += 1;
    }
    if count % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Prime zeta P(s) = sum over primes of p^(-s), via
/// P(s) = sum_m mu(m)/m log zeta(s m).
fn prime_zeta(s: i32) -> f64 {
    let mut acc = 0.0;
    let mut m = 1i32;
    while s * m <= 128 {
        let mu = moebius_small(m as u32);
        if mu != 0 {
            let lz = zeta_int(s * m).ln();
            acc += mu as f64 / m as f64 * lz;
            if lz.abs() < 1e-21 {
                break;
            }
        }
        m += 1;
    }
    acc
}

// ---------------------------------------------------------------------------
// cached generic tables
// ---------------------------------------------------------------------------

/// Prefix products of the generic local factor g_k(p) = (1-1/p)^(-k)(1-k/p)
/// over primes k < p <= y, plus the analytic log tail beyond y.
struct GenericTable {
    primes: Arc<Vec<u64>>,
    /// prefix[i] = product of g_k over primes p_j <= p_i with p_j > k
    prefix: Vec<f64>,
    log_tail: f64,
}

fn prime_list(y: u64) -> Arc<Vec<u64>> {
    static LISTS: OnceLock<RwLock<HashMap<u64, Arc<Vec<u64>>>>> = OnceLock::new();
    let lock = LISTS.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = lock.read().unwrap().get(&y) {
        return v.clone();
    }
    let list = Arc::new(sieve::primes_in(1, y).expect("prime table"));
    lock.write().unwrap().entry(y).or_insert(list).clone()
}

type TableCache = RwLock<HashMap<(u32, u64), Arc<GenericTable>>>;

fn generic_table(k: u32, y: u64) -> Arc<GenericTable> {
    static TABLES: OnceLock<TableCache> = OnceLock::new();
    let lock = TABLES.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(t) = lock.read().unwrap().get(&(k, y)) {
        return t.clone();
    }
    let primes = prime_list(y);
    let kf = k as f64;
    let mut prefix = Vec::with_capacity(primes.len());
    let mut acc = 1.0f64;
    for &p in primes.iter() {
        if p > k as u64 {
            let pf = p as f64;
            acc *= (pf / (pf - 1.0)).powi(k as i32) * ((pf - kf) / pf);
        }
        prefix.push(acc);
    }
    // log of the tail product over p > y: sum over j >= 2 of
    // (k - k^j)/j * P(j, > y)
    let mut log_tail = 0.0;
    for j in 2..=64i32 {
        let mut below = 0.0;
        for &p in primes.iter() {
            let t = (p as f64).powi(-j);
            if t < 1e-20 {
                break;
            }
            below += t;
        }
        let tail_j = (prime_zeta(j) - below).max(0.0);
        let term = (kf - kf.powi(j)) / j as f64 * tail_j;
        log_tail += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    let table = Arc::new(GenericTable {
        primes,
        prefix,
        log_tail,
    });
    lock.write().unwrap().entry((k, y)).or_insert(table).clone()
}

// ---------------------------------------------------------------------------
// local data
// ---------------------------------------------------------------------------

fn is_prime_u64(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn nu_raw(offsets: &[u64], p: u64) -> u64 {
    // distinct residues mod p; k is small so a sorted stack scan beats
    // hashing
    if offsets.len() > 32 {
        let mut res: Vec<u64> = offsets.iter().map(|d| d % p).collect();
        res.sort_unstable();
        res.dedup();
        return res.len() as u64;
    }
    let mut buf = [0u64; 32];
    let mut len = 0;
    for &d in offsets {
        let r = d % p;
        let pos = buf[..len].partition_point(|&x| x < r);
        if pos < len && buf[pos] == r {
            continue;
        }
        buf.copy_within(pos..len, pos + 1);
        buf[pos] = r;
        len += 1;
        if len as u64 == p {
            break;
        }
    }
    len as u64
}

fn local_factor_raw(k: u32, p: u64, nu: u64) -> f64 {
    let pf = p as f64;
    (pf / (pf - 1.0)).powi(k as i32) * ((pf - nu as f64) / pf)
}

/// Number of distinct residue classes mod p occupied by D.
pub fn nu_p(d: &TupleD, p: u64) -> Result<u32> {
    if d.k() == 0 {
        return Err(Error::Argument("nu_p needs a nonempty tuple".into()));
    }
    if !is_prime_u64(p) {
        return Err(Error::Argument(format!("{p} is not prime")));
    }
    Ok(nu_raw(d.offsets(), p) as u32)
}

/// The local Euler factor (1 - 1/p)^(-k) (1 - nu_p(D)/p).
pub fn local_factor(d: &TupleD, p: u64) -> Result<f64> {
    let nu = nu_p(d, p)?;
    Ok(local_factor_raw(d.k() as u32, p, nu as u64))
}

/// The same local factor evaluated from the other side: the weighted
/// exponential sum over q_i | p with admissible a-tuples, enumerated
/// directly. Must agree with `local_factor`.
pub fn a_local_sum(d: &TupleD, p: u64) -> Result<f64> {
    let k = d.k();
    if k == 0 {
        return Err(Error::Argument("a_local_sum needs a nonempty tuple".into()));
    }
    if !is_prime_u64(p) {
        return Err(Error::Argument(format!("{p} is not prime")));
    }
    if k > 4 || p > 100 {
        return Err(Error::Budget(format!(
            "a_local_sum enumeration is (p-1)^k; need k <= 4 and p <= 100, got k={k}, p={p}"
        )));
    }
    let pu = p as usize;
    let dm: Vec<u64> = d.offsets().iter().map(|&x| x % p).collect();
    let cos_table: Vec<f64> = (0..pu)
        .map(|s| (2.0 * std::f64::consts::PI * s as f64 / p as f64).cos())
        .collect();
    let mut total = 0.0f64;
    let mut counts = vec![0u64; pu];
    for mask in 0u32..(1 << k) {
        let j = mask.count_ones() as usize;
        let weight = {
            // product of mu(p)/phi(p) = -1/(p-1) over chosen coordinates
            let w = 1.0 / (p as f64 - 1.0);
            let mut acc = 1.0;
            for _ in 0..j {
                acc *= -w;
            }
            acc
        };
        if j == 0 {
            total += weight; // empty a-tuple contributes e(0) = 1
            continue;
        }
        if j == 1 {
            continue; // a/p is never an integer for 1 <= a < p
        }
        let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        counts.iter_mut().for_each(|c| *c = 0);
        // enumerate admissible tuples: free coordinates a_1..a_{j-1},
        // the last one is forced by the integrality of sum a_i / p
        let free = j - 1;
        let mut a = vec![1u64; free];
        loop {
            let sum_a: u64 = a.iter().sum();
            let last = (p - sum_a % p) % p;
            if last != 0 {
                let mut s = last * dm[idx[free]] % p;
                for (t, &ai) in a.iter().enumerate() {
                    s = (s + ai * dm[idx[t]]) % p;
                }
                counts[s as usize] += 1;
            }
            // odometer over [1, p-1]^free
            let mut t = 0;
            loop {
                if t == free {
                    break;
                }
                a[t] += 1;
                if a[t] < p {
                    break;
                }
                a[t] = 1;
                t += 1;
            }
            if t == free {
                break;
            }
        }
        let mut a_sum = Kahan::new();
        for (s, &c) in counts.iter().enumerate() {
            if c > 0 {
                a_sum.add(c as f64 * cos_table[s]);
            }
        }
        total += weight * a_sum.value();
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// the series itself
// ---------------------------------------------------------------------------

fn eval_at_cutoff(offsets: &[u64], y: u64) -> f64 {
    let k = offsets.len() as u32;
    if k == 0 {
        return 1.0;
    }
    let span = offsets[offsets.len() - 1] - offsets[0];
    let p0 = span.max(k as u64);
    let table = generic_table(k, y);
    let mut tuple_part = 1.0f64;
    let mut idx = table.primes.len();
    for (i, &p) in table.primes.iter().enumerate() {
        if p > p0 {
            idx = i;
            break;
        }
        let nu = nu_raw(offsets, p);
        if nu == p {
            return 0.0;
        }
        tuple_part *= local_factor_raw(k, p, nu);
    }
    let f_y = *table.prefix.last().unwrap_or(&1.0);
    let f_p0 = if idx == 0 { 1.0 } else { table.prefix[idx - 1] };
    tuple_part * (f_y / f_p0) * table.log_tail.exp()
}

fn eval_series(offsets: &[u64], cfg: &SeriesConfig) -> f64 {
    let k = offsets.len();
    if k == 0 {
        return 1.0;
    }
    if k == 1 {
        return 1.0; // factors cancel identically
    }
    let span = offsets[k - 1] - offsets[0];
    let mut y = cfg
        .prime_cutoff
        .unwrap_or((2 * span).max(100_000))
        .max(span + 1)
        .max(100);
    let mut v = eval_at_cutoff(offsets, y);
    if v == 0.0 {
        return 0.0;
    }
    for _ in 0..8 {
        let v2 = eval_at_cutoff(offsets, 2 * y);
        if (v2 - v).abs() <= cfg.target_rel_tol * v2.abs() {
            return v2;
        }
        v = v2;
        y *= 2;
    }
    v
}

/// The singular series of D. Exactly 0 when some prime has nu_p(D) = p;
/// 1 for the empty tuple and for singletons.
pub fn singular_series(d: &TupleD, cfg: &SeriesConfig) -> f64 {
    eval_series(d.offsets(), cfg)
}

const SUBSET_BUDGET_K: usize = 20;

/// The centered series s0(D) = sum over subsets I of D of
/// (-1)^(|D| - |I|) S(I), with subset values memoized.
pub fn s0(d: &TupleD, cfg: &SeriesConfig) -> Result<f64> {
    let k = d.k();
    if k > SUBSET_BUDGET_K {
        return Err(Error::Budget(format!(
            "s0 enumerates 2^k subsets; need k <= {SUBSET_BUDGET_K}, got {k}"
        )));
    }
    let subs = subset_series(d.offsets(), cfg);
    Ok(s0_from_memo(d.k(), (1u32 << k) - 1, &subs))
}

/// Reconstruct S(D) as the sum of s0 over all subsets; must round-trip to
/// `singular_series`.
pub fn s_from_s0(d: &TupleD, cfg: &SeriesConfig) -> Result<f64> {
    let k = d.k();
    if k > SUBSET_BUDGET_K {
        return Err(Error::Budget(format!(
            "s_from_s0 enumerates subsets of subsets; need k <= {SUBSET_BUDGET_K}, got {k}"
        )));
    }
    let subs = subset_series(d.offsets(), cfg);
    let mut acc = Kahan::new();
    for mask in 0..(1u32 << k) {
        acc.add(s0_from_memo(k, mask, &subs));
    }
    Ok(acc.value())
}

/// Series values for every subset mask of `offsets`.
fn subset_series(offsets: &[u64], cfg: &SeriesConfig) -> Vec<f64> {
    let k = offsets.len();
    let mut vals = vec![1.0f64; 1 << k];
    let mut scratch = Vec::with_capacity(k);
    for mask in 0..(1u32 << k) {
        let c = mask.count_ones();
        if c < 2 {
            continue; // empty and singleton subsets are exactly 1
        }
        scratch.clear();
        for (i, &d) in offsets.iter().enumerate() {
            if mask & (1 << i) != 0 {
                scratch.push(d);
            }
        }
        vals[mask as usize] = eval_series(&scratch, cfg);
    }
    vals
}

/// s0 of the subset `mask`, given memoized series values for all submasks.
fn s0_from_memo(_k: usize, mask: u32, vals: &[f64]) -> f64 {
    let size = mask.count_ones();
    let mut acc = 0.0;
    let mut sub = mask;
    loop {
        let sign = if (size - sub.count_ones()).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        acc += sign * vals[sub as usize];
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & mask;
    }
    acc
}

// ---------------------------------------------------------------------------
// tuple sums over [1, h]
// ---------------------------------------------------------------------------

const TUPLE_BUDGET: u128 = 100_000_000;

fn check_tuple_budget(h: u64, k: u32, what: &str) -> Result<()> {
    let mut b: u128 = 1;
    for _ in 0..k {
        b = b.saturating_mul(h as u128);
        if b > TUPLE_BUDGET {
            return Err(Error::Budget(format!(
                "{what} enumerates h^k ordered tuples; h^k = {}^{k} exceeds the budget {TUPLE_BUDGET}",
                h
            )));
        }
    }
    Ok(())
}

/// Series values for pairs, indexed by the difference: entry m-1 holds
/// S({d, d+m}). The series depends only on the difference, which makes the
/// pair sums O(h) series evaluations.
fn pair_values(h: u64, cfg: &SeriesConfig) -> Vec<f64> {
    (1..h)
        .map(|m| eval_series(&[1, 1 + m], cfg))
        .collect()
}

/// Evaluate s0 of a sorted tuple through the pair cache; subsets of size
/// >= 3 fall back to the full product.
fn s0_cached(offsets: &[u64], pairs: &[f64], cfg: &SeriesConfig, scratch: &mut Vec<u64>) -> f64 {
    let k = offsets.len();
    let full = (1u32 << k) - 1;
    let mut acc = 0.0;
    for mask in 0..=full {
        let c = mask.count_ones();
        let s = match c {
            0 | 1 => 1.0,
            2 => {
                let i = mask.trailing_zeros() as usize;
                let j = (31 - mask.leading_zeros()) as usize;
                pairs[(offsets[j] - offsets[i] - 1) as usize]
            }
            _ => {
                scratch.clear();
                for (i, &d) in offsets.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        scratch.push(d);
                    }
                }
                eval_series(scratch, cfg)
            }
        };
        let sign = if (k as u32 - c).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += sign * s;
    }
    acc
}

fn for_each_combination(h: u64, k: usize, mut f: impl FnMut(&[u64])) {
    if k == 0 {
        f(&[]);
        return;
    }
    if (h as usize) < k {
        return;
    }
    let mut c: Vec<u64> = (1..=k as u64).collect();
    loop {
        f(&c);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if c[i] < h - (k - 1 - i) as u64 {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k as u64).map(|x| x as f64).product()
}

/// R_k(h): the sum of s0(D) over ordered tuples of k distinct offsets in
/// [1, h], evaluated as k! times the sum over sorted sets.
pub fn r_k(h: u64, k: u32, cfg: &SeriesConfig) -> Result<f64> {
    if h < 1 {
        return Err(Error::Argument("r_k needs h >= 1".into()));
    }
    check_tuple_budget(h, k, "r_k")?;
    if k == 0 {
        return Ok(1.0);
    }
    let pairs = pair_values(h, cfg);
    let mut acc = Kahan::new();
    let mut scratch = Vec::new();
    for_each_combination(h, k as usize, |set| {
        acc.add(s0_cached(set, &pairs, cfg, &mut scratch));
    });
    Ok(factorial(k) * acc.value())
}

/// The predicted size of R_k(h): mu_k (-h log h + A h)^(k/2) for even k
/// (signed integer power), 0 for odd k.
pub fn r_k_asymptotic(h: u64, k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let hf = h as f64;
    let base = -hf * hf.ln() + A * hf;
    normal_moment(k) * base.powi(k as i32 / 2)
}

/// Sum of S({d1, d2}) over ordered distinct pairs in [1, h].
pub fn pair_sum(h: u64, cfg: &SeriesConfig) -> Result<f64> {
    if h < 1 {
        return Err(Error::Argument("pair_sum needs h >= 1".into()));
    }
    let pairs = pair_values(h, cfg);
    let mut acc = Kahan::new();
    for m in 1..h {
        acc.add(2.0 * (h - m) as f64 * pairs[(m - 1) as usize]);
    }
    Ok(acc.value())
}

/// Sum of S(D) over ordered tuples of k distinct offsets in [1, h].
pub fn gallagher_sum(h: u64, k: u32, cfg: &SeriesConfig) -> Result<f64> {
    if h < 1 {
        return Err(Error::Argument("gallagher_sum needs h >= 1".into()));
    }
    check_tuple_budget(h, k, "gallagher_sum")?;
    match k {
        0 => Ok(1.0),
        1 => Ok(h as f64), // singletons are exactly 1
        2 => pair_sum(h, cfg),
        _ => {
            let mut acc = Kahan::new();
            for_each_combination(h, k as usize, |set| {
                acc.add(eval_series(set, cfg));
            });
            Ok(factorial(k) * acc.value())
        }
    }
}
