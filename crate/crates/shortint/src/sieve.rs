//! Segmented prime/prime-power sieve with streaming window sums.
//!
//! Everything here is streaming: `lambda_events` walks a range segment by
//! segment and never allocates storage proportional to the range, and
//! `window_sums` maintains psi(n+H) - psi(n) incrementally so a 10^8-long
//! moment pass touches each prime power exactly twice.

use crate::error::{Error, Result};
use crate::kahan::Kahan;

/// One position n = p^e with Lambda(n) = log p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimePowerEvent {
    pub n: u64,
    pub log_p: f64,
    pub p: u64,
    pub exponent: u32,
}

/// Sieve tuning knobs. The default segment holds 2^20 odd flags, which
/// stays cache resident on anything current.
#[derive(Debug, Clone)]
pub struct SieveConfig {
    pub segment_length: u64,
    pub max_hi: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            segment_length: 1 << 20,
            max_hi: 1 << 45,
        }
    }
}

impl SieveConfig {
    fn check_range(&self, lo: u64, hi: u64) -> Result<()> {
        if lo < 1 || lo > hi {
            return Err(Error::Range(format!("need 1 <= lo <= hi, got {lo}..{hi}")));
        }
        if hi > self.max_hi {
            return Err(Error::Range(format!(
                "hi = {hi} exceeds configured maximum {}",
                self.max_hi
            )));
        }
        Ok(())
    }
}

/// Simple sieve of the base primes up to and including `limit`.
fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Odd-only composite bitmap for [lo, hi], lo and hi inclusive.
/// Bit i covers the odd number `first_odd + 2i`.
fn sieve_segment(base: &[u64], lo: u64, hi: u64) -> (u64, Vec<u64>) {
    let first_odd = if lo.is_multiple_of(2) { lo + 1 } else { lo };
    let count = if first_odd > hi {
        0
    } else {
        ((hi - first_odd) / 2 + 1) as usize
    };
    let mut words = vec![0u64; count.div_ceil(64)];
    for &p in base.iter().skip(1) {
        // odd primes only
        let p2 = p * p;
        if p2 > hi {
            break;
        }
        let mut start = p2.max(lo.div_ceil(p) * p);
        if start % 2 == 0 {
            start += p;
        }
        let mut m = start;
        while m <= hi {
            let idx = ((m - first_odd) / 2) as usize;
            words[idx / 64] |= 1 << (idx % 64);
            m += 2 * p;
        }
    }
    (first_odd, words)
}

fn segment_events(base: &[u64], lo: u64, hi: u64) -> Vec<PrimePowerEvent> {
    let mut events = Vec::new();
    if lo <= 2 && 2 <= hi {
        events.push(PrimePowerEvent {
            n: 2,
            log_p: (2f64).ln(),
            p: 2,
            exponent: 1,
        });
    }
    // higher powers p^e, e >= 2; their bases are all in the base list
    for &p in base {
        let mut pe = p * p;
        let mut e = 2u32;
        while pe <= hi {
            if pe >= lo {
                events.push(PrimePowerEvent {
                    n: pe,
                    log_p: (p as f64).ln(),
                    p,
                    exponent: e,
                });
            }
            if pe > hi / p {
                break;
            }
            pe *= p;
            e += 1;
        }
    }
    let (first_odd, words) = sieve_segment(base, lo, hi);
    let count = if first_odd > hi {
        0
    } else {
        ((hi - first_odd) / 2 + 1) as usize
    };
    for i in 0..count {
        if words[i / 64] & (1 << (i % 64)) == 0 {
            let n = first_odd + 2 * i as u64;
            if n > 2 {
                events.push(PrimePowerEvent {
                    n,
                    log_p: (n as f64).ln(),
                    p: n,
                    exponent: 1,
                });
            }
        }
    }
    events.sort_unstable_by_key(|e| e.n);
    events
}

/// Streaming iterator over prime-power events in [lo, hi], ascending n.
pub struct LambdaEvents {
    base: Vec<u64>,
    seg_len: u64,
    next_lo: u64,
    hi: u64,
    buf: std::vec::IntoIter<PrimePowerEvent>,
}

impl LambdaEvents {
    fn new(cfg: &SieveConfig, lo: u64, hi: u64) -> Result<Self> {
        cfg.check_range(lo, hi)?;
        let base = small_primes((hi as f64).sqrt() as u64 + 1);
        Ok(LambdaEvents {
            base,
            seg_len: cfg.segment_length.max(2),
            next_lo: lo,
            hi,
            buf: Vec::new().into_iter(),
        })
    }
}

impl Iterator for LambdaEvents {
    type Item = PrimePowerEvent;

    fn next(&mut self) -> Option<PrimePowerEvent> {
        loop {
            if let Some(e) = self.buf.next() {
                return Some(e);
            }
            if self.next_lo > self.hi {
                return None;
            }
            let seg_hi = self.hi.min(self.next_lo.saturating_add(self.seg_len - 1));
            self.buf = segment_events(&self.base, self.next_lo, seg_hi).into_iter();
            self.next_lo = seg_hi + 1;
        }
    }
}

/// Prime-power events in [lo, hi] with the default configuration.
pub fn lambda_events(lo: u64, hi: u64) -> Result<LambdaEvents> {
    lambda_events_with(&SieveConfig::default(), lo, hi)
}

pub fn lambda_events_with(cfg: &SieveConfig, lo: u64, hi: u64) -> Result<LambdaEvents> {
    LambdaEvents::new(cfg, lo, hi)
}

/// The primes in [lo, hi], ascending.
pub fn primes_in(lo: u64, hi: u64) -> Result<Vec<u64>> {
    let cfg = SieveConfig::default();
    cfg.check_range(lo, hi)?;
    Ok(lambda_events_with(&cfg, lo, hi)?
        .filter(|e| e.exponent == 1)
        .map(|e| e.p)
        .collect())
}

/// Chebyshev psi(x) = sum of Lambda(n) for n <= x.
pub fn psi(x: f64) -> Result<f64> {
    if x < 0.0 || !x.is_finite() {
        return Err(Error::Range(format!("psi needs finite x >= 0, got {x}")));
    }
    let n = x.floor() as u64;
    if n < 2 {
        return Ok(0.0);
    }
    let mut acc = Kahan::new();
    for e in lambda_events(1, n)? {
        acc.add(e.log_p);
    }
    Ok(acc.value())
}

/// Streaming (n, D(n)) with D(n) = psi(n+H) - psi(n) - H, for n in
/// [n_from, n_to]. Advancing by one adds Lambda(n+1+H) and removes
/// Lambda(n+1); the running window uses compensated accumulation.
pub struct WindowSums {
    lead: std::iter::Peekable<LambdaEvents>,
    trail: Option<std::iter::Peekable<LambdaEvents>>,
    n: u64,
    n_to: u64,
    h: u64,
    window: Kahan,
    started: bool,
}

impl WindowSums {
    #[inline]
    pub fn h(&self) -> u64 {
        self.h
    }
}

/// Window sums for n = 0..=N (the n = 0 row carries psi(H) - H).
pub fn window_sums(n: u64, h: u64) -> Result<WindowSums> {
    window_sums_range(0, n, h)
}

/// Window sums restricted to n in [n_from, n_to]; shards of a moment pass
/// use this so each shard owns its own sieve state.
pub fn window_sums_range(n_from: u64, n_to: u64, h: u64) -> Result<WindowSums> {
    if h < 1 {
        return Err(Error::Range(format!("window length H must be >= 1, got {h}")));
    }
    if n_from > n_to {
        return Err(Error::Range(format!(
            "need n_from <= n_to, got {n_from}..{n_to}"
        )));
    }
    let cfg = SieveConfig::default();
    cfg.check_range(1, n_to + h)?;
    let lead = lambda_events_with(&cfg, n_from + 1, n_to + h)?.peekable();
    let trail = if n_to > n_from {
        Some(lambda_events_with(&cfg, n_from + 1, n_to)?.peekable())
    } else {
        None
    };
    Ok(WindowSums {
        lead,
        trail,
        n: n_from,
        n_to,
        h,
        window: Kahan::new(),
        started: false,
    })
}

impl Iterator for WindowSums {
    type Item = (u64, f64);

    fn next(&mut self) -> Option<(u64, f64)> {
        if !self.started {
            self.started = true;
            // initial fill: events in (n_from, n_from + H]
            while let Some(e) = self.lead.peek() {
                if e.n > self.n + self.h {
                    break;
                }
                let e = self.lead.next().unwrap();
                self.window.add(e.log_p);
            }
            return Some((self.n, self.window.value() - self.h as f64));
        }
        if self.n >= self.n_to {
            return None;
        }
        self.n += 1;
        while let Some(e) = self.lead.peek() {
            if e.n > self.n + self.h {
                break;
            }
            let e = self.lead.next().unwrap();
            self.window.add(e.log_p);
        }
        if let Some(trail) = self.trail.as_mut() {
            while let Some(e) = trail.peek() {
                if e.n > self.n {
                    break;
                }
                let e = trail.next().unwrap();
                self.window.add(-e.log_p);
            }
        }
        Some((self.n, self.window.value() - self.h as f64))
    }
}
