//! Empirical moments of psi(n+H) - psi(n) - H over n <= N, their
//! theoretical main terms, the standardized distribution with a KS
//! comparison against the normal, and k-tuple residuals.
//!
//! Moment passes shard the n-range at a fixed granularity; each shard owns
//! its sieve state and the per-shard compensated sums merge in shard order,
//! so results do not depend on the worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{normal_moment, B};
use crate::error::{Error, Result};
use crate::kahan::Kahan;
use crate::sieve;
use crate::singular::{singular_series, SeriesConfig, TupleD};

const SHARD_LEN: u64 = 1 << 22;
const KMAX_LIMIT: u32 = 12;

/// One moment order K with its empirical value and the three comparators.
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub k: u32,
    pub empirical: f64,
    pub thm3_main: f64,
    pub conj1: f64,
    pub cramer: f64,
    pub ratio_thm3: Option<f64>,
    pub ratio_conj1: Option<f64>,
    pub ratio_cramer: Option<f64>,
}

fn shards(lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut a = lo;
    while a <= hi {
        let b = hi.min(a + SHARD_LEN - 1);
        out.push((a, b));
        a = b + 1;
    }
    out
}

fn validate_moment_params(n: u64, h: u64, kmax: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::Validation("N must be >= 2".into()));
    }
    if h < 1 {
        return Err(Error::Validation("H must be >= 1".into()));
    }
    if h >= n {
        return Err(Error::Validation("H must be < N".into()));
    }
    if kmax > KMAX_LIMIT {
        return Err(Error::Validation(format!(
            "Kmax must be <= {KMAX_LIMIT}: binary64 power sums degrade beyond that"
        )));
    }
    Ok(())
}

/// M_K(N;H) for K = 0..=kmax in one streaming pass over n = 1..=N.
pub fn empirical_moments(n: u64, h: u64, kmax: u32) -> Result<Vec<MomentReport>> {
    let sums = moment_sums(n, h, kmax)?;
    Ok((0..=kmax)
        .map(|k| {
            let empirical = sums[k as usize];
            let thm3 = thm3_main_term(n, h, k);
            let conj1 = conj1_moment(n, h, k);
            let cramer = cramer_moment(n, h, k);
            let ratio = |c: f64| (c != 0.0).then(|| empirical / c);
            MomentReport {
                k,
                empirical,
                thm3_main: thm3,
                conj1,
                cramer,
                ratio_thm3: ratio(thm3),
                ratio_conj1: ratio(conj1),
                ratio_cramer: ratio(cramer),
            }
        })
        .collect())
}

/// The raw power sums sum_{n=1}^{N} D(n)^K for K = 0..=kmax.
pub fn moment_sums(n: u64, h: u64, kmax: u32) -> Result<Vec<f64>> {
    validate_moment_params(n, h, kmax)?;
    let ranges = shards(1, n);
    let partials: Vec<Result<Vec<Kahan>>> = ranges
        .par_iter()
        .map(|&(a, b)| {
            let mut acc = vec![Kahan::new(); kmax as usize + 1];
            for (_, d) in sieve::window_sums_range(a, b, h)? {
                let mut pw = 1.0;
                for slot in acc.iter_mut().skip(1) {
                    pw *= d;
                    slot.add(pw);
                }
            }
            acc[0].add((b - a + 1) as f64);
            Ok(acc)
        })
        .collect();
    let mut merged = vec![Kahan::new(); kmax as usize + 1];
    for p in partials {
        let p = p?;
        for (m, s) in merged.iter_mut().zip(p) {
            m.merge(s);
        }
    }
    Ok(merged.into_iter().map(|k| k.value()).collect())
}

/// Gauss-Legendre 8-point nodes and weights on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_29),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_29),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// Integral over [1, N] of (log(x/H) + B)^p dx by composite Gauss-Legendre
/// on log-spaced panels (uniform in u = log x); the signed integer power is
/// integrated as-is.
pub fn log_power_integral(n: u64, h: u64, p: i32) -> f64 {
    let u_hi = (n as f64).ln();
    let c = B - (h as f64).ln();
    let panels = 128;
    let w = u_hi / panels as f64;
    let mut acc = Kahan::new();
    for i in 0..panels {
        let a = i as f64 * w;
        let mid = a + w / 2.0;
        let half = w / 2.0;
        for (x, wt) in GL8 {
            let u = mid + half * x;
            acc.add(wt * half * (u + c).powi(p) * u.exp());
        }
    }
    acc.value()
}

/// The main term of the predicted K-th moment:
/// mu_K H^{K/2} Int_1^N (log(x/H) + B)^{K/2} dx for even K, 0 for odd K,
/// N for K = 0. K = 2 uses the analytic antiderivative; higher even K uses
/// panel quadrature.
pub fn thm3_main_term(n: u64, h: u64, k: u32) -> f64 {
    if k == 0 {
        return n as f64;
    }
    if k % 2 == 1 {
        return 0.0;
    }
    let nf = n as f64;
    let hf = h as f64;
    if k == 2 {
        // H [x (log(x/H) + B - 1)] from 1 to N
        return hf * (nf * ((nf / hf).ln() + B - 1.0) - ((1.0 / hf).ln() + B - 1.0));
    }
    normal_moment(k) * hf.powi(k as i32 / 2) * log_power_integral(n, h, k as i32 / 2)
}

/// mu_K N (H log(N/H))^{K/2} for even K, 0 for odd K.
pub fn conj1_moment(n: u64, h: u64, k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let nf = n as f64;
    let hf = h as f64;
    normal_moment(k) * nf * (hf * (nf / hf).ln()).powi(k as i32 / 2)
}

/// The Cramer-model K-th moment comparator mu_K N (H log N)^{K/2}.
pub fn cramer_moment(n: u64, h: u64, k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let nf = n as f64;
    normal_moment(k) * nf * (h as f64 * nf.ln()).powi(k as i32 / 2)
}

/// The Cramer-model variance N H log N (the K = 2 comparator).
pub fn cramer_variance(n: u64, h: u64) -> f64 {
    n as f64 * h as f64 * (n as f64).ln()
}

/// Histogram and KS comparison of the standardized window sums
/// D(n) / sqrt(H log(N/H)).
#[derive(Debug, Clone, Serialize)]
pub struct DistributionReport {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub ks_binned: f64,
    pub ks_exact: Option<f64>,
    pub sample_mean: f64,
    pub sample_variance: f64,
    /// the standardization variance H log(N/H)
    pub standardization: f64,
    pub warning: Option<String>,
}

const HIST_RANGE: f64 = 8.0;
const EXACT_KS_LIMIT: u64 = 10_000_000;

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

struct DistShard {
    counts: Vec<u64>,
    sum: Kahan,
    sum_sq: Kahan,
    samples: Vec<f64>,
}

/// Distribution of the standardized window sums for n = 1..=N; the exact
/// sorted-sample KS is included for N up to 10^7.
pub fn distribution(n: u64, h: u64, bins: usize) -> Result<DistributionReport> {
    validate_moment_params(n, h, 0)?;
    if bins < 10 {
        return Err(Error::Validation("bins must be >= 10".into()));
    }
    let sigma = (h as f64 * (n as f64 / h as f64).ln()).sqrt();
    let keep = n <= EXACT_KS_LIMIT;
    let ranges = shards(1, n);
    let partials: Vec<Result<DistShard>> = ranges
        .par_iter()
        .map(|&(a, b)| {
            let mut sh = DistShard {
                counts: vec![0; bins],
                sum: Kahan::new(),
                sum_sq: Kahan::new(),
                samples: if keep {
                    Vec::with_capacity((b - a + 1) as usize)
                } else {
                    Vec::new()
                },
            };
            for (_, d) in sieve::window_sums_range(a, b, h)? {
                let x = d / sigma;
                let idx = (((x + HIST_RANGE) / (2.0 * HIST_RANGE)) * bins as f64)
                    .floor()
                    .clamp(0.0, bins as f64 - 1.0) as usize;
                sh.counts[idx] += 1;
                sh.sum.add(x);
                sh.sum_sq.add(x * x);
                if keep {
                    sh.samples.push(x);
                }
            }
            Ok(sh)
        })
        .collect();
    let mut counts = vec![0u64; bins];
    let mut sum = Kahan::new();
    let mut sum_sq = Kahan::new();
    let mut samples = Vec::new();
    for p in partials {
        let p = p?;
        for (c, pc) in counts.iter_mut().zip(&p.counts) {
            *c += pc;
        }
        sum.merge(p.sum);
        sum_sq.merge(p.sum_sq);
        samples.extend(p.samples);
    }
    let nf = n as f64;
    let mean = sum.value() / nf;
    let variance = sum_sq.value() / nf - mean * mean;
    let edges: Vec<f64> = (0..=bins)
        .map(|i| -HIST_RANGE + 2.0 * HIST_RANGE * i as f64 / bins as f64)
        .collect();
    // binned KS: empirical CDF at the bin edges against Phi
    let mut ks_binned = normal_cdf(edges[0]);
    let mut cum = 0u64;
    for (i, &c) in counts.iter().enumerate() {
        cum += c;
        let d = (cum as f64 / nf - normal_cdf(edges[i + 1])).abs();
        ks_binned = ks_binned.max(d);
    }
    let ks_exact = keep.then(|| {
        samples.par_sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d = 0.0f64;
        for (i, &x) in samples.iter().enumerate() {
            let f = normal_cdf(x);
            d = d.max((f - i as f64 / nf).abs());
            d = d.max(((i + 1) as f64 / nf - f).abs());
        }
        d
    });
    let log_n = nf.ln();
    let warning = (h as f64 <= log_n || h as f64 >= nf.powf(0.9)).then(|| {
        format!(
            "H={h} is outside the heuristic regime (log N, N^0.9) = ({log_n:.1}, {:.1})",
            nf.powf(0.9)
        )
    });
    Ok(DistributionReport {
        edges,
        counts,
        ks_binned,
        ks_exact,
        sample_mean: mean,
        sample_variance: variance,
        standardization: sigma * sigma,
        warning,
    })
}

/// Histogram + KS machinery from an arbitrary standardized sample stream;
/// the self-test hook for the distribution path.
pub fn distribution_from_samples(
    samples: impl IntoIterator<Item = f64>,
    bins: usize,
) -> DistributionReport {
    let mut counts = vec![0u64; bins];
    let mut sum = Kahan::new();
    let mut sum_sq = Kahan::new();
    let mut sorted: Vec<f64> = Vec::new();
    for x in samples {
        let idx = (((x + HIST_RANGE) / (2.0 * HIST_RANGE)) * bins as f64)
            .floor()
            .clamp(0.0, bins as f64 - 1.0) as usize;
        counts[idx] += 1;
        sum.add(x);
        sum_sq.add(x * x);
        sorted.push(x);
    }
    let nf = sorted.len() as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|i| -HIST_RANGE + 2.0 * HIST_RANGE * i as f64 / bins as f64)
        .collect();
    let mut ks_binned = normal_cdf(edges[0]);
    let mut cum = 0u64;
    for (i, &c) in counts.iter().enumerate() {
        cum += c;
        ks_binned = ks_binned.max((cum as f64 / nf - normal_cdf(edges[i + 1])).abs());
    }
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = normal_cdf(x);
        d = d.max((f - i as f64 / nf).abs());
        d = d.max(((i + 1) as f64 / nf - f).abs());
    }
    let mean = sum.value() / nf;
    DistributionReport {
        edges,
        counts,
        ks_binned,
        ks_exact: Some(d),
        sample_mean: mean,
        sample_variance: sum_sq.value() / nf - mean * mean,
        standardization: 1.0,
        warning: None,
    }
}

/// The k-tuple sum, its predicted main term S(D) N, and the residual.
#[derive(Debug, Clone, Serialize)]
pub struct KTupleResidual {
    pub offsets: String,
    pub n: u64,
    pub sum: f64,
    pub singular: f64,
    pub main: f64,
    pub residual: f64,
}

/// Streams Lambda with k staggered cursors, accumulating
/// sum_{n=1}^{N} prod_i Lambda(n + d_i).
pub fn ktuple_residual(d: &TupleD, n: u64) -> Result<KTupleResidual> {
    if d.k() == 0 {
        return Err(Error::Validation("offset tuple must be nonempty".into()));
    }
    if d.k() > 4 {
        return Err(Error::Validation(
            "k <= 4: higher orders drown in the sieve stream".into(),
        ));
    }
    if n < 1 {
        return Err(Error::Validation("N must be >= 1".into()));
    }
    let offs = d.offsets().to_vec();
    let mut cursors = Vec::with_capacity(offs.len());
    for &di in &offs {
        cursors.push(sieve::lambda_events(di + 1, n + di)?.peekable());
    }
    let mut sum = Kahan::new();
    'outer: loop {
        // the largest aligned position among the heads
        let mut target = 0u64;
        for (it, &di) in cursors.iter_mut().zip(&offs) {
            match it.peek() {
                None => break 'outer,
                Some(e) => target = target.max(e.n - di),
            }
        }
        let mut aligned = true;
        let mut prod = 1.0f64;
        for (it, &di) in cursors.iter_mut().zip(&offs) {
            while it.peek().is_some_and(|e| e.n - di < target) {
                it.next();
            }
            match it.peek() {
                None => break 'outer,
                Some(e) => {
                    if e.n - di == target {
                        prod *= e.log_p;
                    } else {
                        aligned = false;
                    }
                }
            }
        }
        if aligned {
            sum.add(prod);
            for it in cursors.iter_mut() {
                it.next();
            }
        }
    }
    let cfg = SeriesConfig::default();
    let singular = singular_series(d, &cfg);
    let main = singular * n as f64;
    let total = sum.value();
    Ok(KTupleResidual {
        offsets: d.to_string(),
        n,
        sum: total,
        singular,
        main,
        residual: total - main,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_zero_is_n() {
        let r = empirical_moments(1000, 30, 3).unwrap();
        assert_eq!(r[0].empirical, 1000.0);
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn moments_match_direct_recomputation() {
        let n = 50_000u64;
        let h = 100u64;
        let reports = empirical_moments(n, h, 2).unwrap();
        // direct two-pass oracle from the raw window stream
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (i, d) in sieve::window_sums(n, h).unwrap() {
            if i >= 1 {
                m1 += d;
                m2 += d * d;
            }
        }
        assert!((reports[1].empirical - m1).abs() <= 1e-6 * m1.abs().max(1.0));
        assert!((reports[2].empirical - m2).abs() <= 1e-6 * m2);
        // Cauchy-Schwarz on the sample
        assert!(reports[2].empirical * reports[0].empirical >= m1 * m1);
        // first-moment envelope H sqrt(N) log^2 N
        let nf = n as f64;
        assert!(m1.abs() <= h as f64 * nf.sqrt() * nf.ln() * nf.ln());
    }

    #[test]
    fn even_moments_nonnegative() {
        let r = empirical_moments(20_000, 50, 4).unwrap();
        assert!(r[2].empirical >= 0.0);
        assert!(r[4].empirical >= 0.0);
    }

    #[test]
    fn validation_errors() {
        assert!(empirical_moments(10, 100, 2).is_err());
        assert!(empirical_moments(1000, 10, 13).is_err());
        assert!(distribution(1000, 10, 5).is_err());
    }

    #[test]
    fn thm3_examples() {
        assert_eq!(thm3_main_term(1000, 10, 3), 0.0);
        let v = thm3_main_term(1_000_000, 1000, 2);
        assert!((v - 4.4927e9).abs() < 1e6, "thm3 K=2: {v}");
        // closed form against quadrature
        let q = 1.0 * 1000.0 * log_power_integral(1_000_000, 1000, 1);
        assert!((v - q).abs() <= 1e-8 * v.abs(), "{v} vs {q}");
    }

    #[test]
    fn thm3_quadrature_matches_antiderivative() {
        // closed-form oracle: Int (log(x/H)+B)^p dx =
        // [x sum_j (-1)^(p-j) p!/j! (log(x/H)+B)^j]
        fn closed(n: u64, h: u64, p: i32) -> f64 {
            let eval = |x: f64| -> f64 {
                let l = (x / h as f64).ln() + B;
                let mut c = 1.0; // p!/j! at j = p
                let mut acc = 0.0;
                let mut sign = 1.0;
                for j in (0..=p).rev() {
                    acc += sign * c * l.powi(j);
                    c *= j as f64;
                    sign = -sign;
                }
                x * acc
            };
            eval(n as f64) - eval(1.0)
        }
        for p in 1..=4 {
            for (n, h) in [(100_000u64, 50u64), (1_000_000, 1000)] {
                let q = log_power_integral(n, h, p);
                let c = closed(n, h, p);
                assert!(
                    (q - c).abs() <= 1e-8 * c.abs(),
                    "p={p} n={n} h={h}: {q} vs {c}"
                );
            }
        }
    }

    #[test]
    fn comparator_values() {
        let c = conj1_moment(1_000_000, 1000, 2);
        assert!((c - 6.9078e9).abs() < 1e6, "conj1: {c}");
        let cr = cramer_variance(1_000_000, 1000);
        assert!((cr - 1.3816e10).abs() < 1e7, "cramer: {cr}");
        assert!((cramer_variance(3, 1) - 3.0 * (3f64).ln()).abs() < 1e-12);
        assert_eq!(conj1_moment(1000, 10, 3), 0.0);
    }

    #[test]
    fn comparator_ordering_identity() {
        // H = N^alpha: conj1(K=2) = (1 - alpha) * cramer exactly
        for alpha in [0.25f64, 0.5, 0.75] {
            let n = 1_000_000u64;
            let h = (n as f64).powf(alpha).round() as u64;
            let a = (h as f64).ln() / (n as f64).ln();
            let lhs = conj1_moment(n, h, 2);
            let rhs = (1.0 - a) * cramer_variance(n, h);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        }
    }

    #[test]
    fn distribution_counts_and_moments() {
        let n = 20_000u64;
        let rep = distribution(n, 100, 40).unwrap();
        assert_eq!(rep.counts.iter().sum::<u64>(), n);
        assert!(rep.ks_exact.is_some());
        let ks = rep.ks_exact.unwrap();
        assert!(ks > 0.0 && ks < 1.0);
        assert!(rep.ks_binned <= ks + 1e-12);
        assert!(rep.sample_mean.abs() < 0.2);
    }

    #[test]
    fn distribution_synthetic_normal_converges() {
        use rand::prelude::*;
        use rand_distr::StandardNormal;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let small: Vec<f64> = (0..500).map(|_| rng.sample(StandardNormal)).collect();
        let big: Vec<f64> = (0..200_000).map(|_| rng.sample(StandardNormal)).collect();
        let ks_small = distribution_from_samples(small, 40).ks_exact.unwrap();
        let ks_big = distribution_from_samples(big, 40).ks_exact.unwrap();
        assert!(ks_big < ks_small);
        assert!(ks_big < 0.01, "ks for 2e5 normals: {ks_big}");
    }

    #[test]
    fn ktuple_singleton_reproduces_psi() {
        let d = TupleD::new(vec![1]).unwrap();
        let r = ktuple_residual(&d, 100).unwrap();
        let psi101 = sieve::psi(101.0).unwrap();
        assert!((r.sum - psi101).abs() < 1e-12);
        assert_eq!(r.singular, 1.0);
        assert!((r.residual - (psi101 - 100.0)).abs() < 1e-12);
    }

    #[test]
    fn ktuple_pair_hand_case() {
        // D = {1,2}, N = 9: aligned prime powers at n = 1,2,3,6,7
        let d = TupleD::new(vec![1, 2]).unwrap();
        let r = ktuple_residual(&d, 9).unwrap();
        let l = |x: u64| -> f64 {
            match x {
                2 | 4 | 8 => (2f64).ln(),
                3 | 9 => (3f64).ln(),
                5 => (5f64).ln(),
                7 => (7f64).ln(),
                11 => (11f64).ln(),
                _ => 0.0,
            }
        };
        let oracle: f64 = (1..=9).map(|n| l(n + 1) * l(n + 2)).sum();
        assert!((r.sum - oracle).abs() < 1e-12, "{} vs {oracle}", r.sum);
        assert_eq!(r.singular, 0.0);
        assert_eq!(r.residual, r.sum);
        assert!((oracle - 4.749).abs() < 1e-3);
    }

    #[test]
    fn ktuple_matches_brute_force() {
        let d = TupleD::new(vec![2, 6, 8]).unwrap();
        let n = 5000u64;
        let r = ktuple_residual(&d, n).unwrap();
        // brute force over a materialized Lambda table
        let mut lam = vec![0.0f64; (n + 9) as usize];
        for e in sieve::lambda_events(1, n + 8).unwrap() {
            lam[e.n as usize] = e.log_p;
        }
        let mut oracle = 0.0;
        for m in 1..=n as usize {
            let p = lam[m + 2] * lam[m + 6] * lam[m + 8];
            if p != 0.0 {
                oracle += p;
            }
        }
        assert!(
            (r.sum - oracle).abs() < 1e-6,
            "ktuple sum {} vs oracle {oracle}",
            r.sum
        );
    }

    #[test]
    fn ktuple_guards() {
        assert!(ktuple_residual(&TupleD::empty(), 10).is_err());
        let d5 = TupleD::new(vec![1, 2, 3, 4, 5]).unwrap();
        assert!(ktuple_residual(&d5, 10).is_err());
    }
}
