//! Two independent evidence channels: moments of cosine sums over zeta-zero
//! ordinates ingested from text tables, and Monte Carlo moments of
//! sum cos(2 pi X_n) for independent uniform X_n, which realizes the
//! random-matrix trace distribution exactly.

use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::normal_moment;
use crate::error::{Error, Result};
use crate::kahan::Kahan;

/// Ascending ordinates of zeta zeros.
#[derive(Debug, Clone)]
pub struct ZeroTable {
    ordinates: Vec<f64>,
}

impl ZeroTable {
    pub fn from_ordinates(ordinates: Vec<f64>) -> Result<Self> {
        if ordinates.is_empty() {
            return Err(Error::Argument("zero table is empty".into()));
        }
        for (i, w) in ordinates.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(Error::Argument(format!(
                    "ordinates must be strictly increasing (entries {} and {})",
                    i,
                    i + 1
                )));
            }
        }
        if ordinates[0] <= 0.0 {
            return Err(Error::Argument("ordinates must be positive".into()));
        }
        Ok(ZeroTable { ordinates })
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn max_ordinate(&self) -> f64 {
        *self.ordinates.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }
}

/// Parse a zero table: UTF-8 text, one decimal ordinate per line,
/// ascending; blank lines and lines starting with '#' are ignored.
pub fn load_zeros(path: impl AsRef<Path>) -> Result<ZeroTable> {
    let file = std::fs::File::open(path.as_ref())?;
    let mut ordinates = Vec::new();
    let mut prev: Option<f64> = None;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v: f64 = trimmed.parse().map_err(|_| Error::Parse {
            line: idx + 1,
            msg: format!("not a number: {trimmed:?}"),
        })?;
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("ordinate must be positive and finite, got {v}"),
            });
        }
        if let Some(p) = prev {
            if v <= p {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("ordinates out of order: {v} after {p}"),
                });
            }
        }
        prev = Some(v);
        ordinates.push(v);
    }
    if ordinates.is_empty() {
        return Err(Error::Argument("zero table is empty".into()));
    }
    ZeroTable::from_ordinates(ordinates)
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroMomentReport {
    pub t: f64,
    pub x: f64,
    pub k: u32,
    pub zeros_used: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
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

/// lhs = Int_1^X (sum_{gamma <= T} cos(gamma log x))^k dx against the
/// reference rhs = mu_k X (T/(4 pi) log T)^{k/2}. The integral runs on
/// log-spaced panels (uniform in u = log x) whose width is capped at
/// pi/(10 T) so the fastest oscillation is resolved.
pub fn zero_moment(table: &ZeroTable, t: f64, x: f64, k: u32) -> Result<ZeroMomentReport> {
    if !(1..=8).contains(&k) {
        return Err(Error::Validation("k must be in 1..=8".into()));
    }
    if x < 2.0 || !x.is_finite() {
        return Err(Error::Validation("X must be finite and >= 2".into()));
    }
    if t > table.max_ordinate() {
        return Err(Error::Validation(format!(
            "T = {t} exceeds the table range (max ordinate {}); silent truncation is not allowed",
            table.max_ordinate()
        )));
    }
    let zeros: Vec<f64> = table
        .ordinates
        .iter()
        .copied()
        .take_while(|&g| g <= t)
        .collect();
    let u_hi = x.ln();
    let lhs = if zeros.is_empty() {
        0.0
    } else {
        let step = (std::f64::consts::PI / (10.0 * t)).min(u_hi);
        let panels = (u_hi / step).ceil() as usize;
        let w = u_hi / panels as f64;
        let partial: Vec<f64> = (0..panels)
            .into_par_iter()
            .map(|i| {
                let mid = (i as f64 + 0.5) * w;
                let half = w / 2.0;
                let mut acc = Kahan::new();
                for (node, wt) in GL8 {
                    let u = mid + half * node;
                    let mut s = 0.0;
                    for &g in &zeros {
                        s += (g * u).cos();
                    }
                    acc.add(wt * half * s.powi(k as i32) * u.exp());
                }
                acc.value()
            })
            .collect();
        let mut total = Kahan::new();
        for p in partial {
            total.add(p);
        }
        total.value()
    };
    let rhs = if k.is_multiple_of(2) {
        normal_moment(k) * x * (t / (4.0 * std::f64::consts::PI) * t.ln()).powi(k as i32 / 2)
    } else {
        0.0
    };
    let ratio = (rhs != 0.0).then(|| lhs / rhs);
    Ok(ZeroMomentReport {
        t,
        x,
        k,
        zeros_used: zeros.len(),
        lhs,
        rhs,
        ratio,
    })
}

/// Monte Carlo configuration for the trace analogue.
#[derive(Debug, Clone)]
pub struct MCConfig {
    /// number of cosine terms per trial
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RmtMoment {
    pub k: u32,
    pub mean: f64,
    pub std_error: f64,
}

const TRIAL_BLOCK: u64 = 1024;

/// Per-trial sums S = sum_{i=1}^{N} cos(2 pi X_i) with X_i independent
/// uniform on [0,1); returns the sample moments of S for k = 1..=kmax with
/// Monte Carlo standard errors.
///
/// Stream split rule: trial j draws from ChaCha8 seeded with `cfg.seed`
/// on stream j, so results are reproducible for any worker count.
pub fn rmt_moments(cfg: &MCConfig, kmax: u32) -> Result<Vec<RmtMoment>> {
    if cfg.trials < 1 {
        return Err(Error::Validation("trials must be >= 1".into()));
    }
    if cfg.n < 1 {
        return Err(Error::Validation("N must be >= 1".into()));
    }
    if !(1..=8).contains(&kmax) {
        return Err(Error::Validation("kmax must be in 1..=8".into()));
    }
    let pmax = (2 * kmax) as usize;
    let blocks: Vec<(u64, u64)> = {
        let mut v = Vec::new();
        let mut a = 0u64;
        while a < cfg.trials {
            let b = cfg.trials.min(a + TRIAL_BLOCK);
            v.push((a, b));
            a = b;
        }
        v
    };
    let partials: Vec<Vec<Kahan>> = blocks
        .par_iter()
        .map(|&(a, b)| {
            let mut acc = vec![Kahan::new(); pmax];
            for trial in a..b {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(trial);
                let mut s = Kahan::new();
                for _ in 0..cfg.n {
                    let x: f64 = rng.gen();
                    s.add((2.0 * std::f64::consts::PI * x).cos());
                }
                let s = s.value();
                let mut pw = 1.0;
                for slot in acc.iter_mut() {
                    pw *= s;
                    slot.add(pw);
                }
            }
            acc
        })
        .collect();
    let mut sums = vec![Kahan::new(); pmax];
    for p in partials {
        for (m, s) in sums.iter_mut().zip(p) {
            m.merge(s);
        }
    }
    let tf = cfg.trials as f64;
    Ok((1..=kmax)
        .map(|k| {
            let mean = sums[(k - 1) as usize].value() / tf;
            let mean_sq = sums[(2 * k - 1) as usize].value() / tf;
            let var = (mean_sq - mean * mean).max(0.0);
            RmtMoment {
                k,
                mean,
                std_error: (var / tf).sqrt(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn fixture_table() -> ZeroTable {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/zeta_zeros_100.txt");
        load_zeros(path).unwrap()
    }

    /// Closed-form oracle for k = 1: per zero,
    /// Int_1^X cos(g log x) dx = Re[(X^{1+ig} - 1)/(1+ig)].
    fn k1_closed(zeros: &[f64], t: f64, x: f64) -> f64 {
        let lx = x.ln();
        zeros
            .iter()
            .filter(|&&g| g <= t)
            .map(|&g| {
                let th = g * lx;
                (x * (th.cos() + g * th.sin()) - 1.0) / (1.0 + g * g)
            })
            .sum()
    }

    #[test]
    fn load_fixture() {
        let t = fixture_table();
        assert_eq!(t.len(), 100);
        assert!((t.ordinates()[0] - 14.134725).abs() < 1e-5);
        assert!((t.max_ordinate() - 236.5242).abs() < 1e-3);
    }

    #[test]
    fn load_two_line_table() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "14.134725\n21.022040").unwrap();
        let t = load_zeros(f.path()).unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn load_errors() {
        let f = tempfile::NamedTempFile::new().unwrap();
        assert!(load_zeros(f.path()).is_err()); // empty

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "21.0\n14.1").unwrap();
        let err = load_zeros(f.path()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "14.1\nnot-a-number").unwrap();
        let err = load_zeros(f.path()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment\n\n14.1\n21.0").unwrap();
        assert_eq!(load_zeros(f.path()).unwrap().len(), 2);
    }

    #[test]
    fn zero_moment_below_first_ordinate() {
        let t = fixture_table();
        let r = zero_moment(&t, 10.0, 100.0, 2).unwrap();
        assert_eq!(r.zeros_used, 0);
        assert_eq!(r.lhs, 0.0);
        assert!(r.rhs > 0.0);
    }

    #[test]
    fn zero_moment_k1_matches_closed_form() {
        let t = fixture_table();
        for (tt, x) in [(30.0, 50.0), (60.0, 1000.0), (120.0, 5000.0)] {
            let r = zero_moment(&t, tt, x, 1).unwrap();
            let oracle = k1_closed(t.ordinates(), tt, x);
            assert!(
                (r.lhs - oracle).abs() <= 1e-6 * oracle.abs().max(1e-3),
                "T={tt} X={x}: {} vs {oracle}",
                r.lhs
            );
            assert!(r.ratio.is_none());
        }
    }

    #[test]
    fn zero_moment_additive_in_table_for_k1() {
        let t = fixture_table();
        let all = t.ordinates();
        let first = ZeroTable::from_ordinates(all[..40].to_vec()).unwrap();
        let rest = ZeroTable::from_ordinates(all[40..].to_vec()).unwrap();
        let tt = 200.0;
        let x = 300.0;
        let whole = zero_moment(&t, tt, x, 1).unwrap().lhs;
        let a = zero_moment(&first, first.max_ordinate(), x, 1).unwrap().lhs;
        let b = zero_moment(&rest, tt, x, 1).unwrap().lhs;
        assert!((whole - a - b).abs() < 1e-6 * whole.abs().max(1.0));
    }

    #[test]
    fn zero_moment_guards() {
        let t = fixture_table();
        assert!(zero_moment(&t, 300.0, 100.0, 2).is_err()); // beyond table
        assert!(zero_moment(&t, 100.0, 1.5, 2).is_err());
        assert!(zero_moment(&t, 100.0, 100.0, 9).is_err());
    }

    #[test]
    fn rhs_scaling_identity() {
        // rhs(k) / rhs(2)^(k/2) = mu_k X^(1-k/2)
        let t = fixture_table();
        let x = 5000.0;
        let tt = 150.0;
        let r2 = zero_moment(&t, tt, x, 2).unwrap().rhs;
        for k in [4u32, 6, 8] {
            let rk = zero_moment(&t, tt, x, k).unwrap().rhs;
            let expect = normal_moment(k) * x.powi(1 - k as i32 / 2) * r2.powi(k as i32 / 2);
            assert!(
                (rk - expect).abs() <= 1e-12 * expect.abs(),
                "k={k}: {rk} vs {expect}"
            );
        }
    }

    #[test]
    fn rmt_matches_exact_low_moments() {
        let cfg = MCConfig {
            n: 10,
            trials: 20_000,
            seed: 42,
        };
        let moments = rmt_moments(&cfg, 4).unwrap();
        let n = cfg.n as f64;
        // exact: E S^2 = N/2, E S^4 = 3N(N-1)/4 + 3N/8
        let e2 = n / 2.0;
        let e4 = 3.0 * n * (n - 1.0) / 4.0 + 3.0 * n / 8.0;
        assert!((e4 - 71.25).abs() < 1e-12);
        let m2 = &moments[1];
        let m4 = &moments[3];
        assert!((m2.mean - e2).abs() < 4.0 * m2.std_error, "{m2:?}");
        assert!((m4.mean - e4).abs() < 4.0 * m4.std_error, "{m4:?}");
        for k in [0usize, 2] {
            let m = &moments[k];
            assert!(m.mean.abs() < 4.0 * m.std_error, "odd moment {m:?}");
        }
    }

    #[test]
    fn rmt_k4_matches_numeric_integration_at_n2() {
        // exhaustive 2D quadrature oracle for N = 2: E (cos a + cos b)^4 over
        // the unit square, via plain Simpson on a fine grid
        let g = 400usize;
        let simpson_w = |i: usize| -> f64 {
            if i == 0 || i == g {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };
        let hh = 1.0 / g as f64;
        let mut acc = 0.0;
        for i in 0..=g {
            for j in 0..=g {
                let a = (2.0 * std::f64::consts::PI * i as f64 * hh).cos();
                let b = (2.0 * std::f64::consts::PI * j as f64 * hh).cos();
                acc += simpson_w(i) * simpson_w(j) * (a + b).powi(4);
            }
        }
        acc *= (hh / 3.0) * (hh / 3.0);
        let exact = 3.0 * 2.0 * 1.0 / 4.0 + 3.0 * 2.0 / 8.0; // 2.25
        assert!((acc - exact).abs() < 1e-9, "quadrature {acc} vs {exact}");
    }

    #[test]
    fn rmt_reproducible() {
        let cfg = MCConfig {
            n: 25,
            trials: 2000,
            seed: 7,
        };
        let a = rmt_moments(&cfg, 3).unwrap();
        let b = rmt_moments(&cfg, 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.mean.to_bits(), y.mean.to_bits());
            assert_eq!(x.std_error.to_bits(), y.std_error.to_bits());
        }
        let other = rmt_moments(
            &MCConfig {
                seed: 8,
                ..cfg.clone()
            },
            3,
        )
        .unwrap();
        assert_ne!(a[1].mean.to_bits(), other[1].mean.to_bits());
    }
}
