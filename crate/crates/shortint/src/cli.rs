//! Subcommand front end. Every library operation is reachable here, with
//! CSV or JSON reports, an optional JSON config file for batch runs
//! (explicit flags win), and deterministic output: floats are rounded to 12
//! significant digits value-side, so re-parsing a JSON report reproduces
//! every numeric field bit for bit.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Arg, ArgMatches, Command};
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::analogues::{self, MCConfig};
use crate::constants::{normal_moment, B};
use crate::error::{Error, Result};
use crate::moments;
use crate::residues::{self, ModulusQ};
use crate::singular::{self, SeriesConfig, TupleD};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "SHORTINT_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq)]
enum Format {
    Csv,
    Json,
}

/// Run the CLI against `argv` (including the program name). Returns the
/// process exit code: 0 on success, 2 for validation problems, 1 for
/// runtime failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cmd = build_command();
    let matches = match cmd.try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            // clap renders --help/--version as "errors" with exit code 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&matches) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}

fn numeric_arg(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).value_name("VALUE").help(help)
}

fn common_args(cmd: Command) -> Command {
    cmd.arg(
        Arg::new("format")
            .long("format")
            .value_name("csv|json")
            .default_value("json")
            .help("report format"),
    )
    .arg(
        Arg::new("out")
            .long("out")
            .value_name("PATH")
            .help("write the report here instead of stdout"),
    )
    .arg(
        Arg::new("config")
            .long("config")
            .value_name("PATH")
            .help("JSON config file; explicit flags win over its values"),
    )
    .arg(
        Arg::new("workers")
            .long("workers")
            .value_name("N")
            .help("worker threads (default: SHORTINT_WORKERS or all cores)"),
    )
}

fn build_command() -> Command {
    let sub = |name, about| common_args(Command::new(name).about(about));
    Command::new("shortint")
        .about("statistics of primes in short intervals: singular series, reduced-residue moments, window sums and their model comparators")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            sub("moments", "empirical moments M_K(N;H) against the predicted main term, the simple Gaussian form and the Cramer model")
                .arg(numeric_arg("n", "range length N (scientific notation ok)"))
                .arg(numeric_arg("h", "window length H"))
                .arg(numeric_arg("kmax", "highest moment order").default_value("4")),
        )
        .subcommand(
            sub("dist", "histogram and KS distance of standardized window sums")
                .arg(numeric_arg("n", "range length N"))
                .arg(numeric_arg("h", "window length H"))
                .arg(numeric_arg("bins", "histogram bins").default_value("64")),
        )
        .subcommand(
            sub("singular", "singular series of an offset tuple, with the centered transform and its round trip")
                .arg(numeric_arg("offsets", "comma-separated distinct offsets, e.g. 1,3"))
                .arg(numeric_arg("rel-tol", "relative truncation target").default_value("1e-9"))
                .arg(numeric_arg("prime-cutoff", "starting prime cutoff y (default: auto)")),
        )
        .subcommand(
            sub("rk", "centered tuple average R_k(h) against its predicted size")
                .arg(numeric_arg("h", "offset range"))
                .arg(numeric_arg("k", "tuple size"))
                .arg(numeric_arg("rel-tol", "relative truncation target").default_value("1e-9")),
        )
        .subcommand(
            sub("pairs", "pair sum of the singular series over [1,h] against h^2 - h log h + B h")
                .arg(numeric_arg("h", "offset range"))
                .arg(numeric_arg("rel-tol", "relative truncation target").default_value("1e-9")),
        )
        .subcommand(
            sub("gallagher", "sum of the singular series over distinct k-tuples in [1,h]")
                .arg(numeric_arg("h", "offset range"))
                .arg(numeric_arg("k", "tuple size"))
                .arg(numeric_arg("rel-tol", "relative truncation target").default_value("1e-9")),
        )
        .subcommand(
            sub("residues", "exact reduced-residue moments m_k, V_k, the V_2 closed form and the normal-main-term report")
                .arg(numeric_arg("q", "squarefree modulus"))
                .arg(numeric_arg("h", "window length"))
                .arg(numeric_arg("k", "moment order")),
        )
        .subcommand(
            sub("ramanujan", "Ramanujan sums c_d(m)")
                .arg(numeric_arg("d", "modulus"))
                .arg(numeric_arg("m", "argument (single value)"))
                .arg(numeric_arg("mmax", "sweep m = 0..=mmax instead")),
        )
        .subcommand(
            sub("ktuple", "k-tuple Lambda-product sum, its singular-series main term and the residual")
                .arg(numeric_arg("offsets", "comma-separated distinct offsets"))
                .arg(numeric_arg("n", "range length N")),
        )
        .subcommand(
            sub("zeros", "moments of the cosine sum over zeta-zero ordinates against the diagonal reference")
                .arg(
                    Arg::new("table")
                        .long("table")
                        .value_name("PATH")
                        .help("zero table: one ascending ordinate per line; # comments ok"),
                )
                .arg(numeric_arg("t", "ordinate cutoff T (default: table maximum)"))
                .arg(numeric_arg("x", "integration endpoint X"))
                .arg(numeric_arg("k", "moment order").default_value("2")),
        )
        .subcommand(
            sub("rmt", "Monte Carlo moments of sum cos(2 pi X_i), the random-matrix trace analogue")
                .arg(numeric_arg("n", "cosine terms per trial"))
                .arg(numeric_arg("trials", "Monte Carlo trials").default_value("100000"))
                .arg(numeric_arg("seed", "RNG seed").default_value("0"))
                .arg(numeric_arg("kmax", "highest moment order").default_value("4")),
        )
}

// ---------------------------------------------------------------------------
// parameter access: flag > config file > clap default
// ---------------------------------------------------------------------------

struct Params<'a> {
    matches: &'a ArgMatches,
    config: Map<String, Value>,
}

impl<'a> Params<'a> {
    fn new(matches: &'a ArgMatches) -> Result<Self> {
        let config = match matches.get_one::<String>("config") {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Validation(format!("cannot read config {path}: {e}")))?;
                let v: Value = serde_json::from_str(&text)
                    .map_err(|e| Error::Validation(format!("bad config {path}: {e}")))?;
                match v {
                    Value::Object(m) => m,
                    _ => {
                        return Err(Error::Validation(format!(
                            "config {path} must hold a JSON object"
                        )))
                    }
                }
            }
            None => Map::new(),
        };
        Ok(Params { matches, config })
    }

    fn raw(&self, name: &str) -> Option<String> {
        use clap::parser::ValueSource;
        // not every subcommand defines every shared parameter
        let known = self.matches.try_contains_id(name).is_ok();
        if known && self.matches.value_source(name) == Some(ValueSource::CommandLine) {
            return self.matches.get_one::<String>(name).cloned();
        }
        if let Some(v) = self.config.get(name) {
            return Some(match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            });
        }
        if known {
            self.matches.get_one::<String>(name).cloned()
        } else {
            None
        }
    }

    fn req(&self, name: &str) -> Result<String> {
        self.raw(name)
            .ok_or_else(|| Error::Validation(format!("missing required parameter --{name}")))
    }

    fn u64_sci(&self, name: &str) -> Result<u64> {
        parse_u64_sci(name, &self.req(name)?)
    }

    fn opt_u64_sci(&self, name: &str) -> Result<Option<u64>> {
        self.raw(name).map(|s| parse_u64_sci(name, &s)).transpose()
    }

    fn u32_sci(&self, name: &str) -> Result<u32> {
        let v = self.u64_sci(name)?;
        u32::try_from(v).map_err(|_| Error::Validation(format!("--{name} = {v} is too large")))
    }

    fn i64_sci(&self, name: &str) -> Result<i64> {
        let s = self.req(name)?;
        parse_i64_sci(name, &s)
    }

    fn f64(&self, name: &str) -> Result<f64> {
        let s = self.req(name)?;
        s.trim()
            .parse()
            .map_err(|_| Error::Validation(format!("--{name}: cannot parse {s:?} as a number")))
    }

    fn opt_f64(&self, name: &str) -> Result<Option<f64>> {
        match self.raw(name) {
            None => Ok(None),
            Some(s) => s
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| Error::Validation(format!("--{name}: cannot parse {s:?} as a number"))),
        }
    }

    fn format(&self) -> Result<Format> {
        match self.req("format")?.as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Validation(format!(
                "--format must be csv or json, got {other:?}"
            ))),
        }
    }

    fn out(&self) -> Option<PathBuf> {
        self.raw("out").map(PathBuf::from)
    }

    fn workers(&self) -> Result<usize> {
        if let Some(s) = self.raw("workers") {
            return parse_u64_sci("workers", &s).map(|v| v as usize);
        }
        if let Ok(s) = std::env::var(WORKERS_ENV) {
            if !s.trim().is_empty() {
                return parse_u64_sci("workers", &s).map(|v| v as usize);
            }
        }
        Ok(0) // rayon default
    }
}

fn parse_u64_sci(name: &str, s: &str) -> Result<u64> {
    let t = s.trim();
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = t
        .parse()
        .map_err(|_| Error::Validation(format!("--{name}: cannot parse {s:?} as a number")))?;
    if !f.is_finite() || f < 0.0 || f.fract() != 0.0 || f > 9.007_199_254_740_992e15 {
        return Err(Error::Validation(format!(
            "--{name}: {s:?} is not an exactly representable nonnegative integer"
        )));
    }
    Ok(f as u64)
}

fn parse_i64_sci(name: &str, s: &str) -> Result<i64> {
    let t = s.trim();
    if let Ok(v) = t.parse::<i64>() {
        return Ok(v);
    }
    let f: f64 = t
        .parse()
        .map_err(|_| Error::Validation(format!("--{name}: cannot parse {s:?} as a number")))?;
    if !f.is_finite() || f.fract() != 0.0 || f.abs() > 9.007_199_254_740_992e15 {
        return Err(Error::Validation(format!(
            "--{name}: {s:?} is not an exactly representable integer"
        )));
    }
    Ok(f as i64)
}

// ---------------------------------------------------------------------------
// report plumbing
// ---------------------------------------------------------------------------

struct Report {
    command: &'static str,
    params: Vec<(&'static str, Value)>,
    csv_header: Vec<&'static str>,
    csv_rows: Vec<Vec<String>>,
    body: Vec<(&'static str, Value)>,
    summary: String,
}

/// Round to 12 significant digits at the value level; shortest-repr
/// printing of the rounded value then round-trips exactly.
fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap()
}

fn fnum(x: f64) -> Value {
    match serde_json::Number::from_f64(round_sig(x)) {
        Some(n) => Value::Number(n),
        None => Value::Null,
    }
}

fn fopt(x: Option<f64>) -> Value {
    x.map(fnum).unwrap_or(Value::Null)
}

fn fstr(x: f64) -> String {
    let r = round_sig(x);
    if r.is_finite() {
        format!("{r}")
    } else {
        String::new()
    }
}

fn fostr(x: Option<f64>) -> String {
    x.map(fstr).unwrap_or_default()
}

fn emit(report: &Report, format: Format, out: Option<PathBuf>) -> Result<()> {
    let text = match format {
        Format::Json => {
            let mut top = Map::new();
            top.insert("schema_version".into(), json!(1));
            top.insert("command".into(), json!(report.command));
            let mut params = Map::new();
            for (k, v) in &report.params {
                params.insert((*k).into(), v.clone());
            }
            top.insert("params".into(), Value::Object(params));
            for (k, v) in &report.body {
                top.insert((*k).into(), v.clone());
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(top))
                .map_err(|e| Error::Validation(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.csv_header)
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
            for row in &report.csv_rows {
                w.write_record(row)
                    .map_err(|e| Error::Io(std::io::Error::other(e)))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e)))?)
                .expect("csv is utf-8")
        }
    };
    match out {
        Some(path) => {
            std::fs::write(&path, text)?;
            println!("{} -> {}", report.summary, path.display());
        }
        None => {
            print!("{text}");
            eprintln!("{}", report.summary);
        }
    }
    Ok(())
}

fn dispatch(matches: &ArgMatches) -> Result<()> {
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let params = Params::new(sub)?;
    let format = params.format()?;
    let out = params.out();
    let workers = params.workers()?;
    let handler = || -> Result<Report> {
        match name {
            "moments" => cmd_moments(&params),
            "dist" => cmd_dist(&params),
            "singular" => cmd_singular(&params),
            "rk" => cmd_rk(&params),
            "pairs" => cmd_pairs(&params),
            "gallagher" => cmd_gallagher(&params),
            "residues" => cmd_residues(&params),
            "ramanujan" => cmd_ramanujan(&params),
            "ktuple" => cmd_ktuple(&params),
            "zeros" => cmd_zeros(&params),
            "rmt" => cmd_rmt(&params),
            _ => unreachable!("clap enforces the subcommand set"),
        }
    };
    let report = if workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Validation(format!("cannot build worker pool: {e}")))?
            .install(handler)?
    } else {
        handler()?
    };
    emit(&report, format, out)
}

// ---------------------------------------------------------------------------
// handlers
// ---------------------------------------------------------------------------

fn series_config(params: &Params) -> Result<SeriesConfig> {
    Ok(SeriesConfig {
        prime_cutoff: params.opt_u64_sci("prime-cutoff").unwrap_or(None),
        target_rel_tol: params.opt_f64("rel-tol")?.unwrap_or(1e-9),
    })
}

fn cmd_moments(params: &Params) -> Result<Report> {
    let n = params.u64_sci("n")?;
    let h = params.u64_sci("h")?;
    let kmax = params.u32_sci("kmax")?;
    let reports = moments::empirical_moments(n, h, kmax)?;
    let csv_rows = reports
        .iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                fstr(r.empirical),
                fstr(r.thm3_main),
                fstr(r.conj1),
                fstr(r.cramer),
                fostr(r.ratio_thm3),
                fostr(r.ratio_conj1),
            ]
        })
        .collect();
    let rows: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "k": r.k,
                "empirical": fnum(r.empirical),
                "thm3_main": fnum(r.thm3_main),
                "conj1": fnum(r.conj1),
                "cramer": fnum(r.cramer),
                "ratio_thm3": fopt(r.ratio_thm3),
                "ratio_conj1": fopt(r.ratio_conj1),
                "ratio_cramer": fopt(r.ratio_cramer),
            })
        })
        .collect();
    let summary = match reports.iter().find(|r| r.k == 2) {
        Some(r2) => format!(
            "moments N={n} H={h} Kmax={kmax}: M2={:.6e} M2/thm3={} M2/cramer={}",
            r2.empirical,
            r2.ratio_thm3.map(|x| format!("{x:.4}")).unwrap_or_default(),
            r2.ratio_cramer.map(|x| format!("{x:.4}")).unwrap_or_default(),
        ),
        None => format!("moments N={n} H={h} Kmax={kmax}"),
    };
    Ok(Report {
        command: "moments",
        params: vec![("n", json!(n)), ("h", json!(h)), ("kmax", json!(kmax))],
        csv_header: vec![
            "K", "empirical", "thm3_main", "conj1", "cramer", "ratio_thm3", "ratio_conj1",
        ],
        csv_rows,
        body: vec![("rows", Value::Array(rows))],
        summary,
    })
}

fn cmd_dist(params: &Params) -> Result<Report> {
    let n = params.u64_sci("n")?;
    let h = params.u64_sci("h")?;
    let bins = params.u64_sci("bins")? as usize;
    let rep = moments::distribution(n, h, bins)?;
    let csv_rows = (0..rep.counts.len())
        .map(|i| {
            vec![
                fstr(rep.edges[i]),
                fstr(rep.edges[i + 1]),
                rep.counts[i].to_string(),
            ]
        })
        .collect();
    let ks = rep.ks_exact.unwrap_or(rep.ks_binned);
    let summary = format!(
        "dist N={n} H={h}: KS={ks:.4} mean={:.4} var/std={:.4}{}",
        rep.sample_mean,
        rep.sample_variance,
        rep.warning.as_deref().map(|w| format!(" [warning: {w}]")).unwrap_or_default()
    );
    Ok(Report {
        command: "dist",
        params: vec![("n", json!(n)), ("h", json!(h)), ("bins", json!(bins))],
        csv_header: vec!["bin_lo", "bin_hi", "count"],
        csv_rows,
        body: vec![
            ("edges", Value::Array(rep.edges.iter().map(|&e| fnum(e)).collect())),
            ("counts", json!(rep.counts)),
            ("ks_binned", fnum(rep.ks_binned)),
            ("ks_exact", fopt(rep.ks_exact)),
            ("sample_mean", fnum(rep.sample_mean)),
            ("sample_variance", fnum(rep.sample_variance)),
            ("standardization", fnum(rep.standardization)),
            ("warning", rep.warning.as_deref().map(|w| json!(w)).unwrap_or(Value::Null)),
        ],
        summary,
    })
}

fn cmd_singular(params: &Params) -> Result<Report> {
    let offsets: TupleD = params.req("offsets")?.parse()?;
    let cfg = series_config(params)?;
    let s = singular::singular_series(&offsets, &cfg);
    let s0 = singular::s0(&offsets, &cfg)?;
    let round_trip = singular::s_from_s0(&offsets, &cfg)?;
    let summary = format!(
        "singular D={{{offsets}}}: S={s:.9} S0={s0:.9} roundtrip drift={:.2e}",
        round_trip - s
    );
    Ok(Report {
        command: "singular",
        params: vec![
            ("offsets", json!(offsets.to_string())),
            ("rel_tol", fnum(cfg.target_rel_tol)),
        ],
        csv_header: vec!["offsets", "k", "singular_series", "s0", "s_from_s0"],
        csv_rows: vec![vec![
            offsets.to_string(),
            offsets.k().to_string(),
            fstr(s),
            fstr(s0),
            fstr(round_trip),
        ]],
        body: vec![
            ("k", json!(offsets.k())),
            ("singular_series", fnum(s)),
            ("s0", fnum(s0)),
            ("s_from_s0", fnum(round_trip)),
        ],
        summary,
    })
}

fn cmd_rk(params: &Params) -> Result<Report> {
    let h = params.u64_sci("h")?;
    let k = params.u32_sci("k")?;
    let cfg = series_config(params)?;
    let value = singular::r_k(h, k, &cfg)?;
    let asymptotic = singular::r_k_asymptotic(h, k);
    let summary = format!("rk h={h} k={k}: R={value:.6} asymptotic={asymptotic:.6}");
    Ok(Report {
        command: "rk",
        params: vec![("h", json!(h)), ("k", json!(k))],
        csv_header: vec!["h", "k", "r_k", "asymptotic", "residual"],
        csv_rows: vec![vec![
            h.to_string(),
            k.to_string(),
            fstr(value),
            fstr(asymptotic),
            fstr(value - asymptotic),
        ]],
        body: vec![
            ("r_k", fnum(value)),
            ("asymptotic", fnum(asymptotic)),
            ("residual", fnum(value - asymptotic)),
        ],
        summary,
    })
}

fn cmd_pairs(params: &Params) -> Result<Report> {
    let h = params.u64_sci("h")?;
    let cfg = series_config(params)?;
    let value = singular::pair_sum(h, &cfg)?;
    let hf = h as f64;
    let prediction = hf * hf - hf * hf.ln() + B * hf;
    let summary = format!("pairs h={h}: sum={value:.4} prediction={prediction:.4}");
    Ok(Report {
        command: "pairs",
        params: vec![("h", json!(h))],
        csv_header: vec!["h", "pair_sum", "prediction", "residual"],
        csv_rows: vec![vec![
            h.to_string(),
            fstr(value),
            fstr(prediction),
            fstr(value - prediction),
        ]],
        body: vec![
            ("pair_sum", fnum(value)),
            ("prediction", fnum(prediction)),
            ("residual", fnum(value - prediction)),
        ],
        summary,
    })
}

fn cmd_gallagher(params: &Params) -> Result<Report> {
    let h = params.u64_sci("h")?;
    let k = params.u32_sci("k")?;
    let cfg = series_config(params)?;
    let value = singular::gallagher_sum(h, k, &cfg)?;
    let hf = h as f64;
    let c2 = (k as f64) * (k as f64 - 1.0) / 2.0;
    let prediction = hf.powi(k as i32) - c2 * hf.powi(k as i32 - 1) * hf.ln()
        + c2 * B * hf.powi(k as i32 - 1);
    let summary = format!("gallagher h={h} k={k}: sum={value:.4} smooth={prediction:.4}");
    Ok(Report {
        command: "gallagher",
        params: vec![("h", json!(h)), ("k", json!(k))],
        csv_header: vec!["h", "k", "gallagher_sum", "prediction", "residual"],
        csv_rows: vec![vec![
            h.to_string(),
            k.to_string(),
            fstr(value),
            fstr(prediction),
            fstr(value - prediction),
        ]],
        body: vec![
            ("gallagher_sum", fnum(value)),
            ("prediction", fnum(prediction)),
            ("residual", fnum(value - prediction)),
        ],
        summary,
    })
}

fn cmd_residues(params: &Params) -> Result<Report> {
    let q = ModulusQ::new(params.u64_sci("q")?)?;
    let h = params.u64_sci("h")?;
    let k = params.u32_sci("k")?;
    let m_k = residues::m_k_direct(&q, h, k)?;
    let v_k = residues::v_k(&q, h, k)?;
    let v_2 = residues::v_2_closed(&q, h);
    let t1 = residues::normal_main_report(&q, h, k)?;
    let summary = format!(
        "residues q={} h={h} k={k}: V_k={:.6} main={:.6} residual={:.3e}",
        q.q(),
        t1.v_k,
        t1.main,
        t1.residual
    );
    Ok(Report {
        command: "residues",
        params: vec![("q", json!(q.q())), ("h", json!(h)), ("k", json!(k))],
        csv_header: vec![
            "q", "h", "k", "m_k", "v_k", "v_2", "normal_main", "normal_residual", "normal_ratio",
        ],
        csv_rows: vec![vec![
            q.q().to_string(),
            h.to_string(),
            k.to_string(),
            m_k.to_string(),
            v_k.to_string(),
            v_2.to_string(),
            fstr(t1.main),
            fstr(t1.residual),
            fostr(t1.ratio),
        ]],
        body: vec![
            ("m_k", json!(m_k.to_string())),
            ("m_k_float", fopt(m_k.to_f64())),
            ("v_k", json!(v_k.to_string())),
            ("v_k_float", fopt(v_k.to_f64())),
            ("v_2", json!(v_2.to_string())),
            ("v_2_float", fopt(v_2.to_f64())),
            ("normal_main", fnum(t1.main)),
            ("normal_residual", fnum(t1.residual)),
            ("normal_ratio", fopt(t1.ratio)),
        ],
        summary,
    })
}

fn cmd_ramanujan(params: &Params) -> Result<Report> {
    let d = params.u64_sci("d")?;
    if d < 1 {
        return Err(Error::Validation("--d must be >= 1".into()));
    }
    let ms: Vec<i64> = match params.raw("mmax") {
        Some(s) => {
            let mmax = parse_i64_sci("mmax", &s)?;
            if mmax < 0 {
                return Err(Error::Validation("--mmax must be >= 0".into()));
            }
            (0..=mmax).collect()
        }
        None => vec![params.i64_sci("m")?],
    };
    let rows: Vec<(i64, i64)> = ms.iter().map(|&m| (m, residues::ramanujan(d, m))).collect();
    let summary = match rows.as_slice() {
        [(m, c)] => format!("ramanujan c_{d}({m}) = {c}"),
        _ => format!("ramanujan d={d}: {} values", rows.len()),
    };
    Ok(Report {
        command: "ramanujan",
        params: vec![("d", json!(d))],
        csv_header: vec!["d", "m", "c"],
        csv_rows: rows
            .iter()
            .map(|(m, c)| vec![d.to_string(), m.to_string(), c.to_string()])
            .collect(),
        body: vec![(
            "rows",
            Value::Array(
                rows.iter()
                    .map(|(m, c)| json!({"m": m, "c": c}))
                    .collect(),
            ),
        )],
        summary,
    })
}

fn cmd_ktuple(params: &Params) -> Result<Report> {
    let offsets: TupleD = params.req("offsets")?.parse()?;
    let n = params.u64_sci("n")?;
    let r = moments::ktuple_residual(&offsets, n)?;
    let nf = n as f64;
    let envelope = nf.sqrt() * nf.ln() * nf.ln();
    let summary = format!(
        "ktuple D={{{offsets}}} N={n}: sum={:.4} main={:.4} residual={:.4} (sqrt(N) log^2 N = {envelope:.1})",
        r.sum, r.main, r.residual
    );
    Ok(Report {
        command: "ktuple",
        params: vec![("offsets", json!(offsets.to_string())), ("n", json!(n))],
        csv_header: vec!["offsets", "n", "sum", "singular", "main", "residual"],
        csv_rows: vec![vec![
            offsets.to_string(),
            n.to_string(),
            fstr(r.sum),
            fstr(r.singular),
            fstr(r.main),
            fstr(r.residual),
        ]],
        body: vec![
            ("sum", fnum(r.sum)),
            ("singular", fnum(r.singular)),
            ("main", fnum(r.main)),
            ("residual", fnum(r.residual)),
            ("envelope_sqrtn_log2n", fnum(envelope)),
        ],
        summary,
    })
}

fn cmd_zeros(params: &Params) -> Result<Report> {
    let path = params.req("table")?;
    let table = analogues::load_zeros(&path)?;
    let t = match params.opt_f64("t")? {
        Some(t) => t,
        None => table.max_ordinate(),
    };
    let x = params.f64("x")?;
    let k = params.u32_sci("k")?;
    let r = analogues::zero_moment(&table, t, x, k)?;
    let summary = format!(
        "zeros T={t} X={x} k={k}: lhs={:.6e} rhs={:.6e} ratio={}",
        r.lhs,
        r.rhs,
        r.ratio.map(|v| format!("{v:.4}")).unwrap_or_default()
    );
    Ok(Report {
        command: "zeros",
        params: vec![
            ("table", json!(path)),
            ("t", fnum(t)),
            ("x", fnum(x)),
            ("k", json!(k)),
        ],
        csv_header: vec!["t", "x", "k", "zeros_used", "lhs", "rhs", "ratio"],
        csv_rows: vec![vec![
            fstr(t),
            fstr(x),
            k.to_string(),
            r.zeros_used.to_string(),
            fstr(r.lhs),
            fstr(r.rhs),
            fostr(r.ratio),
        ]],
        body: vec![
            ("zeros_used", json!(r.zeros_used)),
            ("lhs", fnum(r.lhs)),
            ("rhs", fnum(r.rhs)),
            ("ratio", fopt(r.ratio)),
        ],
        summary,
    })
}

fn cmd_rmt(params: &Params) -> Result<Report> {
    let n = params.u64_sci("n")?;
    let trials = params.u64_sci("trials")?;
    let seed = params.u64_sci("seed")?;
    let kmax = params.u32_sci("kmax")?;
    let cfg = MCConfig { n, trials, seed };
    let rows = analogues::rmt_moments(&cfg, kmax)?;
    let nf = n as f64;
    let exact = |k: u32| -> Option<f64> {
        match k {
            _ if k % 2 == 1 => Some(0.0),
            2 => Some(nf / 2.0),
            4 => Some(3.0 * nf * (nf - 1.0) / 4.0 + 3.0 * nf / 8.0),
            _ => None,
        }
    };
    let gaussian = |k: u32| normal_moment(k) * (nf / 2.0).powi(k as i32 / 2);
    let summary = rows
        .iter()
        .find(|r| r.k == 2)
        .map(|r| {
            format!(
                "rmt N={n} trials={trials} seed={seed}: mean S^2 = {:.4} +- {:.4} (exact {})",
                r.mean,
                r.std_error,
                nf / 2.0
            )
        })
        .unwrap_or_else(|| format!("rmt N={n} trials={trials}"));
    Ok(Report {
        command: "rmt",
        params: vec![
            ("n", json!(n)),
            ("trials", json!(trials)),
            ("seed", json!(seed)),
            ("kmax", json!(kmax)),
        ],
        csv_header: vec!["k", "empirical", "std_error", "exact", "gaussian_ref"],
        csv_rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    fstr(r.mean),
                    fstr(r.std_error),
                    fostr(exact(r.k)),
                    if r.k % 2 == 0 {
                        fstr(gaussian(r.k))
                    } else {
                        fstr(0.0)
                    },
                ]
            })
            .collect(),
        body: vec![(
            "rows",
            Value::Array(
                rows.iter()
                    .map(|r| {
                        json!({
                            "k": r.k,
                            "empirical": fnum(r.mean),
                            "std_error": fnum(r.std_error),
                            "exact": fopt(exact(r.k)),
                            "gaussian_ref": fnum(if r.k % 2 == 0 { gaussian(r.k) } else { 0.0 }),
                        })
                    })
                    .collect(),
            ),
        )],
        summary,
    })
}
