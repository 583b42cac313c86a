//! `orthotrade`: batch front end for the ortho-trades library.
//!
//! Exit codes: 0 success, 1 verification or construction failed, 2 usage
//! error, 3 budget exhausted (partial JSON is still printed).

mod pretty;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ortho_trades::dissection::{check_good, dissection_to_trade, good_dissection, log_trade, render_svg, small_rowperm_pipeline, SquareDissection};
use ortho_trades::family::construct;
use ortho_trades::latin::gen_bp;
use ortho_trades::matrix::size_bounds;
use ortho_trades::modular::Modulus;
use ortho_trades::rowperm::{rowperm_from_symbol, three_row_trade, trade_from_rowperm};
use ortho_trades::search::{
    count_transversals, diagonal_histogram, enumerate_orthomorphisms, min_distance_from_linear, reference_spectrum,
    rowperm_sizes, spectrum, spectrum_all, SearchOptions, StopReason,
};
use ortho_trades::trade::{canonicalize, validate_latin_trade, validate_orthogonal_trade, TradePair};
use ortho_trades::Error;

#[derive(Parser)]
#[command(name = "orthotrade", version, about = "Orthogonal trades in the cyclic MOLS family B_p(k)")]
struct Cli {
    /// Human-readable tables instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the square B_p(k).
    Gen {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// Validate a trade or a dissection read from a JSON file.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Normal form of an orthogonal trade read from a JSON file.
    Canon {
        #[arg(long)]
        file: PathBuf,
    },
    /// Run one of the explicit constructions.
    #[command(subcommand)]
    Construct(ConstructCmd),
    /// Exhaustive searches.
    #[command(subcommand)]
    Search(SearchCmd),
    /// Count the transversals of B_p(k), or histogram their diagonal hits.
    Transversals {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long)]
        histogram: bool,
        /// Allow orders above the exhaustive cap.
        #[arg(long)]
        force: bool,
    },
    /// Count orthomorphisms of Z_p, or measure their distance from x -> kx.
    Orthomorphisms {
        #[arg(long)]
        p: u32,
        #[arg(long, value_name = "K")]
        min_distance_from_linear: Option<u32>,
        #[arg(long)]
        force: bool,
    },
    /// Size lower bounds for index (1, k).
    Bounds {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        k: u32,
    },
    /// Regenerate the figure fixtures into a directory.
    Fixtures {
        #[arg(long, default_value = "fixtures")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    Trade {
        #[arg(long)]
        file: PathBuf,
        /// Only check the Latin trade conditions, not orthogonality.
        #[arg(long)]
        latin: bool,
    },
    Dissection {
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// Three-row orthogonal trade (p = 1 mod 6).
    Threerow {
        #[arg(long)]
        p: u32,
    },
    /// Good dissection and its symbol-twice trade in B_p.
    Dissection {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Trade of size 3k(k-1) with an intercalate (p = 1 mod 6).
    #[command(alias = "sect7")]
    Family {
        #[arg(long)]
        p: u32,
    },
    /// Row-permutation trade of index (1, 2) moving O(log p) rows.
    Rowperm {
        #[arg(long)]
        p: u32,
    },
}

#[derive(Args)]
struct SearchFlags {
    /// Wall-clock budget in seconds.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long, env = "MOLS_THREADS", default_value_t = 1)]
    threads: usize,
}

impl SearchFlags {
    fn options(&self) -> SearchOptions {
        let mut o = SearchOptions::default().with_threads(self.threads);
        if let Some(b) = self.budget {
            o = o.with_budget(Duration::from_secs_f64(b.max(0.0)));
        }
        o
    }
}

#[derive(Subcommand)]
enum SearchCmd {
    /// Trade sizes of index (1, k), or the union over k.
    Spectrum {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        k: Option<u32>,
        /// Stop once every size of the reference spectrum has a certificate.
        #[arg(long)]
        until_reference: bool,
        #[command(flatten)]
        flags: SearchFlags,
    },
    /// Support sizes of row permutations orthogonal to several B_p(k).
    Rowperm {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        mates: usize,
        #[command(flatten)]
        flags: SearchFlags,
    },
}

/// A finished command: JSON payload, its pretty rendering and an exit code.
struct Output {
    json: Value,
    pretty: String,
    code: u8,
}

impl Output {
    fn ok(json: Value, pretty: String) -> Self {
        Output { json, pretty, code: 0 }
    }
}

fn failure(e: &Error) -> u8 {
    match e {
        Error::NotOddPrime(_)
        | Error::EvenModulus(_)
        | Error::IndexOutOfRange { .. }
        | Error::OrderCap { .. }
        | Error::Io(_)
        | Error::Json(_)
        | Error::Parse(_) => 2,
        _ => 1,
    }
}

fn modulus(p: u32) -> ortho_trades::Result<Modulus> {
    Modulus::prime(p)
}

fn read_trade(path: &Path) -> ortho_trades::Result<TradePair> {
    TradePair::from_json(&std::fs::read_to_string(path)?)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn run(cli: &Cli) -> ortho_trades::Result<Output> {
    Ok(match &cli.command {
        Command::Gen { p, k } => {
            let sq = gen_bp(Modulus::odd(*p)?, *k)?;
            let rows: Vec<&[u32]> = (0..sq.order()).map(|r| sq.row(r)).collect();
            Output::ok(json!({"p": p, "k": k, "rows": rows}), sq.to_text())
        }
        Command::Verify(VerifyCmd::Trade { file, latin }) => {
            let t = read_trade(file)?;
            let report = if *latin || t.k == t.ell { validate_latin_trade(&t) } else { validate_orthogonal_trade(&t)? };
            let valid = report.is_latin_trade && report.is_orthogonal_trade != Some(false);
            let pretty = pretty::report(&report);
            Output { json: to_value(&report), pretty, code: if valid { 0 } else { 1 } }
        }
        Command::Verify(VerifyCmd::Dissection { file }) => {
            let d = SquareDissection::from_json(&std::fs::read_to_string(file)?)?;
            let report = check_good(&d);
            let code = if report.is_good() { 0 } else { 1 };
            Output { pretty: format!("{report:#?}"), json: to_value(&report), code }
        }
        Command::Canon { file } => {
            let c = canonicalize(&read_trade(file)?)?;
            Output::ok(to_value(&c), pretty::trade(&c))
        }
        Command::Construct(ConstructCmd::Threerow { p }) => {
            let p = modulus(*p)?;
            match three_row_trade(p)? {
                Some((sigma, k)) => {
                    let t = trade_from_rowperm(&sigma, k)?;
                    let pretty = format!("k = {k}, rows {:?}\n{}", sigma.support(), pretty::trade(&t));
                    Output::ok(json!({"k": k, "sigma": sigma, "trade": t}), pretty)
                }
                None => return Err(Error::NotOneModSix(p.get())),
            }
        }
        Command::Construct(ConstructCmd::Dissection { p, svg }) => {
            let p = modulus(*p)?;
            if p.get() < 11 {
                let t = log_trade(p)?;
                Output::ok(json!({"dissection": null, "trade": t}), pretty::trade(&t))
            } else {
                let d = good_dissection(((p.get() - 3) / 2) as u64)?;
                let t = dissection_to_trade(&d)?;
                if let Some(path) = svg {
                    std::fs::write(path, render_svg(&d))?;
                }
                let pretty = format!("{} squares, trade size {}\n{}", d.len(), t.size(), pretty::trade(&t));
                Output::ok(json!({"dissection": d, "goodness": check_good(&d), "trade": t}), pretty)
            }
        }
        Command::Construct(ConstructCmd::Family { p }) => {
            let w = construct(modulus(*p)?)?;
            let pretty = format!("k = {}, intercalate {:?}\n{}", w.k, w.intercalate, pretty::trade(&w.trade));
            Output::ok(to_value(&w), pretty)
        }
        Command::Construct(ConstructCmd::Rowperm { p }) => {
            let (sigma, t) = small_rowperm_pipeline(modulus(*p)?)?;
            let pretty = format!("moved rows {:?}\n{}", sigma.support(), pretty::trade(&t));
            Output::ok(json!({"sigma": sigma, "moved_rows": sigma.support(), "trade": t}), pretty)
        }
        Command::Search(SearchCmd::Spectrum { p, k, until_reference, flags }) => {
            let p = Modulus::odd(*p)?;
            let targets: Option<BTreeSet<usize>> = if *until_reference { reference_spectrum(p.get()) } else { None };
            let r = match k {
                Some(k) => spectrum(p, *k, &flags.options(), targets.as_ref())?,
                None => spectrum_all(p, &flags.options(), targets.as_ref())?,
            };
            let code = if r.stop_reason == StopReason::BudgetExhausted { 3 } else { 0 };
            let pretty = format!(
                "p = {}  exhaustive = {}  stop = {:?}  decompositions = {}\nS = {}\n",
                r.p,
                r.exhaustive,
                r.stop_reason,
                r.decompositions,
                pretty::ranges(&r.sizes)
            );
            Output { json: to_value(&r), pretty, code }
        }
        Command::Search(SearchCmd::Rowperm { p, mates, flags }) => {
            let r = rowperm_sizes(modulus(*p)?, *mates, &flags.options())?;
            let code = if r.stop_reason == StopReason::BudgetExhausted { 3 } else { 0 };
            let pretty = format!(
                "p = {}  mates = {}  exhaustive = {}\nall: {}\nnontrivial: {}\n",
                r.p,
                r.mates_count,
                r.exhaustive,
                pretty::ranges(&r.achievable),
                pretty::ranges(&r.nontrivial)
            );
            Output { json: to_value(&r), pretty, code }
        }
        Command::Transversals { p, k, histogram, force } => {
            if *histogram {
                let h = diagonal_histogram(modulus(*p)?, *force)?;
                let pretty = h.counts.iter().map(|(k, v)| format!("{k:>3} {v}\n")).collect();
                let code = if h.claim_holds { 0 } else { 1 };
                Output { json: to_value(&h), pretty, code }
            } else {
                let sq = gen_bp(Modulus::odd(*p)?, *k)?;
                let count = count_transversals(&sq, *force)?;
                Output::ok(json!({"p": p, "k": k, "transversals": count}), format!("{count}\n"))
            }
        }
        Command::Orthomorphisms { p, min_distance_from_linear: k, force } => {
            let p = modulus(*p)?;
            match k {
                Some(k) => {
                    let r = min_distance_from_linear(p, *k, *force)?;
                    let pretty = format!("min distance {} (bound {:.4})\n", r.min_distance, r.bound);
                    let code = if r.exceeds_bound { 0 } else { 1 };
                    Output { json: to_value(&r), pretty, code }
                }
                None => {
                    let n = enumerate_orthomorphisms(p, *force)?.len();
                    Output::ok(json!({"p": p, "orthomorphisms": n}), format!("{n}\n"))
                }
            }
        }
        Command::Bounds { p, k } => {
            let b = size_bounds(modulus(*p)?, *k)?;
            Output::ok(to_value(&b), format!("{b:#?}\n"))
        }
        Command::Fixtures { out } => {
            std::fs::create_dir_all(out)?;
            let mut written = Vec::new();
            for (name, body) in fixtures()? {
                let path = out.join(name);
                std::fs::write(&path, body)?;
                written.push(path.display().to_string());
            }
            Output::ok(json!({"written": written}), written.join("\n") + "\n")
        }
    })
}

/// The figure trades and the example dissection, one JSON document each.
fn fixtures() -> ortho_trades::Result<Vec<(&'static str, String)>> {
    let fig1 = construct(Modulus::prime(7)?)?.trade;
    let fig2 = trade_from_rowperm(&rowperm_from_symbol(&fig1, 0)?, fig1.k)?;
    let fig4 = construct(Modulus::prime(13)?)?.trade;
    let b13 = log_trade(Modulus::prime(13)?)?;
    let d5 = good_dissection(5)?;
    Ok(vec![
        ("fig1.json", fig1.to_json() + "\n"),
        ("fig2.json", fig2.to_json() + "\n"),
        ("fig4.json", fig4.to_json() + "\n"),
        ("b13.json", b13.to_json() + "\n"),
        ("dissection5.json", d5.to_json() + "\n"),
    ])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.pretty {
                print!("{}", out.pretty);
            } else {
                println!("{}", out.json);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(failure(&e))
        }
    }
}
