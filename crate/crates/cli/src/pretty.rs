use std::collections::BTreeSet;
use std::fmt::Write as _;

use ortho_trades::trade::{TradePair, ValidationReport};

/// `{0, 14, 24..49}` style listing.
pub fn ranges(set: &BTreeSet<usize>) -> String {
    let mut parts = Vec::new();
    let mut iter = set.iter().copied().peekable();
    while let Some(lo) = iter.next() {
        let mut hi = lo;
        while iter.peek() == Some(&(hi + 1)) {
            hi = iter.next().expect("peeked");
        }
        parts.push(if hi > lo + 1 { format!("{lo}..{hi}") } else if hi == lo + 1 { format!("{lo}, {hi}") } else { lo.to_string() });
    }
    format!("{{{}}}", parts.join(", "))
}

/// The traded cells on a `p x p` grid as `base>mate`, other cells as dots.
pub fn trade(t: &TradePair) -> String {
    let n = t.p.usize();
    let mut grid = vec![vec![String::from("."); n]; n];
    for e in t.entries() {
        grid[e.row as usize][e.col as usize] = format!("{}>{}", e.base, e.mate);
    }
    let width = grid.iter().flatten().map(String::len).max().unwrap_or(1);
    let mut out = format!("p = {}  index ({}, {})  size {}\n", t.p, t.ell, t.k, t.size());
    if n > 40 {
        return out;
    }
    for row in grid {
        let cells: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

pub fn report(r: &ValidationReport) -> String {
    let mut out = format!(
        "latin trade: {}\northogonal trade: {}\nsize: {}\n",
        r.is_latin_trade,
        r.is_orthogonal_trade.map_or("not checked".to_string(), |b| b.to_string()),
        r.size
    );
    for f in &r.failures {
        let _ = writeln!(out, "  {f:?}");
    }
    out
}
