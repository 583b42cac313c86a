//! Latin trades and orthogonal trades inside the family `B_p(k)`.
//!
//! A [`TradePair`] stores the cells of `T` together with the symbol of `B_p(ell)`
//! (the base) and the symbol of the disjoint mate `T'` in each cell. It is an
//! orthogonal trade of index `(ell, k)` when swapping the mate in keeps the
//! square orthogonal to `B_p(k)`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latin::{gen_bp, LatinSquare};
use crate::modular::Modulus;

/// One cell of a trade: `(row, col, base, mate)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u32; 4]", into = "[u32; 4]")]
pub struct TradeEntry {
    pub row: u32,
    pub col: u32,
    pub base: u32,
    pub mate: u32,
}

impl TradeEntry {
    pub const fn new(row: u32, col: u32, base: u32, mate: u32) -> Self {
        TradeEntry { row, col, base, mate }
    }
}

impl From<[u32; 4]> for TradeEntry {
    fn from([row, col, base, mate]: [u32; 4]) -> Self {
        TradeEntry { row, col, base, mate }
    }
}

impl From<TradeEntry> for [u32; 4] {
    fn from(e: TradeEntry) -> Self {
        [e.row, e.col, e.base, e.mate]
    }
}

/// A trade `T` in `B_p(ell)` with mate `T'`, aimed at orthogonality with `B_p(k)`.
///
/// Entries are kept sorted by `(row, col)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawTrade")]
pub struct TradePair {
    pub p: Modulus,
    pub ell: u32,
    pub k: u32,
    entries: Vec<TradeEntry>,
}

#[derive(Deserialize)]
struct RawTrade {
    p: Modulus,
    ell: u32,
    k: u32,
    entries: Vec<TradeEntry>,
}

impl TryFrom<RawTrade> for TradePair {
    type Error = Error;

    fn try_from(raw: RawTrade) -> Result<Self> {
        TradePair::new(raw.p, raw.ell, raw.k, raw.entries)
    }
}

impl TradePair {
    /// Rejects residues outside `0..p`; everything else is left to validation.
    pub fn new(p: Modulus, ell: u32, k: u32, mut entries: Vec<TradeEntry>) -> Result<Self> {
        let n = p.get();
        if ell >= n || k >= n {
            return Err(Error::IndexOutOfRange { k: ell.max(k), p: n });
        }
        for e in &entries {
            if e.row >= n || e.col >= n || e.base >= n || e.mate >= n {
                return Err(Error::CellOutOfRange {
                    row: e.row as usize,
                    col: e.col as usize,
                    n: n as usize,
                });
            }
        }
        entries.sort_unstable();
        Ok(TradePair { p, ell, k, entries })
    }

    pub fn empty(p: Modulus, ell: u32, k: u32) -> Self {
        TradePair { p, ell, k, entries: Vec::new() }
    }

    pub fn entries(&self) -> &[TradeEntry] {
        &self.entries
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index(&self) -> (u32, u32) {
        (self.ell, self.k)
    }

    /// Occurrences of each base symbol in `T`.
    pub fn symbol_histogram(&self) -> BTreeMap<u32, usize> {
        let mut h = BTreeMap::new();
        for e in &self.entries {
            *h.entry(e.base).or_default() += 1;
        }
        h
    }

    /// Rows holding at least one entry, ascending.
    pub fn rows(&self) -> Vec<u32> {
        let mut rows: Vec<u32> = self.entries.iter().map(|e| e.row).collect();
        rows.dedup();
        rows
    }

    /// Swaps rows and columns; symbols are unchanged.
    pub fn transposed(&self) -> TradePair {
        let entries = self
            .entries
            .iter()
            .map(|e| TradeEntry::new(e.col, e.row, e.base, e.mate))
            .collect();
        TradePair::new(self.p, self.ell, self.k, entries).expect("transpose keeps residues in range")
    }

    pub fn with_index(mut self, ell: u32, k: u32) -> TradePair {
        self.ell = ell;
        self.k = k;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trade serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// A located reason why a trade fails validation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateCell { row: u32, col: u32 },
    BaseMismatch { row: u32, col: u32, expected: u32, found: u32 },
    MateEqualsBase { row: u32, col: u32 },
    RowImbalance { row: u32 },
    ColumnImbalance { col: u32 },
    RepeatedPair { left: u32, right: u32, cells: Vec<(u32, u32)> },
    NotLatinTrade,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub is_latin_trade: bool,
    /// `None` when orthogonality was not examined.
    pub is_orthogonal_trade: Option<bool>,
    pub failures: Vec<Violation>,
    pub size: usize,
    pub symbol_histogram: BTreeMap<u32, usize>,
}

fn latin_failures(t: &TradePair) -> Vec<Violation> {
    let p = t.p;
    let mut failures = Vec::new();
    for w in t.entries.windows(2) {
        if (w[0].row, w[0].col) == (w[1].row, w[1].col) {
            failures.push(Violation::DuplicateCell { row: w[0].row, col: w[0].col });
        }
    }
    for e in &t.entries {
        let expected = p.add(p.mul(t.ell, e.row), e.col);
        if e.base != expected {
            failures.push(Violation::BaseMismatch { row: e.row, col: e.col, expected, found: e.base });
        }
        if e.mate == e.base {
            failures.push(Violation::MateEqualsBase { row: e.row, col: e.col });
        }
    }
    let mut rows: BTreeMap<u32, (Vec<u32>, Vec<u32>)> = BTreeMap::new();
    let mut cols: BTreeMap<u32, (Vec<u32>, Vec<u32>)> = BTreeMap::new();
    for e in &t.entries {
        let r = rows.entry(e.row).or_default();
        r.0.push(e.base);
        r.1.push(e.mate);
        let c = cols.entry(e.col).or_default();
        c.0.push(e.base);
        c.1.push(e.mate);
    }
    let balanced = |(base, mate): &mut (Vec<u32>, Vec<u32>)| {
        base.sort_unstable();
        mate.sort_unstable();
        base == mate && mate.windows(2).all(|w| w[0] != w[1])
    };
    for (row, mut v) in rows {
        if !balanced(&mut v) {
            failures.push(Violation::RowImbalance { row });
        }
    }
    for (col, mut v) in cols {
        if !balanced(&mut v) {
            failures.push(Violation::ColumnImbalance { col });
        }
    }
    failures
}

/// Checks that `T` lies in `B_p(ell)`, `T'` is a disjoint mate on the same
/// cells, and rows and columns balance. Violations are collected, not thrown.
pub fn validate_latin_trade(t: &TradePair) -> ValidationReport {
    let failures = latin_failures(t);
    ValidationReport {
        is_latin_trade: failures.is_empty(),
        is_orthogonal_trade: None,
        failures,
        size: t.size(),
        symbol_histogram: t.symbol_histogram(),
    }
}

/// Latin validation followed by an orthogonality test of the traded square
/// against `B_p(k)`.
pub fn validate_orthogonal_trade(t: &TradePair) -> Result<ValidationReport> {
    if t.k == t.ell {
        return Err(Error::IndexOutOfRange { k: t.k, p: t.p.get() });
    }
    let mut report = validate_latin_trade(t);
    if !report.is_latin_trade {
        report.is_orthogonal_trade = Some(false);
        report.failures.push(Violation::NotLatinTrade);
        return Ok(report);
    }
    if t.p.is_unit(t.p.sub(t.k, t.ell)) && sparse_pairs_preserved(t) {
        report.is_orthogonal_trade = Some(true);
        return Ok(report);
    }
    let mate_square = gen_bp(t.p, t.k)?;
    let applied = apply_unchecked(t)?;
    let n = t.p.usize();
    let mut cells_by_pair: HashMap<(u32, u32), Vec<(u32, u32)>> = HashMap::new();
    let mut seen = vec![0u8; n * n];
    let mut repeated = false;
    for r in 0..n {
        for c in 0..n {
            let pair = (applied.get(r, c), mate_square.get(r, c));
            let slot = &mut seen[pair.0 as usize * n + pair.1 as usize];
            *slot = slot.saturating_add(1);
            repeated |= *slot > 1;
        }
    }
    if repeated {
        for r in 0..n {
            for c in 0..n {
                let pair = (applied.get(r, c), mate_square.get(r, c));
                if seen[pair.0 as usize * n + pair.1 as usize] > 1 {
                    cells_by_pair.entry(pair).or_default().push((r as u32, c as u32));
                }
            }
        }
        let mut pairs: Vec<_> = cells_by_pair.into_iter().collect();
        pairs.sort();
        for ((left, right), cells) in pairs {
            report.failures.push(Violation::RepeatedPair { left, right, cells });
        }
    }
    report.is_orthogonal_trade = Some(!repeated);
    Ok(report)
}

/// With `B_p(ell)` orthogonal to `B_p(k)`, the traded square stays orthogonal
/// iff the pairs `(mate, B_p(k))` over the trade cells are distinct and equal
/// the pairs `(base, B_p(k))` they replace.
fn sparse_pairs_preserved(t: &TradePair) -> bool {
    let pairs = |sym: fn(&TradeEntry) -> u32| {
        let mut v: Vec<(u32, u32)> = t
            .entries
            .iter()
            .map(|e| (sym(e), t.p.add(t.p.mul(t.k, e.row), e.col)))
            .collect();
        v.sort_unstable();
        v
    };
    let new = pairs(|e| e.mate);
    new.windows(2).all(|w| w[0] != w[1]) && new == pairs(|e| e.base)
}

/// Convenience: true iff `t` is a valid orthogonal trade of its index.
pub fn is_orthogonal_trade(t: &TradePair) -> bool {
    matches!(validate_orthogonal_trade(t), Ok(r) if r.is_orthogonal_trade == Some(true))
}

fn apply_unchecked(t: &TradePair) -> Result<LatinSquare> {
    let n = t.p.usize();
    let base = gen_bp(t.p, t.ell)?;
    let mut cells = base.cells().to_vec();
    for e in &t.entries {
        cells[e.row as usize * n + e.col as usize] = e.mate;
    }
    LatinSquare::from_cells(n, cells)
}

/// `(B_p(ell) \ T) u T'`.
pub fn apply_trade(t: &TradePair) -> Result<LatinSquare> {
    let report = validate_latin_trade(t);
    if !report.is_latin_trade {
        return Err(Error::InvalidTrade(format!("{:?}", report.failures)));
    }
    apply_unchecked(t)
}

/// The trade turning `l = B_p(ell)` into `m`, recorded with target index `k`.
pub fn difference_trade(l: &LatinSquare, m: &LatinSquare, k: u32) -> Result<TradePair> {
    if l.order() != m.order() {
        return Err(Error::OrderMismatch(l.order(), m.order()));
    }
    let (p, ell) = l
        .label()
        .ok_or_else(|| Error::InvalidTrade("left square is not a labelled B_p(ell)".into()))?;
    let p = Modulus::odd(p)?;
    let n = l.order();
    let mut entries = Vec::new();
    for r in 0..n {
        for c in 0..n {
            let (a, b) = (l.get(r, c), m.get(r, c));
            if a != b {
                entries.push(TradeEntry::new(r as u32, c as u32, a, b));
            }
        }
    }
    TradePair::new(p, ell, k, entries)
}

/// Normal form of an orthogonal trade: index `(1, K)` with `K <= K^{-1}`,
/// containing `(0, 0)` with base symbol 0.
pub fn canonicalize(t: &TradePair) -> Result<TradePair> {
    if !is_orthogonal_trade(t) {
        return Err(Error::InvalidTrade("canonicalize needs a valid orthogonal trade".into()));
    }
    let p = t.p;
    // Columns and symbols scaled by ell^{-1}: B_p(x) -> B_p(x / ell).
    let ell_inv = p.inv(t.ell)?;
    let scaled: Vec<TradeEntry> = t
        .entries
        .iter()
        .map(|e| TradeEntry::new(e.row, p.mul(e.col, ell_inv), p.mul(e.base, ell_inv), p.mul(e.mate, ell_inv)))
        .collect();
    let k1 = p.mul(t.k, ell_inv);
    let mut out = TradePair::new(p, 1, k1, scaled)?;
    // Transposition fixes B_p(1) and takes the mate B_p(k') to B_p(k'^{-1}).
    let k1_inv = p.inv(k1)?;
    if k1 > k1_inv {
        out = out.transposed().with_index(1, k1_inv);
    }
    if let Some(&first) = out.entries.first() {
        let (r0, c0) = (first.row, first.col);
        let shift = p.add(r0, c0);
        let moved = out
            .entries
            .iter()
            .map(|e| TradeEntry::new(p.sub(e.row, r0), p.sub(e.col, c0), p.sub(e.base, shift), p.sub(e.mate, shift)))
            .collect();
        out = TradePair::new(p, 1, out.k, moved)?;
    }
    if !is_orthogonal_trade(&out) {
        return Err(Error::InvalidTrade("canonical form failed to re-validate".into()));
    }
    Ok(out)
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::latin::are_orthogonal;

    fn m(p: u32) -> Modulus {
        Modulus::odd(p).unwrap()
    }

    #[test]
    fn figure_one_is_an_orthogonal_trade() {
        let t = fig1();
        assert_eq!(t.size(), 18);
        assert!(validate_latin_trade(&t).is_latin_trade);
        let r = validate_orthogonal_trade(&t).unwrap();
        assert_eq!(r.is_orthogonal_trade, Some(true));
        assert!(r.failures.is_empty());
        assert!(r.symbol_histogram.values().all(|&c| c == 3 || c == 4));
    }

    #[test]
    fn figure_one_against_wrong_mate() {
        let t = fig1().with_index(1, 2);
        let r = validate_orthogonal_trade(&t).unwrap();
        assert!(r.is_latin_trade);
        assert_eq!(r.is_orthogonal_trade, Some(false));
        // Independent pair count after applying by hand.
        let applied = apply_trade(&t).unwrap();
        let b2 = gen_bp(m(7), 2).unwrap();
        let mut pairs: Vec<_> = (0..49).map(|i| (applied.cells()[i], b2.cells()[i])).collect();
        pairs.sort();
        pairs.dedup();
        assert!(pairs.len() < 49);
    }

    #[test]
    fn single_cell_is_not_a_trade() {
        let t = TradePair::new(m(7), 1, 3, vec![TradeEntry::new(0, 0, 0, 1)]).unwrap();
        let r = validate_latin_trade(&t);
        assert!(!r.is_latin_trade);
        assert!(r.failures.contains(&Violation::RowImbalance { row: 0 }));
        assert!(r.failures.contains(&Violation::ColumnImbalance { col: 0 }));
    }

    #[test]
    fn b13_symbol_twice_trade() {
        let t = b13_symbol_twice();
        let r = validate_latin_trade(&t);
        assert!(r.is_latin_trade, "{:?}", r.failures);
        assert_eq!(r.size, 12);
        assert!(r.symbol_histogram.values().all(|&c| c == 2));
    }

    #[test]
    fn empty_trade() {
        let t = TradePair::empty(m(7), 1, 3);
        let r = validate_orthogonal_trade(&t).unwrap();
        assert_eq!(r.is_orthogonal_trade, Some(true));
        assert_eq!(r.size, 0);
        assert_eq!(apply_trade(&t).unwrap().cells(), gen_bp(m(7), 1).unwrap().cells());
    }

    #[test]
    fn rejects_equal_index_and_bad_residues() {
        let t = fig1().with_index(1, 1);
        assert!(validate_orthogonal_trade(&t).is_err());
        assert!(TradePair::new(m(7), 1, 3, vec![TradeEntry::new(0, 9, 0, 1)]).is_err());
    }

    #[test]
    fn reports_every_violation() {
        let mut raw: Vec<TradeEntry> = fig1().entries().to_vec();
        raw[0].base = 5;
        raw[1].mate = raw[1].base;
        let t = TradePair::new(m(7), 1, 3, raw).unwrap();
        let r = validate_latin_trade(&t);
        assert!(r.failures.iter().any(|f| matches!(f, Violation::BaseMismatch { row: 0, col: 0, .. })));
        assert!(r.failures.iter().any(|f| matches!(f, Violation::MateEqualsBase { row: 0, col: 1 })));
    }

    #[test]
    fn difference_inverts_apply() {
        let t = fig1();
        let applied = apply_trade(&t).unwrap();
        let b = gen_bp(m(7), 1).unwrap();
        assert_eq!(difference_trade(&b, &applied, 3).unwrap(), t);
        assert!(difference_trade(&b, &b, 3).unwrap().is_empty());
        assert!(difference_trade(&b, &gen_bp(m(5), 1).unwrap(), 3).is_err());
    }

    #[test]
    fn canonical_form_of_figure_one() {
        let c = canonicalize(&fig1()).unwrap();
        assert_eq!(c, fig1());
    }

    #[test]
    fn canonicalize_transposed_index() {
        // The transposed applied square is orthogonal to B_7(3^{-1}) = B_7(5).
        let t5 = fig1().transposed().with_index(1, 5);
        assert!(is_orthogonal_trade(&t5));
        let c = canonicalize(&t5).unwrap();
        assert_eq!(c.index(), (1, 3));
        assert_eq!(c.size(), 18);
        assert_eq!(c.entries()[0], TradeEntry::new(0, 0, 0, c.entries()[0].mate));
    }

    #[test]
    fn canonicalize_scaled_index() {
        // Map the figure into B_7(2) via columns and symbols times 2.
        let p = m(7);
        let scaled: Vec<TradeEntry> = fig1()
            .entries()
            .iter()
            .map(|e| TradeEntry::new(e.row, p.mul(e.col, 2), p.mul(e.base, 2), p.mul(e.mate, 2)))
            .collect();
        let t = TradePair::new(p, 2, 6, scaled).unwrap();
        assert!(is_orthogonal_trade(&t));
        let c = canonicalize(&t).unwrap();
        assert_eq!(c.index(), (1, 3));
        assert!(is_orthogonal_trade(&c));
        assert_eq!(canonicalize(&c).unwrap(), c);
    }

    #[test]
    fn json_is_row_major() {
        let t = fig1();
        let s = t.to_json();
        assert!(s.starts_with(r#"{"p":7,"ell":1,"k":3,"entries":[[0,0,0,3],[0,1,1,4]"#));
        assert_eq!(TradePair::from_json(&s).unwrap(), t);
        assert!(TradePair::from_json(r#"{"p":7,"ell":1,"k":3,"entries":[[0,0,0,8]]}"#).is_err());
    }

    #[test]
    fn transpose_duality_on_figure() {
        let t = fig1();
        let applied_t = apply_trade(&t).unwrap().transpose();
        let inv = m(7).inv(3).unwrap();
        assert!(are_orthogonal(&applied_t, &gen_bp(m(7), inv).unwrap()).unwrap());
    }

    #[test]
    fn sparse_orthogonality_matches_dense_square_check() {
        let mut cases = vec![(fig1(), 7)];
        let mut verdicts = Vec::new();
        let nine = [[0, 0, 0, 3], [0, 3, 3, 0], [3, 0, 3, 6], [3, 3, 6, 3], [6, 0, 6, 0], [6, 3, 0, 6]];
        cases.push((TradePair::new(m(9), 1, 2, nine.iter().map(|&e| e.into()).collect()).unwrap(), 9));
        for (t, p) in cases {
            for k in (2..p).filter(|&k| k != t.ell && m(p).is_unit(k)) {
                let t = TradePair::new(m(p), t.ell, k, t.entries().to_vec()).unwrap();
                let dense = are_orthogonal(&apply_trade(&t).unwrap(), &gen_bp(m(p), k).unwrap()).unwrap();
                assert_eq!(is_orthogonal_trade(&t), dense, "p = {p}, k = {k}");
                verdicts.push(dense);
            }
        }
        assert!(verdicts.contains(&true) && verdicts.contains(&false));
    }
}
