//! An explicit orthogonal trade of size `3k(k-1)`, not divisible by `p`, for
//! primes `p = 1 (mod 6)`, and the intercalate it creates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latin::{are_orthogonal, gen_bp};
use crate::modular::Modulus;
use crate::rowperm::eisenstein_root;
use crate::trade::{apply_trade, is_orthogonal_trade, TradeEntry, TradePair};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyWitness {
    pub p: Modulus,
    pub k: u32,
    pub trade: TradePair,
    /// `(row, col, symbol)` of the 2x2 subsquare in the traded square.
    pub intercalate: [(u32, u32, u32); 4],
}

/// The root `k` of `k^2 - k + 1 = 0 (mod p)` with `2 <= k <= (p+1)/2`.
pub fn find_k(p: Modulus) -> Result<u32> {
    p.require_prime()?;
    if p.get() % 6 != 1 {
        return Err(Error::NotOneModSix(p.get()));
    }
    eisenstein_root(p)?.ok_or(Error::NotOneModSix(p.get()))
}

/// Which rows of the block `T_i` a set formula populates.
#[derive(Clone, Copy)]
enum RowKind {
    /// row `i(k-1)`
    Upper,
    /// row `i(k-1) + 1`
    Lower,
}

/// One set `{(row, j, symbol) | lo <= j <= hi}` with `symbol = i(k-1) + j + shift`,
/// where bounds and shift are affine in `i` and `k`.
struct SetFormula {
    row: RowKind,
    lo: fn(i64, i64) -> i64,
    hi: fn(i64, i64) -> i64,
    shift: fn(i64, i64) -> i64,
}

/// The two sets of each `T_i` (`i >= 1`), in rows `i(k-1)` and `i(k-1)+1`.
const BLOCK_T: [SetFormula; 2] = [
    SetFormula { row: RowKind::Upper, lo: |i, _| i, hi: |_, k| 2 * (k - 1), shift: |_, _| 0 },
    SetFormula { row: RowKind::Lower, lo: |_, _| 0, hi: |i, k| k + i - 2, shift: |_, _| 1 },
];

/// The six sets of each `T_i'` (`i >= 1`).
const BLOCK_T_MATE: [SetFormula; 6] = [
    SetFormula { row: RowKind::Upper, lo: |i, _| i, hi: |_, k| k - 2, shift: |_, k| k },
    SetFormula { row: RowKind::Upper, lo: |_, k| k - 1, hi: |i, k| k + i - 2, shift: |_, _| 1 },
    // (i-1)(k-1) + j = i(k-1) + j - (k-1)
    SetFormula { row: RowKind::Upper, lo: |i, k| k + i - 1, hi: |_, k| 2 * (k - 1), shift: |_, k| 1 - k },
    SetFormula { row: RowKind::Lower, lo: |_, _| 0, hi: |i, _| i - 1, shift: |_, k| k },
    SetFormula { row: RowKind::Lower, lo: |i, _| i, hi: |_, k| k - 1, shift: |_, _| 0 },
    SetFormula { row: RowKind::Lower, lo: |_, k| k, hi: |i, k| k + i - 2, shift: |_, k| 1 - k },
];

fn expand(p: Modulus, k: i64, i: i64, sets: &[SetFormula], out: &mut Vec<(u32, u32, u32)>) {
    let top = i * (k - 1);
    for f in sets {
        let row = match f.row {
            RowKind::Upper => top,
            RowKind::Lower => top + 1,
        };
        // Symbols are offset from i(k-1) on both rows.
        for j in (f.lo)(i, k)..=(f.hi)(i, k) {
            out.push((p.reduce(row), p.reduce(j), p.reduce(top + j + (f.shift)(i, k))));
        }
    }
}

/// The sets `T = U T_i` and `T' = U T_i'` as `(row, col, symbol)` lists.
fn raw_sets(p: Modulus, k: u32) -> (Vec<(u32, u32, u32)>, Vec<(u32, u32, u32)>) {
    let k = k as i64;
    let mut t = Vec::new();
    let mut t_mate = Vec::new();
    for j in 0..=k - 2 {
        t.push((0, p.reduce(j), p.reduce(j)));
        t.push((0, p.reduce(k + j), p.reduce(k + j)));
        t_mate.push((0, p.reduce(j), p.reduce(k + j)));
        t_mate.push((0, p.reduce(k + j), p.reduce(j)));
    }
    for i in 1..k {
        expand(p, k, i, &BLOCK_T, &mut t);
        expand(p, k, i, &BLOCK_T_MATE, &mut t_mate);
    }
    (t, t_mate)
}

/// Assembles the trade, checks its size and validates it against `B_p(k)`.
pub fn construct(p: Modulus) -> Result<FamilyWitness> {
    let k = find_k(p)?;
    let (t, t_mate) = raw_sets(p, k);
    let mut base: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for (r, c, s) in t {
        if base.insert((r, c), s).is_some() {
            return Err(Error::InvalidTrade(format!("blocks overlap at ({r}, {c})")));
        }
    }
    let mut mate: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for (r, c, s) in t_mate {
        if mate.insert((r, c), s).is_some() {
            return Err(Error::InvalidTrade(format!("mate blocks overlap at ({r}, {c})")));
        }
    }
    if base.keys().ne(mate.keys()) {
        return Err(Error::InvalidTrade("T and T' occupy different cells".into()));
    }
    let entries = base
        .iter()
        .map(|(&(r, c), &s)| TradeEntry::new(r, c, s, mate[&(r, c)]))
        .collect();
    let trade = TradePair::new(p, 1, k, entries)?;
    let expected = 3 * k as usize * (k as usize - 1);
    if trade.size() != expected || expected.is_multiple_of(p.usize()) {
        return Err(Error::InvalidTrade(format!("size {} (expected {expected})", trade.size())));
    }
    if !is_orthogonal_trade(&trade) {
        return Err(Error::InvalidTrade("construction failed orthogonality".into()));
    }
    let mut w = FamilyWitness {
        p,
        k,
        trade,
        intercalate: [(0, 0, 0); 4],
    };
    w.intercalate = intercalate_witness(&w)?;
    Ok(w)
}

/// Cells `(k-1, 1), (k-1, k), (k, 1), (k, k)` holding `2k, k, k, 2k` in the
/// traded square, which stays orthogonal to `B_p(k)`.
pub fn intercalate_witness(w: &FamilyWitness) -> Result<[(u32, u32, u32); 4]> {
    let p = w.p;
    let k = w.k;
    let l = apply_trade(&w.trade)?;
    let two_k = p.mul(2, k);
    let cells = [(k - 1, 1, two_k), (k - 1, k, k), (k, 1, k), (k, k, two_k)];
    for &(r, c, s) in &cells {
        if l.get(r as usize, c as usize) != s {
            return Err(Error::InvalidTrade(format!("intercalate cell ({r}, {c}) does not hold {s}")));
        }
    }
    if !are_orthogonal(&l, &gen_bp(p, k)?)? {
        return Err(Error::InvalidTrade("traded square is not orthogonal to B_p(k)".into()));
    }
    Ok(cells)
}
