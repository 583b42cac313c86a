use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latin::{gen_bp, LatinSquare, Transversal};
use crate::modular::Modulus;

use super::EXHAUSTIVE_ORDER_CAP;

/// Masks are 32 bits wide.
const HARD_ORDER_CAP: usize = 32;

fn check_order(n: usize, force: bool) -> Result<()> {
    if n > HARD_ORDER_CAP || (n > EXHAUSTIVE_ORDER_CAP && !force) {
        let cap = if force { HARD_ORDER_CAP } else { EXHAUSTIVE_ORDER_CAP };
        return Err(Error::OrderCap { n, cap });
    }
    Ok(())
}

/// Streams every transversal of `l` once, ordered lexicographically by the
/// column chosen in each row.
pub fn enumerate_transversals(l: &LatinSquare, force: bool) -> Result<Transversals<'_>> {
    let n = l.order();
    check_order(n, force)?;
    Ok(Transversals {
        l,
        n,
        cols: vec![0; n],
        next: vec![0; n.max(1)],
        depth: 0,
        col_mask: 0,
        sym_mask: 0,
        done: n == 0,
    })
}

pub struct Transversals<'a> {
    l: &'a LatinSquare,
    n: usize,
    cols: Vec<usize>,
    next: Vec<usize>,
    depth: usize,
    col_mask: u32,
    sym_mask: u32,
    done: bool,
}

impl Transversals<'_> {
    fn unplace(&mut self, r: usize) {
        let c = self.cols[r];
        self.col_mask &= !(1 << c);
        self.sym_mask &= !(1 << self.l.get(r, c));
    }
}

impl Iterator for Transversals<'_> {
    type Item = Transversal;

    fn next(&mut self) -> Option<Transversal> {
        if self.done {
            return None;
        }
        loop {
            let r = self.depth;
            let mut placed = false;
            while self.next[r] < self.n {
                let c = self.next[r];
                self.next[r] += 1;
                let s = self.l.get(r, c);
                if self.col_mask >> c & 1 == 0 && self.sym_mask >> s & 1 == 0 {
                    self.cols[r] = c;
                    self.col_mask |= 1 << c;
                    self.sym_mask |= 1 << s;
                    placed = true;
                    break;
                }
            }
            if placed {
                if r + 1 == self.n {
                    let t = Transversal::from_columns(&self.cols);
                    self.unplace(r);
                    return Some(t);
                }
                self.depth += 1;
                self.next[self.depth] = 0;
            } else {
                if r == 0 {
                    self.done = true;
                    return None;
                }
                self.depth -= 1;
                self.unplace(self.depth);
            }
        }
    }
}

/// Calls `visit` with the column of each row for every transversal, in the
/// order of [`enumerate_transversals`].
pub(crate) fn for_each_transversal(l: &LatinSquare, visit: &mut dyn FnMut(&[usize])) {
    fn rec(l: &LatinSquare, r: usize, cols: &mut Vec<usize>, cm: u32, sm: u32, visit: &mut dyn FnMut(&[usize])) {
        let n = l.order();
        if r == n {
            visit(cols);
            return;
        }
        let row = l.row(r);
        for c in 0..n {
            let s = row[c];
            if cm >> c & 1 == 0 && sm >> s & 1 == 0 {
                cols.push(c);
                rec(l, r + 1, cols, cm | 1 << c, sm | 1 << s, visit);
                cols.pop();
            }
        }
    }
    if l.order() > 0 {
        rec(l, 0, &mut Vec::with_capacity(l.order()), 0, 0, visit);
    }
}

/// Number of transversals, without materializing them.
pub fn count_transversals(l: &LatinSquare, force: bool) -> Result<u64> {
    fn rec(rows: &[Vec<u32>], r: usize, cm: u32, sm: u32) -> u64 {
        if r == rows.len() {
            return 1;
        }
        let mut total = 0;
        let mut free = !cm & ((1u64 << rows.len()) - 1) as u32;
        while free != 0 {
            let c = free.trailing_zeros() as usize;
            free &= free - 1;
            let s = rows[r][c];
            if sm >> s & 1 == 0 {
                total += rec(rows, r + 1, cm | 1 << c, sm | 1 << s);
            }
        }
        total
    }
    let n = l.order();
    check_order(n, force)?;
    if n == 0 {
        return Ok(0);
    }
    let rows: Vec<Vec<u32>> = (0..n).map(|r| l.row(r).to_vec()).collect();
    Ok(rec(&rows, 0, 0, 0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalHistogram {
    pub p: Modulus,
    /// Number of transversals of `B_p` per count of main-diagonal cells.
    pub counts: BTreeMap<usize, u64>,
    /// `p - log2(p) - 1`.
    pub hit_bound: f64,
    /// Every key is `p` or at most `hit_bound`.
    pub claim_holds: bool,
}

/// Main-diagonal hits over all transversals of `B_p(1)`.
pub fn diagonal_histogram(p: Modulus, force: bool) -> Result<DiagonalHistogram> {
    p.require_prime()?;
    let l = gen_bp(p, 1)?;
    check_order(l.order(), force)?;
    let mut counts = BTreeMap::new();
    for_each_transversal(&l, &mut |cols| {
        let hits = cols.iter().enumerate().filter(|&(r, &c)| r == c).count();
        *counts.entry(hits).or_insert(0) += 1;
    });
    let n = p.get() as f64;
    let hit_bound = n - n.log2() - 1.0;
    let claim_holds = counts.keys().all(|&h| h == p.usize() || h as f64 <= hit_bound + 1e-9);
    Ok(DiagonalHistogram { p, counts, hit_bound, claim_holds })
}
