//! Orthogonal trades whose mate permutes entire rows of `B_p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{symbol_system, TradeMatrix};
use crate::modular::Modulus;
use crate::trade::{TradeEntry, TradePair};

/// A permutation of `Z_p`; row `r` of the traded square is row `map[r]` of `B_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowPermutation {
    pub p: Modulus,
    map: Vec<u32>,
}

impl RowPermutation {
    pub fn identity(p: Modulus) -> Self {
        RowPermutation {
            p,
            map: (0..p.get()).collect(),
        }
    }

    pub fn from_map(p: Modulus, map: Vec<u32>) -> Result<Self> {
        if map.len() != p.usize() {
            return Err(Error::Matrix(format!("permutation of length {} for p = {p}", map.len())));
        }
        let mut seen = vec![false; p.usize()];
        for &v in &map {
            if v >= p.get() || std::mem::replace(&mut seen[v as usize], true) {
                return Err(Error::Matrix("row map is not a bijection".into()));
            }
        }
        Ok(RowPermutation { p, map })
    }

    /// Identity outside the listed `(from, to)` pairs.
    pub fn from_pairs(p: Modulus, pairs: &[(u32, u32)]) -> Result<Self> {
        let mut map: Vec<u32> = (0..p.get()).collect();
        for &(a, b) in pairs {
            if a >= p.get() || b >= p.get() {
                return Err(Error::CellOutOfRange { row: a as usize, col: b as usize, n: p.usize() });
            }
            map[a as usize] = b;
        }
        Self::from_map(p, map)
    }

    pub fn map(&self) -> &[u32] {
        &self.map
    }

    #[inline]
    pub fn image(&self, r: u32) -> u32 {
        self.map[r as usize]
    }

    /// Moved rows, ascending.
    pub fn support(&self) -> Vec<u32> {
        (0..self.p.get()).filter(|&r| self.map[r as usize] != r).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(r, &v)| r as u32 == v)
    }
}

fn check_ks(p: Modulus, ks: &[u32]) -> Result<()> {
    for &k in ks {
        if k < 2 || k >= p.get() {
            return Err(Error::IndexOutOfRange { k, p: p.get() });
        }
    }
    Ok(())
}

/// True iff, for every `k` in `ks`, the values `k r - sigma(r)` are pairwise
/// distinct, i.e. the row-permuted square stays orthogonal to `B_p(k)`.
pub fn rowperm_orthogonal(sigma: &RowPermutation, ks: &[u32]) -> Result<bool> {
    let p = sigma.p;
    check_ks(p, ks)?;
    let mut seen = vec![false; p.usize()];
    for &k in ks {
        seen.iter_mut().for_each(|s| *s = false);
        for r in 0..p.get() {
            let d = p.sub(p.mul(k, r), sigma.image(r)) as usize;
            if std::mem::replace(&mut seen[d], true) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The orthogonal trade of index `(1, k)` and size `p * |support|`.
pub fn trade_from_rowperm(sigma: &RowPermutation, k: u32) -> Result<TradePair> {
    let p = sigma.p;
    let support = sigma.support();
    match support.len() {
        0 => return Err(Error::NotOrthogonal("identity permutation moves no rows".into())),
        1 | 2 => return Err(Error::NotOrthogonal(format!("{} moved rows cannot rebalance", support.len()))),
        _ => {}
    }
    if !rowperm_orthogonal(sigma, &[k])? {
        return Err(Error::NotOrthogonal(format!("k r - sigma(r) repeats for k = {k}")));
    }
    let mut entries = Vec::with_capacity(support.len() * p.usize());
    for &r in &support {
        let to = sigma.image(r);
        for c in 0..p.get() {
            entries.push(TradeEntry::new(r, c, p.add(r, c), p.add(to, c)));
        }
    }
    TradePair::new(p, 1, k, entries)
}

/// Extends the symbol permutation `phi` of symbol `s` to a row permutation.
pub fn rowperm_from_symbol(t: &TradePair, s: u32) -> Result<RowPermutation> {
    let sys = symbol_system(t, s)?;
    let pairs: Vec<(u32, u32)> = sys.rows.iter().copied().zip(sys.phi.iter().copied()).collect();
    let sigma = RowPermutation::from_pairs(t.p, &pairs)?;
    if !rowperm_orthogonal(&sigma, &[t.k])? {
        return Err(Error::NotOrthogonal(format!("row permutation from symbol {s}")));
    }
    Ok(sigma)
}

/// Recovers `phi` (the `-1` entries) and `phi'` (the `-(k-1)` entries) from a
/// matrix satisfying P1-P3 with `A u = 0 (mod p)`, and returns the row trade.
///
/// For `k = 2` both kinds of entry are `-1`; each row's pair is oriented so
/// that `phi` and `phi'` are permutations, picking the lexicographically
/// least orientation cycle by cycle.
pub fn trade_from_matrix(a: &TradeMatrix, u: &[u32], k: u32, p: Modulus) -> Result<TradePair> {
    let m = a.dim();
    check_ks(p, &[k])?;
    if u.len() != m {
        return Err(Error::Matrix(format!("vector of length {} for a {m}x{m} matrix", u.len())));
    }
    let mut sorted = u.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) || sorted.iter().any(|&x| x >= p.get()) {
        return Err(Error::Matrix("row labels must be distinct residues".into()));
    }
    let ki = k as i64;
    for i in 0..m {
        if a.get(i, i) != ki {
            return Err(Error::Matrix(format!("diagonal entry {i} is {}, expected {k}", a.get(i, i))));
        }
        for j in 0..m {
            let v = a.get(i, j);
            if i != j && v != 0 && v != -1 && v != 1 - ki {
                return Err(Error::NoOrientation(format!("entry ({i}, {j}) = {v} is not 0, -1 or {}", 1 - ki)));
            }
        }
    }
    if a.row_sums().iter().any(|&s| s != 0) || a.col_sums().iter().any(|&s| s != 0) {
        return Err(Error::Matrix("row and column sums must vanish".into()));
    }
    if a.apply_mod(u, p).iter().any(|&v| v != 0) {
        return Err(Error::Matrix("A u is not zero modulo p".into()));
    }

    let phi: Vec<usize> = if k == 2 {
        orient_pairs(a)?
    } else {
        (0..m)
            .map(|i| {
                let hits: Vec<usize> = (0..m).filter(|&j| j != i && a.get(i, j) == -1).collect();
                match hits.as_slice() {
                    [j] => Ok(*j),
                    _ => Err(Error::NoOrientation(format!("row {i} needs exactly one -1 entry"))),
                }
            })
            .collect::<Result<_>>()?
    };
    let mut used = vec![false; m];
    for &j in &phi {
        if std::mem::replace(&mut used[j], true) {
            return Err(Error::NoOrientation("-1 entries do not form a permutation".into()));
        }
    }
    let inv_km1 = p.inv(k - 1)?;
    for i in 0..m {
        let phi_prime = p.mul(p.sub(p.mul(k, u[i]), u[phi[i]]), inv_km1);
        if phi_prime == u[i] || phi_prime == u[phi[i]] {
            return Err(Error::NoOrientation(format!("phi' fails to be a devolution at row {}", u[i])));
        }
    }
    let pairs: Vec<(u32, u32)> = (0..m).map(|i| (u[i], u[phi[i]])).collect();
    let sigma = RowPermutation::from_pairs(p, &pairs)?;
    trade_from_rowperm(&sigma, k)
}

/// Splits a matrix with exactly two `-1` entries per row and column into two
/// permutations and returns the first.
fn orient_pairs(a: &TradeMatrix) -> Result<Vec<usize>> {
    let m = a.dim();
    let mut row_cols: Vec<[usize; 2]> = Vec::with_capacity(m);
    for i in 0..m {
        let hits: Vec<usize> = (0..m).filter(|&j| j != i && a.get(i, j) == -1).collect();
        match hits.as_slice() {
            [x, y] => row_cols.push([*x, *y]),
            _ => return Err(Error::NoOrientation(format!("row {i} needs exactly two -1 entries"))),
        }
    }
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, cols) in row_cols.iter().enumerate() {
        for &j in cols {
            col_rows[j].push(i);
        }
    }
    if col_rows.iter().any(|r| r.len() != 2) {
        return Err(Error::NoOrientation("a column lacks exactly two -1 entries".into()));
    }
    let mut phi = vec![usize::MAX; m];
    for start in 0..m {
        if phi[start] != usize::MAX {
            continue;
        }
        // Walk the alternating cycle: row -> chosen column -> the column's other row.
        let mut row = start;
        let mut col = row_cols[start][0];
        loop {
            phi[row] = col;
            let next_row = if col_rows[col][0] == row { col_rows[col][1] } else { col_rows[col][0] };
            if phi[next_row] != usize::MAX {
                break;
            }
            let [x, y] = row_cols[next_row];
            col = if x == col { y } else { x };
            row = next_row;
        }
    }
    Ok(phi)
}

/// Least square root of `a` modulo the odd prime `p`.
pub fn sqrt_mod(a: u32, p: Modulus) -> Result<Option<u32>> {
    p.sqrt(a)
}

/// The root of `k^2 - k + 1` in `[2, (p + 1) / 2]`, if any.
pub fn eisenstein_root(p: Modulus) -> Result<Option<u32>> {
    p.require_prime()?;
    if p.get() % 6 != 1 {
        return Ok(None);
    }
    let s = match sqrt_mod(p.neg(3), p)? {
        Some(s) => s,
        None => return Ok(None),
    };
    let half = p.inv(2)?;
    let roots = [p.mul(p.add(1, s), half), p.mul(p.sub(1, s), half)];
    Ok(roots.into_iter().find(|&k| (2..=p.get().div_ceil(2)).contains(&k)))
}

/// Rows `0 -> 1 -> k -> 0` for the root `k` of `k^2 - k + 1`; exists exactly
/// when `p = 1 (mod 6)`.
pub fn three_row_trade(p: Modulus) -> Result<Option<(RowPermutation, u32)>> {
    let Some(k) = eisenstein_root(p)? else {
        return Ok(None);
    };
    let sigma = RowPermutation::from_pairs(p, &[(0, 1), (1, k), (k, 0)])?;
    debug_assert!(rowperm_orthogonal(&sigma, &[k])?);
    Ok(Some((sigma, k)))
}

/// Every `(sigma, k)` moving exactly three rows, by exhaustive search over
/// supports and both orientations of the 3-cycle.
pub fn support_three_search(p: Modulus, stop_at_first: bool) -> Result<Vec<(RowPermutation, u32)>> {
    p.require_prime()?;
    let n = p.get();
    let mut found = Vec::new();
    for k in 2..n {
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for cycle in [[(a, b), (b, c), (c, a)], [(a, c), (c, b), (b, a)]] {
                        let mut lhs: [u32; 3] = cycle.map(|(r, s)| p.sub(p.mul(k, r), s));
                        let mut rhs: [u32; 3] = [a, b, c].map(|r| p.mul(k - 1, r));
                        lhs.sort_unstable();
                        rhs.sort_unstable();
                        if lhs == rhs {
                            found.push((RowPermutation::from_pairs(p, &cycle)?, k));
                            if stop_at_first {
                                return Ok(found);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(found)
}
