//! Trade matrices: the integer linear systems a trade imposes modulo `p`,
//! together with the size lower bounds derived from them.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::Modulus;
use crate::trade::{validate_latin_trade, TradePair};

/// Absolute slack used whenever a real-valued bound is compared with an integer.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixRole {
    SymbolSystem,
    Balance,
    Generic,
}

/// Square integer matrix with positive diagonal, non-positive off-diagonal
/// entries and non-negative row sums.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradeMatrix {
    rows: Vec<Vec<i64>>,
    role: MatrixRole,
}

impl TradeMatrix {
    pub fn new(rows: Vec<Vec<i64>>, role: MatrixRole) -> Result<Self> {
        let m = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Matrix(format!("row {i} has length {}, expected {m}", row.len())));
            }
            if row[i] <= 0 {
                return Err(Error::Matrix(format!("diagonal entry {i} is {}", row[i])));
            }
            if let Some(j) = (0..m).find(|&j| j != i && row[j] > 0) {
                return Err(Error::Matrix(format!("positive off-diagonal entry at ({i}, {j})")));
            }
            if row.iter().sum::<i64>() < 0 {
                return Err(Error::Matrix(format!("row {i} has negative sum")));
            }
        }
        Ok(TradeMatrix { rows, role })
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn role(&self) -> MatrixRole {
        self.role
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.rows[i][j]
    }

    /// Drops row and column `idx`.
    pub fn minor(&self, idx: usize) -> Result<TradeMatrix> {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != idx)
            .map(|(_, r)| r.iter().enumerate().filter(|&(j, _)| j != idx).map(|(_, &v)| v).collect())
            .collect();
        TradeMatrix::new(rows, self.role)
    }

    pub fn det(&self) -> BigInt {
        let d = det_exact(&self.rows);
        debug_assert!(d <= self.diagonal_product(), "determinant exceeds the diagonal product");
        d
    }

    pub fn diagonal_product(&self) -> BigInt {
        (0..self.dim()).fold(BigInt::one(), |acc, i| acc * self.rows[i][i])
    }

    pub fn row_sums(&self) -> Vec<i64> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<i64> {
        (0..self.dim()).map(|j| self.rows.iter().map(|r| r[j]).sum()).collect()
    }

    /// `A u mod p`, entrywise.
    pub fn apply_mod(&self, u: &[u32], p: Modulus) -> Vec<u32> {
        self.rows
            .iter()
            .map(|row| {
                let s: i64 = row.iter().zip(u).map(|(&a, &x)| a * x as i64).sum();
                p.reduce(s)
            })
            .collect()
    }
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn det_exact(rows: &[Vec<i64>]) -> BigInt {
    let n = rows.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub diagonally_dominant: bool,
    pub irreducible: bool,
    pub has_strict_row: bool,
    pub nonsingular_guaranteed: bool,
}

/// Diagonal dominance, irreducibility and a strictly dominant row: together
/// they certify a nonzero determinant.
pub fn dominance_report(rows: &[Vec<i64>]) -> DominanceReport {
    let m = rows.len();
    let weight = |i: usize| -> (i64, i64) {
        let total: i64 = rows[i].iter().map(|v| v.abs()).sum();
        (2 * rows[i][i].abs(), total)
    };
    let diagonally_dominant = (0..m).all(|i| {
        let (d, t) = weight(i);
        d >= t
    });
    let has_strict_row = (0..m).any(|i| {
        let (d, t) = weight(i);
        d > t
    });
    let irreducible = strongly_connected(rows);
    DominanceReport {
        diagonally_dominant,
        irreducible,
        has_strict_row,
        nonsingular_guaranteed: diagonally_dominant && irreducible && has_strict_row,
    }
}

fn strongly_connected(rows: &[Vec<i64>]) -> bool {
    let m = rows.len();
    if m <= 1 {
        return true;
    }
    let reach = |forward: bool| {
        let mut seen = vec![false; m];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..m {
                let edge = if forward { rows[i][j] } else { rows[j][i] };
                if j != i && edge != 0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// The per-symbol system of an orthogonal trade of index `(1, k)`.
///
/// `rows` lists the rows of `T` holding the symbol; `phi[i]` is the row whose
/// copy of the symbol sits in row `rows[i]` of `T'`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolSystem {
    pub matrix: TradeMatrix,
    pub rows: Vec<u32>,
    pub u: Vec<u32>,
    pub phi: Vec<u32>,
    pub phi_prime: Vec<u32>,
    pub symbol: u32,
    pub k: u32,
}

impl SymbolSystem {
    fn position(&self, r: u32) -> usize {
        self.rows.iter().position(|&x| x == r).expect("row in support")
    }

    /// Checks P1-P3, the devolution conditions and `A u = 0 (mod p)`.
    pub fn verify(&self, p: Modulus) -> bool {
        let a = &self.matrix;
        let m = a.dim();
        let k = self.k as i64;
        let p1 = (0..m).all(|i| a.get(i, i) == k);
        let p2 = (0..m).all(|i| (0..m).all(|j| i == j || matches!(a.get(i, j), v if v == 0 || v == -1 || v == 1 - k)));
        let p3 = a.row_sums().iter().all(|&s| s == 0) && a.col_sums().iter().all(|&s| s == 0);
        let devolutions = (0..m).all(|i| {
            let r = self.rows[i];
            self.phi[i] != r && self.phi_prime[i] != r && self.phi[i] != self.phi_prime[i]
        });
        let mut phi_targets: Vec<usize> = self.phi.iter().map(|&r| self.position(r)).collect();
        phi_targets.sort_unstable();
        let is_perm = phi_targets.iter().enumerate().all(|(i, &t)| i == t);
        let kernel = a.apply_mod(&self.u, p).iter().all(|&v| v == 0);
        p1 && p2 && p3 && devolutions && is_perm && kernel
    }
}

/// Builds the linear system attached to symbol `s` of an orthogonal trade
/// of index `(1, k)`.
pub fn symbol_system(t: &TradePair, s: u32) -> Result<SymbolSystem> {
    let p = t.p;
    let k = t.k;
    if t.ell != 1 || k < 2 {
        return Err(Error::Matrix(format!("symbol systems need index (1, k >= 2), got {:?}", t.index())));
    }
    let rows: Vec<u32> = t.entries().iter().filter(|e| e.base == s).map(|e| e.row).collect();
    if rows.is_empty() {
        return Err(Error::SymbolAbsent(s));
    }
    let mut phi = Vec::with_capacity(rows.len());
    for &r in &rows {
        let e = t
            .entries()
            .iter()
            .find(|e| e.row == r && e.mate == s)
            .ok_or_else(|| Error::InvalidTrade(format!("symbol {s} missing from row {r} of the mate")))?;
        phi.push(p.sub(s, e.col));
    }
    let inv_km1 = p.inv(k - 1)?;
    let phi_prime: Vec<u32> = rows
        .iter()
        .zip(&phi)
        .map(|(&r, &f)| p.mul(p.sub(p.mul(k, r), f), inv_km1))
        .collect();
    let index_of = |r: u32| rows.iter().position(|&x| x == r);
    let m = rows.len();
    let mut a = vec![vec![0i64; m]; m];
    for i in 0..m {
        a[i][i] = k as i64;
        let j = index_of(phi[i]).ok_or_else(|| Error::InvalidTrade(format!("phi leaves the support at row {}", rows[i])))?;
        let jp = index_of(phi_prime[i])
            .ok_or_else(|| Error::InvalidTrade(format!("phi' leaves the support at row {}", rows[i])))?;
        if j == i || jp == i || j == jp {
            return Err(Error::InvalidTrade(format!("phi or phi' is not fixed-point-free at row {}", rows[i])));
        }
        a[i][j] -= 1;
        a[i][jp] -= k as i64 - 1;
    }
    let sys = SymbolSystem {
        matrix: TradeMatrix::new(a, MatrixRole::SymbolSystem)?,
        u: rows.clone(),
        rows,
        phi,
        phi_prime,
        symbol: s,
        k,
    };
    if !sys.verify(p) {
        return Err(Error::InvalidTrade(format!("symbol system for {s} violates its defining properties")));
    }
    Ok(sys)
}

/// Symbol-indexed balance matrix of a Latin trade in `B_p(1)`, with the
/// vector of symbol values it annihilates modulo `p`.
pub fn balance_matrix(t: &TradePair) -> Result<(TradeMatrix, Vec<u32>)> {
    if t.ell != 1 {
        return Err(Error::Matrix("balance matrices are built in B_p(1)".into()));
    }
    let report = validate_latin_trade(t);
    if !report.is_latin_trade {
        return Err(Error::InvalidTrade(format!("{:?}", report.failures)));
    }
    let symbols: Vec<u32> = report.symbol_histogram.keys().copied().collect();
    let idx: BTreeMap<u32, usize> = symbols.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let m = symbols.len();
    let mut d = vec![vec![0i64; m]; m];
    for (i, &s) in symbols.iter().enumerate() {
        d[i][i] = report.symbol_histogram[&s] as i64;
    }
    for e in t.entries() {
        d[idx[&e.mate]][idx[&e.base]] -= 1;
    }
    let matrix = TradeMatrix::new(d, MatrixRole::Balance)?;
    debug_assert!(matrix.row_sums().iter().all(|&s| s == 0));
    debug_assert!(matrix.apply_mod(&symbols, t.p).iter().all(|&v| v == 0));
    Ok((matrix, symbols))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeBounds {
    /// `min(k, k^{-1})`.
    #[serde(rename = "K")]
    pub k_min: u32,
    /// `log_K(p) + 1`; every symbol of a trade occurs strictly more often.
    pub symbol_lb: f64,
    /// The alternative reading `log_K(p + 1)`, never larger than `symbol_lb`.
    pub symbol_lb_alt: f64,
    /// `ln p * log_K p / ln(log_K p)`.
    pub trade_lb: f64,
    /// Whether `log_K p >= e`, the range where `trade_lb` follows from the
    /// per-symbol bound.
    pub trade_lb_applicable: bool,
    /// Lower bound on the number of permuted rows.
    pub perm_lb: f64,
}

pub fn size_bounds(p: Modulus, k: u32) -> Result<SizeBounds> {
    p.require_prime()?;
    if k < 2 || k >= p.get() {
        return Err(Error::IndexOutOfRange { k, p: p.get() });
    }
    let k_min = k.min(p.inv(k)?);
    let ln_p = (p.get() as f64).ln();
    let ln_k = (k_min as f64).ln();
    let log_k_p = ln_p / ln_k;
    let symbol_lb = log_k_p + 1.0;
    Ok(SizeBounds {
        k_min,
        symbol_lb,
        symbol_lb_alt: ((p.get() + 1) as f64).ln() / ln_k,
        trade_lb: ln_p * log_k_p / log_k_p.ln(),
        trade_lb_applicable: log_k_p >= std::f64::consts::E,
        perm_lb: symbol_lb,
    })
}

/// `|T| >= m p^{1/m} + 2`, where `m + 1` rows of `T` are nonempty.
pub fn check_bcc2(t: &TradePair) -> bool {
    if t.is_empty() {
        return true;
    }
    let rows = t.rows().len();
    if rows < 2 {
        return false;
    }
    let m = (rows - 1) as f64;
    let bound = m * (t.p.get() as f64).powf(1.0 / m) + 2.0;
    t.size() as f64 + BOUND_SLACK >= bound
}
