//! Latin squares, the cyclic family `B_p(k)` and transversals.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::Modulus;

/// A dense `n x n` Latin square over the symbols `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatinSquare {
    n: usize,
    cells: Vec<u32>,
    label: Option<(u32, u32)>,
}

impl LatinSquare {
    /// Builds a square from row-major entries, checking the Latin property.
    pub fn from_rows(rows: Vec<Vec<u32>>) -> Result<Self> {
        let n = rows.len();
        let mut cells = Vec::with_capacity(n * n);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotLatin(format!("row {r} has {} entries, expected {n}", row.len())));
            }
            cells.extend(row);
        }
        Self::from_cells(n, cells)
    }

    pub fn from_cells(n: usize, cells: Vec<u32>) -> Result<Self> {
        if cells.len() != n * n {
            return Err(Error::NotLatin(format!("expected {} cells, got {}", n * n, cells.len())));
        }
        let sq = LatinSquare { n, cells, label: None };
        sq.check_latin()?;
        Ok(sq)
    }

    fn check_latin(&self) -> Result<()> {
        let n = self.n;
        for (idx, &v) in self.cells.iter().enumerate() {
            if v as usize >= n {
                return Err(Error::CellOutOfRange { row: idx / n, col: idx % n, n });
            }
        }
        let mut seen = vec![false; n];
        for r in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            for c in 0..n {
                let v = self.get(r, c) as usize;
                if std::mem::replace(&mut seen[v], true) {
                    return Err(Error::NotLatin(format!("symbol {v} repeated in row {r}")));
                }
            }
        }
        for c in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            for r in 0..n {
                let v = self.get(r, c) as usize;
                if std::mem::replace(&mut seen[v], true) {
                    return Err(Error::NotLatin(format!("symbol {v} repeated in column {c}")));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.cells[row * self.n + col]
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.cells[r * self.n..(r + 1) * self.n]
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    /// `(p, k)` when this square is `B_p(k)`.
    pub fn label(&self) -> Option<(u32, u32)> {
        self.label
    }

    pub fn transpose(&self) -> LatinSquare {
        let n = self.n;
        let mut cells = vec![0; n * n];
        for r in 0..n {
            for c in 0..n {
                cells[c * n + r] = self.get(r, c);
            }
        }
        LatinSquare { n, cells, label: None }
    }

    /// Number of cells where the two squares disagree.
    pub fn hamming(&self, other: &LatinSquare) -> Result<usize> {
        if self.n != other.n {
            return Err(Error::OrderMismatch(self.n, other.n));
        }
        Ok(self.cells.iter().zip(&other.cells).filter(|(a, b)| a != b).count())
    }

    /// Text form: a line with `n`, then `n` lines of space-separated symbols.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for r in 0..self.n {
            let row: Vec<String> = self.row(r).iter().map(u32::to_string).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty input".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("order: {e}")))?;
        let mut rows = Vec::with_capacity(n);
        for r in 0..n {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing row {r}")))?;
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<u32>().map_err(|e| Error::Parse(format!("row {r}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing rows".into()));
        }
        Self::from_rows(rows)
    }
}

/// `B_p(k)`: the square with `k*i + j` in cell `(i, j)`.
pub fn gen_bp(p: Modulus, k: u32) -> Result<LatinSquare> {
    let n = p.usize();
    if k == 0 || k >= p.get() {
        return Err(Error::IndexOutOfRange { k, p: p.get() });
    }
    if !p.is_unit(k) {
        return Err(Error::NotAUnit { value: k, p: p.get() });
    }
    let mut cells = Vec::with_capacity(n * n);
    for i in 0..p.get() {
        let base = p.mul(k, i);
        for j in 0..p.get() {
            cells.push(p.add(base, j));
        }
    }
    Ok(LatinSquare {
        n,
        cells,
        label: Some((p.get(), k)),
    })
}

/// `B_p = B_p(1)`, the addition table of `Z_p`.
pub fn back_circulant(p: Modulus) -> LatinSquare {
    gen_bp(p, 1).expect("k = 1 is always admissible")
}

/// True iff superimposing the squares yields every ordered pair once.
pub fn are_orthogonal(l: &LatinSquare, m: &LatinSquare) -> Result<bool> {
    if l.n != m.n {
        return Err(Error::OrderMismatch(l.n, m.n));
    }
    let n = l.n;
    let mut seen = vec![false; n * n];
    for (&a, &b) in l.cells.iter().zip(&m.cells) {
        if std::mem::replace(&mut seen[a as usize * n + b as usize], true) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The complete set `B_p(1), ..., B_p(p-1)`.
pub fn mols_family(p: Modulus) -> Result<Vec<LatinSquare>> {
    p.require_prime()?;
    (1..p.get()).map(|k| gen_bp(p, k)).collect()
}

/// A set of cells meeting each row and column once.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transversal {
    #[serde(rename = "p")]
    pub n: usize,
    pub cells: Vec<(usize, usize)>,
}

impl Transversal {
    /// Transversal given by the column chosen in each row.
    pub fn from_columns(cols: &[usize]) -> Self {
        Transversal {
            n: cols.len(),
            cells: cols.iter().copied().enumerate().collect(),
        }
    }

    pub fn diagonal_hits(&self) -> usize {
        self.cells.iter().filter(|(r, c)| r == c).count()
    }
}

/// True iff `t` hits every row, column and symbol of `l` exactly once.
pub fn is_transversal(l: &LatinSquare, t: &Transversal) -> Result<bool> {
    let n = l.order();
    if t.n != n {
        return Err(Error::OrderMismatch(n, t.n));
    }
    for &(row, col) in &t.cells {
        if row >= n || col >= n {
            return Err(Error::CellOutOfRange { row, col, n });
        }
    }
    if t.cells.len() != n {
        return Ok(false);
    }
    let mut rows = vec![false; n];
    let mut cols = vec![false; n];
    let mut syms = vec![false; n];
    for &(r, c) in &t.cells {
        let s = l.get(r, c) as usize;
        if std::mem::replace(&mut rows[r], true)
            || std::mem::replace(&mut cols[c], true)
            || std::mem::replace(&mut syms[s], true)
        {
            return Ok(false);
        }
    }
    Ok(true)
}
