//! Good dissections of `n x (n+3)` rectangles into squares, and the
//! symbol-twice Latin trades in `B_p` they encode.
//!
//! Frame: `x` runs rightward over `0..w`, `y` upward over `0..h`. The
//! rectangle sits in the right triangle with legs `w + h`, whose hypotenuse is
//! `x + y = w + h`; the two pieces of the triangle outside the rectangle are
//! the filler triangles.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::balance_matrix;
use crate::modular::Modulus;
use crate::rowperm::{trade_from_matrix, RowPermutation};
use crate::trade::{validate_latin_trade, TradeEntry, TradePair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u64; 3]", into = "[u64; 3]")]
pub struct Square {
    pub x: u64,
    pub y: u64,
    pub side: u64,
}

impl Square {
    pub const fn new(x: u64, y: u64, side: u64) -> Self {
        Square { x, y, side }
    }

    pub fn lower_left(&self) -> (u64, u64) {
        (self.x, self.y)
    }

    pub fn upper_right(&self) -> (u64, u64) {
        (self.x + self.side, self.y + self.side)
    }

    pub fn corners(&self) -> [(u64, u64); 4] {
        let (x1, y1) = self.upper_right();
        [(self.x, self.y), (x1, self.y), (self.x, y1), (x1, y1)]
    }

    fn overlaps(&self, o: &Square) -> bool {
        self.x < o.x + o.side && o.x < self.x + self.side && self.y < o.y + o.side && o.y < self.y + self.side
    }
}

impl From<[u64; 3]> for Square {
    fn from([x, y, side]: [u64; 3]) -> Self {
        Square { x, y, side }
    }
}

impl From<Square> for [u64; 3] {
    fn from(s: Square) -> Self {
        [s.x, s.y, s.side]
    }
}

/// A dissection of the `w x h` rectangle into integral squares, sorted by
/// `(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDissection", into = "RawDissection")]
pub struct SquareDissection {
    w: u64,
    h: u64,
    squares: Vec<Square>,
}

#[derive(Serialize, Deserialize)]
struct RawDissection {
    n: u64,
    w: u64,
    h: u64,
    squares: Vec<Square>,
}

impl TryFrom<RawDissection> for SquareDissection {
    type Error = Error;

    fn try_from(raw: RawDissection) -> Result<Self> {
        if raw.n != raw.h {
            return Err(Error::Dissection(format!("n = {} but h = {}", raw.n, raw.h)));
        }
        SquareDissection::new(raw.w, raw.h, raw.squares)
    }
}

impl From<SquareDissection> for RawDissection {
    fn from(d: SquareDissection) -> Self {
        RawDissection { n: d.h, w: d.w, h: d.h, squares: d.squares }
    }
}

impl SquareDissection {
    /// Checks sides, containment, interior-disjointness and total area.
    pub fn new(w: u64, h: u64, mut squares: Vec<Square>) -> Result<Self> {
        if w == 0 || h == 0 {
            return Err(Error::Dissection("empty rectangle".into()));
        }
        for s in &squares {
            if s.side == 0 {
                return Err(Error::Dissection(format!("square at ({}, {}) has side 0", s.x, s.y)));
            }
            if s.x + s.side > w || s.y + s.side > h {
                return Err(Error::Dissection(format!("square {:?} leaves the {w}x{h} rectangle", <[u64; 3]>::from(*s))));
            }
        }
        squares.sort_unstable();
        for (i, a) in squares.iter().enumerate() {
            // Sorted by x: once b starts right of a, no later square overlaps a.
            for b in squares[i + 1..].iter().take_while(|b| b.x < a.x + a.side) {
                if a.overlaps(b) {
                    return Err(Error::Dissection(format!(
                        "squares {:?} and {:?} overlap",
                        <[u64; 3]>::from(*a),
                        <[u64; 3]>::from(*b)
                    )));
                }
            }
        }
        let area: u128 = squares.iter().map(|s| s.side as u128 * s.side as u128).sum();
        if area != w as u128 * h as u128 {
            return Err(Error::Dissection(format!("squares cover area {area} of {}", w as u128 * h as u128)));
        }
        Ok(SquareDissection { w, h, squares })
    }

    pub fn width(&self) -> u64 {
        self.w
    }

    pub fn height(&self) -> u64 {
        self.h
    }

    pub fn squares(&self) -> &[Square] {
        &self.squares
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    /// `w + h`, the order of the addition table the trade lives in.
    pub fn modulus(&self) -> u64 {
        self.w + self.h
    }

    /// Every side multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> SquareDissection {
        SquareDissection {
            w: self.w * factor,
            h: self.h * factor,
            squares: self
                .squares
                .iter()
                .map(|s| Square::new(s.x * factor, s.y * factor, s.side * factor))
                .collect(),
        }
    }

    /// One of the eight symmetries of the rectangle: optional transpose, then
    /// optional horizontal and vertical flips.
    pub fn transformed(&self, t: Symmetry) -> SquareDissection {
        let (w, h) = if t.transpose { (self.h, self.w) } else { (self.w, self.h) };
        let mut squares: Vec<Square> = self
            .squares
            .iter()
            .map(|s| {
                let (x, y) = if t.transpose { (s.y, s.x) } else { (s.x, s.y) };
                Square::new(
                    if t.flip_x { w - x - s.side } else { x },
                    if t.flip_y { h - y - s.side } else { y },
                    s.side,
                )
            })
            .collect();
        squares.sort_unstable();
        SquareDissection { w, h, squares }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("dissection serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symmetry {
    pub transpose: bool,
    pub flip_x: bool,
    pub flip_y: bool,
}

impl Symmetry {
    pub fn all() -> [Symmetry; 8] {
        let mut out = [Symmetry::default(); 8];
        for (i, s) in out.iter_mut().enumerate() {
            *s = Symmetry { transpose: i & 4 != 0, flip_x: i & 1 != 0, flip_y: i & 2 != 0 };
        }
        out
    }
}

/// A located reason why a dissection is not good.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GoodnessFailure {
    FourSquarePoint { x: u64, y: u64 },
    OriginSquareSide { side: u64 },
    CornerOnLine { x: u64, y: u64 },
    PairingCount { residue: u64, count: usize },
    MidlineClash { residue: u64 },
    VertexCollision { x: u64, y: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodnessReport {
    pub g1_oplus_free: bool,
    pub g2_origin_side_ge_3: bool,
    pub g4_avoids_lines: bool,
    /// Every corner residue occurs exactly twice, and the square midlines
    /// `x + y + side` together with 0 are pairwise distinct.
    pub pairing_ok: bool,
    pub vertex_collision_free: bool,
    pub failures: Vec<GoodnessFailure>,
}

impl GoodnessReport {
    pub fn is_good(&self) -> bool {
        self.g1_oplus_free
            && self.g2_origin_side_ge_3
            && self.g4_avoids_lines
            && self.pairing_ok
            && self.vertex_collision_free
    }
}

/// Evaluates the goodness conditions. The origin corner is `(0, h)`.
pub fn check_good(d: &SquareDissection) -> GoodnessReport {
    let (w, h) = (d.w, d.h);
    let n_mod = d.modulus();
    let mut failures = Vec::new();

    let mut corner_count: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    for s in &d.squares {
        for c in s.corners() {
            *corner_count.entry(c).or_default() += 1;
        }
    }
    let before = failures.len();
    for (&(x, y), &count) in &corner_count {
        if count == 4 {
            failures.push(GoodnessFailure::FourSquarePoint { x, y });
        }
    }
    let g1 = failures.len() == before;

    let origin = d.squares.iter().find(|s| s.x == 0 && s.y + s.side == h);
    let g2 = match origin {
        Some(s) if s.side >= 3 => true,
        Some(s) => {
            failures.push(GoodnessFailure::OriginSquareSide { side: s.side });
            false
        }
        None => {
            failures.push(GoodnessFailure::OriginSquareSide { side: 0 });
            false
        }
    };

    let before = failures.len();
    for &(x, y) in corner_count.keys() {
        if x + y == h + 1 || x + y == h + 2 {
            failures.push(GoodnessFailure::CornerOnLine { x, y });
        }
    }
    let g4 = failures.len() == before;

    let before = failures.len();
    let mut residues: BTreeMap<u64, usize> = BTreeMap::new();
    let corner_sums = d
        .squares
        .iter()
        .flat_map(|s| [s.x + s.y, s.x + s.y + 2 * s.side])
        .chain([w, h]);
    for v in corner_sums {
        *residues.entry(v % n_mod).or_default() += 1;
    }
    for (&residue, &count) in &residues {
        if count != 2 {
            failures.push(GoodnessFailure::PairingCount { residue, count });
        }
    }
    let mut midlines = BTreeSet::from([0u64]);
    for s in &d.squares {
        let residue = (s.x + s.y + s.side) % n_mod;
        if !midlines.insert(residue) {
            failures.push(GoodnessFailure::MidlineClash { residue });
        }
    }
    let pairing_ok = failures.len() == before;

    let before = failures.len();
    let lower_left: BTreeSet<(u64, u64)> = d.squares.iter().map(Square::lower_left).collect();
    let upper_right: BTreeSet<(u64, u64)> = d.squares.iter().map(Square::upper_right).collect();
    for &(x, y) in upper_right.intersection(&lower_left) {
        failures.push(GoodnessFailure::VertexCollision { x, y });
    }
    for filler in [(w, 0), (0, h)] {
        if lower_left.contains(&filler) || upper_right.contains(&filler) {
            failures.push(GoodnessFailure::VertexCollision { x: filler.0, y: filler.1 });
        }
    }
    let vertex_collision_free = failures.len() == before;

    GoodnessReport {
        g1_oplus_free: g1,
        g2_origin_side_ge_3: g2,
        g4_avoids_lines: g4,
        pairing_ok,
        vertex_collision_free,
        failures,
    }
}

#[derive(Clone, Copy, Debug)]
struct Rect {
    x: u64,
    y: u64,
    w: u64,
    h: u64,
}

impl From<Square> for Rect {
    fn from(s: Square) -> Self {
        Rect { x: s.x, y: s.y, w: s.side, h: s.side }
    }
}

/// Backtracking tiler: repeatedly covers the lowest, then leftmost, free
/// point of the rectangle with a square, trying larger sides first.
struct Tiler<'a> {
    w: u64,
    h: u64,
    fixed: &'a [Rect],
    placed: Vec<Square>,
    max_new: usize,
    nodes_left: u64,
}

impl Tiler<'_> {
    fn rects(&self) -> impl Iterator<Item = Rect> + '_ {
        self.fixed.iter().copied().chain(self.placed.iter().map(|&s| Rect::from(s)))
    }

    fn free_point(&self) -> Option<(u64, u64)> {
        let xs: BTreeSet<u64> = std::iter::once(0).chain(self.rects().map(|r| r.x + r.w)).collect();
        let ys: BTreeSet<u64> = std::iter::once(0).chain(self.rects().map(|r| r.y + r.h)).collect();
        for &y in ys.iter().filter(|&&y| y < self.h) {
            for &x in xs.iter().filter(|&&x| x < self.w) {
                let covered = self.rects().any(|r| r.x <= x && x < r.x + r.w && r.y <= y && y < r.y + r.h);
                if !covered {
                    return Some((x, y));
                }
            }
        }
        None
    }

    fn sides(&self, x: u64, y: u64) -> Vec<u64> {
        let mut max = (self.w - x).min(self.h - y);
        for r in self.rects() {
            if r.x + r.w > x && r.y + r.h > y {
                max = max.min((r.x.saturating_sub(x)).max(r.y.saturating_sub(y)));
            }
        }
        let mut sides: BTreeSet<u64> = BTreeSet::from([max]);
        let edges = self.rects().flat_map(|r| [(r.x, r.y), (r.x + r.w, r.y + r.h)]).chain([(self.w, self.h)]);
        for (ex, ey) in edges {
            for v in [ex.wrapping_sub(x), ey.wrapping_sub(y)] {
                if v >= 1 && v <= max {
                    sides.insert(v);
                }
            }
        }
        sides.extend((1..=3).filter(|&v| v <= max));
        sides.into_iter().rev().collect()
    }

    fn run(&mut self, accept: &mut dyn FnMut(&[Square]) -> bool) -> bool {
        if self.nodes_left == 0 {
            return false;
        }
        self.nodes_left -= 1;
        let Some((x, y)) = self.free_point() else {
            return accept(&self.placed);
        };
        if self.placed.len() == self.max_new {
            return false;
        }
        for side in self.sides(x, y) {
            self.placed.push(Square::new(x, y, side));
            if self.run(accept) {
                return true;
            }
            self.placed.pop();
        }
        false
    }
}

const TILER_NODES: u64 = 200_000;

/// Tiles the complement of `fixed` with at most `max_new` squares until
/// `accept` approves a complete tiling.
fn tile(
    w: u64,
    h: u64,
    fixed: &[Rect],
    max_new: usize,
    accept: &mut dyn FnMut(&[Square]) -> bool,
) -> Option<Vec<Square>> {
    let mut tiler = Tiler { w, h, fixed, placed: Vec::new(), max_new, nodes_left: TILER_NODES };
    tiler.run(accept).then_some(tiler.placed)
}

/// Good dissection of the `n x (n+3)` rectangle for `3 <= n <= 14` with at
/// most 8 squares: an `n x n` square at the origin corner, a `3 x 3` square in
/// the opposite corner, and the remaining `3 x (n-3)` strip cut greedily.
pub fn base_dissection(n: u64) -> Result<SquareDissection> {
    if !(3..=14).contains(&n) {
        return Err(Error::Dissection(format!("base dissections need 3 <= n <= 14, got {n}")));
    }
    let (w, h) = (n + 3, n);
    let fixed = [Square::new(0, 0, n), Square::new(n, 0, 3)];
    let rects: Vec<Rect> = fixed.iter().map(|&s| Rect::from(s)).collect();
    let mut found = None;
    tile(w, h, &rects, 6, &mut |extra| {
        let squares = fixed.iter().chain(extra).copied().collect();
        match SquareDissection::new(w, h, squares) {
            Ok(d) if d.len() <= 8 && check_good(&d).is_good() => {
                found = Some(d);
                true
            }
            _ => false,
        }
    });
    found.ok_or_else(|| Error::Dissection(format!("no good strip dissection for n = {n}")))
}

/// Memoized dissections and, per residue class `z`, the inner-rectangle
/// placement that last succeeded.
#[derive(Clone, Debug, Default)]
pub struct DissectionCache {
    dissections: HashMap<u64, SquareDissection>,
    placements: HashMap<u64, usize>,
}

impl DissectionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.dissections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dissections.is_empty()
    }
}

/// `3 + 5 log_4(n + 1)`.
pub fn square_count_bound(n: u64) -> f64 {
    3.0 + 5.0 * ((n + 1) as f64).ln() / 4f64.ln()
}

/// A good dissection of the `n x (n+3)` rectangle with at most
/// `3 + 5 log_4(n+1)` squares.
pub fn good_dissection(n: u64) -> Result<SquareDissection> {
    good_dissection_cached(n, &mut DissectionCache::new())
}

/// [`good_dissection`] with an explicit memo.
pub fn good_dissection_cached(n: u64, cache: &mut DissectionCache) -> Result<SquareDissection> {
    if n < 3 {
        return Err(Error::Dissection(format!("n = {n} is below 3")));
    }
    if let Some(d) = cache.dissections.get(&n) {
        return Ok(d.clone());
    }
    let d = if n <= 14 { base_dissection(n)? } else { recursive_dissection(n, cache)? };
    cache.dissections.insert(n, d.clone());
    Ok(d)
}

/// Placements of the inner rectangle: a symmetry and one of the four corners.
/// Index 0 (identity, bottom-right corner) is tried first.
fn placements() -> Vec<(Symmetry, usize)> {
    let mut out = Vec::with_capacity(32);
    for corner in [1, 0, 2, 3] {
        for sym in Symmetry::all() {
            out.push((sym, corner));
        }
    }
    out
}

/// `n = 4k + z` with `z` in `3..=6`: a doubled dissection of `k x (k+3)`
/// fills a `2(k+3) x 2k` sub-rectangle at a corner, and at most five squares
/// cover the rest.
fn recursive_dissection(n: u64, cache: &mut DissectionCache) -> Result<SquareDissection> {
    let k = (n - 3) / 4;
    let z = n - 4 * k;
    let inner = good_dissection_cached(k, cache)?.scaled(2);
    let (w, h) = (n + 3, n);
    let all = placements();
    let mut order: Vec<usize> = (0..all.len()).collect();
    if let Some(&hit) = cache.placements.get(&z) {
        order.retain(|&i| i != hit);
        order.insert(0, hit);
    }
    for idx in order {
        let (sym, corner) = all[idx];
        let placed = inner.transformed(sym);
        let (iw, ih) = (placed.w, placed.h);
        if iw > w || ih > h {
            continue;
        }
        let ox = if corner & 1 == 1 { w - iw } else { 0 };
        let oy = if corner & 2 == 2 { h - ih } else { 0 };
        let inner_squares: Vec<Square> =
            placed.squares.iter().map(|s| Square::new(s.x + ox, s.y + oy, s.side)).collect();
        let fixed = [Rect { x: ox, y: oy, w: iw, h: ih }];
        let mut found = None;
        tile(w, h, &fixed, 5, &mut |extra| {
            let squares = inner_squares.iter().chain(extra).copied().collect();
            match SquareDissection::new(w, h, squares) {
                Ok(d) if check_good(&d).is_good() => {
                    found = Some(d);
                    true
                }
                _ => false,
            }
        });
        if let Some(d) = found {
            cache.placements.insert(z, idx);
            return Ok(d);
        }
    }
    Err(Error::Dissection(format!("no placement found for n = {n} (k = {k}, z = {z})")))
}

/// Each square `(x, y, s)` gives a lower entry at `(x, y)` with base `x+y`
/// and an upper entry at `(x+s, y+s)` with base `x+y+2s`, both with mate
/// `x+y+s`; the filler triangles give `(w, 0)` and `(0, h)` with mate 0.
/// The result lives in `B_N`, `N = w + h`, and is recorded with index `(1, 2)`.
pub fn dissection_to_trade(d: &SquareDissection) -> Result<TradePair> {
    let report = check_good(d);
    if !report.is_good() {
        return Err(Error::Dissection(format!("not a good dissection: {:?}", report.failures)));
    }
    let n_mod = u32::try_from(d.modulus())
        .map_err(|_| Error::Dissection(format!("w + h = {} exceeds 32 bits", d.modulus())))?;
    let p = Modulus::odd(n_mod)?;
    let r = |v: u64| (v % d.modulus()) as u32;
    let mut entries = Vec::with_capacity(2 * d.len() + 2);
    for s in &d.squares {
        let (x, y, side) = (s.x, s.y, s.side);
        entries.push(TradeEntry::new(r(x), r(y), r(x + y), r(x + y + side)));
        entries.push(TradeEntry::new(r(x + side), r(y + side), r(x + y + 2 * side), r(x + y + side)));
    }
    entries.push(TradeEntry::new(r(d.w), 0, r(d.w), 0));
    entries.push(TradeEntry::new(0, r(d.h), r(d.h), 0));
    let t = TradePair::new(p, 1, 2, entries)?;
    let v = validate_latin_trade(&t);
    if !v.is_latin_trade {
        return Err(Error::InvalidTrade(format!("{:?}", v.failures)));
    }
    if v.symbol_histogram.values().any(|&c| c != 2) {
        return Err(Error::InvalidTrade("a symbol does not occur exactly twice".into()));
    }
    Ok(t)
}

/// Smallest symbol-twice trades in `B_5` and `B_7`, from
/// [`smallest_symbol_twice_trade`]: `(row, col, base, mate)`.
const SMALL_TRADE_5: [[u32; 4]; 8] = [
    [0, 0, 0, 1], [0, 1, 1, 0], [1, 0, 1, 4], [1, 1, 2, 1],
    [1, 3, 4, 2], [4, 0, 4, 0], [4, 1, 0, 2], [4, 3, 2, 4],
];
const SMALL_TRADE_7: [[u32; 4]; 10] = [
    [0, 0, 0, 1], [0, 1, 1, 0], [1, 0, 1, 2], [1, 1, 2, 1], [2, 0, 2, 6],
    [2, 1, 3, 2], [2, 4, 6, 3], [6, 0, 6, 0], [6, 1, 0, 3], [6, 4, 3, 6],
];

/// A Latin trade of size `O(log p)` in `B_p` where each symbol occurs twice
/// or not at all. Uses the good dissection of `n x (n+3)`, `n = (p-3)/2`,
/// for `p >= 9`, and stored minimal trades for `p` in `{5, 7}`.
pub fn log_trade(p: Modulus) -> Result<TradePair> {
    let stored: Option<&[[u32; 4]]> = match p.get() {
        5 => Some(&SMALL_TRADE_5),
        7 => Some(&SMALL_TRADE_7),
        3 => return Err(Error::Dissection("no symbol-twice trade exists in B_3".into())),
        _ => None,
    };
    match stored {
        Some(rows) => TradePair::new(p, 1, 2, rows.iter().map(|&e| e.into()).collect()),
        None => dissection_to_trade(&good_dissection(((p.get() - 3) / 2) as u64)?),
    }
}

/// Exhaustive search for the smallest Latin trade in `B_p` in which every
/// symbol occurs exactly twice or not at all, up to `max_size` cells.
///
/// Every trade translates to one containing `(0, 0)`, so the search starts
/// there. Choosing mate `m` at `(r, c)` forces `(r, m - r)` and `(m - c, c)`
/// into the trade.
pub fn smallest_symbol_twice_trade(p: Modulus, max_size: usize) -> Option<TradePair> {
    let n = p.usize();
    let mut s = TwiceSearch {
        n,
        cap: 0,
        cells: Vec::new(),
        in_t: vec![false; n * n],
        mate: vec![u32::MAX; n * n],
        row_used: vec![0; n],
        col_used: vec![0; n],
        sym_count: vec![0; n],
    };
    for cap in (2..=max_size).step_by(2) {
        s.cap = cap;
        s.push_cell(0, 0);
        if s.dfs() {
            let entries = s
                .cells
                .iter()
                .map(|&(r, c)| TradeEntry::new(r as u32, c as u32, p.add(r as u32, c as u32), s.mate[r * n + c]))
                .collect();
            return TradePair::new(p, 1, 2, entries).ok();
        }
        s.pop_cell();
    }
    None
}

struct TwiceSearch {
    n: usize,
    cap: usize,
    cells: Vec<(usize, usize)>,
    in_t: Vec<bool>,
    mate: Vec<u32>,
    row_used: Vec<u64>,
    col_used: Vec<u64>,
    sym_count: Vec<u8>,
}

impl TwiceSearch {
    fn push_cell(&mut self, r: usize, c: usize) {
        self.in_t[r * self.n + c] = true;
        self.cells.push((r, c));
        self.sym_count[(r + c) % self.n] += 1;
    }

    fn pop_cell(&mut self) {
        let (r, c) = self.cells.pop().expect("cell to pop");
        self.in_t[r * self.n + c] = false;
        self.sym_count[(r + c) % self.n] -= 1;
    }

    fn dfs(&mut self) -> bool {
        let n = self.n;
        let Some(&(r, c)) = self.cells.iter().find(|&&(r, c)| self.mate[r * n + c] == u32::MAX) else {
            return self.sym_count.iter().all(|&k| k == 0 || k == 2);
        };
        let base = (r + c) % n;
        for m in 0..n {
            if m == base || self.row_used[r] >> m & 1 == 1 || self.col_used[c] >> m & 1 == 1 {
                continue;
            }
            let forced = [(r, (m + n - r) % n), ((m + n - c) % n, c)];
            let before = self.cells.len();
            let mut ok = true;
            for (fr, fc) in forced {
                if !self.in_t[fr * n + fc] {
                    if self.cells.len() == self.cap || self.sym_count[m] == 2 {
                        ok = false;
                        break;
                    }
                    self.push_cell(fr, fc);
                }
            }
            if ok {
                self.mate[r * n + c] = m as u32;
                self.row_used[r] |= 1 << m;
                self.col_used[c] |= 1 << m;
                if self.dfs() {
                    return true;
                }
                self.mate[r * n + c] = u32::MAX;
                self.row_used[r] &= !(1 << m);
                self.col_used[c] &= !(1 << m);
            }
            while self.cells.len() > before {
                self.pop_cell();
            }
        }
        false
    }
}

/// Turns [`log_trade`] into an orthogonal trade of index `(1, 2)` permuting
/// `size / 2` whole rows, via the balance matrix of the trade.
pub fn small_rowperm_pipeline(p: Modulus) -> Result<(RowPermutation, TradePair)> {
    p.require_prime()?;
    let t = log_trade(p)?;
    let (d, u) = balance_matrix(&t)?;
    let trade = trade_from_matrix(&d, &u, 2, p)?;
    let mut map: Vec<u32> = (0..p.get()).collect();
    for e in trade.entries() {
        map[e.row as usize] = p.sub(e.mate, e.col);
    }
    Ok((RowPermutation::from_map(p, map)?, trade))
}

const UNIT_PX: u64 = 16;
const MARGIN_PX: u64 = 8;

/// SVG drawing of the dissection inside its triangle: rectangle outline,
/// squares, both filler triangles and dashed anti-diagonals through the
/// paired corner residues.
pub fn render_svg(d: &SquareDissection) -> String {
    let n_mod = d.modulus();
    let size = n_mod * UNIT_PX + 2 * MARGIN_PX;
    let px = |x: u64| x * UNIT_PX + MARGIN_PX;
    let py = |y: u64| (n_mod - y) * UNIT_PX + MARGIN_PX;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(out, r##"<g fill="none" stroke="#222" stroke-width="1">"##);
    for tri in [[(d.w, 0), (n_mod, 0), (d.w, d.h)], [(0, d.h), (d.w, d.h), (0, n_mod)]] {
        let pts: Vec<String> = tri.iter().map(|&(x, y)| format!("{},{}", px(x), py(y))).collect();
        let _ = writeln!(out, r##"<polygon class="filler" fill="#e8e8e8" points="{}"/>"##, pts.join(" "));
    }
    for s in &d.squares {
        let _ = writeln!(
            out,
            r##"<rect class="square" fill="#cfe0f5" x="{}" y="{}" width="{}" height="{}"/>"##,
            px(s.x),
            py(s.y + s.side),
            s.side * UNIT_PX,
            s.side * UNIT_PX
        );
    }
    let _ = writeln!(
        out,
        r#"<rect class="frame" stroke-width="2" x="{}" y="{}" width="{}" height="{}"/>"#,
        px(0),
        py(d.h),
        d.w * UNIT_PX,
        d.h * UNIT_PX
    );
    let residues: BTreeSet<u64> = d
        .squares
        .iter()
        .flat_map(|s| [s.x + s.y, s.x + s.y + 2 * s.side])
        .chain([d.w, d.h])
        .map(|v| v % n_mod)
        .collect();
    for v in residues {
        let v = if v == 0 { n_mod } else { v };
        let _ = writeln!(
            out,
            r##"<line class="diagonal" stroke="#c33" stroke-dasharray="4 3" x1="{}" y1="{}" x2="{}" y2="{}"/>"##,
            px(v),
            py(0),
            px(0),
            py(v)
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}
