//! Support sizes of row permutations of `B_p` that stay orthogonal to
//! several members `B_p(k)`, `k >= 2`, at once.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::Modulus;
use crate::rowperm::RowPermutation;

use super::{worker_count, SearchOptions, StopReason};

const MAX_P: usize = 13;
const MAX_MATES: usize = 5;
/// Nodes between budget checks.
const TICK: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowPermWitness {
    pub sigma: RowPermutation,
    /// Every `k >= 2` with `B_p(k)` orthogonal to the permuted square.
    pub mate_set: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowPermSearchResult {
    pub p: Modulus,
    pub mates_count: usize,
    /// Support sizes of non-identity permutations orthogonal to at least
    /// `mates_count` of the `B_p(k)`.
    pub achievable: BTreeSet<usize>,
    /// `achievable` without `p - 1` and `p`, which the maps `x -> cx` and
    /// `x -> x + b` realise for every mate count up to `p - 3`.
    pub nontrivial: BTreeSet<usize>,
    /// Per support size, the witness with the largest mate set, first in
    /// search order on ties.
    pub witnesses: BTreeMap<usize, RowPermWitness>,
    pub exhaustive: bool,
    pub stop_reason: StopReason,
    pub budget_used: f64,
}

impl RowPermSearchResult {
    pub fn without_timing(mut self) -> Self {
        self.budget_used = 0.0;
        self
    }
}

/// Best witness per support size: `(mate mask, sigma)`.
type Best = BTreeMap<usize, (u16, Vec<u8>)>;

struct Walker<'a> {
    p: usize,
    /// `ks[i] = i + 2`.
    nk: usize,
    mates: u32,
    sigma: Vec<u8>,
    best: Best,
    nodes: u64,
    stopped: bool,
    deadline: Option<Instant>,
    stop: &'a AtomicBool,
}

impl Walker<'_> {
    fn rec(&mut self, r: usize, used_img: u16, used: &[u16; 11], alive: u16, moved: usize) {
        self.nodes += 1;
        if self.nodes.is_multiple_of(TICK)
            && (self.stop.load(Ordering::Relaxed) || self.deadline.is_some_and(|d| Instant::now() >= d))
        {
            self.stopped = true;
        }
        if self.stopped {
            return;
        }
        let p = self.p;
        if r == p {
            if moved > 0 {
                let e = self.best.entry(moved).or_insert((0, Vec::new()));
                if e.1.is_empty() || alive.count_ones() > e.0.count_ones() {
                    *e = (alive, self.sigma.clone());
                }
            }
            return;
        }
        for v in 0..p {
            if used_img >> v & 1 == 1 {
                continue;
            }
            let mut next = *used;
            let mut live = alive;
            let mut bits = alive;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let k = i + 2;
                let d = (k * r + p - v) % p;
                if next[i] >> d & 1 == 1 {
                    live &= !(1 << i);
                } else {
                    next[i] |= 1 << d;
                }
            }
            if live.count_ones() < self.mates {
                continue;
            }
            self.sigma[r] = v as u8;
            self.rec(r + 1, used_img | 1 << v, &next, live, moved + usize::from(v != r));
        }
    }
}

/// Exhaustive over all permutations of `Z_p`, branching on `sigma(0)`.
pub fn rowperm_sizes(p: Modulus, mates: usize, opts: &SearchOptions) -> Result<RowPermSearchResult> {
    p.require_prime()?;
    if p.usize() > MAX_P {
        return Err(Error::OrderCap { n: p.usize(), cap: MAX_P });
    }
    if !(1..=MAX_MATES).contains(&mates) {
        return Err(Error::IndexOutOfRange { k: mates as u32, p: p.get() });
    }
    let start = Instant::now();
    let deadline = opts.deadline(start);
    let n = p.usize();
    let nk = n - 2;
    let stop = AtomicBool::new(false);
    let slots: Vec<Mutex<Option<(Best, bool)>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    if mates <= nk {
        std::thread::scope(|scope| {
            for _ in 0..worker_count(opts.threads, n) {
                scope.spawn(|| loop {
                    let v0 = next.fetch_add(1, Ordering::Relaxed);
                    if v0 >= n {
                        break;
                    }
                    let mut w = Walker {
                        p: n,
                        nk,
                        mates: mates as u32,
                        sigma: vec![0; n],
                        best: Best::new(),
                        nodes: 0,
                        stopped: false,
                        deadline,
                        stop: &stop,
                    };
                    // Row 0 has difference -sigma(0) for every k.
                    let mut used = [0u16; 11];
                    let d0 = (n - v0) % n;
                    for u in used.iter_mut().take(w.nk) {
                        *u = 1 << d0;
                    }
                    w.sigma[0] = v0 as u8;
                    w.rec(1, 1 << v0, &used, ((1u32 << nk) - 1) as u16, usize::from(v0 != 0));
                    if w.stopped {
                        stop.store(true, Ordering::Relaxed);
                    }
                    *slots[v0].lock().expect("slot") = Some((w.best, !w.stopped));
                });
            }
        });
    }
    let mut merged: Best = Best::new();
    let mut exhaustive = true;
    for slot in slots {
        match slot.into_inner().expect("slot") {
            Some((best, complete)) => {
                exhaustive &= complete;
                for (m, cand) in best {
                    let e = merged.entry(m).or_insert_with(|| cand.clone());
                    if cand.0.count_ones() > e.0.count_ones() {
                        *e = cand;
                    }
                }
            }
            None => exhaustive &= mates > nk,
        }
    }
    let mut witnesses = BTreeMap::new();
    for (m, (mask, sigma)) in merged {
        let sigma = RowPermutation::from_map(p, sigma.into_iter().map(u32::from).collect())?;
        let mate_set = (0..nk).filter(|i| mask >> i & 1 == 1).map(|i| i as u32 + 2).collect();
        witnesses.insert(m, RowPermWitness { sigma, mate_set });
    }
    let achievable: BTreeSet<usize> = witnesses.keys().copied().collect();
    let nontrivial = achievable.iter().copied().filter(|&m| m + 1 < n).collect();
    Ok(RowPermSearchResult {
        p,
        mates_count: mates,
        achievable,
        nontrivial,
        witnesses,
        exhaustive,
        stop_reason: if exhaustive { StopReason::Completed } else { StopReason::BudgetExhausted },
        budget_used: start.elapsed().as_secs_f64(),
    })
}
