//! Sizes of orthogonal trades of index `(1, k)` in `B_p`.
//!
//! A square orthogonal to `B_p(k)` is a partition of the cells into `p`
//! transversals of `B_p(k)` plus a bijective labelling of the parts. The
//! trade size is the Hamming distance to `B_p(1)`, i.e. `p^2` minus the
//! agreement. For a fixed partition, the achievable agreements over all `p!`
//! labellings come from a dynamic program over the set of used labels.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latin::{gen_bp, LatinSquare};
use crate::modular::Modulus;
use crate::trade::{difference_trade, TradePair};

use super::dlx::{Dlx, Outcome};
use super::transversals::for_each_transversal;
use super::{worker_count, SearchOptions, StopReason};

/// Largest order the agreement bitsets hold (`p^2 < 192`).
const MAX_P: usize = 13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub p: Modulus,
    /// Sizes found for each index `k`.
    pub per_k: BTreeMap<u32, BTreeSet<usize>>,
    /// Union over `k`.
    pub sizes: BTreeSet<usize>,
    /// One validated trade per size, taken from the smallest `k` and the
    /// first decomposition producing it.
    pub certificates: BTreeMap<usize, TradePair>,
    /// True only when every decomposition of every searched `k` was visited.
    pub exhaustive: bool,
    pub exhaustive_per_k: BTreeMap<u32, bool>,
    /// `k -> k^{-1}` for indices filled in by transposition instead of search.
    pub dual_of: BTreeMap<u32, u32>,
    pub decompositions: u64,
    pub stop_reason: StopReason,
    /// Wall-clock seconds.
    pub budget_used: f64,
}

impl SpectrumResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spectrum serializes")
    }

    /// The result with timing removed, for comparing runs.
    pub fn without_timing(mut self) -> Self {
        self.budget_used = 0.0;
        self
    }
}

/// Expected spectra, with the ranges `a, ..., b` read as contiguous.
pub fn reference_spectrum(p: u32) -> Option<BTreeSet<usize>> {
    let (isolated, range): (&[usize], Option<std::ops::RangeInclusive<usize>>) = match p {
        5 => (&[0, 10, 15, 20, 25], None),
        7 => (&[0, 14, 18, 21], Some(24..=49)),
        9 => (&[0, 6, 9, 12, 15, 16], Some(18..=81)),
        11 => (&[0, 22, 33], Some(36..=121)),
        _ => return None,
    };
    Some(isolated.iter().copied().chain(range.into_iter().flatten()).collect())
}

/// `k` such that `B_p(k)` is a Latin square orthogonal to `B_p(1)`.
pub fn admissible_indices(p: Modulus) -> Vec<u32> {
    (2..p.get()).filter(|&k| p.is_unit(k) && p.is_unit(k - 1)).collect()
}

#[derive(Clone, Copy, Default, PartialEq, Eq)]
struct Bits([u64; 3]);

impl Bits {
    fn one(at: usize) -> Bits {
        let mut b = Bits::default();
        b.0[at / 64] |= 1 << (at % 64);
        b
    }

    fn is_empty(&self) -> bool {
        self.0 == [0; 3]
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    /// `self |= src << shift`.
    fn or_shifted(&mut self, src: &Bits, shift: usize) {
        let (words, bits) = (shift / 64, shift % 64);
        for i in (words..3).rev() {
            let lo = src.0[i - words];
            let mut v = lo << bits;
            if bits != 0 && i > words {
                v |= src.0[i - words - 1] >> (64 - bits);
            }
            self.0[i] |= v;
        }
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..192).filter(|&i| self.get(i))
    }
}

/// Transversals of `B_p(k)` as cell lists, with their agreement vectors.
struct Instance {
    p: Modulus,
    k: u32,
    cells: Vec<Vec<usize>>,
    agree: Vec<Vec<usize>>,
    agree_key: Vec<Vec<u8>>,
}

impl Instance {
    fn new(p: Modulus, k: u32) -> Result<Self> {
        let n = p.usize();
        let m = gen_bp(p, k)?;
        let mut found: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for_each_transversal(&m, &mut |cols| {
            let mut agree = vec![0; n];
            for (r, &c) in cols.iter().enumerate() {
                agree[(r + c) % n] += 1;
            }
            found.push((cols.iter().enumerate().map(|(r, &c)| r * n + c).collect(), agree));
        });
        // Anti-diagonals of B_p(1) first, then by decreasing best agreement.
        found.sort_by_key(|(_, a)| std::cmp::Reverse(*a.iter().max().expect("nonempty")));
        let (cells, agree): (Vec<_>, Vec<Vec<usize>>) = found.into_iter().unzip();
        let agree_key = agree.iter().map(|a| a.iter().map(|&v| v as u8).collect()).collect();
        Ok(Instance { p, k, cells, agree, agree_key })
    }

    /// `dp[mask]`: agreements reachable labelling the first `|mask|` parts
    /// with the labels in `mask`.
    fn label_dp(&self, parts: &[usize], dp: &mut [Bits]) {
        let n = self.p.usize();
        dp.iter_mut().for_each(|b| *b = Bits::default());
        dp[0] = Bits::one(0);
        for mask in 0..dp.len() {
            if dp[mask].is_empty() {
                continue;
            }
            let i = mask.count_ones() as usize;
            if i == n {
                continue;
            }
            let src = dp[mask];
            let agree = &self.agree[parts[i]];
            for (s, &a) in agree.iter().enumerate() {
                if mask >> s & 1 == 0 {
                    dp[mask | 1 << s].or_shifted(&src, a);
                }
            }
        }
    }

    /// A labelling with total agreement `target`, traced back through `dp`.
    fn certificate(&self, parts: &[usize], dp: &[Bits], target: usize) -> TradePair {
        let n = self.p.usize();
        let mut mask = dp.len() - 1;
        let mut rest = target;
        let mut label = vec![0u32; n];
        for i in (0..n).rev() {
            let agree = &self.agree[parts[i]];
            let s = (0..n)
                .find(|&s| mask >> s & 1 == 1 && agree[s] <= rest && dp[mask ^ 1 << s].get(rest - agree[s]))
                .expect("dp trace");
            label[i] = s as u32;
            rest -= agree[s];
            mask ^= 1 << s;
        }
        let mut cells = vec![0u32; n * n];
        for (i, &part) in parts.iter().enumerate() {
            for &cell in &self.cells[part] {
                cells[cell] = label[i];
            }
        }
        let square = LatinSquare::from_cells(n, cells).expect("labelled decomposition is Latin");
        let base = gen_bp(self.p, 1).expect("B_p(1)");
        let t = difference_trade(&base, &square, self.k).expect("same order");
        debug_assert!(crate::trade::is_orthogonal_trade(&t));
        t
    }
}

#[derive(Default)]
struct BranchResult {
    sizes: BTreeSet<usize>,
    certificates: BTreeMap<usize, TradePair>,
    decompositions: u64,
    complete: bool,
}

struct KResult {
    sizes: BTreeSet<usize>,
    certificates: BTreeMap<usize, TradePair>,
    decompositions: u64,
    exhaustive: bool,
    covered: bool,
}

struct Shared<'a> {
    deadline: Option<Instant>,
    targets: Option<&'a BTreeSet<usize>>,
    found: Mutex<BTreeSet<usize>>,
    stop: AtomicBool,
}

impl Shared<'_> {
    fn interrupted(&self) -> bool {
        self.stop.load(Ordering::Relaxed) || self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn record(&self, new: &[usize]) {
        let Some(targets) = self.targets else { return };
        let mut found = self.found.lock().expect("found set");
        found.extend(new);
        if targets.is_subset(&found) {
            self.stop.store(true, Ordering::Relaxed);
        }
    }
}

/// Achievable agreements keyed by the sorted agreement rows of a
/// decomposition; the labelling DP only sees these rows.
type Memo = HashMap<Vec<u8>, Bits>;

/// Entries kept before the memo is cleared.
const MEMO_CAP: usize = 1 << 20;

fn run_branch(inst: &Instance, dlx: &mut Dlx, root: usize, shared: &Shared, memo: &mut Memo) -> BranchResult {
    let n = inst.p.usize();
    let total = n * n;
    let mut dp = vec![Bits::default(); 1 << n];
    let mut out = BranchResult::default();
    let mut rows: Vec<&[u8]> = Vec::with_capacity(n);
    let outcome = dlx.search_from(
        &[root],
        &mut |parts| {
            out.decompositions += 1;
            rows.clear();
            rows.extend(parts.iter().map(|&t| inst.agree_key[t].as_slice()));
            rows.sort_unstable();
            let key = rows.concat();
            let reachable = match memo.get(&key) {
                Some(&b) => b,
                None => {
                    inst.label_dp(parts, &mut dp);
                    let b = dp[dp.len() - 1];
                    if memo.len() >= MEMO_CAP {
                        memo.clear();
                    }
                    memo.insert(key, b);
                    b
                }
            };
            // Certificates need the DP table of this very decomposition.
            if reachable.iter().all(|a| out.sizes.contains(&(total - a))) {
                return !shared.stop.load(Ordering::Relaxed);
            }
            inst.label_dp(parts, &mut dp);
            let mut new = Vec::new();
            for agreement in reachable.iter() {
                let size = total - agreement;
                if out.sizes.insert(size) {
                    out.certificates.insert(size, inst.certificate(parts, &dp, agreement));
                    new.push(size);
                }
            }
            if !new.is_empty() {
                shared.record(&new);
            }
            !shared.stop.load(Ordering::Relaxed)
        },
        &mut || shared.interrupted(),
    );
    out.complete = outcome == Outcome::Exhausted && !shared.interrupted();
    out
}

fn run_k(p: Modulus, k: u32, opts: &SearchOptions, shared: &Shared) -> Result<KResult> {
    let inst = Instance::new(p, k)?;
    let dlx = Dlx::new(p.usize() * p.usize(), &inst.cells);
    let roots = dlx.root_branches();
    let slots: Vec<Mutex<Option<BranchResult>>> = roots.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..worker_count(opts.threads, roots.len()) {
            scope.spawn(|| {
                let mut local = dlx.clone();
                let mut memo = Memo::new();
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= roots.len() || shared.interrupted() {
                        break;
                    }
                    let r = run_branch(&inst, &mut local, roots[i], shared, &mut memo);
                    *slots[i].lock().expect("slot") = Some(r);
                }
            });
        }
    });
    let mut res = KResult {
        sizes: BTreeSet::new(),
        certificates: BTreeMap::new(),
        decompositions: 0,
        exhaustive: true,
        covered: false,
    };
    for slot in slots {
        match slot.into_inner().expect("slot") {
            Some(b) => {
                res.exhaustive &= b.complete;
                res.decompositions += b.decompositions;
                res.sizes.extend(&b.sizes);
                for (size, t) in b.certificates {
                    res.certificates.entry(size).or_insert(t);
                }
            }
            None => res.exhaustive = false,
        }
    }
    res.covered = shared.stop.load(Ordering::Relaxed);
    Ok(res)
}

fn check_p(p: Modulus) -> Result<()> {
    if p.usize() > MAX_P {
        return Err(Error::OrderCap { n: p.usize(), cap: MAX_P });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn finish(
    p: Modulus,
    start: Instant,
    deadline: Option<Instant>,
    per_k: BTreeMap<u32, BTreeSet<usize>>,
    certificates: BTreeMap<usize, TradePair>,
    exhaustive_per_k: BTreeMap<u32, bool>,
    dual_of: BTreeMap<u32, u32>,
    decompositions: u64,
    covered: bool,
) -> SpectrumResult {
    let exhaustive = exhaustive_per_k.values().all(|&e| e);
    let stop_reason = if exhaustive {
        StopReason::Completed
    } else if covered {
        StopReason::TargetsCovered
    } else if deadline.is_some_and(|d| Instant::now() >= d) {
        StopReason::BudgetExhausted
    } else {
        StopReason::Completed
    };
    SpectrumResult {
        p,
        sizes: per_k.values().flatten().copied().collect(),
        per_k,
        certificates,
        exhaustive,
        exhaustive_per_k,
        dual_of,
        decompositions,
        stop_reason,
        budget_used: start.elapsed().as_secs_f64(),
    }
}

/// Trade sizes of index `(1, k)`. With `targets`, the search stops once
/// every target size has a certificate.
pub fn spectrum(p: Modulus, k: u32, opts: &SearchOptions, targets: Option<&BTreeSet<usize>>) -> Result<SpectrumResult> {
    check_p(p)?;
    if !admissible_indices(p).contains(&k) {
        return Err(Error::NotOrthogonal(format!("B_{p}(1) and B_{p}({k}) are not orthogonal")));
    }
    let start = Instant::now();
    let shared = Shared { deadline: opts.deadline(start), targets, found: Mutex::new(BTreeSet::new()), stop: AtomicBool::new(false) };
    let r = run_k(p, k, opts, &shared)?;
    Ok(finish(
        p,
        start,
        shared.deadline,
        BTreeMap::from([(k, r.sizes)]),
        r.certificates,
        BTreeMap::from([(k, r.exhaustive)]),
        BTreeMap::new(),
        r.decompositions,
        r.covered,
    ))
}

/// Union over all admissible `k`. Only `k <= k^{-1}` is searched; the
/// transpose of a trade of index `(1, k)` has index `(1, k^{-1})`.
pub fn spectrum_all(p: Modulus, opts: &SearchOptions, targets: Option<&BTreeSet<usize>>) -> Result<SpectrumResult> {
    check_p(p)?;
    let start = Instant::now();
    let shared = Shared { deadline: opts.deadline(start), targets, found: Mutex::new(BTreeSet::new()), stop: AtomicBool::new(false) };
    let mut per_k = BTreeMap::new();
    let mut exhaustive_per_k = BTreeMap::new();
    let mut dual_of = BTreeMap::new();
    let mut certificates = BTreeMap::new();
    let mut decompositions = 0;
    let mut covered = false;
    for k in admissible_indices(p) {
        let inv = p.inv(k)?;
        if inv < k {
            dual_of.insert(k, inv);
            continue;
        }
        if covered || shared.interrupted() {
            exhaustive_per_k.insert(k, false);
            per_k.insert(k, BTreeSet::new());
            continue;
        }
        let r = run_k(p, k, opts, &shared)?;
        decompositions += r.decompositions;
        covered |= r.covered;
        exhaustive_per_k.insert(k, r.exhaustive);
        per_k.insert(k, r.sizes);
        for (size, t) in r.certificates {
            certificates.entry(size).or_insert(t);
        }
    }
    for (&k, &inv) in &dual_of {
        let sizes = per_k[&inv].clone();
        per_k.insert(k, sizes);
        exhaustive_per_k.insert(k, exhaustive_per_k[&inv]);
    }
    Ok(finish(p, start, shared.deadline, per_k, certificates, exhaustive_per_k, dual_of, decompositions, covered))
}
