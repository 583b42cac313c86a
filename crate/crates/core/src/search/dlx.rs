//! Dancing-links exact cover over primary items.

/// Exact-cover instance: every solution picks options covering each item
/// exactly once. Options are scanned in insertion order.
#[derive(Clone, Debug)]
pub struct Dlx {
    left: Vec<usize>,
    right: Vec<usize>,
    up: Vec<usize>,
    down: Vec<usize>,
    item: Vec<usize>,
    option: Vec<usize>,
    size: Vec<usize>,
    option_nodes: Vec<usize>,
    n_items: usize,
}

/// How a search ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Exhausted,
    Stopped,
}

const ROOT: usize = 0;
/// Nodes visited between calls of the interrupt check.
const TICK: u64 = 1024;

impl Dlx {
    /// `options[i]` lists the items (in `0..n_items`) option `i` covers.
    pub fn new(n_items: usize, options: &[Vec<usize>]) -> Self {
        let headers = n_items + 1;
        let total = headers + options.iter().map(Vec::len).sum::<usize>();
        let mut d = Dlx {
            left: Vec::with_capacity(total),
            right: Vec::with_capacity(total),
            up: Vec::with_capacity(total),
            down: Vec::with_capacity(total),
            item: Vec::with_capacity(total),
            option: Vec::with_capacity(total),
            size: vec![0; headers],
            option_nodes: Vec::with_capacity(options.len()),
            n_items,
        };
        for i in 0..headers {
            d.left.push(if i == 0 { n_items } else { i - 1 });
            d.right.push(if i == n_items { 0 } else { i + 1 });
            d.up.push(i);
            d.down.push(i);
            d.item.push(i);
            d.option.push(usize::MAX);
        }
        for (o, items) in options.iter().enumerate() {
            let first = d.left.len();
            d.option_nodes.push(first);
            for (j, &it) in items.iter().enumerate() {
                assert!(it < n_items, "item {it} out of range");
                let node = first + j;
                let h = it + 1;
                d.left.push(if j == 0 { first + items.len() - 1 } else { node - 1 });
                d.right.push(if j + 1 == items.len() { first } else { node + 1 });
                d.up.push(d.up[h]);
                d.down.push(h);
                let last = d.up[h];
                d.down[last] = node;
                d.up[h] = node;
                d.item.push(h);
                d.option.push(o);
                d.size[h] += 1;
            }
        }
        d
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    fn cover(&mut self, h: usize) {
        let (l, r) = (self.left[h], self.right[h]);
        self.right[l] = r;
        self.left[r] = l;
        let mut i = self.down[h];
        while i != h {
            let mut j = self.right[i];
            while j != i {
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = d;
                self.up[d] = u;
                self.size[self.item[j]] -= 1;
                j = self.right[j];
            }
            i = self.down[i];
        }
    }

    fn uncover(&mut self, h: usize) {
        let mut i = self.up[h];
        while i != h {
            let mut j = self.left[i];
            while j != i {
                self.size[self.item[j]] += 1;
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = j;
                self.up[d] = j;
                j = self.left[j];
            }
            i = self.up[i];
        }
        let (l, r) = (self.left[h], self.right[h]);
        self.right[l] = h;
        self.left[r] = h;
    }

    fn select(&mut self, node: usize) {
        let mut j = self.right[node];
        while j != node {
            self.cover(self.item[j]);
            j = self.right[j];
        }
    }

    fn deselect(&mut self, node: usize) {
        let mut j = self.left[node];
        while j != node {
            self.uncover(self.item[j]);
            j = self.left[j];
        }
    }

    /// Uncovered item with fewest options, first in item order on ties.
    fn choose(&self) -> Option<usize> {
        let mut best = None;
        let mut best_size = usize::MAX;
        let mut h = self.right[ROOT];
        while h != ROOT {
            if self.size[h] < best_size {
                best_size = self.size[h];
                best = Some(h);
            }
            h = self.right[h];
        }
        best
    }

    /// Options containing the item the search branches on first.
    pub fn root_branches(&self) -> Vec<usize> {
        let Some(h) = self.choose() else { return Vec::new() };
        let mut out = Vec::with_capacity(self.size[h]);
        let mut i = self.down[h];
        while i != h {
            out.push(self.option[i]);
            i = self.down[i];
        }
        out
    }

    /// Enumerates all solutions. `visit` gets the chosen option indices and
    /// returns false to stop; `interrupt` is polled periodically and stops
    /// the search when it returns true.
    pub fn search(
        &mut self,
        visit: &mut dyn FnMut(&[usize]) -> bool,
        interrupt: &mut dyn FnMut() -> bool,
    ) -> Outcome {
        self.search_from(&[], visit, interrupt)
    }

    /// Like [`Dlx::search`], restricted to solutions containing `forced`,
    /// which must be pairwise disjoint.
    pub fn search_from(
        &mut self,
        forced: &[usize],
        visit: &mut dyn FnMut(&[usize]) -> bool,
        interrupt: &mut dyn FnMut() -> bool,
    ) -> Outcome {
        for &o in forced {
            let node = self.option_nodes[o];
            self.cover(self.item[node]);
            self.select(node);
        }
        let mut state = Walk { chosen: forced.to_vec(), nodes: 0, stopped: false };
        self.walk(&mut state, visit, interrupt);
        for &o in forced.iter().rev() {
            let node = self.option_nodes[o];
            self.deselect(node);
            self.uncover(self.item[node]);
        }
        if state.stopped {
            Outcome::Stopped
        } else {
            Outcome::Exhausted
        }
    }

    fn walk(&mut self, st: &mut Walk, visit: &mut dyn FnMut(&[usize]) -> bool, interrupt: &mut dyn FnMut() -> bool) {
        st.nodes += 1;
        if st.nodes.is_multiple_of(TICK) && interrupt() {
            st.stopped = true;
            return;
        }
        let Some(h) = self.choose() else {
            if !visit(&st.chosen) {
                st.stopped = true;
            }
            return;
        };
        if self.size[h] == 0 {
            return;
        }
        self.cover(h);
        let mut i = self.down[h];
        while i != h {
            st.chosen.push(self.option[i]);
            self.select(i);
            self.walk(st, visit, interrupt);
            self.deselect(i);
            st.chosen.pop();
            if st.stopped {
                break;
            }
            i = self.down[i];
        }
        self.uncover(h);
    }
}

struct Walk {
    chosen: Vec<usize>,
    nodes: u64,
    stopped: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_solutions(n: usize, options: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let mut d = Dlx::new(n, options);
        let mut out = Vec::new();
        d.search(
            &mut |s| {
                let mut s = s.to_vec();
                s.sort_unstable();
                out.push(s);
                true
            },
            &mut || false,
        );
        out.sort();
        out
    }

    #[test]
    fn knuth_example() {
        // Items a..g, the classic instance with the unique cover {0, 3, 4}.
        let options = vec![vec![2, 4], vec![0, 3, 6], vec![1, 2, 5], vec![0, 3, 5], vec![1, 6], vec![3, 4, 6]];
        assert_eq!(all_solutions(7, &options), vec![vec![0, 3, 4]]);
    }

    #[test]
    fn counts_perfect_matchings() {
        // Perfect matchings of K_6: 15.
        let mut options = Vec::new();
        for a in 0..6 {
            for b in a + 1..6 {
                options.push(vec![a, b]);
            }
        }
        assert_eq!(all_solutions(6, &options).len(), 15);
    }

    #[test]
    fn forced_branches_partition_solutions() {
        let mut options = Vec::new();
        for a in 0..8 {
            for b in a + 1..8 {
                options.push(vec![a, b]);
            }
        }
        let mut d = Dlx::new(8, &options);
        let roots = d.root_branches();
        let mut total = 0;
        for &o in &roots {
            d.search_from(&[o], &mut |_| { total += 1; true }, &mut || false);
        }
        assert_eq!(total, 105);
        assert_eq!(all_solutions(8, &options).len(), 105);
    }

    #[test]
    fn stop_and_interrupt() {
        let options: Vec<Vec<usize>> = (0..4).map(|i| vec![i]).chain([vec![0, 1]]).collect();
        let mut d = Dlx::new(4, &options);
        let mut seen = 0;
        assert_eq!(d.search(&mut |_| { seen += 1; false }, &mut || false), Outcome::Stopped);
        assert_eq!(seen, 1);
        // The structure is restored after stopping.
        assert_eq!(all_solutions(4, &options).len(), 2);
        assert_eq!(d.search(&mut |_| true, &mut || false), Outcome::Exhausted);
    }
}
