//! Binary constraint-satisfaction kernel behind enumeration, counting and the
//! existence searches. Domains are color bitmasks; every constraint is a
//! symmetric relation table `rel[a]` = mask of colors allowed next to `a`.

use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{CheckedAdd, CheckedMul, One, Zero};

use crate::model::{ConstraintGraph, TargetGraph};

#[derive(Clone, Debug)]
pub(crate) struct Csp {
    n: usize,
    domains: Vec<u128>,
    adj: Vec<Vec<(usize, usize)>>,
    rels: Vec<Vec<u128>>,
}

struct Symmetry {
    class: Vec<usize>,
}

/// Outcome of a single-solution search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Search {
    Found(Vec<usize>),
    Exhausted,
    Timeout,
}

/// Node and wall-clock budget for existence searches.
#[derive(Clone, Debug)]
pub(crate) struct Budget {
    pub deadline: Option<Instant>,
    pub max_nodes: Option<u64>,
    pub nodes: u64,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self {
            deadline: None,
            max_nodes: None,
            nodes: 0,
        }
    }

    pub fn until(deadline: Option<Instant>) -> Self {
        Self {
            deadline,
            max_nodes: None,
            nodes: 0,
        }
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if let Some(max) = self.max_nodes {
            if self.nodes > max {
                return false;
            }
        }
        if self.nodes.is_multiple_of(1024) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    return false;
                }
            }
        }
        true
    }
}

fn full_mask(q: usize) -> u128 {
    if q == 128 {
        u128::MAX
    } else {
        (1u128 << q) - 1
    }
}

fn bits(mut m: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(b)
        }
    })
}

impl Csp {
    /// Variables are the vertices of `g`, values the colors of `h`, and every
    /// edge must map to a compatible pair.
    pub fn colorings(h: &ConstraintGraph, g: &TargetGraph) -> Self {
        let mut csp = Self {
            n: g.n(),
            domains: vec![full_mask(h.q()); g.n()],
            adj: vec![Vec::new(); g.n()],
            rels: vec![h.compat_masks()],
        };
        for (u, v) in g.edges() {
            csp.constrain(u, v, 0);
        }
        csp
    }

    /// Registers the complement (within `q` colors) of relation `rel`.
    pub fn add_complement(&mut self, rel: usize, q: usize) -> usize {
        let full = full_mask(q);
        let table = self.rels[rel].iter().map(|m| !m & full).collect();
        self.rels.push(table);
        self.rels.len() - 1
    }

    pub fn constrain(&mut self, u: usize, v: usize, rel: usize) {
        self.adj[u].push((v, rel));
        self.adj[v].push((u, rel));
    }

    pub fn pin(&mut self, v: usize, c: usize) {
        self.domains[v] &= 1u128 << c;
    }

    fn filter(&self, domains: &mut [u128], v: usize, c: usize) {
        for &(w, r) in &self.adj[v] {
            domains[w] &= self.rels[r][c];
        }
    }

    /// Applies every initially-singleton domain to its neighbors. Returns the
    /// reduced domains and the remaining free variables, or `None` when the
    /// pinned values are inconsistent.
    fn settle_pins(&self) -> Option<(Vec<u128>, Vec<bool>)> {
        let mut d = self.domains.clone();
        if d.contains(&0) {
            return None;
        }
        let mut free = vec![true; self.n];
        for v in 0..self.n {
            if self.domains[v].count_ones() == 1 {
                free[v] = false;
                self.filter(&mut d, v, self.domains[v].trailing_zeros() as usize);
            }
        }
        if d.contains(&0) {
            return None;
        }
        Some((d, free))
    }

    fn components(&self, free: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if !free[s] || seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut k = 0;
            while k < comp.len() {
                let v = comp[k];
                k += 1;
                for &(w, _) in &self.adj[v] {
                    if free[w] && !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Exact number of solutions.
    pub fn count(&self) -> BigUint {
        match self.count_with::<u128>() {
            Some(c) => BigUint::from(c),
            None => self
                .count_with::<BigUint>()
                .expect("big integers never overflow"),
        }
    }

    fn count_with<N>(&self) -> Option<N>
    where
        N: Zero + One + CheckedAdd + CheckedMul + From<u32> + Clone,
    {
        let Some((domains, free)) = self.settle_pins() else {
            return Some(N::zero());
        };
        let mut total = N::one();
        for comp in self.components(&free) {
            let c: N = self.count_rec(&domains, &comp)?;
            if c.is_zero() {
                return Some(N::zero());
            }
            total = total.checked_mul(&c)?;
        }
        Some(total)
    }

    /// Most-constrained variable first; ties go to the higher degree, then the
    /// lower index.
    fn pick(&self, domains: &[u128], free: &[usize]) -> usize {
        let mut best = 0;
        for k in 1..free.len() {
            let (a, b) = (free[k], free[best]);
            let (da, db) = (domains[a].count_ones(), domains[b].count_ones());
            let (ga, gb) = (self.adj[a].len(), self.adj[b].len());
            if da < db || (da == db && (ga > gb || (ga == gb && a < b))) {
                best = k;
            }
        }
        best
    }

    fn count_rec<N>(&self, domains: &[u128], free: &[usize]) -> Option<N>
    where
        N: Zero + One + CheckedAdd + CheckedMul + From<u32> + Clone,
    {
        match free.len() {
            0 => return Some(N::one()),
            1 => return Some(N::from(domains[free[0]].count_ones())),
            _ => {}
        }
        let k = self.pick(domains, free);
        let v = free[k];
        let mut rest = free.to_vec();
        rest.swap_remove(k);
        let mut total = N::zero();
        let mut next = domains.to_vec();
        for c in bits(domains[v]) {
            next.copy_from_slice(domains);
            self.filter(&mut next, v, c);
            if rest.iter().any(|&w| next[w] == 0) {
                continue;
            }
            let sub: N = self.count_rec(&next, &rest)?;
            total = total.checked_add(&sub)?;
        }
        Some(total)
    }

    /// Colors grouped into interchangeable classes: two colors share a class
    /// when every relation row and every initial domain treats them alike,
    /// so swapping them maps solutions to solutions.
    fn value_classes(&self) -> Vec<usize> {
        let q = self.rels[0].len();
        let same = |a: usize, b: usize| {
            self.rels.iter().all(|r| r[a] == r[b])
                && self.domains.iter().all(|&d| (d >> a) & 1 == (d >> b) & 1)
        };
        let mut class: Vec<usize> = (0..q).collect();
        for b in 0..q {
            if let Some(a) = (0..b).find(|&a| class[a] == a && same(a, b)) {
                class[b] = a;
            }
        }
        class
    }

    /// Free variables with the same constraints and initial domain as an
    /// earlier nonadjacent free variable point to it; any solution stays one
    /// after copying the representative's value onto its twins.
    fn twin_of(&self, free: &[bool]) -> Vec<usize> {
        let sorted: Vec<Vec<(usize, usize)>> = self
            .adj
            .iter()
            .map(|a| {
                let mut a = a.clone();
                a.sort_unstable();
                a
            })
            .collect();
        let mut twin: Vec<usize> = (0..self.n).collect();
        for b in 0..self.n {
            if !free[b] {
                continue;
            }
            twin[b] = (0..b)
                .find(|&a| {
                    free[a]
                        && twin[a] == a
                        && self.domains[a] == self.domains[b]
                        && sorted[a] == sorted[b]
                        && !sorted[a].iter().any(|&(w, _)| w == b)
                })
                .unwrap_or(b);
        }
        twin
    }

    /// First solution found by most-constrained-first backtracking. Among
    /// interchangeable colors not yet in use, only the first is tried.
    pub fn find_first(&self, budget: &mut Budget) -> Search {
        let Some((domains, free)) = self.settle_pins() else {
            return Search::Exhausted;
        };
        let used = (0..self.n)
            .filter(|&v| !free[v])
            .fold(0u128, |m, v| m | domains[v]);
        let twin = self.twin_of(&free);
        let free: Vec<usize> = (0..self.n).filter(|&v| free[v] && twin[v] == v).collect();
        let mut assignment: Vec<usize> = domains
            .iter()
            .map(|m| m.trailing_zeros() as usize)
            .collect();
        let search = Symmetry {
            class: self.value_classes(),
        };
        match self.find_rec(&domains, &free, used, &search, &mut assignment, budget) {
            Some(true) => {
                for v in 0..self.n {
                    assignment[v] = assignment[twin[v]];
                }
                Search::Found(assignment)
            }
            Some(false) => Search::Exhausted,
            None => Search::Timeout,
        }
    }

    fn find_rec(
        &self,
        domains: &[u128],
        free: &[usize],
        used: u128,
        sym: &Symmetry,
        assignment: &mut [usize],
        budget: &mut Budget,
    ) -> Option<bool> {
        if free.is_empty() {
            return Some(true);
        }
        if !budget.tick() {
            return None;
        }
        let k = self.pick(domains, free);
        let v = free[k];
        let mut rest = free.to_vec();
        rest.swap_remove(k);
        let mut next = domains.to_vec();
        let mut tried_classes = 0u128;
        for c in bits(domains[v]) {
            if used >> c & 1 == 0 {
                let cls = sym.class[c];
                if tried_classes >> cls & 1 == 1 {
                    continue;
                }
                tried_classes |= 1u128 << cls;
            }
            next.copy_from_slice(domains);
            self.filter(&mut next, v, c);
            if rest.iter().any(|&w| next[w] == 0) {
                continue;
            }
            assignment[v] = c;
            if self.find_rec(&next, &rest, used | 1u128 << c, sym, assignment, budget)? {
                return Some(true);
            }
        }
        Some(false)
    }

    /// All solutions in lexicographic order of the assignment vector.
    pub fn into_lex(self) -> LexIter {
        LexIter::new(self)
    }

    #[cfg(test)]
    pub fn lex_iter(&self) -> LexIter {
        LexIter::new(self.clone())
    }
}

struct Frame {
    domains: Vec<u128>,
    remaining: u128,
}

/// Streaming lexicographic enumeration: vertices are fixed in index order and
/// colors tried in increasing order, with forward checking on later vertices.
pub(crate) struct LexIter {
    csp: Csp,
    stack: Vec<Frame>,
    assignment: Vec<usize>,
    empty_pending: bool,
}

impl LexIter {
    fn new(csp: Csp) -> Self {
        let mut stack = Vec::new();
        if csp.n > 0 && csp.domains.iter().all(|&m| m != 0) {
            stack.push(Frame {
                domains: csp.domains.clone(),
                remaining: csp.domains[0],
            });
        }
        Self {
            assignment: vec![0; csp.n],
            empty_pending: csp.n == 0,
            csp,
            stack,
        }
    }
}

impl Iterator for LexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.empty_pending {
            self.empty_pending = false;
            return Some(Vec::new());
        }
        let n = self.csp.n;
        loop {
            let depth = self.stack.len().checked_sub(1)?;
            let top = self.stack.last_mut().expect("nonempty");
            if top.remaining == 0 {
                self.stack.pop();
                continue;
            }
            let c = top.remaining.trailing_zeros() as usize;
            top.remaining &= top.remaining - 1;
            self.assignment[depth] = c;
            if depth + 1 == n {
                return Some(self.assignment.clone());
            }
            let mut next = top.domains.clone();
            let mut dead = false;
            for &(w, r) in &self.csp.adj[depth] {
                if w > depth {
                    next[w] &= self.csp.rels[r][c];
                    dead |= next[w] == 0;
                }
            }
            if !dead {
                let remaining = next[depth + 1];
                self.stack.push(Frame {
                    domains: next,
                    remaining,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(h: &ConstraintGraph, g: &TargetGraph) -> Vec<Vec<usize>> {
        let q = h.q();
        let n = g.n();
        let total = q.pow(n as u32);
        (0..total)
            .map(|mut code| {
                let mut s = vec![0; n];
                for k in (0..n).rev() {
                    s[k] = code % q;
                    code /= q;
                }
                s
            })
            .filter(|s| g.edges().all(|(u, v)| h.compatible(s[u], s[v])))
            .collect()
    }

    #[test]
    fn lex_enumeration_matches_brute_force() {
        let h = ConstraintGraph::new(3, [(0, 0), (0, 1), (1, 2), (2, 2)]).unwrap();
        let g = TargetGraph::new(5, [(0, 1), (1, 2), (2, 3), (3, 0), (3, 4)]).unwrap();
        let csp = Csp::colorings(&h, &g);
        let got: Vec<_> = csp.lex_iter().collect();
        assert_eq!(got, brute_force(&h, &g));
        assert_eq!(csp.count(), BigUint::from(got.len()));
    }

    #[test]
    fn pinned_counts() {
        let h = ConstraintGraph::complete(3).unwrap();
        let g = TargetGraph::complete(3);
        let mut csp = Csp::colorings(&h, &g);
        csp.pin(0, 0);
        assert_eq!(csp.count(), BigUint::from(2u32));
        csp.pin(1, 0);
        assert_eq!(csp.count(), BigUint::from(0u32));
    }

    #[test]
    fn complement_relation_search() {
        // Two adjacent vertices that must also be incompatible: impossible.
        let h = ConstraintGraph::complete(3).unwrap();
        let g = TargetGraph::new(2, [(0, 1)]).unwrap();
        let mut csp = Csp::colorings(&h, &g);
        let anti = csp.add_complement(0, 3);
        csp.constrain(0, 1, anti);
        assert_eq!(csp.find_first(&mut Budget::unlimited()), Search::Exhausted);
        let g = TargetGraph::empty(2);
        let mut csp = Csp::colorings(&h, &g);
        let anti = csp.add_complement(0, 3);
        csp.constrain(0, 1, anti);
        match csp.find_first(&mut Budget::unlimited()) {
            Search::Found(s) => assert_eq!(s[0], s[1]),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest::proptest! {
        #[test]
        fn symmetry_reduced_search_agrees_with_count(
            q in 2usize..5,
            h_bits in proptest::collection::vec(proptest::bool::ANY, 10),
            n in 1usize..8,
            g_bits in proptest::collection::vec(proptest::bool::weighted(0.4), 28),
            pin in proptest::option::of((0usize..8, 0usize..5)),
        ) {
            let pairs = (0..q).flat_map(|a| (a..q).map(move |b| (a, b)));
            let h = ConstraintGraph::new(q, pairs.zip(&h_bits).filter(|p| *p.1).map(|p| p.0)).unwrap();
            let non_edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
            let g = TargetGraph::new(n, non_edges.zip(&g_bits).filter(|p| *p.1).map(|p| p.0)).unwrap();
            let mut csp = Csp::colorings(&h, &g);
            if let Some((v, c)) = pin {
                csp.pin(v % n, c % q);
            }
            let count = csp.count();
            match csp.find_first(&mut Budget::unlimited()) {
                Search::Found(s) => {
                    proptest::prop_assert!(count > BigUint::zero());
                    proptest::prop_assert!(g.edges().all(|(u, v)| h.compatible(s[u], s[v])));
                    if let Some((v, c)) = pin {
                        proptest::prop_assert_eq!(s[v % n], c % q);
                    }
                }
                other => {
                    proptest::prop_assert_eq!(other, Search::Exhausted);
                    proptest::prop_assert!(count.is_zero());
                }
            }
        }
    }

    #[test]
    fn empty_graph_has_one_empty_coloring() {
        let h = ConstraintGraph::complete(2).unwrap();
        let csp = Csp::colorings(&h, &TargetGraph::empty(0));
        assert_eq!(csp.lex_iter().count(), 1);
        assert_eq!(csp.count(), BigUint::from(1u32));
    }

    #[test]
    fn node_budget_times_out() {
        let h = ConstraintGraph::complete(3).unwrap();
        let g = TargetGraph::complete(4);
        let csp = Csp::colorings(&h, &g);
        let mut budget = Budget {
            deadline: None,
            max_nodes: Some(2),
            nodes: 0,
        };
        assert_eq!(csp.find_first(&mut budget), Search::Timeout);
        assert_eq!(csp.find_first(&mut Budget::unlimited()), Search::Exhausted);
    }
}
