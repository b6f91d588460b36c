//! Core domain types: constraint graphs, target graphs, colorings, weighted
//! spin systems and the duplicated-color supergraphs used by the
//! identifiability tests.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Colors are indexed `0..q`.
pub type Color = usize;

/// Upper bound on `q`; color sets are stored as 128-bit masks.
pub const MAX_COLORS: usize = 128;

fn norm(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// The color-compatibility graph `H` on `q` colors. Self-loops are allowed;
/// every missing pair (including a missing self-loop) is a hard constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConstraintGraph {
    q: usize,
    edges: BTreeSet<(Color, Color)>,
}

impl ConstraintGraph {
    pub fn new(q: usize, edges: impl IntoIterator<Item = (Color, Color)>) -> Result<Self> {
        if q == 0 || q > MAX_COLORS {
            return Err(Error::InvalidParameter(format!(
                "q must lie in 1..={MAX_COLORS}, got {q}"
            )));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            for c in [a, b] {
                if c >= q {
                    return Err(Error::ColorOutOfRange { color: c, q });
                }
            }
            set.insert(norm(a, b));
        }
        Ok(Self { q, edges: set })
    }

    /// `K_q`: all off-diagonal pairs, no self-loops.
    pub fn complete(q: usize) -> Result<Self> {
        Self::new(q, (0..q).flat_map(|i| (i + 1..q).map(move |j| (i, j))))
    }

    /// `K_q^+`: every pair including every self-loop.
    pub fn complete_with_loops(q: usize) -> Result<Self> {
        Self::new(q, (0..q).flat_map(|i| (i..q).map(move |j| (i, j))))
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Edges as `(i, j)` with `i <= j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Color, Color)> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_compatible(&self, i: Color, j: Color) -> Result<bool> {
        for c in [i, j] {
            if c >= self.q {
                return Err(Error::ColorOutOfRange {
                    color: c,
                    q: self.q,
                });
            }
        }
        Ok(self.compatible(i, j))
    }

    /// Unchecked variant of [`is_compatible`](Self::is_compatible).
    pub fn compatible(&self, i: Color, j: Color) -> bool {
        self.edges.contains(&norm(i, j))
    }

    /// All unordered pairs `(i, j)`, `i <= j`, missing from `H`, sorted.
    pub fn hard_constraints(&self) -> Vec<(Color, Color)> {
        (0..self.q)
            .flat_map(|i| (i..self.q).map(move |j| (i, j)))
            .filter(|p| !self.edges.contains(p))
            .collect()
    }

    pub fn has_hard_constraint(&self) -> bool {
        self.edges.len() < self.q * (self.q + 1) / 2
    }

    pub fn self_loops(&self) -> Vec<Color> {
        (0..self.q).filter(|&i| self.compatible(i, i)).collect()
    }

    pub fn has_self_loop(&self) -> bool {
        self.edges.iter().any(|&(a, b)| a == b)
    }

    /// Neighbors of `i` other than `i` itself.
    pub fn neighbors(&self, i: Color) -> Vec<Color> {
        (0..self.q)
            .filter(|&k| k != i && self.compatible(i, k))
            .collect()
    }

    pub fn degree(&self, i: Color) -> usize {
        self.neighbors(i).len()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.q];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Learning operations need a hard constraint.
    pub fn require_hard_constraint(&self) -> Result<()> {
        if self.has_hard_constraint() {
            Ok(())
        } else {
            Err(Error::NoHardConstraint)
        }
    }

    /// `masks[a]` has bit `b` set iff `{a, b}` is compatible.
    pub(crate) fn compat_masks(&self) -> Vec<u128> {
        let mut masks = vec![0u128; self.q];
        for &(a, b) in &self.edges {
            masks[a] |= 1 << b;
            masks[b] |= 1 << a;
        }
        masks
    }
}

/// A simple undirected graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TargetGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl fmt::Debug for TargetGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetGraph")
            .field("n", &self.n)
            .field("edges", &self.edges)
            .finish()
    }
}

impl TargetGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            set.insert(norm(u, v));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &set {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Self { n, edges: set, adj })
    }

    pub fn empty(n: usize) -> Self {
        Self::new(n, []).expect("edgeless graph is valid")
    }

    pub fn complete(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
            .expect("complete graph is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_set(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&norm(u, v))
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Membership in the bounded-degree family: `max_degree <= d`.
    pub fn in_family(&self, d: usize) -> bool {
        self.max_degree() <= d
    }

    /// Unordered vertex pairs that are not edges, sorted.
    pub fn non_edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| (u + 1..self.n).map(move |v| (u, v)))
            .filter(|&(u, v)| !self.has_edge(u, v))
            .collect()
    }

    pub fn with_edges(&self, extra: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new(self.n, self.edges.iter().copied().chain(extra))
    }

    pub fn union(&self, other: &TargetGraph) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        self.with_edges(other.edges())
    }

    pub fn is_subgraph_of(&self, other: &TargetGraph) -> bool {
        self.n == other.n && self.edges.is_subset(&other.edges)
    }

    /// Subgraph induced by `keep` (in the given order); vertex `keep[k]`
    /// becomes `k`.
    pub fn induced(&self, keep: &[usize]) -> Result<Self> {
        let mut index = vec![usize::MAX; self.n];
        for (k, &v) in keep.iter().enumerate() {
            if v >= self.n {
                return Err(Error::VertexOutOfRange {
                    vertex: v,
                    n: self.n,
                });
            }
            index[v] = k;
        }
        Self::new(
            keep.len(),
            self.edges
                .iter()
                .filter(|&&(u, v)| index[u] != usize::MAX && index[v] != usize::MAX)
                .map(|&(u, v)| (index[u], index[v])),
        )
    }

    /// Applies a vertex permutation: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: perm.len(),
            });
        }
        Self::new(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// One color per vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coloring(pub Vec<Color>);

impl Coloring {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Color] {
        &self.0
    }

    pub fn check(&self, n: usize, q: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: self.0.len(),
            });
        }
        if let Some(&c) = self.0.iter().find(|&&c| c >= q) {
            return Err(Error::ColorOutOfRange { color: c, q });
        }
        Ok(())
    }
}

impl From<Vec<Color>> for Coloring {
    fn from(v: Vec<Color>) -> Self {
        Coloring(v)
    }
}

/// True iff every edge of `g` is mapped to an edge of `h`.
pub fn is_valid_coloring(h: &ConstraintGraph, g: &TargetGraph, sigma: &Coloring) -> Result<bool> {
    sigma.check(g.n(), h.q())?;
    Ok(g.edges().all(|(u, v)| h.compatible(sigma.0[u], sigma.0[v])))
}

/// Edge-potential entry: a finite value or a hard constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Potential<T> {
    Finite(T),
    Forbidden,
}

impl<T> Potential<T> {
    pub fn finite(&self) -> Option<&T> {
        match self {
            Potential::Finite(x) => Some(x),
            Potential::Forbidden => None,
        }
    }

    pub fn is_forbidden(&self) -> bool {
        matches!(self, Potential::Forbidden)
    }
}

/// Spin system with symmetric edge potential `J` (with hard constraints) and
/// vertex potential `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem<T> {
    q: usize,
    j: Vec<Potential<T>>,
    h: Vec<T>,
}

impl<T: Scalar> SpinSystem<T> {
    pub fn new(j: Vec<Vec<Potential<T>>>, h: Vec<T>) -> Result<Self> {
        let q = j.len();
        if q == 0 || q > MAX_COLORS {
            return Err(Error::InvalidParameter(format!(
                "q must lie in 1..={MAX_COLORS}, got {q}"
            )));
        }
        if h.len() != q {
            return Err(Error::LengthMismatch {
                expected: q,
                got: h.len(),
            });
        }
        for row in &j {
            if row.len() != q {
                return Err(Error::LengthMismatch {
                    expected: q,
                    got: row.len(),
                });
            }
        }
        for a in 0..q {
            for b in a + 1..q {
                if j[a][b] != j[b][a] {
                    return Err(Error::InvalidParameter(format!(
                        "edge potential is not symmetric at ({a}, {b})"
                    )));
                }
            }
        }
        Ok(Self {
            q,
            j: j.into_iter().flatten().collect(),
            h,
        })
    }

    /// Unweighted `H`-colorings: `J = 0` on compatible pairs, forbidden
    /// otherwise, `h = 0`. Its Gibbs measure is uniform on the colorings.
    pub fn from_constraint_graph(h: &ConstraintGraph) -> Self {
        Self::with_constant_coupling(h, T::zero())
    }

    /// `J = value` on every compatible pair, forbidden otherwise, `h = 0`.
    pub fn with_constant_coupling(h: &ConstraintGraph, value: T) -> Self {
        let q = h.q();
        let j = (0..q)
            .flat_map(|a| (0..q).map(move |b| (a, b)))
            .map(|(a, b)| {
                if h.compatible(a, b) {
                    Potential::Finite(value.clone())
                } else {
                    Potential::Forbidden
                }
            })
            .collect();
        Self {
            q,
            j,
            h: vec![T::zero(); q],
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn coupling(&self, a: Color, b: Color) -> &Potential<T> {
        &self.j[a * self.q + b]
    }

    pub fn field(&self, a: Color) -> &T {
        &self.h[a]
    }

    pub fn fields(&self) -> &[T] {
        &self.h
    }

    pub fn with_fields(mut self, h: Vec<T>) -> Result<Self> {
        if h.len() != self.q {
            return Err(Error::LengthMismatch {
                expected: self.q,
                got: h.len(),
            });
        }
        self.h = h;
        Ok(self)
    }

    /// The induced constraint graph `H^J`: `{a, b}` is an edge iff `J(a, b)`
    /// is finite.
    pub fn constraint_graph(&self) -> ConstraintGraph {
        ConstraintGraph::new(
            self.q,
            (0..self.q)
                .flat_map(|a| (a..self.q).map(move |b| (a, b)))
                .filter(|&(a, b)| !self.coupling(a, b).is_forbidden()),
        )
        .expect("q already validated")
    }

    pub fn has_hard_constraint(&self) -> bool {
        self.j.iter().any(Potential::is_forbidden)
    }

    /// Largest `|J(a, b)|` over finite entries.
    pub fn max_abs_coupling(&self) -> Option<T> {
        self.j
            .iter()
            .filter_map(Potential::finite)
            .map(|x| x.abs())
            .reduce(T::max_of)
    }

    pub fn max_abs_field(&self) -> T {
        self.h
            .iter()
            .map(|x| x.abs())
            .reduce(T::max_of)
            .unwrap_or_else(T::zero)
    }
}

impl<T: Scalar + num_traits::Float> SpinSystem<T> {
    /// Hard-core model with fugacity `lambda`: color 1 is "occupied", two
    /// occupied neighbors are forbidden, `h = (0, ln lambda)`.
    pub fn hard_core(lambda: T) -> Self {
        let z = T::zero();
        Self {
            q: 2,
            j: vec![
                Potential::Finite(z),
                Potential::Finite(z),
                Potential::Finite(z),
                Potential::Forbidden,
            ],
            h: vec![z, lambda.ln()],
        }
    }
}

/// A target graph carrying real edge and vertex weights `θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph<T> {
    base: TargetGraph,
    edge_weights: BTreeMap<(usize, usize), T>,
    vertex_weights: Vec<T>,
}

impl<T: Scalar> WeightedGraph<T> {
    pub fn new(
        base: TargetGraph,
        edge_weights: BTreeMap<(usize, usize), T>,
        vertex_weights: Vec<T>,
    ) -> Result<Self> {
        if vertex_weights.len() != base.n() {
            return Err(Error::LengthMismatch {
                expected: base.n(),
                got: vertex_weights.len(),
            });
        }
        let normalized: BTreeMap<_, _> = edge_weights
            .into_iter()
            .map(|((u, v), w)| (norm(u, v), w))
            .collect();
        if normalized.len() != base.num_edges()
            || !normalized.keys().all(|&(u, v)| base.has_edge(u, v))
        {
            return Err(Error::InvalidParameter(
                "every edge needs exactly one weight".into(),
            ));
        }
        Ok(Self {
            base,
            edge_weights: normalized,
            vertex_weights,
        })
    }

    /// `θ ≡ 1` on edges and vertices.
    pub fn unit(base: TargetGraph) -> Self {
        let edge_weights = base.edges().map(|e| (e, T::one())).collect();
        let vertex_weights = vec![T::one(); base.n()];
        Self {
            base,
            edge_weights,
            vertex_weights,
        }
    }

    pub fn graph(&self) -> &TargetGraph {
        &self.base
    }

    pub fn edge_weight(&self, u: usize, v: usize) -> Option<&T> {
        self.edge_weights.get(&norm(u, v))
    }

    pub fn vertex_weight(&self, v: usize) -> &T {
        &self.vertex_weights[v]
    }

    pub fn edge_weights(&self) -> &BTreeMap<(usize, usize), T> {
        &self.edge_weights
    }

    pub fn vertex_weights(&self) -> &[T] {
        &self.vertex_weights
    }

    /// `β = max |θ(u,v)|` over edges (zero for an edgeless graph).
    pub fn max_abs_edge_weight(&self) -> T {
        self.edge_weights
            .values()
            .map(|w| w.abs())
            .reduce(T::max_of)
            .unwrap_or_else(T::zero)
    }

    /// `γ = max |θ(v)|`.
    pub fn max_abs_vertex_weight(&self) -> T {
        self.vertex_weights
            .iter()
            .map(|w| w.abs())
            .reduce(T::max_of)
            .unwrap_or_else(T::zero)
    }

    /// Membership in the weighted bounded-degree family: degree at most `d`,
    /// `alpha <= |θ(u,v)| <= beta` on edges and `|θ(v)| <= gamma`.
    pub fn in_family(&self, d: usize, alpha: &T, beta: &T, gamma: &T) -> bool {
        self.base.in_family(d)
            && self.edge_weights.values().all(|w| {
                let a = w.abs();
                &a >= alpha && &a <= beta
            })
            && self.vertex_weights.iter().all(|w| &w.abs() <= gamma)
    }
}

/// Role of a vertex in a duplicated-color supergraph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VertexTag {
    Original(Color),
    /// `i′`
    CopyI,
    /// `j′`
    CopyJ,
    /// `i″`
    CopyI2,
    /// `j″`
    CopyJ2,
}

/// `G_ij` or `G²_ij` together with the role of each vertex. Colors keep their
/// index; `i′ = q`, `j′ = q + 1`, and for the doubled variant `i″ = q + 2`,
/// `j″ = q + 3`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSupergraph {
    pub graph: TargetGraph,
    pub labels: Vec<VertexTag>,
    pub i: Color,
    pub j: Color,
}

impl LabeledSupergraph {
    pub fn vertex_of(&self, tag: VertexTag) -> Option<usize> {
        self.labels.iter().position(|&t| t == tag)
    }

    /// Index of `i′`.
    pub fn i_prime(&self) -> usize {
        self.vertex_of(VertexTag::CopyI).expect("i′ always present")
    }

    /// Index of `j′`.
    pub fn j_prime(&self) -> usize {
        self.vertex_of(VertexTag::CopyJ).expect("j′ always present")
    }

    pub fn i_double_prime(&self) -> Option<usize> {
        self.vertex_of(VertexTag::CopyI2)
    }

    pub fn j_double_prime(&self) -> Option<usize> {
        self.vertex_of(VertexTag::CopyJ2)
    }

    /// Maps every vertex back to the color it duplicates.
    pub fn contraction(&self) -> Vec<Color> {
        self.labels
            .iter()
            .map(|t| match *t {
                VertexTag::Original(k) => k,
                VertexTag::CopyI | VertexTag::CopyI2 => self.i,
                VertexTag::CopyJ | VertexTag::CopyJ2 => self.j,
            })
            .collect()
    }
}

fn check_duplication_input(h: &ConstraintGraph, i: Color, j: Color) -> Result<()> {
    if !h.is_compatible(i, j)? {
        return Err(Error::NotAnEdge(i, j));
    }
    if h.has_self_loop() {
        return Err(Error::ConstraintHasSelfLoops);
    }
    Ok(())
}

fn duplicate_colors(h: &ConstraintGraph, i: Color, j: Color, copies: usize) -> LabeledSupergraph {
    let q = h.q();
    let mut labels: Vec<VertexTag> = (0..q).map(VertexTag::Original).collect();
    let tags_i = [VertexTag::CopyI, VertexTag::CopyI2];
    let tags_j = [VertexTag::CopyJ, VertexTag::CopyJ2];
    let mut edges: Vec<(usize, usize)> = h.edges().collect();
    let mut next = q;
    let mut copy_i = Vec::new();
    let mut copy_j = Vec::new();
    for c in 0..copies {
        copy_i.push((next, tags_i[c]));
        copy_j.push((next + 1, tags_j[c]));
        next += 2;
    }
    // Indices i′, j′, i″, j″ in that order.
    for c in 0..copies {
        labels.push(copy_i[c].1);
        labels.push(copy_j[c].1);
    }
    for k in 0..q {
        if h.compatible(i, k) {
            edges.extend(copy_i.iter().map(|&(v, _)| (v, k)));
        }
        if h.compatible(j, k) {
            edges.extend(copy_j.iter().map(|&(v, _)| (v, k)));
        }
    }
    let graph = TargetGraph::new(q + 2 * copies, edges).expect("construction is well formed");
    LabeledSupergraph {
        graph,
        labels,
        i,
        j,
    }
}

/// `G_ij`: `H` plus copies `i′`, `j′` of `i` and `j` with the same neighbors
/// among the original colors and no edge `{i′, j′}`.
pub fn build_gij(h: &ConstraintGraph, i: Color, j: Color) -> Result<LabeledSupergraph> {
    check_duplication_input(h, i, j)?;
    Ok(duplicate_colors(h, i, j, 1))
}

/// `G²_ij`: two copies of each of `i` and `j`, no edges among the copies.
pub fn build_gij2(h: &ConstraintGraph, i: Color, j: Color) -> Result<LabeledSupergraph> {
    check_duplication_input(h, i, j)?;
    Ok(duplicate_colors(h, i, j, 2))
}
