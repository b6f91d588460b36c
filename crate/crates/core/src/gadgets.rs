//! Deterministic generators for the constraint graphs and target graphs used
//! in the identifiability and lower-bound constructions.
//!
//! Each target-graph generator has a layout type that maps named vertices to
//! indices, so fixtures can refer to vertices by role.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConstraintGraph, TargetGraph};

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn clique(vs: &[usize], edges: &mut Vec<(usize, usize)>) {
    for (k, &a) in vs.iter().enumerate() {
        for &b in &vs[k + 1..] {
            edges.push((a, b));
        }
    }
}

fn biclique(xs: &[usize], ys: &[usize], edges: &mut Vec<(usize, usize)>) {
    for &x in xs {
        for &y in ys {
            edges.push((x, y));
        }
    }
}

fn path(vs: &[usize], edges: &mut Vec<(usize, usize)>) {
    for w in vs.windows(2) {
        edges.push((w[0], w[1]));
    }
}

/// Proper `q`-colorings.
pub fn gen_kq(q: usize) -> Result<ConstraintGraph> {
    if q < 2 {
        return Err(invalid(format!("need q >= 2, got {q}")));
    }
    ConstraintGraph::complete(q)
}

/// Independent sets: color 1 is occupied, `{1,1}` is the only hard pair.
pub fn gen_hardcore() -> ConstraintGraph {
    ConstraintGraph::new(2, [(0, 0), (0, 1)]).expect("fixed graph")
}

/// Path `0-1-2-3` plus an independent set `4..s+4` joined to every path color.
pub fn gen_f(s: usize) -> Result<ConstraintGraph> {
    if s == 0 {
        return Err(invalid("need s >= 1"));
    }
    let mut edges = vec![(0, 1), (1, 2), (2, 3)];
    for x in 4..s + 4 {
        edges.extend((0..4).map(|p| (p, x)));
    }
    ConstraintGraph::new(s + 4, edges)
}

/// Vertex indices of `G_m`: block `i` (0-based) holds `a_i, a′_i, b_i, c_i` at
/// `4i..4i+4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GmLayout {
    pub blocks: usize,
}

impl GmLayout {
    pub fn a(&self, i: usize) -> usize {
        4 * i
    }
    pub fn a_prime(&self, i: usize) -> usize {
        4 * i + 1
    }
    pub fn b(&self, i: usize) -> usize {
        4 * i + 2
    }
    pub fn c(&self, i: usize) -> usize {
        4 * i + 3
    }
}

fn gm_edges(l: GmLayout, mask: &[bool]) -> Vec<(usize, usize)> {
    let mut e = vec![
        (l.a(0), l.b(0)),
        (l.a(0), l.c(0)),
        (l.a_prime(0), l.b(0)),
        (l.a_prime(0), l.c(0)),
        (l.b(0), l.c(0)),
    ];
    for i in 0..l.blocks - 1 {
        let j = i + 1;
        e.extend([
            (l.a(i), l.b(j)),
            (l.a(i), l.c(j)),
            (l.a_prime(i), l.b(j)),
            (l.a_prime(i), l.c(j)),
            (l.b(i), l.a(j)),
            (l.b(i), l.a_prime(j)),
            (l.b(i), l.c(j)),
            (l.c(i), l.a(j)),
            (l.c(i), l.a_prime(j)),
            (l.c(i), l.b(j)),
        ]);
    }
    for (i, &bit) in mask.iter().enumerate() {
        if bit {
            e.push((l.a(i), l.b(i + 2)));
        }
    }
    e
}

/// The `4m`-vertex graph `G_m` plus `{a_i, b_{i+2}}` for each set bit of the
/// length-`(m−2)` mask.
pub fn gen_gm_family(m: usize, mask: &[bool]) -> Result<TargetGraph> {
    if m < 2 {
        return Err(invalid(format!("need m >= 2, got {m}")));
    }
    if mask.len() != m - 2 {
        return Err(Error::LengthMismatch {
            expected: m - 2,
            got: mask.len(),
        });
    }
    TargetGraph::new(4 * m, gm_edges(GmLayout { blocks: m }, mask))
}

/// `n`-vertex member of the family for any `n ≥ 8`: with `n = 4m + r`, `r > 0`,
/// builds `m + 1` blocks and keeps `a_{m+1}` (r = 1), `a_{m+1}, a′_{m+1}`
/// (r = 2) or all but `c_{m+1}` (r = 3). The mask has length
/// `⌈n/4⌉ − 2`; bits whose edge touches a removed vertex have no effect.
pub fn gen_gm_family_n(n: usize, mask: &[bool]) -> Result<TargetGraph> {
    if n < 8 {
        return Err(invalid(format!("need n >= 8, got {n}")));
    }
    let blocks = n.div_ceil(4);
    let full = gen_gm_family(blocks, mask)?;
    if n.is_multiple_of(4) {
        return Ok(full);
    }
    let keep: Vec<usize> = (0..n).collect();
    full.induced(&keep)
}

/// Vertex indices of `G_{m,t}`. Block `i` (0-based) occupies
/// `[i·k, (i+1)·k)` with `k = 2q + 2t − 1`, laid out as `C_i` (q−1), `I_i`
/// (t), `C′_i` (q−1), `I′_i` (t), `s_i`. A trailing path `W` follows the
/// blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GmtLayout {
    pub q: usize,
    pub t: usize,
    pub m: usize,
}

impl GmtLayout {
    pub fn block(&self) -> usize {
        2 * self.q + 2 * self.t - 1
    }
    pub fn c(&self, i: usize, k: usize) -> usize {
        i * self.block() + k
    }
    pub fn i_set(&self, i: usize, k: usize) -> usize {
        i * self.block() + self.q - 1 + k
    }
    pub fn c_prime(&self, i: usize, k: usize) -> usize {
        i * self.block() + self.q - 1 + self.t + k
    }
    pub fn i_prime(&self, i: usize, k: usize) -> usize {
        i * self.block() + 2 * (self.q - 1) + self.t + k
    }
    pub fn s(&self, i: usize) -> usize {
        (i + 1) * self.block() - 1
    }
    /// `x_i`: first vertex of `C_i`.
    pub fn x(&self, i: usize) -> usize {
        self.c(i, 0)
    }
    /// `y_i`: second vertex of `I′_i` (the first is adjacent to `s_i`).
    pub fn y(&self, i: usize) -> usize {
        self.i_prime(i, 1)
    }
    pub fn w(&self, k: usize) -> usize {
        self.m * self.block() + k
    }
    /// `C_i` vertices wired to the `j`-th vertex of `I_{i−1}`: consecutive
    /// parts of size `⌈(q−1)/t⌉` first, then `⌊(q−1)/t⌋`.
    pub fn part(&self, j: usize) -> std::ops::Range<usize> {
        let size = self.q - 1;
        let (base, extra) = (size / self.t, size % self.t);
        let start = j * base + j.min(extra);
        let len = base + usize::from(j < extra);
        start..start + len
    }
}

fn gmt_edges(l: GmtLayout, mask: &[bool]) -> Vec<(usize, usize)> {
    let (q, t) = (l.q, l.t);
    let mut e = Vec::new();
    for i in 0..l.m {
        let c: Vec<usize> = (0..q - 1).map(|k| l.c(i, k)).collect();
        let ci: Vec<usize> = (0..t).map(|k| l.i_set(i, k)).collect();
        let cp: Vec<usize> = (0..q - 1).map(|k| l.c_prime(i, k)).collect();
        let ip: Vec<usize> = (0..t).map(|k| l.i_prime(i, k)).collect();
        clique(&c, &mut e);
        clique(&cp, &mut e);
        biclique(&c, &ci, &mut e);
        biclique(&cp, &ip, &mut e);
        if i > 0 {
            for j in 0..t {
                for k in l.part(j) {
                    e.push((l.i_set(i - 1, j), l.c(i, k)));
                    e.push((l.i_prime(i - 1, j), l.c_prime(i, k)));
                }
            }
        }
        e.push((l.s(i), l.i_set(i, 0)));
        e.push((l.s(i), l.i_prime(i, 0)));
        if mask[i] {
            e.push((l.x(i), l.y(i)));
        }
    }
    e
}

fn check_gmt(q: usize, t: usize, m: usize, mask: &[bool]) -> Result<()> {
    if q < 3 || t == 0 || t >= q || m == 0 {
        return Err(invalid(format!(
            "need q >= 3, 1 <= t < q, m >= 1; got q = {q}, t = {t}, m = {m}"
        )));
    }
    if mask.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: mask.len(),
        });
    }
    if t < 2 && mask.iter().any(|&b| b) {
        return Err(invalid("mask edges need t >= 2"));
    }
    Ok(())
}

/// `G_{m,t}` plus `{x_i, y_i}` for each set bit of the length-`m` mask.
pub fn gen_gmt(q: usize, t: usize, m: usize, mask: &[bool]) -> Result<TargetGraph> {
    check_gmt(q, t, m, mask)?;
    let l = GmtLayout { q, t, m };
    TargetGraph::new(m * l.block(), gmt_edges(l, mask))
}

/// `n`-vertex variant: `m = ⌊n / k⌋` blocks plus a path `W` on the remaining
/// vertices attached by the edge `{s_m, w_0}`.
pub fn gen_gmt_n(q: usize, t: usize, n: usize, mask: &[bool]) -> Result<TargetGraph> {
    let block = 2 * q + 2 * t - 1;
    let m = n / block;
    check_gmt(q, t, m, mask)?;
    let l = GmtLayout { q, t, m };
    let mut e = gmt_edges(l, mask);
    let w: Vec<usize> = (0..n - m * block).map(|k| l.w(k)).collect();
    if let Some(&w0) = w.first() {
        e.push((l.s(m - 1), w0));
        path(&w, &mut e);
    }
    TargetGraph::new(n, e)
}

/// Vertex indices of the non-identifiable pair: `c_k = k` for `k < q−1`,
/// `u = q−1`, `v = q`, `w_k = q+1+k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NonIdLayout {
    pub q: usize,
    pub n: usize,
}

impl NonIdLayout {
    pub fn c(&self, k: usize) -> usize {
        k
    }
    pub fn u(&self) -> usize {
        self.q - 1
    }
    pub fn v(&self) -> usize {
        self.q
    }
    pub fn w(&self, k: usize) -> usize {
        self.q + 1 + k
    }
    pub fn path_len(&self) -> usize {
        self.n - self.q - 1
    }
}

/// `G` = `(q+1)`-clique on `c_1..c_{q−1}, u, v` minus `{u,v}`, a path
/// `w_0..w_{n−q−2}` and the edge `{v, w_0}`; `G′ = G + {u, w_0}`.
pub fn gen_nonid_pair(q: usize, n: usize) -> Result<(TargetGraph, TargetGraph)> {
    if q < 2 || n < q + 2 {
        return Err(invalid(format!(
            "need q >= 2 and n >= q + 2, got q = {q}, n = {n}"
        )));
    }
    let l = NonIdLayout { q, n };
    let mut core: Vec<usize> = (0..q - 1).map(|k| l.c(k)).collect();
    core.push(l.u());
    core.push(l.v());
    let mut e = Vec::new();
    clique(&core, &mut e);
    e.retain(|&p| p != (l.u(), l.v()));
    let w: Vec<usize> = (0..l.path_len()).map(|k| l.w(k)).collect();
    path(&w, &mut e);
    e.push((l.v(), l.w(0)));
    let g = TargetGraph::new(n, e)?;
    let g2 = g.with_edges([(l.u(), l.w(0))])?;
    Ok((g, g2))
}

/// Vertex indices of the weak-bound graph: `C` (q−3), `I` (d−q+1), the path
/// `W = w_1..w_{n−d−1}`, then `u`, `v`, `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeakBoundLayout {
    pub q: usize,
    pub d: usize,
    pub n: usize,
}

impl WeakBoundLayout {
    pub fn c(&self, k: usize) -> usize {
        k
    }
    pub fn i_set(&self, k: usize) -> usize {
        self.q - 3 + k
    }
    pub fn i_size(&self) -> usize {
        self.d - self.q + 1
    }
    /// `w_{k+1}` of the path.
    pub fn path(&self, k: usize) -> usize {
        self.d - 2 + k
    }
    pub fn path_len(&self) -> usize {
        self.n - self.d - 1
    }
    pub fn u(&self) -> usize {
        self.n - 3
    }
    pub fn v(&self) -> usize {
        self.n - 2
    }
    pub fn w(&self) -> usize {
        self.n - 1
    }
}

/// Variant 1 is the base graph; 2 adds `{u, w}`, 3 adds `{u, w_1}`, 4 adds
/// both.
pub fn gen_weakbound(q: usize, d: usize, n: usize, variant: u8) -> Result<TargetGraph> {
    if q < 3 || q >= d || n < d + 2 {
        return Err(invalid(format!(
            "need 3 <= q < d and n >= d + 2; got q = {q}, d = {d}, n = {n}"
        )));
    }
    if !(1..=4).contains(&variant) {
        return Err(invalid(format!("variant must be 1..=4, got {variant}")));
    }
    let l = WeakBoundLayout { q, d, n };
    let c: Vec<usize> = (0..q - 3).map(|k| l.c(k)).collect();
    let i: Vec<usize> = (0..l.i_size()).map(|k| l.i_set(k)).collect();
    let w: Vec<usize> = (0..l.path_len()).map(|k| l.path(k)).collect();
    let mut e = Vec::new();
    clique(&c, &mut e);
    path(&w, &mut e);
    biclique(&c, &i, &mut e);
    let ci: Vec<usize> = c.iter().chain(&i).copied().collect();
    biclique(&[l.u(), l.v()], &ci, &mut e);
    e.push((l.v(), l.w()));
    e.push((l.v(), w[0]));
    if variant == 2 || variant == 4 {
        e.push((l.u(), l.w()));
    }
    if variant == 3 || variant == 4 {
        e.push((l.u(), w[0]));
    }
    TargetGraph::new(n, e)
}

/// A generated gadget.
#[derive(Clone, Debug, PartialEq)]
pub enum Gadget {
    Constraint(ConstraintGraph),
    Target(TargetGraph),
    Pair(TargetGraph, TargetGraph),
}

/// Catalog key for a gadget; generation is a pure function of it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum GadgetDescriptor {
    Kq {
        q: usize,
    },
    Hardcore,
    F {
        s: usize,
    },
    GmFamily {
        n: usize,
        mask: Vec<bool>,
    },
    Gmt {
        q: usize,
        t: usize,
        m: usize,
        mask: Vec<bool>,
    },
    NonidPair {
        q: usize,
        n: usize,
    },
    Weakbound {
        q: usize,
        d: usize,
        n: usize,
        variant: u8,
    },
}

impl GadgetDescriptor {
    pub fn generate(&self) -> Result<Gadget> {
        Ok(match self {
            Self::Kq { q } => Gadget::Constraint(gen_kq(*q)?),
            Self::Hardcore => Gadget::Constraint(gen_hardcore()),
            Self::F { s } => Gadget::Constraint(gen_f(*s)?),
            Self::GmFamily { n, mask } => Gadget::Target(gen_gm_family_n(*n, mask)?),
            Self::Gmt { q, t, m, mask } => Gadget::Target(gen_gmt(*q, *t, *m, mask)?),
            Self::NonidPair { q, n } => {
                let (g, g2) = gen_nonid_pair(*q, *n)?;
                Gadget::Pair(g, g2)
            }
            Self::Weakbound { q, d, n, variant } => {
                Gadget::Target(gen_weakbound(*q, *d, *n, *variant)?)
            }
        })
    }

    /// How vertices (or colors) are numbered.
    pub fn labeling(&self) -> &'static str {
        match self {
            Self::Kq { .. } => "colors 0..q",
            Self::Hardcore => "color 0 unoccupied, color 1 occupied",
            Self::F { .. } => "path colors 0-1-2-3; independent set 4..s+4",
            Self::GmFamily { .. } => "block i: a_i=4i, a'_i=4i+1, b_i=4i+2, c_i=4i+3",
            Self::Gmt { .. } => {
                "block i of size 2q+2t-1: C_i, I_i, C'_i, I'_i, s_i; x_i=C_i[0], y_i=I'_i[1]"
            }
            Self::NonidPair { .. } => "c_k=k, u=q-1, v=q, w_k=q+1+k",
            Self::Weakbound { .. } => "C, I, w_1.., then u=n-3, v=n-2, w=n-1",
        }
    }
}

/// Uniform random graph on `n` labelled vertices with maximum degree at most
/// `d`, by rejection from `G(n, 1/2)`.
pub fn random_bounded_degree<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
) -> Result<TargetGraph> {
    random_bounded_degree_p(n, d, 0.5, rng, 1_000_000)
}

/// Rejection sampler from `G(n, p)` conditioned on maximum degree `<= d`.
pub fn random_bounded_degree_p<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    p: f64,
    rng: &mut R,
    max_attempts: u64,
) -> Result<TargetGraph> {
    for _ in 0..max_attempts {
        let mut deg = vec![0usize; n];
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    deg[u] += 1;
                    deg[v] += 1;
                    edges.push((u, v));
                }
            }
        }
        if deg.iter().all(|&k| k <= d) {
            return TargetGraph::new(n, edges);
        }
    }
    Err(Error::CapExceeded(format!(
        "no graph with max degree {d} after {max_attempts} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constraint_gadgets() {
        assert_eq!(gen_kq(3).unwrap().num_edges(), 3);
        assert_eq!(gen_kq(2).unwrap().edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(
            gen_hardcore().edges().collect::<Vec<_>>(),
            vec![(0, 0), (0, 1)]
        );
        let f = gen_f(32).unwrap();
        assert_eq!((f.q(), f.num_edges()), (36, 131));
        assert_eq!(gen_f(1).unwrap().num_edges(), 7);
        assert_eq!(gen_f(2).unwrap().num_edges(), 11);
    }

    #[test]
    fn gm_family_shapes() {
        let g = gen_gm_family(2, &[]).unwrap();
        assert_eq!((g.n(), g.num_edges()), (8, 15));
        for m in 3..7 {
            let empty = gen_gm_family(m, &vec![false; m - 2]).unwrap();
            let full = gen_gm_family(m, &vec![true; m - 2]).unwrap();
            assert_eq!(full.num_edges() - empty.num_edges(), m - 2);
            assert!(full.max_degree() <= 7);
            assert!(empty.max_degree() <= 6);
        }
        assert!(gen_gm_family(3, &[]).is_err());
        for n in 9..12 {
            assert_eq!(gen_gm_family_n(n, &[true]).unwrap().n(), n);
        }
    }

    #[test]
    fn gmt_shapes() {
        let g = gen_gmt(3, 2, 2, &[false, false]).unwrap();
        assert_eq!(g.n(), 18);
        for (q, t, m) in [(3, 2, 3), (4, 2, 2), (5, 2, 2), (5, 3, 2), (6, 4, 2)] {
            let g = gen_gmt(q, t, m, &vec![true; m]).unwrap();
            assert_eq!(g.n(), (2 * q + 2 * t - 1) * m);
            let bound = (q + t).max(q + (q - 1).div_ceil(t) + 1);
            assert!(g.max_degree() <= bound, "q={q} t={t}");
        }
        let l = GmtLayout { q: 6, t: 2, m: 1 };
        assert_eq!((l.part(0), l.part(1)), (0..3, 3..5));
        let g = gen_gmt_n(3, 2, 20, &[false, true]).unwrap();
        assert_eq!(g.n(), 20);
        assert!(g.has_edge(GmtLayout { q: 3, t: 2, m: 2 }.s(1), 18));
    }

    #[test]
    fn nonid_and_weakbound_shapes() {
        let (g, g2) = gen_nonid_pair(3, 5).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g2.num_edges(), g.num_edges() + 1);
        assert!(g2.max_degree() <= 3);
        for variant in 1..=4 {
            let g = gen_weakbound(3, 5, 7, variant).unwrap();
            assert_eq!(g.n(), 7);
            assert!(g.max_degree() <= 5);
        }
        let g = gen_weakbound(4, 7, 12, 4).unwrap();
        assert!(g.max_degree() <= 7);
    }

    #[test]
    fn descriptors_are_deterministic() {
        let d = GadgetDescriptor::Gmt {
            q: 3,
            t: 2,
            m: 2,
            mask: vec![true, false],
        };
        assert_eq!(d.generate().unwrap(), d.generate().unwrap());
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<GadgetDescriptor>(&json).unwrap(), d);
    }
}
