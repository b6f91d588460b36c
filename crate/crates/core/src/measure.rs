//! Probability measures over colorings as products of local factors.
//!
//! [`Uniform`] is the uniform measure on `H`-colorings; with an exact scalar
//! type every probability it produces is an exact rational. [`Gibbs`] is the
//! weighted spin-system measure and needs a floating-point scalar.

use crate::csp::Csp;
use crate::error::{Error, Result};
use crate::model::{
    Color, Coloring, ConstraintGraph, Potential, SpinSystem, TargetGraph, WeightedGraph,
};
use crate::scalar::Scalar;

/// Unnormalized measure `w(σ) = Π_edges f(σ_u, σ_v) · Π_vertices g(σ_v)`,
/// with `None` edge factors marking hard constraints.
pub trait Measure<T: Scalar>: Sync {
    fn q(&self) -> usize;
    fn graph(&self) -> &TargetGraph;
    fn edge_factor(&self, u: usize, v: usize, a: Color, b: Color) -> Option<T>;
    fn vertex_factor(&self, v: usize, a: Color) -> T;
    /// Compatibility pattern of the edge factors.
    fn support(&self) -> ConstraintGraph;

    /// Unnormalized weight, zero when some edge is forbidden.
    fn weight(&self, sigma: &[Color]) -> T {
        let g = self.graph();
        let mut w = T::one();
        for (u, v) in g.edges() {
            match self.edge_factor(u, v, sigma[u], sigma[v]) {
                Some(f) => w = w * f,
                None => return T::zero(),
            }
        }
        for (v, &a) in sigma.iter().enumerate() {
            w = w * self.vertex_factor(v, a);
        }
        w
    }
}

/// Uniform measure on the `H`-colorings of `G`.
#[derive(Clone, Copy, Debug)]
pub struct Uniform<'a> {
    pub h: &'a ConstraintGraph,
    pub g: &'a TargetGraph,
}

impl<'a> Uniform<'a> {
    pub fn new(h: &'a ConstraintGraph, g: &'a TargetGraph) -> Self {
        Self { h, g }
    }
}

impl<T: Scalar> Measure<T> for Uniform<'_> {
    fn q(&self) -> usize {
        self.h.q()
    }

    fn graph(&self) -> &TargetGraph {
        self.g
    }

    fn edge_factor(&self, _u: usize, _v: usize, a: Color, b: Color) -> Option<T> {
        self.h.compatible(a, b).then(T::one)
    }

    fn vertex_factor(&self, _v: usize, _a: Color) -> T {
        T::one()
    }

    fn support(&self) -> ConstraintGraph {
        self.h.clone()
    }
}

/// Gibbs measure `exp(Σ θ(u,v) J(σ_u,σ_v) + Σ θ(v) h(σ_v))`.
#[derive(Clone, Copy, Debug)]
pub struct Gibbs<'a, F> {
    pub system: &'a SpinSystem<F>,
    pub graph: &'a WeightedGraph<F>,
}

impl<'a, F: Scalar> Gibbs<'a, F> {
    pub fn new(system: &'a SpinSystem<F>, graph: &'a WeightedGraph<F>) -> Self {
        Self { system, graph }
    }
}

impl<F: Scalar + num_traits::Float> Measure<F> for Gibbs<'_, F> {
    fn q(&self) -> usize {
        self.system.q()
    }

    fn graph(&self) -> &TargetGraph {
        self.graph.graph()
    }

    fn edge_factor(&self, u: usize, v: usize, a: Color, b: Color) -> Option<F> {
        match self.system.coupling(a, b) {
            Potential::Finite(j) => {
                let theta = *self.graph.edge_weight(u, v).expect("edge has a weight");
                Some((theta * *j).exp())
            }
            Potential::Forbidden => None,
        }
    }

    fn vertex_factor(&self, v: usize, a: Color) -> F {
        (*self.graph.vertex_weight(v) * *self.system.field(a)).exp()
    }

    fn support(&self) -> ConstraintGraph {
        self.system.constraint_graph()
    }
}

/// Every configuration of positive weight with its normalized probability,
/// in lexicographic order.
pub fn distribution<T: Scalar, M: Measure<T>>(m: &M) -> Result<Vec<(Coloring, T)>> {
    let csp = Csp::colorings(&m.support(), m.graph());
    let mut out: Vec<(Coloring, T)> = Vec::new();
    let mut z = T::zero();
    for s in csp.into_lex() {
        let w = m.weight(&s);
        z = z + w.clone();
        out.push((Coloring(s), w));
    }
    if out.is_empty() || z.is_zero() {
        return Err(Error::Unsatisfiable);
    }
    for (_, w) in &mut out {
        *w = w.clone() / z.clone();
    }
    Ok(out)
}

/// Joint marginals `Pr[X_u = a, X_v = b]` for every ordered vertex pair,
/// computed by full enumeration.
#[derive(Clone, Debug)]
pub struct PairMarginals<T> {
    n: usize,
    q: usize,
    table: Vec<T>,
}

impl<T: Scalar> PairMarginals<T> {
    pub fn compute<M: Measure<T>>(m: &M) -> Result<Self> {
        let n = m.graph().n();
        let q = m.q();
        let mut table = vec![T::zero(); n * n * q * q];
        for (sigma, p) in distribution(m)? {
            let s = sigma.as_slice();
            for u in 0..n {
                for v in 0..n {
                    let k = ((u * n + v) * q + s[u]) * q + s[v];
                    table[k] = table[k].clone() + p.clone();
                }
            }
        }
        Ok(Self { n, q, table })
    }

    pub fn joint(&self, u: usize, v: usize, a: Color, b: Color) -> &T {
        &self.table[((u * self.n + v) * self.q + a) * self.q + b]
    }

    pub fn single(&self, u: usize, a: Color) -> &T {
        self.joint(u, u, a, a)
    }

    /// `Pr[X_u = X_v]`.
    pub fn same_color(&self, u: usize, v: usize) -> T {
        (0..self.q).fold(T::zero(), |acc, c| acc + self.joint(u, v, c, c).clone())
    }

    /// `Pr[{X_u, X_v} ∉ E(H)]`.
    pub fn incompatible(&self, h: &ConstraintGraph, u: usize, v: usize) -> T {
        let mut acc = T::zero();
        for a in 0..self.q {
            for b in 0..self.q {
                if !h.compatible(a, b) {
                    acc = acc + self.joint(u, v, a, b).clone();
                }
            }
        }
        acc
    }
}

/// Conditional law of the block `region` given the colors `outside` assigns
/// to every other vertex (entries for `region` are ignored). Returns each
/// valid block configuration with its probability, or `None` when no block
/// configuration is valid.
pub fn block_conditional<T: Scalar, M: Measure<T>>(
    m: &M,
    region: &[usize],
    outside: &[Color],
) -> Option<Vec<(Vec<Color>, T)>> {
    let g = m.graph();
    let q = m.q();
    let mut inside = vec![usize::MAX; g.n()];
    for (k, &v) in region.iter().enumerate() {
        inside[v] = k;
    }
    let mut out = Vec::new();
    let mut z = T::zero();
    let mut block = vec![0usize; region.len()];
    let total = q
        .checked_pow(region.len() as u32)
        .expect("region small enough");
    for code in 0..total {
        let mut c = code;
        for slot in block.iter_mut().rev() {
            *slot = c % q;
            c /= q;
        }
        let color = |x: usize| {
            if inside[x] != usize::MAX {
                block[inside[x]]
            } else {
                outside[x]
            }
        };
        let mut w = T::one();
        let mut valid = true;
        for &v in region {
            for &x in g.neighbors(v) {
                // Count edges inside the block once.
                if inside[x] != usize::MAX && x < v {
                    continue;
                }
                match m.edge_factor(v, x, color(v), color(x)) {
                    Some(f) => w = w * f,
                    None => {
                        valid = false;
                        break;
                    }
                }
            }
            if !valid {
                break;
            }
            w = w * m.vertex_factor(v, color(v));
        }
        if valid {
            z = z + w.clone();
            out.push((block.clone(), w));
        }
    }
    if out.is_empty() {
        return None;
    }
    for (_, w) in &mut out {
        *w = w.clone() / z.clone();
    }
    Some(out)
}
