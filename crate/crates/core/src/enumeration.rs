//! Exact enumeration and counting of `H`-colorings, Gibbs weights, partition
//! functions, support equality and total-variation distance.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Float, One, Zero};
use serde::{Deserialize, Serialize};

use crate::csp::{Csp, LexIter};
use crate::error::{Error, Result};
use crate::measure::Gibbs;
use crate::model::{Color, Coloring, ConstraintGraph, SpinSystem, TargetGraph, WeightedGraph};
use crate::scalar::Scalar;

/// Default bound on the candidate space `q^n` accepted by enumeration.
pub const DEFAULT_CANDIDATE_CAP: f64 = 1e12;

/// Safety limits for operations that enumerate a coloring set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Limits {
    /// Refuse instances with `q^n` above this unless `force` is set.
    pub max_candidates: f64,
    /// Stop with an error once more colorings than this have been produced.
    pub max_emitted: Option<u64>,
    pub force: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_candidates: DEFAULT_CANDIDATE_CAP,
            max_emitted: None,
            force: false,
        }
    }
}

impl Limits {
    pub fn forced() -> Self {
        Self {
            force: true,
            ..Self::default()
        }
    }

    pub(crate) fn check_space(&self, q: usize, n: usize) -> Result<()> {
        let space = (q as f64).powf(n as f64);
        if !self.force && space > self.max_candidates {
            return Err(Error::CapExceeded(format!(
                "candidate space {q}^{n} exceeds {:e}; use force to override",
                self.max_candidates
            )));
        }
        Ok(())
    }
}

/// Exact size of a coloring set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountResult {
    pub count: BigUint,
}

/// Lexicographic stream of colorings.
pub struct Colorings {
    inner: LexIter,
    emitted: u64,
    max_emitted: Option<u64>,
    exceeded: bool,
}

impl Colorings {
    /// True once the stream stopped because the emission cap was reached.
    pub fn cap_exceeded(&self) -> bool {
        self.exceeded
    }
}

impl Iterator for Colorings {
    type Item = Coloring;

    fn next(&mut self) -> Option<Coloring> {
        if self.exceeded {
            return None;
        }
        let s = self.inner.next()?;
        self.emitted += 1;
        if self.max_emitted.is_some_and(|m| self.emitted > m) {
            self.exceeded = true;
            return None;
        }
        Some(Coloring(s))
    }
}

/// Every `H`-coloring of `G` exactly once, in lexicographic order.
pub fn enumerate_colorings(
    h: &ConstraintGraph,
    g: &TargetGraph,
    limits: Limits,
) -> Result<Colorings> {
    limits.check_space(h.q(), g.n())?;
    Ok(Colorings {
        inner: Csp::colorings(h, g).into_lex(),
        emitted: 0,
        max_emitted: limits.max_emitted,
        exceeded: false,
    })
}

/// Collects [`enumerate_colorings`], failing if the emission cap is hit.
pub fn collect_colorings(
    h: &ConstraintGraph,
    g: &TargetGraph,
    limits: Limits,
) -> Result<Vec<Coloring>> {
    let mut stream = enumerate_colorings(h, g, limits)?;
    let out: Vec<Coloring> = stream.by_ref().collect();
    if stream.cap_exceeded() {
        return Err(Error::CapExceeded(format!(
            "more than {} colorings",
            limits.max_emitted.unwrap_or(0)
        )));
    }
    Ok(out)
}

pub fn count_colorings(h: &ConstraintGraph, g: &TargetGraph) -> CountResult {
    CountResult {
        count: Csp::colorings(h, g).count(),
    }
}

/// Colors fixed on a subset of the vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialAssignment {
    pub assigned: BTreeMap<usize, Color>,
}

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_prefix(prefix: &[Color]) -> Self {
        Self {
            assigned: prefix.iter().copied().enumerate().collect(),
        }
    }

    pub fn assign(&mut self, v: usize, c: Color) -> &mut Self {
        self.assigned.insert(v, c);
        self
    }

    /// No edge between two assigned vertices is violated.
    pub fn is_consistent(&self, h: &ConstraintGraph, g: &TargetGraph) -> bool {
        g.edges().all(
            |(u, v)| match (self.assigned.get(&u), self.assigned.get(&v)) {
                (Some(&a), Some(&b)) => h.compatible(a, b),
                _ => true,
            },
        )
    }
}

/// Number of colorings of `G` that agree with `partial`.
pub fn count_extensions(
    h: &ConstraintGraph,
    g: &TargetGraph,
    partial: &PartialAssignment,
) -> Result<CountResult> {
    let mut csp = Csp::colorings(h, g);
    for (&v, &c) in &partial.assigned {
        if v >= g.n() {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                n: g.n(),
            });
        }
        if c >= h.q() {
            return Err(Error::ColorOutOfRange { color: c, q: h.q() });
        }
        csp.pin(v, c);
    }
    if !partial.is_consistent(h, g) {
        return Ok(CountResult {
            count: BigUint::zero(),
        });
    }
    Ok(CountResult { count: csp.count() })
}

fn check_config<F: Scalar>(
    s: &SpinSystem<F>,
    gw: &WeightedGraph<F>,
    sigma: &Coloring,
) -> Result<()> {
    sigma.check(gw.graph().n(), s.q())
}

/// Log of the Gibbs weight, or `None` when an edge hits a forbidden pair.
pub fn log_gibbs_weight<F: Scalar + Float>(
    s: &SpinSystem<F>,
    gw: &WeightedGraph<F>,
    sigma: &Coloring,
) -> Result<Option<F>> {
    check_config(s, gw, sigma)?;
    let x = sigma.as_slice();
    let mut acc = F::zero();
    for (&(u, v), &theta) in gw.edge_weights() {
        match s.coupling(x[u], x[v]).finite() {
            Some(&j) => acc = acc + theta * j,
            None => return Ok(None),
        }
    }
    for (v, &c) in x.iter().enumerate() {
        acc = acc + *gw.vertex_weight(v) * *s.field(c);
    }
    Ok(Some(acc))
}

/// Gibbs weight `exp(Σ θ J + Σ θ h)`, exactly zero on forbidden configurations.
pub fn gibbs_weight<F: Scalar + Float>(
    s: &SpinSystem<F>,
    gw: &WeightedGraph<F>,
    sigma: &Coloring,
) -> Result<F> {
    Ok(log_gibbs_weight(s, gw, sigma)?.map_or_else(F::zero, Float::exp))
}

/// Streaming `log Σ exp(x)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LogSumExp<F> {
    max: F,
    sum: F,
}

impl<F: Float> LogSumExp<F> {
    pub fn new() -> Self {
        Self {
            max: F::neg_infinity(),
            sum: F::zero(),
        }
    }

    pub fn add(&mut self, x: F) {
        if x <= self.max {
            self.sum = self.sum + (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + F::one();
            self.max = x;
        }
    }

    /// `None` when nothing was added.
    pub fn value(&self) -> Option<F> {
        (self.sum > F::zero()).then(|| self.max + self.sum.ln())
    }
}

/// `log Z` by enumerating the configurations of positive weight.
pub fn partition_function<F: Scalar + Float>(
    s: &SpinSystem<F>,
    gw: &WeightedGraph<F>,
    limits: Limits,
) -> Result<F> {
    limits.check_space(s.q(), gw.graph().n())?;
    let m = Gibbs::new(s, gw);
    let mut lse = LogSumExp::new();
    for sigma in Csp::colorings(&s.constraint_graph(), gw.graph()).into_lex() {
        lse.add(log_weight_unchecked(&m, &sigma));
    }
    lse.value().ok_or(Error::Unsatisfiable)
}

fn log_weight_unchecked<F: Scalar + Float>(m: &Gibbs<'_, F>, sigma: &[Color]) -> F {
    let mut acc = F::zero();
    for (&(u, v), &theta) in m.graph.edge_weights() {
        acc = acc
            + theta
                * *m.system
                    .coupling(sigma[u], sigma[v])
                    .finite()
                    .expect("support only");
    }
    for (v, &c) in sigma.iter().enumerate() {
        acc = acc + *m.graph.vertex_weight(v) * *m.system.field(c);
    }
    acc
}

/// Normalized Gibbs probabilities of every positive-weight configuration.
pub fn gibbs_distribution<F: Scalar + Float>(
    s: &SpinSystem<F>,
    gw: &WeightedGraph<F>,
    limits: Limits,
) -> Result<Vec<(Coloring, F)>> {
    let log_z = partition_function(s, gw, limits)?;
    let m = Gibbs::new(s, gw);
    Ok(Csp::colorings(&s.constraint_graph(), gw.graph())
        .into_lex()
        .map(|sigma| {
            let p = (log_weight_unchecked(&m, &sigma) - log_z).exp();
            (Coloring(sigma), p)
        })
        .collect())
}

fn same_n(g1: &TargetGraph, g2: &TargetGraph) -> Result<()> {
    if g1.n() != g2.n() {
        return Err(Error::LengthMismatch {
            expected: g1.n(),
            got: g2.n(),
        });
    }
    Ok(())
}

fn all_extend(
    h: &ConstraintGraph,
    from: &TargetGraph,
    to: &TargetGraph,
    limits: Limits,
) -> Result<bool> {
    let extra: Vec<(usize, usize)> = to.edges().filter(|&(u, v)| !from.has_edge(u, v)).collect();
    if extra.is_empty() {
        return Ok(true);
    }
    for sigma in enumerate_colorings(h, from, limits)? {
        let s = sigma.as_slice();
        if extra.iter().any(|&(u, v)| !h.compatible(s[u], s[v])) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `Ω_{G1} = Ω_{G2}`, decided by enumerating each side and checking the edges
/// the other side adds.
pub fn support_equal(
    h: &ConstraintGraph,
    g1: &TargetGraph,
    g2: &TargetGraph,
    limits: Limits,
) -> Result<bool> {
    same_n(g1, g2)?;
    Ok(all_extend(h, g1, g2, limits)? && all_extend(h, g2, g1, limits)?)
}

/// Exact total-variation distance `1 − c / max(a, b)` between the uniform
/// distributions on `Ω_{G1}` and `Ω_{G2}`, where `c = |Ω_{G1} ∩ Ω_{G2}|` is the
/// number of colorings of `G1 ∪ G2`.
pub fn tv_distance(h: &ConstraintGraph, g1: &TargetGraph, g2: &TargetGraph) -> Result<BigRational> {
    same_n(g1, g2)?;
    let a = count_colorings(h, g1).count;
    let b = count_colorings(h, g2).count;
    if a.is_zero() || b.is_zero() {
        return Err(Error::Unsatisfiable);
    }
    let c = count_colorings(h, &g1.union(g2)?).count;
    let m = a.max(b);
    Ok(BigRational::one() - BigRational::new(c.into(), m.into()))
}
