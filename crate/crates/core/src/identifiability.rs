//! Identifiability of constraint graphs and weighted spin systems via the
//! duplicated-color supergraphs `G_ij`, plus forced pairs and the `F₁`/`F₂`
//! counterexample for weighted systems.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::csp::{Budget, Csp, Search};
use crate::enumeration::{count_colorings, enumerate_colorings, Limits};
use crate::error::{Error, Result};
use crate::model::{
    build_gij, build_gij2, Color, Coloring, ConstraintGraph, LabeledSupergraph, SpinSystem,
    TargetGraph,
};
use crate::scalar::Scalar;

pub type ColorPair = (Color, Color);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdReason {
    SelfLoop,
    AllEdgesWitnessed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdStatus {
    Identifiable(IdReason),
    /// Smallest edge whose search was exhausted without a witness.
    NotIdentifiable(ColorPair),
    /// Edges whose searches ran out of budget.
    Timeout(Vec<ColorPair>),
}

/// Proof that no witness exists for an edge: the search explored `nodes`
/// branch points, and `G_ij` has `colorings` colorings in total, none of
/// which is a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exhaustion {
    pub nodes: u64,
    pub colorings: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentifiabilityVerdict {
    pub status: IdStatus,
    /// Edge → coloring of `G_ij` with `i′ = q`, `j′ = q + 1`.
    pub witnesses: BTreeMap<ColorPair, Coloring>,
    pub certificates: BTreeMap<ColorPair, Exhaustion>,
    pub elapsed: Duration,
}

impl IdentifiabilityVerdict {
    pub fn is_identifiable(&self) -> bool {
        matches!(self.status, IdStatus::Identifiable(_))
    }

    fn self_loop(start: Instant) -> Self {
        Self {
            status: IdStatus::Identifiable(IdReason::SelfLoop),
            witnesses: BTreeMap::new(),
            certificates: BTreeMap::new(),
            elapsed: start.elapsed(),
        }
    }
}

enum EdgeOutcome {
    Witness(Coloring),
    Exhausted(Exhaustion),
    Timeout,
}

fn check_identifiability_input(h: &ConstraintGraph) -> Result<()> {
    if !h.is_connected() {
        return Err(Error::Disconnected);
    }
    h.require_hard_constraint()
}

fn aggregate(outcomes: Vec<(ColorPair, EdgeOutcome)>, start: Instant) -> IdentifiabilityVerdict {
    let mut witnesses = BTreeMap::new();
    let mut certificates = BTreeMap::new();
    let mut pending = Vec::new();
    for (e, o) in outcomes {
        match o {
            EdgeOutcome::Witness(s) => {
                witnesses.insert(e, s);
            }
            EdgeOutcome::Exhausted(c) => {
                certificates.insert(e, c);
            }
            EdgeOutcome::Timeout => pending.push(e),
        }
    }
    let status = if let Some(&e) = certificates.keys().next() {
        IdStatus::NotIdentifiable(e)
    } else if !pending.is_empty() {
        pending.sort_unstable();
        IdStatus::Timeout(pending)
    } else {
        IdStatus::Identifiable(IdReason::AllEdgesWitnessed)
    };
    IdentifiabilityVerdict {
        status,
        witnesses,
        certificates,
        elapsed: start.elapsed(),
    }
}

fn deadline(timeout: Option<Duration>, start: Instant) -> Option<Instant> {
    timeout.map(|t| start + t)
}

/// Colorings of `G_ij` in which `i′` and `j′` get incompatible colors.
fn unweighted_edge(h: &ConstraintGraph, i: Color, j: Color, until: Option<Instant>) -> EdgeOutcome {
    let gij = build_gij(h, i, j).expect("edge of a loop-free graph");
    let mut csp = Csp::colorings(h, &gij.graph);
    let anti = csp.add_complement(0, h.q());
    csp.constrain(gij.i_prime(), gij.j_prime(), anti);
    let mut budget = Budget::until(until);
    match csp.find_first(&mut budget) {
        Search::Found(s) => EdgeOutcome::Witness(Coloring(s)),
        Search::Exhausted => EdgeOutcome::Exhausted(Exhaustion {
            nodes: budget.nodes,
            colorings: count_colorings(h, &gij.graph).count,
        }),
        Search::Timeout => EdgeOutcome::Timeout,
    }
}

/// Decides identifiability of `H`: any self-loop suffices; otherwise every
/// edge `{i,j}` needs a coloring of `G_ij` giving `i′`, `j′` incompatible
/// colors. Edge searches run in parallel and share the optional deadline.
pub fn is_identifiable(
    h: &ConstraintGraph,
    timeout: Option<Duration>,
) -> Result<IdentifiabilityVerdict> {
    let start = Instant::now();
    check_identifiability_input(h)?;
    if h.has_self_loop() {
        return Ok(IdentifiabilityVerdict::self_loop(start));
    }
    let until = deadline(timeout, start);
    let edges: Vec<ColorPair> = h.edges().collect();
    let outcomes = edges
        .par_iter()
        .map(|&(i, j)| ((i, j), unweighted_edge(h, i, j, until)))
        .collect();
    Ok(aggregate(outcomes, start))
}

/// `J(a,b)` for a pair known to be compatible.
fn finite<T: Scalar>(s: &SpinSystem<T>, a: Color, b: Color) -> T {
    s.coupling(a, b).finite().expect("compatible pair").clone()
}

/// True when `(σ_i, σ_j, σ_i′, σ_j′)` separates the two counterexample graphs:
/// `J(σ_i′,σ_j′)` is forbidden, or
/// `|J(σ_i,σ_j) + J(σ_i′,σ_j′) − J(σ_i′,σ_j) − J(σ_i,σ_j′)| > tol`.
fn separates<T: Scalar>(s: &SpinSystem<T>, quad: [Color; 4], tol: &T) -> bool {
    let [a, b, a2, b2] = quad;
    match s.coupling(a2, b2).finite() {
        None => true,
        Some(j22) => {
            let gap = finite(s, a, b) + j22.clone() - finite(s, a2, b) - finite(s, a, b2);
            &gap.abs() > tol
        }
    }
}

fn weighted_edge<T: Scalar>(
    s: &SpinSystem<T>,
    h: &ConstraintGraph,
    i: Color,
    j: Color,
    tol: &T,
    until: Option<Instant>,
) -> EdgeOutcome {
    let gij = build_gij(h, i, j).expect("edge of a loop-free graph");
    let (ip, jp) = (gij.i_prime(), gij.j_prime());
    let q = h.q();
    let base = Csp::colorings(h, &gij.graph);
    let mut budget = Budget::until(until);
    for a in 0..q {
        for b in (0..q).filter(|&b| h.compatible(a, b)) {
            for a2 in (0..q).filter(|&a2| h.compatible(a2, b)) {
                for b2 in (0..q).filter(|&b2| h.compatible(a, b2)) {
                    if !separates(s, [a, b, a2, b2], tol) {
                        continue;
                    }
                    let mut csp = base.clone();
                    csp.pin(i, a);
                    csp.pin(j, b);
                    csp.pin(ip, a2);
                    csp.pin(jp, b2);
                    match csp.find_first(&mut budget) {
                        Search::Found(sigma) => return EdgeOutcome::Witness(Coloring(sigma)),
                        Search::Exhausted => {}
                        Search::Timeout => return EdgeOutcome::Timeout,
                    }
                }
            }
        }
    }
    EdgeOutcome::Exhausted(Exhaustion {
        nodes: budget.nodes,
        colorings: count_colorings(h, &gij.graph).count,
    })
}

/// Identifiability of a weighted system with induced constraint graph `H^J`:
/// a self-loop in `H^J` suffices; otherwise each edge `{i,j}` needs an
/// `H^J`-coloring of `G_ij` separating the two counterexample graphs (see
/// [`weighted_counterexample`]). With exact rationals use `tol = 0`.
pub fn is_identifiable_weighted<T: Scalar>(
    s: &SpinSystem<T>,
    tol: &T,
    timeout: Option<Duration>,
) -> Result<IdentifiabilityVerdict> {
    let start = Instant::now();
    let h = s.constraint_graph();
    check_identifiability_input(&h)?;
    if h.has_self_loop() {
        return Ok(IdentifiabilityVerdict::self_loop(start));
    }
    let until = deadline(timeout, start);
    let edges: Vec<ColorPair> = h.edges().collect();
    let outcomes = edges
        .par_iter()
        .map(|&(i, j)| ((i, j), weighted_edge(s, &h, i, j, tol, until)))
        .collect();
    Ok(aggregate(outcomes, start))
}

/// Nonadjacent pairs that receive compatible colors in every coloring of `G`.
/// Adding any of them to `G` leaves the coloring set unchanged.
pub fn forced_pairs(
    h: &ConstraintGraph,
    g: &TargetGraph,
    limits: Limits,
) -> Result<Vec<(usize, usize)>> {
    let pairs = g.non_edges();
    let mut separated = vec![false; pairs.len()];
    let mut any = false;
    let mut stream = enumerate_colorings(h, g, limits)?;
    for sigma in stream.by_ref() {
        any = true;
        let x = sigma.as_slice();
        for (k, &(u, v)) in pairs.iter().enumerate() {
            if !separated[k] && !h.compatible(x[u], x[v]) {
                separated[k] = true;
            }
        }
    }
    if stream.cap_exceeded() {
        return Err(Error::CapExceeded("too many colorings".into()));
    }
    if !any {
        return Err(Error::Unsatisfiable);
    }
    Ok(pairs
        .into_iter()
        .zip(separated)
        .filter_map(|(p, sep)| (!sep).then_some(p))
        .collect())
}

/// `F₁ = G²_ij + {i′j′, i″j″}` and `F₂ = G²_ij + {i″j′, i′j″}` together with
/// the labelled `G²_ij`.
pub fn counterexample_graphs(
    h: &ConstraintGraph,
    i: Color,
    j: Color,
) -> Result<(LabeledSupergraph, TargetGraph, TargetGraph)> {
    let g2 = build_gij2(h, i, j)?;
    let (ip, jp) = (g2.i_prime(), g2.j_prime());
    let ipp = g2.i_double_prime().expect("doubled variant");
    let jpp = g2.j_double_prime().expect("doubled variant");
    let f1 = g2.graph.with_edges([(ip, jp), (ipp, jpp)])?;
    let f2 = g2.graph.with_edges([(ipp, jp), (ip, jpp)])?;
    Ok((g2, f1, f2))
}

/// The non-identifiability counterexample for edge `{i,j}` of `H^J`. Fails
/// with [`Error::ConditionHolds`] when a separating coloring exists.
pub fn weighted_counterexample<T: Scalar>(
    s: &SpinSystem<T>,
    i: Color,
    j: Color,
    tol: &T,
    timeout: Option<Duration>,
) -> Result<(TargetGraph, TargetGraph)> {
    let h = s.constraint_graph();
    if !h.is_compatible(i, j)? {
        return Err(Error::NotAnEdge(i, j));
    }
    if h.has_self_loop() {
        return Err(Error::ConstraintHasSelfLoops);
    }
    let until = deadline(timeout, Instant::now());
    match weighted_edge(s, &h, i, j, tol, until) {
        EdgeOutcome::Witness(_) => Err(Error::ConditionHolds(i, j)),
        EdgeOutcome::Timeout => Err(Error::Timeout),
        EdgeOutcome::Exhausted(_) => {
            let (_, f1, f2) = counterexample_graphs(&h, i, j)?;
            Ok((f1, f2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{is_valid_coloring, Potential};
    use crate::scalar::ratio;
    use num_rational::BigRational;

    #[test]
    fn self_loop_and_triangle() {
        let hc = ConstraintGraph::new(2, [(0, 0), (0, 1)]).unwrap();
        let v = is_identifiable(&hc, None).unwrap();
        assert_eq!(v.status, IdStatus::Identifiable(IdReason::SelfLoop));
        let k3 = ConstraintGraph::complete(3).unwrap();
        let v = is_identifiable(&k3, None).unwrap();
        assert_eq!(v.status, IdStatus::NotIdentifiable((0, 1)));
        assert_eq!(v.certificates[&(0, 1)].colorings, BigUint::from(6u32));
    }

    #[test]
    fn witnesses_validate() {
        let h = ConstraintGraph::new(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let v = is_identifiable(&h, None).unwrap();
        for (&(i, j), w) in &v.witnesses {
            let gij = build_gij(&h, i, j).unwrap();
            assert!(is_valid_coloring(&h, &gij.graph, w).unwrap());
            assert!(!h.compatible(w.0[gij.i_prime()], w.0[gij.j_prime()]));
        }
    }

    #[test]
    fn input_errors() {
        let split = ConstraintGraph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(is_identifiable(&split, None), Err(Error::Disconnected));
        let full = ConstraintGraph::complete_with_loops(2).unwrap();
        assert_eq!(is_identifiable(&full, None), Err(Error::NoHardConstraint));
    }

    #[test]
    fn weighted_constant_triangle() {
        let k3 = ConstraintGraph::complete(3).unwrap();
        let s = SpinSystem::<BigRational>::with_constant_coupling(&k3, ratio(1, 1));
        let v = is_identifiable_weighted(&s, &ratio(0, 1), None).unwrap();
        assert_eq!(v.status, IdStatus::NotIdentifiable((0, 1)));
        let (f1, f2) = weighted_counterexample(&s, 0, 1, &ratio(0, 1), None).unwrap();
        assert_eq!((f1.n(), f2.n()), (7, 7));
        assert_eq!(f1.num_edges(), f2.num_edges());
    }

    #[test]
    fn weighted_self_loop_and_precondition() {
        let l = f64::ln(2.0);
        let hc = SpinSystem::new(
            vec![
                vec![Potential::Finite(0.0), Potential::Finite(0.0)],
                vec![Potential::Finite(0.0), Potential::Forbidden],
            ],
            vec![0.0, l],
        )
        .unwrap();
        let v = is_identifiable_weighted(&hc, &1e-9, None).unwrap();
        assert_eq!(v.status, IdStatus::Identifiable(IdReason::SelfLoop));
        let h = ConstraintGraph::new(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let s = SpinSystem::<f64>::with_constant_coupling(&h, 1.0);
        if is_identifiable(&h, None).unwrap().is_identifiable() {
            assert_eq!(
                weighted_counterexample(&s, 0, 1, &1e-9, None),
                Err(Error::ConditionHolds(0, 1))
            );
        }
    }

    #[test]
    fn forced_pair_examples() {
        let k3 = ConstraintGraph::complete(3).unwrap();
        let mut k4_minus = TargetGraph::complete(4).edge_set().clone();
        k4_minus.remove(&(0, 1));
        let g = TargetGraph::new(4, k4_minus).unwrap();
        assert!(forced_pairs(&k3, &g, Limits::default()).unwrap().is_empty());
        assert!(
            forced_pairs(&k3, &TargetGraph::complete(3), Limits::default())
                .unwrap()
                .is_empty()
        );
    }
}
