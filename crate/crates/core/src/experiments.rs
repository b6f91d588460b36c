//! Experiment harness: learning curves, bound verification against exact
//! enumeration, and small-graph catalogs.

use std::collections::BTreeSet;
use std::time::Instant;

use num_rational::BigRational;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{influence_matrix, potentials_hat, InfluenceOptions, UndefinedPolicy};
use crate::error::{Error, Result};
use crate::gadgets::{random_bounded_degree, Gadget, GadgetDescriptor};
use crate::learner::{
    delta_colorings, delta_dobrushin, delta_permissive, sample_bound_generic, struct_learn,
    LearnMode,
};
use crate::measure::{Gibbs, Measure, PairMarginals, Uniform};
use crate::model::{Color, Coloring, ConstraintGraph, SpinSystem, TargetGraph, WeightedGraph};
use crate::sampling::{exact_sample, glauber_sample, GlauberInit, GlauberParams};
use crate::scalar::Scalar;

/// Seed for trial `index` of an experiment seeded with `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(index);
    rng.next_u64()
}

/// Constraint graph as a color count and an edge list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub q: usize,
    pub edges: Vec<(Color, Color)>,
}

impl ConstraintSpec {
    pub fn build(&self) -> Result<ConstraintGraph> {
        ConstraintGraph::new(self.q, self.edges.iter().copied())
    }

    pub fn of(h: &ConstraintGraph) -> Self {
        Self {
            q: h.q(),
            edges: h.edges().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum GraphSource {
    /// A fresh graph from `𝒢(n, d)` per trial.
    Random {
        n: usize,
        d: usize,
    },
    Fixed {
        n: usize,
        edges: Vec<(usize, usize)>,
    },
    Gadget {
        gadget: GadgetDescriptor,
    },
}

impl GraphSource {
    pub fn n(&self) -> Result<usize> {
        Ok(match self {
            Self::Random { n, .. } | Self::Fixed { n, .. } => *n,
            Self::Gadget { .. } => self.fixed()?.n(),
        })
    }

    fn max_degree(&self) -> Result<usize> {
        Ok(match self {
            Self::Random { d, .. } => *d,
            _ => self.fixed()?.max_degree(),
        })
    }

    fn fixed(&self) -> Result<TargetGraph> {
        match self {
            Self::Fixed { n, edges } => TargetGraph::new(*n, edges.iter().copied()),
            Self::Gadget { gadget } => match gadget.generate()? {
                Gadget::Target(g) | Gadget::Pair(g, _) => Ok(g),
                Gadget::Constraint(_) => Err(Error::InvalidParameter(
                    "gadget is a constraint graph, not a target graph".into(),
                )),
            },
            Self::Random { .. } => unreachable!("random sources are drawn per trial"),
        }
    }

    fn draw(&self, seed: u64) -> Result<TargetGraph> {
        match self {
            Self::Random { n, d } => {
                random_bounded_degree(*n, *d, &mut ChaCha8Rng::seed_from_u64(seed))
            }
            _ => self.fixed(),
        }
    }
}

/// Sample sizes to evaluate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LSchedule {
    List {
        values: Vec<usize>,
    },
    /// Multiples of `⌈8 δ⁻¹ ln(n²/2ε)⌉`; `δ` defaults to `1/(q(d+1)³)` when
    /// `H = K_q`.
    Formula {
        delta: Option<f64>,
        fractions: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SamplerChoice {
    #[default]
    Exact,
    Glauber {
        burn_in: u64,
        thinning: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub h: ConstraintSpec,
    pub graph: GraphSource,
    pub trials: usize,
    pub epsilon: f64,
    pub schedule: LSchedule,
    pub seed: u64,
    #[serde(default)]
    pub sampler: SamplerChoice,
    #[serde(default)]
    pub mode: LearnMode,
}

/// One learning-curve row; `seconds` is learner time summed over trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    #[serde(rename = "L")]
    pub l: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub seconds: f64,
}

fn is_complete_constraint(h: &ConstraintGraph) -> bool {
    h.self_loops().is_empty() && h.num_edges() == h.q() * (h.q() - 1) / 2
}

/// The concrete list of `L` values for a config, sorted and deduplicated.
pub fn schedule_values(cfg: &ExperimentConfig) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = match &cfg.schedule {
        LSchedule::List { values } => values.clone(),
        LSchedule::Formula { delta, fractions } => {
            let h = cfg.h.build()?;
            let n = cfg.graph.n()?;
            let delta = match delta {
                Some(x) => *x,
                None if is_complete_constraint(&h) => {
                    delta_colorings::<f64>(h.q(), cfg.graph.max_degree()?)?
                }
                None => {
                    return Err(Error::InvalidParameter(
                        "delta is required unless H is a complete graph K_q".into(),
                    ))
                }
            };
            let base = sample_bound_generic(delta, n, cfg.epsilon)? as f64;
            fractions
                .iter()
                .map(|f| (f * base).ceil() as usize)
                .collect()
        }
    };
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn draw_samples(
    h: &ConstraintGraph,
    g: &TargetGraph,
    l: usize,
    seed: u64,
    sampler: SamplerChoice,
) -> Result<Vec<Coloring>> {
    if l == 0 {
        return Ok(Vec::new());
    }
    let set = match sampler {
        SamplerChoice::Exact => exact_sample(h, g, l, seed)?,
        SamplerChoice::Glauber { burn_in, thinning } => glauber_sample(
            &Uniform::new(h, g),
            l,
            GlauberParams {
                burn_in,
                thinning,
                seed,
            },
            GlauberInit::Greedy,
        )?,
    };
    Ok(set.samples)
}

/// Per trial: draw `G` (for random sources) and `max L` samples with seeds
/// derived from the trial index, then learn from every prefix in the
/// schedule. `L = 0` leaves `Ĝ` complete.
pub fn learn_curve(cfg: &ExperimentConfig) -> Result<Vec<CurveRow>> {
    let h = cfg.h.build()?;
    let ls = schedule_values(cfg)?;
    let max_l = ls.last().copied().unwrap_or(0);
    let n = cfg.graph.n()?;
    let per_trial: Vec<Vec<(bool, f64)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let g = cfg.graph.draw(derive_seed(cfg.seed, 2 * t as u64))?;
            let samples = draw_samples(
                &h,
                &g,
                max_l,
                derive_seed(cfg.seed, 2 * t as u64 + 1),
                cfg.sampler,
            )?;
            ls.iter()
                .map(|&l| {
                    let start = Instant::now();
                    let estimate = if l == 0 {
                        TargetGraph::complete(n)
                    } else {
                        struct_learn(&h, n, &samples[..l], cfg.mode)?.estimate
                    };
                    Ok((estimate == g, start.elapsed().as_secs_f64()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(ls
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let successes = per_trial.iter().filter(|row| row[k].0).count();
            CurveRow {
                l,
                trials: cfg.trials,
                successes,
                success_rate: if cfg.trials == 0 {
                    0.0
                } else {
                    successes as f64 / cfg.trials as f64
                },
                seconds: per_trial.iter().map(|row| row[k].1).sum(),
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `Pr[X_u = X_v] ≥ 1/(q(d+1)³)` for proper colorings.
    SameColor,
    /// `Pr[X_u = i, X_v = j] ≥ (1−α)²/q²` under Dobrushin's condition.
    Dobrushin,
    /// `Pr[X_u = i, X_v = j] ≥ q^{−2(d+1)} e^{−4(2β̂d²+γ̂)}` for permissive
    /// systems.
    Permissive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub u: usize,
    pub v: usize,
    /// The color pair, absent for the same-color event.
    pub colors: Option<(Color, Color)>,
    /// Exact probability as printed by the scalar type.
    pub exact: String,
    pub probability: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    /// Parameters the bound was instantiated with (`d`, `α`, `β̂`, `γ̂`).
    pub parameters: Vec<(String, f64)>,
    pub checks: Vec<BoundCheck>,
    pub min_margin: Option<f64>,
    pub violations: usize,
}

impl BoundReport {
    fn new(kind: BoundKind, parameters: Vec<(String, f64)>, checks: Vec<BoundCheck>) -> Self {
        let min_margin = checks.iter().map(|c| c.margin).reduce(f64::min);
        let violations = checks.iter().filter(|c| !c.pass).count();
        Self {
            kind,
            parameters,
            checks,
            min_margin,
            violations,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn check<T: Scalar>(
    u: usize,
    v: usize,
    colors: Option<(Color, Color)>,
    p: T,
    bound: &T,
) -> BoundCheck {
    let pass = p >= *bound;
    BoundCheck {
        u,
        v,
        colors,
        exact: p.to_string(),
        probability: p.to_f64_lossy(),
        bound: bound.to_f64_lossy(),
        margin: (p - bound.clone()).to_f64_lossy(),
        pass,
    }
}

fn hard_pair_checks<T: Scalar>(
    pm: &PairMarginals<T>,
    h: &ConstraintGraph,
    g: &TargetGraph,
    bound: &T,
) -> Vec<BoundCheck> {
    let hard = h.hard_constraints();
    let mut out = Vec::new();
    for (u, v) in g.non_edges() {
        for &(i, j) in &hard {
            out.push(check(
                u,
                v,
                Some((i, j)),
                pm.joint(u, v, i, j).clone(),
                bound,
            ));
            if i != j {
                out.push(check(
                    u,
                    v,
                    Some((j, i)),
                    pm.joint(u, v, j, i).clone(),
                    bound,
                ));
            }
        }
    }
    out
}

/// Same-color bound for proper `q`-colorings of `g`, with `d` the maximum
/// degree of `g` (needs `q ≥ d + 1`). Probabilities are exact.
pub fn verify_same_color(q: usize, g: &TargetGraph) -> Result<BoundReport> {
    let h = ConstraintGraph::complete(q)?;
    let d = g.max_degree();
    let bound: BigRational = delta_colorings(q, d)?;
    let pm = PairMarginals::<BigRational>::compute(&Uniform::new(&h, g))?;
    let checks = g
        .non_edges()
        .into_iter()
        .map(|(u, v)| check(u, v, None, pm.same_color(u, v), &bound))
        .collect();
    Ok(BoundReport::new(
        BoundKind::SameColor,
        vec![("d".into(), d as f64)],
        checks,
    ))
}

/// Dobrushin bound on any measure with hard constraints. Returns `None` when
/// the computed `α` is at least 1 and the bound does not apply. Undefined
/// conditionals count as full influence.
pub fn verify_dobrushin<T: Scalar, M: Measure<T>>(m: &M) -> Result<Option<BoundReport>> {
    let h = m.support();
    h.require_hard_constraint()?;
    let opts = InfluenceOptions {
        undefined: UndefinedPolicy::TreatAsOne,
        ..InfluenceOptions::default()
    };
    let report = influence_matrix(m, &opts)?;
    if report.alpha >= T::one() {
        return Ok(None);
    }
    let bound = delta_dobrushin(m.q(), &report.alpha)?;
    let pm = PairMarginals::compute(m)?;
    let checks = hard_pair_checks(&pm, &h, m.graph(), &bound);
    Ok(Some(BoundReport::new(
        BoundKind::Dobrushin,
        vec![("alpha".into(), report.alpha.to_f64_lossy())],
        checks,
    )))
}

/// Permissive bound for a weighted system; `d` is the maximum degree of the
/// graph. Permissiveness itself is not checked here.
pub fn verify_permissive(s: &SpinSystem<f64>, gw: &WeightedGraph<f64>) -> Result<BoundReport> {
    let h = s.constraint_graph();
    h.require_hard_constraint()?;
    let (beta_hat, gamma_hat) = potentials_hat(s, gw)?;
    let d = gw.graph().max_degree();
    let bound = delta_permissive(s.q(), d, beta_hat, gamma_hat)?;
    let pm = PairMarginals::compute(&Gibbs::new(s, gw))?;
    let checks = hard_pair_checks(&pm, &h, gw.graph(), &bound);
    Ok(BoundReport::new(
        BoundKind::Permissive,
        vec![
            ("d".into(), d as f64),
            ("beta_hat".into(), beta_hat),
            ("gamma_hat".into(), gamma_hat),
        ],
        checks,
    ))
}

fn edge_bits(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// One representative of every isomorphism class of connected graphs on `n`
/// vertices (`n ≤ 7`), each the labelling with the smallest edge bitmask.
pub fn connected_graphs(n: usize) -> Result<Vec<TargetGraph>> {
    if n > 7 {
        return Err(Error::CapExceeded(format!(
            "graph catalog supports n <= 7, got {n}"
        )));
    }
    let pairs = edge_bits(n);
    let mut index = vec![vec![0usize; n]; n];
    for (k, &(u, v)) in pairs.iter().enumerate() {
        index[u][v] = k;
        index[v][u] = k;
    }
    let perms = permutations(n);
    let canonical = |mask: u32| -> u32 {
        perms
            .iter()
            .map(|p| {
                pairs
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| mask >> k & 1 == 1)
                    .fold(0u32, |acc, (_, &(u, v))| acc | 1 << index[p[u]][p[v]])
            })
            .min()
            .unwrap_or(0)
    };
    let classes: BTreeSet<u32> = (0..1u32 << pairs.len())
        .into_par_iter()
        .filter_map(|mask| {
            let g = TargetGraph::new(
                n,
                pairs
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &e)| e),
            )
            .ok()?;
            (g.is_connected() && canonical(mask) == mask).then_some(mask)
        })
        .collect();
    classes
        .into_iter()
        .map(|mask| {
            TargetGraph::new(
                n,
                pairs
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &e)| e),
            )
        })
        .collect()
}
