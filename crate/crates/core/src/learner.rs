//! The structure learner, sample-complexity formulas and the `η` lower-bound
//! machinery.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumeration::count_colorings;
use crate::error::{Error, Result};
use crate::model::{Color, Coloring, ConstraintGraph, TargetGraph};
use crate::scalar::Scalar;

/// Which color pairs at the endpoints of a pair exclude it from `Ĝ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnMode {
    /// Any pair `{σ_u, σ_v}` that is not an edge of `H`.
    #[default]
    AnyIncompatible,
    /// Only `(σ_u, σ_v) = (i, j)` or `(j, i)` for a fixed hard pair.
    Designated(Color, Color),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnReport {
    pub estimate: TargetGraph,
    pub mode: LearnMode,
    pub l_used: usize,
    /// Excluded pair → index of the first sample that excluded it.
    pub witnesses: BTreeMap<(usize, usize), usize>,
}

fn check_learn_input(
    h: &ConstraintGraph,
    n: usize,
    samples: &[Coloring],
    mode: LearnMode,
) -> Result<()> {
    h.require_hard_constraint()?;
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if let LearnMode::Designated(i, j) = mode {
        if h.is_compatible(i, j)? {
            return Err(Error::NotAHardPair(i, j));
        }
    }
    for s in samples {
        s.check(n, h.q())?;
    }
    Ok(())
}

/// Learns `Ĝ` on `n` vertices: a pair stays an edge unless some sample gives
/// its endpoints an excluding color pair.
pub fn struct_learn(
    h: &ConstraintGraph,
    n: usize,
    samples: &[Coloring],
    mode: LearnMode,
) -> Result<LearnReport> {
    check_learn_input(h, n, samples, mode)?;
    let excludes = |a: Color, b: Color| match mode {
        LearnMode::AnyIncompatible => !h.compatible(a, b),
        LearnMode::Designated(i, j) => (a, b) == (i, j) || (a, b) == (j, i),
    };
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let found: Vec<((usize, usize), Option<usize>)> = pairs
        .par_iter()
        .map(|&(u, v)| {
            let w = samples.iter().position(|s| excludes(s.0[u], s.0[v]));
            ((u, v), w)
        })
        .collect();
    let mut edges = Vec::new();
    let mut witnesses = BTreeMap::new();
    for (pair, w) in found {
        match w {
            Some(k) => {
                witnesses.insert(pair, k);
            }
            None => edges.push(pair),
        }
    }
    Ok(LearnReport {
        estimate: TargetGraph::new(n, edges)?,
        mode,
        l_used: samples.len(),
        witnesses,
    })
}

/// `⌈x⌉`, except that values within relative `1e-9` of an integer snap to it,
/// so that e.g. `8·ln(e)` gives 8 rather than 9.
fn snapped_ceil(x: f64) -> u64 {
    let r = x.round();
    let v = if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    };
    v.max(0.0) as u64
}

fn check_unit_open(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in (0, 1), got {x}"
        )));
    }
    Ok(())
}

fn check_unit_half_open(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in (0, 1], got {x}"
        )));
    }
    Ok(())
}

/// `⌈8 δ⁻¹ ln(n² / 2ε)⌉` samples suffice for exact recovery with probability
/// `1 − ε` when every non-edge is excluded with probability at least `δ`.
pub fn sample_bound_generic(delta: f64, n: usize, eps: f64) -> Result<u64> {
    check_unit_half_open("delta", delta)?;
    check_unit_open("epsilon", eps)?;
    let nf = n as f64;
    Ok(snapped_ceil(8.0 / delta * (nf * nf / (2.0 * eps)).ln()))
}

/// `⌈4 γ⁻¹ n² ln(n² / 2ε)⌉` samples for total-variation precision `γ`.
pub fn tv_bound_samples(gamma: f64, n: usize, eps: f64) -> Result<u64> {
    check_unit_half_open("gamma", gamma)?;
    check_unit_open("epsilon", eps)?;
    let nf = n as f64;
    Ok(snapped_ceil(
        4.0 / gamma * nf * nf * (nf * nf / (2.0 * eps)).ln(),
    ))
}

/// `1 / (q (d+1)³)`, the same-color probability bound for proper colorings
/// with `q ≥ d + 1`.
pub fn delta_colorings<T: Scalar>(q: usize, d: usize) -> Result<T> {
    if q <= d {
        return Err(Error::InvalidParameter(format!(
            "need q >= d + 1, got q = {q}, d = {d}"
        )));
    }
    let d1 = T::from_count(d + 1);
    Ok(T::one() / (T::from_count(q) * d1.clone() * d1.clone() * d1))
}

/// `(1 − α)² / q²` under the Dobrushin condition `α < 1`.
pub fn delta_dobrushin<T: Scalar>(q: usize, alpha: &T) -> Result<T> {
    if alpha < &T::zero() || alpha >= &T::one() {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= alpha < 1, got {alpha}"
        )));
    }
    let gap = T::one() - alpha.clone();
    let qq = T::from_count(q);
    Ok(gap.clone() * gap / (qq.clone() * qq))
}

/// Log of [`delta_permissive`].
pub fn log_delta_permissive(q: usize, d: usize, beta_hat: f64, gamma_hat: f64) -> Result<f64> {
    if !(beta_hat >= 0.0 && gamma_hat >= 0.0) {
        return Err(Error::InvalidParameter(
            "beta_hat and gamma_hat must be nonnegative".into(),
        ));
    }
    let df = d as f64;
    Ok(-2.0 * (df + 1.0) * (q as f64).ln() - 4.0 * (2.0 * beta_hat * df * df + gamma_hat))
}

/// `q^{−2(d+1)} e^{−4(2β̂d² + γ̂)}` for permissive systems.
pub fn delta_permissive(q: usize, d: usize, beta_hat: f64, gamma_hat: f64) -> Result<f64> {
    Ok(log_delta_permissive(q, d, beta_hat, gamma_hat)?.exp())
}

/// Sample lower bound `α_margin / η`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LowerBound {
    Finite(BigRational),
    /// `η = 0`: no number of samples separates the two graphs.
    Unbounded,
}

/// `η = 1 − |Ω_sup| / |Ω_sub|` for nested graphs `G_sub ⊆ G_sup`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaReport {
    pub eta: BigRational,
    pub count_sub: BigUint,
    pub count_sup: BigUint,
}

impl EtaReport {
    pub fn from_counts(count_sub: BigUint, count_sup: BigUint) -> Result<Self> {
        if count_sub.is_zero() || count_sup.is_zero() {
            return Err(Error::Unsatisfiable);
        }
        if count_sup > count_sub {
            return Err(Error::NotNested);
        }
        let eta = BigRational::one()
            - BigRational::new(count_sup.clone().into(), count_sub.clone().into());
        Ok(Self {
            eta,
            count_sub,
            count_sup,
        })
    }

    pub fn implied_lower_bound(&self, margin: &BigRational) -> LowerBound {
        if self.eta.is_zero() {
            LowerBound::Unbounded
        } else {
            LowerBound::Finite(margin / &self.eta)
        }
    }
}

pub fn eta(h: &ConstraintGraph, g_sub: &TargetGraph, g_sup: &TargetGraph) -> Result<EtaReport> {
    if g_sub.n() != g_sup.n() || !g_sub.is_subgraph_of(g_sup) {
        return Err(Error::NotNested);
    }
    EtaReport::from_counts(
        count_colorings(h, g_sub).count,
        count_colorings(h, g_sup).count,
    )
}

/// Exact `η` between the empty-mask and full-mask members of the `G_{m,t}`
/// family for proper `q`-colorings (any `2 ≤ t < q`):
/// `(q−1)(q−2)^m (1 − ((q−2)/(q−1))^m) / ((q−1)^m + (q−1)(q−2)^m)`.
pub fn gmt_eta_exact(q: usize, m: usize) -> Result<BigRational> {
    if q < 3 || m == 0 {
        return Err(Error::InvalidParameter(format!(
            "need q >= 3 and m >= 1, got q = {q}, m = {m}"
        )));
    }
    let a = BigRational::from_integer((q as u64 - 1).into());
    let b = BigRational::from_integer((q as u64 - 2).into());
    let am = num_traits::pow(a.clone(), m);
    let bm = num_traits::pow(b.clone(), m);
    let ratio_m = num_traits::pow(b / a.clone(), m);
    Ok(a.clone() * bm.clone() * (BigRational::one() - ratio_m) / (am + a * bm))
}

/// The bound `η ≤ (q−1) e^{−m/(q−1)}`.
pub fn gmt_eta_upper_bound(q: usize, m: usize) -> f64 {
    let q1 = q as f64 - 1.0;
    q1 * (-(m as f64) / q1).exp()
}

/// Success margin `α = q e^{−m/(2(q−1))} − 2^{−m}` used for the `G_{m,t}`
/// family.
pub fn gmt_margin(q: usize, m: usize) -> f64 {
    let q1 = q as f64 - 1.0;
    q as f64 * (-(m as f64) / (2.0 * q1)).exp() - 0.5f64.powi(m as i32)
}

/// Large-`m` growth of the `G_{m,t}` lower bound, evaluated from the exact `η`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmtGrowth {
    pub q: usize,
    pub m: usize,
    pub eta: f64,
    pub eta_upper: f64,
    pub margin: f64,
    /// `margin / η`.
    pub lower_bound: f64,
    /// `e^{m/(2(q−1))}`.
    pub asymptotic: f64,
}

pub fn gmt_growth(q: usize, m: usize) -> Result<GmtGrowth> {
    let eta = gmt_eta_exact(q, m)?.to_f64_lossy();
    let margin = gmt_margin(q, m);
    Ok(GmtGrowth {
        q,
        m,
        eta,
        eta_upper: gmt_eta_upper_bound(q, m),
        margin,
        lower_bound: margin / eta,
        asymptotic: (m as f64 / (2.0 * (q as f64 - 1.0))).exp(),
    })
}
