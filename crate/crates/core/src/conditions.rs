//! Dobrushin influence matrix, the permissive-system check and the weight
//! scales `β̂`, `γ̂` used by the permissive sample bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csp::{Budget, Csp, Search};
use crate::enumeration::Limits;
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::model::{Color, ConstraintGraph, SpinSystem, TargetGraph, WeightedGraph};
use crate::scalar::Scalar;

/// Default bound on `Σ_v q^{|∂v|+1}` for [`influence_matrix`].
pub const DEFAULT_INFLUENCE_CAP: f64 = 1e7;

/// Default bound on `(q+1)^n` for the full permissive scan (`3^10`).
pub const DEFAULT_PERMISSIVE_CAP: f64 = 59049.0;

/// How a boundary pair with an undefined conditional (empty support at `v`)
/// enters `R_vw`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UndefinedPolicy {
    /// Ignore the pair and count it in [`InfluenceReport::skipped`].
    #[default]
    Skip,
    /// Count the pair with total-variation distance 1.
    TreatAsOne,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InfluenceOptions {
    pub undefined: UndefinedPolicy,
    pub max_work: f64,
    pub force: bool,
}

impl Default for InfluenceOptions {
    fn default() -> Self {
        Self {
            undefined: UndefinedPolicy::Skip,
            max_work: DEFAULT_INFLUENCE_CAP,
            force: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceReport<T> {
    /// Dense `n × n` influence matrix, zero off the neighborhoods.
    pub r: Vec<Vec<T>>,
    pub alpha: T,
    pub row_sums: Vec<T>,
    /// Boundary pairs with an undefined conditional.
    pub skipped: u64,
    pub undefined: UndefinedPolicy,
}

impl<T: Scalar> InfluenceReport<T> {
    /// Dobrushin's condition: `α < 1`.
    pub fn holds(&self) -> bool {
        self.alpha < T::one()
    }
}

/// Conditional law at `v` given the colors `tau` of its sorted neighbors.
fn site_conditional<T: Scalar, M: Measure<T>>(
    m: &M,
    v: usize,
    nbrs: &[usize],
    tau: &[Color],
) -> Option<Vec<T>> {
    let q = m.q();
    let mut w = Vec::with_capacity(q);
    let mut z = T::zero();
    for c in 0..q {
        let mut x = m.vertex_factor(v, c);
        for (&u, &t) in nbrs.iter().zip(tau) {
            match m.edge_factor(v, u, c, t) {
                Some(f) => x = x * f,
                None => {
                    x = T::zero();
                    break;
                }
            }
        }
        z = z + x.clone();
        w.push(x);
    }
    if z.is_zero() {
        return None;
    }
    Some(w.into_iter().map(|x| x / z.clone()).collect())
}

fn tv<T: Scalar>(p: &[T], r: &[T]) -> T {
    let s = p
        .iter()
        .zip(r)
        .fold(T::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs());
    s / T::from_count(2)
}

fn decode(mut code: usize, q: usize, out: &mut [Color]) {
    for slot in out.iter_mut().rev() {
        *slot = code % q;
        code /= q;
    }
}

/// Influence row of `v`: `(R_vw for w ∈ ∂v, skipped pairs)`.
fn influence_row<T: Scalar, M: Measure<T>>(
    m: &M,
    v: usize,
    undefined: UndefinedPolicy,
) -> (Vec<T>, u64) {
    let q = m.q();
    let nbrs = m.graph().neighbors(v);
    let k = nbrs.len();
    let total = q.pow(k as u32);
    let mut tau = vec![0; k];
    let table: Vec<Option<Vec<T>>> = (0..total)
        .map(|code| {
            decode(code, q, &mut tau);
            site_conditional(m, v, nbrs, &tau)
        })
        .collect();
    let mut skipped = 0u64;
    let mut row = Vec::with_capacity(k);
    for p in 0..k {
        // Place value of neighbor `p` in the mixed-radix code.
        let stride = q.pow((k - 1 - p) as u32);
        let mut best = T::zero();
        for code in 0..total {
            if (code / stride) % q != 0 {
                continue;
            }
            for a in 0..q {
                for b in a + 1..q {
                    let pa = &table[code + a * stride];
                    let pb = &table[code + b * stride];
                    let d = match (pa, pb) {
                        (Some(x), Some(y)) => tv(x, y),
                        _ => {
                            skipped += 1;
                            match undefined {
                                UndefinedPolicy::Skip => continue,
                                UndefinedPolicy::TreatAsOne => T::one(),
                            }
                        }
                    };
                    if d > best {
                        best = d;
                    }
                }
            }
        }
        row.push(best);
    }
    (row, skipped)
}

/// Dobrushin influence matrix `R_vw = max ‖π_v(·|τ) − π_v(·|τ')‖_TV` over
/// boundaries `τ, τ'` of `∂v` that differ only at `w`.
///
/// Only the colors on `∂v` affect the conditional at `v`, so each row costs
/// `q^{|∂v|+1}`; the total is capped by `opts.max_work` unless forced.
pub fn influence_matrix<T: Scalar, M: Measure<T>>(
    m: &M,
    opts: &InfluenceOptions,
) -> Result<InfluenceReport<T>> {
    let g = m.graph();
    let n = g.n();
    let q = m.q();
    let work: f64 = (0..n)
        .map(|v| (q as f64).powi(g.degree(v) as i32 + 1))
        .sum();
    if !opts.force && work > opts.max_work {
        return Err(Error::CapExceeded(format!(
            "influence enumeration needs {work:e} evaluations, cap is {:e}",
            opts.max_work
        )));
    }
    if (0..n).any(|v| q.checked_pow(g.degree(v) as u32 + 1).is_none()) {
        return Err(Error::CapExceeded(
            "neighborhood too large to enumerate".into(),
        ));
    }
    let rows: Vec<(Vec<T>, u64)> = (0..n)
        .into_par_iter()
        .map(|v| influence_row(m, v, opts.undefined))
        .collect();
    let mut r = vec![vec![T::zero(); n]; n];
    let mut skipped = 0;
    for (v, (row, s)) in rows.into_iter().enumerate() {
        skipped += s;
        for (&w, x) in g.neighbors(v).iter().zip(row) {
            r[v][w] = x;
        }
    }
    let row_sums: Vec<T> = r
        .iter()
        .map(|row| row.iter().fold(T::zero(), |a, x| a + x.clone()))
        .collect();
    let alpha = row_sums.iter().cloned().fold(T::zero(), T::max_of);
    Ok(InfluenceReport {
        r,
        alpha,
        row_sums,
        skipped,
        undefined: opts.undefined,
    })
}

/// `α = max_v Σ_w R_vw`, recomputed from the matrix.
pub fn dobrushin_alpha<T: Scalar>(report: &InfluenceReport<T>) -> T {
    report
        .r
        .iter()
        .map(|row| row.iter().fold(T::zero(), |a, x| a + x.clone()))
        .fold(T::zero(), T::max_of)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PermissiveMode {
    /// Every `A ⊆ V`.
    #[default]
    Full,
    /// Only `|A| = 1`; a necessary condition.
    SingleVertex,
}

/// A set `A` and a valid configuration `tau` on `V∖A` with no valid
/// extension to `A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermissiveCertificate {
    pub set: Vec<usize>,
    /// Colors on `V∖A` as `(vertex, color)` pairs.
    pub boundary: Vec<(usize, Color)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermissiveReport {
    pub permissive: bool,
    pub mode: PermissiveMode,
    /// True in single-vertex mode, where a pass does not prove permissiveness.
    pub necessary_only: bool,
    pub certificate: Option<PermissiveCertificate>,
}

fn outer_boundary(g: &TargetGraph, in_a: &[bool]) -> Vec<usize> {
    let mut out: Vec<usize> = (0..g.n())
        .filter(|&x| !in_a[x] && g.neighbors(x).iter().any(|&y| in_a[y]))
        .collect();
    out.sort_unstable();
    out
}

/// First failing boundary for `A`, scanning assignments of the outer
/// boundary `∂A` in lexicographic order.
fn check_set(h: &ConstraintGraph, g: &TargetGraph, set: &[usize]) -> Option<PermissiveCertificate> {
    let n = g.n();
    let q = h.q();
    let mut in_a = vec![false; n];
    for &v in set {
        in_a[v] = true;
    }
    let outside = TargetGraph::new(n, g.edges().filter(|&(u, v)| !in_a[u] && !in_a[v]))
        .expect("subgraph of a valid graph");
    let rest = Csp::colorings(h, &outside);
    let full = Csp::colorings(h, g);
    let bnd = outer_boundary(g, &in_a);
    let total = q.pow(bnd.len() as u32);
    let mut rho = vec![0; bnd.len()];
    for code in 0..total {
        decode(code, q, &mut rho);
        let mut tau_csp = rest.clone();
        for (&x, &c) in bnd.iter().zip(&rho) {
            tau_csp.pin(x, c);
        }
        let Search::Found(tau) = tau_csp.find_first(&mut Budget::unlimited()) else {
            continue;
        };
        let mut ext = full.clone();
        for (&x, &c) in bnd.iter().zip(&rho) {
            ext.pin(x, c);
        }
        if let Search::Exhausted = ext.find_first(&mut Budget::unlimited()) {
            return Some(PermissiveCertificate {
                set: set.to_vec(),
                boundary: (0..n).filter(|&x| !in_a[x]).map(|x| (x, tau[x])).collect(),
            });
        }
    }
    None
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Checks that every valid configuration on `V∖A` extends to `A`. Only the
/// compatibility pattern matters: vertex potentials are finite, so a
/// configuration has positive probability iff it is a valid coloring.
///
/// Subsets are scanned by increasing size, lexicographically within a size;
/// the certificate is the first failure in that order. Full mode refuses
/// `(q+1)^n > limits.max_candidates` unless forced.
pub fn is_permissive(
    h: &ConstraintGraph,
    g: &TargetGraph,
    mode: PermissiveMode,
    limits: &Limits,
) -> Result<PermissiveReport> {
    let n = g.n();
    let sizes: Vec<usize> = match mode {
        PermissiveMode::Full => {
            let work = (h.q() as f64 + 1.0).powf(n as f64);
            if !limits.force && work > limits.max_candidates {
                return Err(Error::CapExceeded(format!(
                    "permissive scan needs (q+1)^n = {work:e} > {:e}; use single-vertex mode or force",
                    limits.max_candidates
                )));
            }
            (1..=n).collect()
        }
        PermissiveMode::SingleVertex => vec![1],
    };
    let mut certificate = None;
    for k in sizes {
        certificate = subsets_of_size(n, k)
            .par_iter()
            .find_map_first(|set| check_set(h, g, set));
        if certificate.is_some() {
            break;
        }
    }
    Ok(PermissiveReport {
        permissive: certificate.is_none(),
        mode,
        necessary_only: mode == PermissiveMode::SingleVertex,
        certificate,
    })
}

/// Limits for [`is_permissive`] with the documented default cap.
pub fn permissive_limits() -> Limits {
    Limits {
        max_candidates: DEFAULT_PERMISSIVE_CAP,
        ..Limits::default()
    }
}

/// `(β̂, γ̂) = (β · max |J(i,j)|, γ · max |h(i)|)` with `β`, `γ` the largest
/// absolute edge and vertex weights of `gw`; `J` ranges over finite entries.
pub fn potentials_hat<T: Scalar>(s: &SpinSystem<T>, gw: &WeightedGraph<T>) -> Result<(T, T)> {
    let j = s
        .max_abs_coupling()
        .ok_or_else(|| Error::InvalidParameter("edge potential has no finite entry".into()))?;
    Ok((
        gw.max_abs_edge_weight() * j,
        gw.max_abs_vertex_weight() * s.max_abs_field(),
    ))
}

/// Logarithm of the block lower bound `q^{−|R|} e^{−2(β̂d|R| + γ̂)}` as
/// stated for conditional block probabilities.
pub fn log_block_bound(q: usize, d: usize, r: usize, beta_hat: f64, gamma_hat: f64) -> f64 {
    let r = r as f64;
    -r * (q as f64).ln() - 2.0 * (beta_hat * d as f64 * r + gamma_hat)
}

/// Logarithm of `q^{−|R|} e^{−2|R|(β̂d + γ̂)}`, where the vertex term grows
/// with the block size.
pub fn log_block_bound_scaled(q: usize, d: usize, r: usize, beta_hat: f64, gamma_hat: f64) -> f64 {
    let r = r as f64;
    -r * (q as f64).ln() - 2.0 * r * (beta_hat * d as f64 + gamma_hat)
}
