//! Exact samplers based on self-reducibility and an approximate single-site
//! heat-bath (Glauber) sampler.
//!
//! Exact draws fix vertices in index order. The number (or log-weight) of
//! completions of a prefix depends only on the colors of the already fixed
//! vertices that still have unfixed neighbors, so these sums are memoized on
//! that frontier and shared across draws.
//!
//! Randomness: every exact draw `k` uses `ChaCha8Rng` seeded with `seed` on
//! stream `k`, so draws are independent of thread scheduling and a sample set
//! can be extended without regenerating it. A Glauber chain uses stream 0 and
//! stores its word position for the same purpose.

use std::collections::HashMap;
use std::sync::RwLock;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::csp::{Budget, Csp, Search};
use crate::enumeration::{Limits, LogSumExp};
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::model::{Color, Coloring, ConstraintGraph, SpinSystem, TargetGraph, WeightedGraph};

/// How a [`SampleSet`] was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SamplingMethod {
    Exact,
    GibbsExact,
    Glauber { burn_in: u64, thinning: u64 },
}

/// Saved Glauber chain position, used to extend a sample set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainState {
    pub state: Vec<Color>,
    pub word_pos: u128,
    pub steps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    /// SHA-256 of the canonical description of the sampled model.
    pub descriptor: String,
    pub n: usize,
    pub seed: u64,
    pub method: SamplingMethod,
    pub approximate: bool,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default)]
    pub chain: Option<ChainState>,
    pub samples: Vec<Coloring>,
}

impl SampleSet {
    /// Number of samples `L`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Wraps externally produced samples.
    pub fn from_samples(n: usize, samples: Vec<Coloring>) -> Self {
        Self {
            descriptor: String::new(),
            n,
            seed: 0,
            method: SamplingMethod::Exact,
            approximate: false,
            warnings: Vec::new(),
            chain: None,
            samples,
        }
    }

    /// The first `l` samples.
    pub fn prefix(&self, l: usize) -> Self {
        let mut out = self.clone();
        out.samples.truncate(l);
        out
    }
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Hash identifying a constraint graph in sample metadata.
pub fn constraint_descriptor(h: &ConstraintGraph) -> String {
    let edges: Vec<String> = h.edges().map(|(a, b)| format!("{a}-{b}")).collect();
    sha256_hex(&format!("H;q={};edges={}", h.q(), edges.join(",")))
}

fn system_descriptor(s: &SpinSystem<f64>, gw: &WeightedGraph<f64>) -> String {
    sha256_hex(&format!("S;{s:?};{gw:?}"))
}

fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Vertex-order bookkeeping shared by both exact samplers.
struct Order {
    n: usize,
    /// `frontier[k]`: vertices `< k` with a neighbor `>= k`.
    frontier: Vec<Vec<usize>>,
    /// `back[k]`: neighbors of `k` that come before it.
    back: Vec<Vec<usize>>,
}

impl Order {
    fn new(g: &TargetGraph) -> Self {
        let n = g.n();
        let back: Vec<Vec<usize>> = (0..n)
            .map(|k| g.neighbors(k).iter().copied().filter(|&u| u < k).collect())
            .collect();
        let last: Vec<usize> = (0..n)
            .map(|u| g.neighbors(u).iter().copied().max().unwrap_or(0))
            .collect();
        let frontier = (0..=n)
            .map(|k| (0..k).filter(|&u| last[u] >= k).collect())
            .collect();
        Self { n, frontier, back }
    }

    fn width(&self) -> usize {
        self.frontier.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn key(&self, k: usize, sigma: &[Color]) -> (usize, Vec<u8>) {
        (
            k,
            self.frontier[k].iter().map(|&u| sigma[u] as u8).collect(),
        )
    }
}

/// Memoized completion counts for uniform sampling.
struct ExtensionCounter<'a> {
    h: &'a ConstraintGraph,
    order: Order,
    cache: RwLock<HashMap<(usize, Vec<u8>), BigUint>>,
}

impl<'a> ExtensionCounter<'a> {
    fn new(h: &'a ConstraintGraph, g: &TargetGraph) -> Self {
        Self {
            h,
            order: Order::new(g),
            cache: RwLock::new(HashMap::new()),
        }
    }

    fn allowed(&self, k: usize, sigma: &[Color], c: Color) -> bool {
        self.order.back[k]
            .iter()
            .all(|&u| self.h.compatible(sigma[u], c))
    }

    /// Completions of `sigma[..k]`; `sigma[k..]` is scratch space.
    fn count(&self, k: usize, sigma: &mut [Color]) -> BigUint {
        if k == self.order.n {
            return BigUint::one();
        }
        let key = self.order.key(k, sigma);
        if let Some(c) = self.cache.read().expect("cache lock").get(&key) {
            return c.clone();
        }
        let mut total = BigUint::zero();
        for c in 0..self.h.q() {
            if self.allowed(k, sigma, c) {
                sigma[k] = c;
                total += self.count(k + 1, sigma);
            }
        }
        self.cache
            .write()
            .expect("cache lock")
            .insert(key, total.clone());
        total
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Coloring {
        let n = self.order.n;
        let mut sigma = vec![0; n];
        let total = self.count(0, &mut sigma);
        let mut r = rng.gen_biguint_below(&total);
        for k in 0..n {
            for c in 0..self.h.q() {
                if !self.allowed(k, &sigma, c) {
                    continue;
                }
                sigma[k] = c;
                let cnt = self.count(k + 1, &mut sigma);
                if r < cnt {
                    break;
                }
                r -= cnt;
            }
        }
        Coloring(sigma)
    }
}

fn exact_draws(
    h: &ConstraintGraph,
    g: &TargetGraph,
    seed: u64,
    from: usize,
    to: usize,
    limits: Limits,
) -> Result<Vec<Coloring>> {
    let counter = ExtensionCounter::new(h, g);
    limits.check_space(h.q(), counter.order.width())?;
    let mut scratch = vec![0; g.n()];
    if counter.count(0, &mut scratch).is_zero() {
        return Err(Error::Unsatisfiable);
    }
    Ok((from..to)
        .into_par_iter()
        .map(|k| counter.draw(&mut stream_rng(seed, k as u64)))
        .collect())
}

/// `l` independent uniform draws from the `H`-colorings of `G`.
pub fn exact_sample(
    h: &ConstraintGraph,
    g: &TargetGraph,
    l: usize,
    seed: u64,
) -> Result<SampleSet> {
    exact_sample_with(h, g, l, seed, Limits::default())
}

/// [`exact_sample`] with explicit size limits; the cap applies to `q^w` where
/// `w` is the widest frontier of the vertex order.
pub fn exact_sample_with(
    h: &ConstraintGraph,
    g: &TargetGraph,
    l: usize,
    seed: u64,
    limits: Limits,
) -> Result<SampleSet> {
    Ok(SampleSet {
        descriptor: constraint_descriptor(h),
        n: g.n(),
        seed,
        method: SamplingMethod::Exact,
        approximate: false,
        warnings: Vec::new(),
        chain: None,
        samples: exact_draws(h, g, seed, 0, l, limits)?,
    })
}

/// Appends `extra` draws; the result equals a single call with `L + extra`.
pub fn extend_exact(
    set: &mut SampleSet,
    h: &ConstraintGraph,
    g: &TargetGraph,
    extra: usize,
) -> Result<()> {
    check_extend(set, SamplingMethod::Exact, &constraint_descriptor(h))?;
    let from = set.len();
    set.samples.extend(exact_draws(
        h,
        g,
        set.seed,
        from,
        from + extra,
        Limits::default(),
    )?);
    Ok(())
}

fn check_extend(set: &SampleSet, method: SamplingMethod, descriptor: &str) -> Result<()> {
    if set.method != method {
        return Err(Error::InvalidParameter(
            "sample set was produced by another method".into(),
        ));
    }
    if set.descriptor != descriptor {
        return Err(Error::InvalidParameter(
            "sample set belongs to another model".into(),
        ));
    }
    Ok(())
}

/// Memoized log-partition functions of suffixes for exact Gibbs sampling.
struct LogExtension<'a> {
    s: &'a SpinSystem<f64>,
    gw: &'a WeightedGraph<f64>,
    order: Order,
    cache: RwLock<HashMap<(usize, Vec<u8>), f64>>,
}

impl<'a> LogExtension<'a> {
    fn new(s: &'a SpinSystem<f64>, gw: &'a WeightedGraph<f64>) -> Self {
        Self {
            s,
            gw,
            order: Order::new(gw.graph()),
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// Log-weight of the factors that `c` at `k` adds to `sigma[..k]`.
    fn local(&self, k: usize, sigma: &[Color], c: Color) -> Option<f64> {
        let mut acc = self.gw.vertex_weight(k) * self.s.field(c);
        for &u in &self.order.back[k] {
            let j = self.s.coupling(sigma[u], c).finite()?;
            acc += self.gw.edge_weight(u, k).expect("edge weight") * j;
        }
        Some(acc)
    }

    fn log_sum(&self, k: usize, sigma: &mut [Color]) -> f64 {
        if k == self.order.n {
            return 0.0;
        }
        let key = self.order.key(k, sigma);
        if let Some(&w) = self.cache.read().expect("cache lock").get(&key) {
            return w;
        }
        let mut lse = LogSumExp::new();
        for c in 0..self.s.q() {
            if let Some(x) = self.local(k, sigma, c) {
                sigma[k] = c;
                let rest = self.log_sum(k + 1, sigma);
                if rest > f64::NEG_INFINITY {
                    lse.add(x + rest);
                }
            }
        }
        let w = lse.value().unwrap_or(f64::NEG_INFINITY);
        self.cache.write().expect("cache lock").insert(key, w);
        w
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Coloring {
        let n = self.order.n;
        let q = self.s.q();
        let mut sigma = vec![0; n];
        let mut logs = vec![f64::NEG_INFINITY; q];
        for k in 0..n {
            for c in 0..q {
                logs[c] = match self.local(k, &sigma, c) {
                    Some(x) => {
                        sigma[k] = c;
                        x + self.log_sum(k + 1, &mut sigma)
                    }
                    None => f64::NEG_INFINITY,
                };
            }
            let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let weights: Vec<f64> = logs.iter().map(|&x| (x - top).exp()).collect();
            sigma[k] = pick(&weights, rng);
        }
        Coloring(sigma)
    }
}

/// Index drawn proportionally to nonnegative `weights`.
fn pick(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut r = rng.gen::<f64>() * total;
    let mut last = 0;
    for (c, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = c;
        if r < w {
            return c;
        }
        r -= w;
    }
    last
}

fn gibbs_draws(
    s: &SpinSystem<f64>,
    gw: &WeightedGraph<f64>,
    seed: u64,
    from: usize,
    to: usize,
    limits: Limits,
) -> Result<Vec<Coloring>> {
    let ext = LogExtension::new(s, gw);
    limits.check_space(s.q(), ext.order.width())?;
    let mut scratch = vec![0; gw.graph().n()];
    if ext.log_sum(0, &mut scratch) == f64::NEG_INFINITY {
        return Err(Error::Unsatisfiable);
    }
    Ok((from..to)
        .into_par_iter()
        .map(|k| ext.draw(&mut stream_rng(seed, k as u64)))
        .collect())
}

/// `l` independent exact draws from the Gibbs distribution of `(S, Gw)`.
pub fn gibbs_sample_exact(
    s: &SpinSystem<f64>,
    gw: &WeightedGraph<f64>,
    l: usize,
    seed: u64,
) -> Result<SampleSet> {
    Ok(SampleSet {
        descriptor: system_descriptor(s, gw),
        n: gw.graph().n(),
        seed,
        method: SamplingMethod::GibbsExact,
        approximate: false,
        warnings: Vec::new(),
        chain: None,
        samples: gibbs_draws(s, gw, seed, 0, l, Limits::default())?,
    })
}

pub fn extend_gibbs_exact(
    set: &mut SampleSet,
    s: &SpinSystem<f64>,
    gw: &WeightedGraph<f64>,
    extra: usize,
) -> Result<()> {
    check_extend(set, SamplingMethod::GibbsExact, &system_descriptor(s, gw))?;
    let from = set.len();
    set.samples.extend(gibbs_draws(
        s,
        gw,
        set.seed,
        from,
        from + extra,
        Limits::default(),
    )?);
    Ok(())
}

/// Starting state of a Glauber chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GlauberInit {
    /// First valid configuration found by backtracking.
    Greedy,
    Given(Coloring),
}

/// Heat-bath chain parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GlauberParams {
    pub burn_in: u64,
    pub thinning: u64,
    pub seed: u64,
}

struct Chain<'m, M> {
    m: &'m M,
    rng: ChaCha8Rng,
    state: Vec<Color>,
    steps: u64,
    frozen_sites: u64,
    weights: Vec<f64>,
}

impl<M: Measure<f64>> Chain<'_, M> {
    fn step(&mut self) {
        let g = self.m.graph();
        let v = self.rng.gen_range(0..g.n());
        for c in 0..self.m.q() {
            let mut w = self.m.vertex_factor(v, c);
            for &x in g.neighbors(v) {
                match self.m.edge_factor(v, x, c, self.state[x]) {
                    Some(f) => w *= f,
                    None => {
                        w = 0.0;
                        break;
                    }
                }
            }
            self.weights[c] = w;
        }
        if self.weights.iter().filter(|&&w| w > 0.0).count() == 1 {
            self.frozen_sites += 1;
        }
        self.state[v] = pick(&self.weights, &mut self.rng);
        self.steps += 1;
    }
}

fn glauber_descriptor<M: Measure<f64>>(m: &M) -> String {
    let h = m.support();
    sha256_hex(&format!(
        "glauber;{};{:?}",
        constraint_descriptor(&h),
        m.graph()
    ))
}

fn initial_state<M: Measure<f64>>(m: &M, init: &GlauberInit) -> Result<Vec<Color>> {
    let g = m.graph();
    match init {
        GlauberInit::Given(sigma) => {
            sigma.check(g.n(), m.q())?;
            if m.weight(sigma.as_slice()) <= 0.0 {
                return Err(Error::InvalidParameter(
                    "initial configuration has zero weight".into(),
                ));
            }
            Ok(sigma.0.clone())
        }
        GlauberInit::Greedy => {
            match Csp::colorings(&m.support(), g).find_first(&mut Budget::unlimited()) {
                Search::Found(s) => Ok(s),
                _ => Err(Error::Unsatisfiable),
            }
        }
    }
}

fn run_chain<M: Measure<f64>>(
    chain: &mut Chain<'_, M>,
    burn: u64,
    thinning: u64,
    l: usize,
) -> Vec<Coloring> {
    for _ in 0..burn {
        chain.step();
    }
    let mut out = Vec::with_capacity(l);
    for _ in 0..l {
        for _ in 0..thinning.max(1) {
            chain.step();
        }
        out.push(Coloring(chain.state.clone()));
    }
    out
}

fn frozen_warning(count: u64) -> String {
    format!("possibly non-ergodic: {count} updates had a single admissible color")
}

/// Approximate samples from `m` by single-site heat-bath dynamics: after
/// `burn_in` updates, one sample is recorded every `thinning` updates.
/// The result is flagged `approximate`, with a warning when some update had
/// only one admissible color.
pub fn glauber_sample<M: Measure<f64>>(
    m: &M,
    l: usize,
    params: GlauberParams,
    init: GlauberInit,
) -> Result<SampleSet> {
    let g = m.graph();
    if g.n() == 0 {
        return Err(Error::InvalidParameter("graph has no vertices".into()));
    }
    let state = initial_state(m, &init)?;
    let mut chain = Chain {
        m,
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        state,
        steps: 0,
        frozen_sites: 0,
        weights: vec![0.0; m.q()],
    };
    let samples = run_chain(&mut chain, params.burn_in, params.thinning, l);
    let warnings = if chain.frozen_sites > 0 {
        vec![frozen_warning(chain.frozen_sites)]
    } else {
        Vec::new()
    };
    Ok(SampleSet {
        descriptor: glauber_descriptor(m),
        n: g.n(),
        seed: params.seed,
        method: SamplingMethod::Glauber {
            burn_in: params.burn_in,
            thinning: params.thinning,
        },
        approximate: true,
        warnings,
        chain: Some(ChainState {
            state: chain.state,
            word_pos: chain.rng.get_word_pos(),
            steps: chain.steps,
        }),
        samples,
    })
}

/// Continues the chain saved in `set` for `extra` more recorded samples.
pub fn extend_glauber<M: Measure<f64>>(set: &mut SampleSet, m: &M, extra: usize) -> Result<()> {
    let SamplingMethod::Glauber { thinning, .. } = set.method else {
        return Err(Error::InvalidParameter(
            "sample set was not produced by Glauber dynamics".into(),
        ));
    };
    check_extend(set, set.method, &glauber_descriptor(m))?;
    let saved = set
        .chain
        .clone()
        .ok_or_else(|| Error::InvalidParameter("missing chain state".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(set.seed);
    rng.set_word_pos(saved.word_pos);
    let mut chain = Chain {
        m,
        rng,
        state: saved.state,
        steps: saved.steps,
        frozen_sites: 0,
        weights: vec![0.0; m.q()],
    };
    let more = run_chain(&mut chain, 0, thinning, extra);
    set.samples.extend(more);
    if chain.frozen_sites > 0 && set.warnings.is_empty() {
        set.warnings.push(frozen_warning(chain.frozen_sites));
    }
    set.chain = Some(ChainState {
        state: chain.state,
        word_pos: chain.rng.get_word_pos(),
        steps: chain.steps,
    });
    Ok(())
}
