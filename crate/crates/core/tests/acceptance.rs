//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use hcolor::conditions::{
    influence_matrix, is_permissive, log_block_bound, log_block_bound_scaled, permissive_limits,
    potentials_hat, InfluenceOptions, PermissiveMode, UndefinedPolicy,
};
use hcolor::enumeration::{count_colorings, support_equal, tv_distance, Limits};
use hcolor::experiments::{
    learn_curve, ConstraintSpec, ExperimentConfig, GraphSource, LSchedule, SamplerChoice,
};
use hcolor::gadgets::{
    gen_f, gen_gmt, gen_hardcore, gen_nonid_pair, gen_weakbound, random_bounded_degree_p,
    GmtLayout, WeakBoundLayout,
};
use hcolor::identifiability::{
    is_identifiable, is_identifiable_weighted, weighted_counterexample, IdReason, IdStatus,
};
use hcolor::learner::{
    delta_colorings, delta_dobrushin, delta_permissive, eta, gmt_eta_exact, gmt_eta_upper_bound,
    gmt_growth, sample_bound_generic, struct_learn, tv_bound_samples, LearnMode, LowerBound,
};
use hcolor::measure::{block_conditional, Gibbs, Uniform};
use hcolor::sampling::{exact_sample, glauber_sample, GlauberInit, GlauberParams};
use hcolor::scalar::ratio;
use hcolor::{
    build_gij, Coloring, ConstraintGraph, Potential, SpinSystem, TargetGraph, WeightedGraph,
};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use common::{assignments, brute_colorings, dfs_count, gibbs_weight, is_coloring};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn factorial(k: u128) -> u128 {
    (1..=k).product()
}

fn gadget_counts() -> Outcome {
    let (q, t, m) = (3usize, 2usize, 2usize);
    let lo = gen_gmt(q, t, m, &[false, false]).unwrap();
    let hi = gen_gmt(q, t, m, &[true, true]).unwrap();
    let h = ConstraintGraph::complete(q).unwrap();
    let l = GmtLayout { q, t, m };
    let (i1, i1p) = (l.i_set(0, 0), l.i_prime(0, 0));
    let qq = q as u128;
    let f = factorial(qq - 1).pow(2 * m as u32);
    let same_formula = qq * (qq - 1).pow(m as u32) * f;
    let distinct_formula = qq * (qq - 1) * (qq - 2).pow(m as u32) * f;
    let same: u128 = (0..q)
        .map(|c| dfs_count(&h, &lo, &[(i1, c), (i1p, c)]))
        .sum();
    let total = dfs_count(&h, &lo, &[]);
    let lib_total = count_colorings(&h, &lo).count;
    let rep = eta(&h, &lo, &hi).unwrap();
    let eta_exact = ratio(1, 1) - ratio(dfs_count(&h, &hi, &[]) as i64, total as i64);
    let bound = gmt_eta_upper_bound(q, m);
    let gmt_ok = total == 288
        && same == 192
        && total - same == 96
        && same == same_formula
        && total - same == distinct_formula
        && lib_total == BigUint::from(288u32)
        && rep.eta == ratio(1, 4)
        && eta_exact == ratio(1, 4)
        && rep.eta.to_f64().unwrap() <= bound;

    let (q, d, n) = (3usize, 5usize, 7usize);
    let g = gen_weakbound(q, d, n, 1).unwrap();
    let wl = WeakBoundLayout { q, d, n };
    let (u, v) = (wl.u(), wl.v());
    let mut eq = 0u128;
    let mut ne = 0u128;
    for a in 0..q {
        for b in 0..q {
            let c = dfs_count(&h, &g, &[(u, a), (v, b)]);
            if a == b {
                eq += c;
            } else {
                ne += c;
            }
        }
    }
    let base = factorial(q as u128) * (q as u128 - 1).pow((n - d) as u32);
    let weak_ok = ne == 24
        && eq == 96
        && ne == base
        && eq == base * 2u128.pow((d - q) as u32)
        && count_colorings(&h, &g).count == BigUint::from(120u32);
    outcome(
        gmt_ok && weak_ok,
        format!(
            "G_mt total {total} same {same} distinct {} eta {} (bound {bound:.4}); weak-bound u!=v {ne} u=v {eq}",
            total - same,
            rep.eta
        ),
    )
}

fn non_identifiable_pairs() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (q, n) in [(2, 4), (3, 5), (3, 7), (4, 6)] {
        let h = ConstraintGraph::complete(q).unwrap();
        let (g, g2) = gen_nonid_pair(q, n).unwrap();
        let lib = support_equal(&h, &g, &g2, Limits::default()).unwrap();
        let oracle = brute_colorings(&h, &g) == brute_colorings(&h, &g2);
        ok &= lib && oracle && g != g2 && g.max_degree() <= q && g2.max_degree() <= q;
        notes.push(format!("({q},{n}):{lib}"));
    }
    outcome(ok, format!("support_equal {}", notes.join(" ")))
}

fn witness_is_valid(h: &ConstraintGraph, i: usize, j: usize, w: &Coloring) -> bool {
    let gij = build_gij(h, i, j).unwrap();
    let s = w.as_slice();
    s.len() == gij.graph.n()
        && is_coloring(h, &gij.graph, s)
        && !h.compatible(s[gij.i_prime()], s[gij.j_prime()])
}

fn identifiability_verdicts() -> Outcome {
    let hc = is_identifiable(&gen_hardcore(), None).unwrap();
    let hc_ok = hc.status == IdStatus::Identifiable(IdReason::SelfLoop);

    let k3 = ConstraintGraph::complete(3).unwrap();
    let v = is_identifiable(&k3, None).unwrap();
    let k3_ok = v.status == IdStatus::NotIdentifiable((0, 1))
        && v.certificates
            .get(&(0, 1))
            .is_some_and(|c| c.colorings == BigUint::from(6u32))
        && brute_colorings(&k3, &build_gij(&k3, 0, 1).unwrap().graph).len() == 6;

    let f = gen_f(32).unwrap();
    let start = Instant::now();
    let vf = is_identifiable(&f, Some(Duration::from_secs(600))).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let witnesses_ok = vf.witnesses.len() == 131
        && f.edges().all(|(i, j)| {
            vf.witnesses
                .get(&(i, j))
                .is_some_and(|w| witness_is_valid(&f, i, j, w))
        });
    let f_ok = vf.status == IdStatus::Identifiable(IdReason::AllEdgesWitnessed)
        && witnesses_ok
        && secs <= 600.0;
    outcome(
        hc_ok && k3_ok && f_ok,
        format!(
            "hard-core {:?}; K_3 {:?}; F(32) {:?} with {} witnesses in {secs:.1}s",
            hc.status,
            v.status,
            vf.status,
            vf.witnesses.len()
        ),
    )
}

fn same_color_bound() -> Outcome {
    let mut graphs = 0;
    let mut pairs = 0;
    let mut violations = 0;
    let mut min_ratio = f64::INFINITY;
    for n in 2..=6 {
        for g in hcolor::experiments::connected_graphs(n).unwrap() {
            graphs += 1;
            let d = g.max_degree();
            let q = d + 1;
            let h = ConstraintGraph::complete(q).unwrap();
            let all = brute_colorings(&h, &g);
            let bound: BigRational = delta_colorings(q, d).unwrap();
            for (u, v) in g.non_edges() {
                pairs += 1;
                let same = all.iter().filter(|s| s[u] == s[v]).count();
                let p = ratio(same as i64, all.len() as i64);
                if p < bound {
                    violations += 1;
                }
                min_ratio = min_ratio.min((p / &bound).to_f64().unwrap());
            }
        }
    }
    outcome(
        violations == 0 && graphs == 1 + 2 + 6 + 21 + 112,
        format!("{graphs} graphs, {pairs} non-adjacent pairs, {violations} violations, min p/bound {min_ratio:.3}"),
    )
}

/// Exact `Pr[X_u = i, X_v = j]` for uniform colorings.
fn uniform_joint(all: &[Vec<usize>], u: usize, v: usize, i: usize, j: usize) -> BigRational {
    ratio(
        all.iter().filter(|s| s[u] == i && s[v] == j).count() as i64,
        all.len() as i64,
    )
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, d: usize) -> TargetGraph {
    let p = rng.gen_range(0.3..1.0) * d.min(n - 1) as f64 / (n - 1) as f64;
    random_bounded_degree_p(n, d, p, rng, 1_000_000).unwrap()
}

fn dobrushin_bound() -> Outcome {
    let h = ConstraintGraph::complete(3).unwrap();
    let edge = TargetGraph::new(2, [(0, 1)]).unwrap();
    let fixture =
        influence_matrix::<BigRational, _>(&Uniform::new(&h, &edge), &InfluenceOptions::default())
            .unwrap();
    let fixture_ok = fixture.alpha == ratio(1, 2);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut instances = 0;
    let mut checks = 0;
    let mut violations = 0;
    let mut attempts = 0;
    // Undefined conditionals count as full influence.
    let opts = InfluenceOptions {
        undefined: UndefinedPolicy::TreatAsOne,
        ..InfluenceOptions::default()
    };
    while instances < 60 && attempts < 2000 {
        attempts += 1;
        let n = rng.gen_range(3..=7);
        if rng.gen_bool(0.5) {
            let q = rng.gen_range(5..=6);
            let g = random_graph(&mut rng, n, 2);
            let h = ConstraintGraph::complete(q).unwrap();
            let rep = influence_matrix::<BigRational, _>(&Uniform::new(&h, &g), &opts).unwrap();
            if rep.alpha >= BigRational::one() {
                continue;
            }
            let bound = delta_dobrushin(q, &rep.alpha).unwrap();
            let all = brute_colorings(&h, &g);
            for (u, v) in g.non_edges() {
                for (i, j) in h.hard_constraints() {
                    for (a, b) in [(i, j), (j, i)] {
                        checks += 1;
                        if uniform_joint(&all, u, v, a, b) < bound {
                            violations += 1;
                        }
                    }
                }
            }
        } else {
            let q = rng.gen_range(2..=3);
            let pairs: Vec<(usize, usize)> =
                (0..q).flat_map(|a| (a..q).map(move |b| (a, b))).collect();
            let h =
                ConstraintGraph::new(q, pairs.into_iter().filter(|_| rng.gen_bool(0.7))).unwrap();
            if !h.has_hard_constraint() {
                continue;
            }
            let d = rng.gen_range(1..=3);
            let g = random_graph(&mut rng, n, d);
            let all = brute_colorings(&h, &g);
            if all.is_empty() {
                continue;
            }
            let rep = influence_matrix::<BigRational, _>(&Uniform::new(&h, &g), &opts).unwrap();
            if rep.alpha >= BigRational::one() {
                continue;
            }
            let bound = delta_dobrushin(q, &rep.alpha).unwrap();
            for (u, v) in g.non_edges() {
                for (i, j) in h.hard_constraints() {
                    for (a, b) in [(i, j), (j, i)] {
                        checks += 1;
                        if uniform_joint(&all, u, v, a, b) < bound {
                            violations += 1;
                        }
                    }
                }
            }
        }
        instances += 1;
    }
    outcome(
        fixture_ok && instances >= 50 && violations == 0,
        format!(
            "single-edge alpha {}; {instances} instances with alpha < 1, {checks} checks, {violations} violations",
            fixture.alpha
        ),
    )
}

/// `Pr[X_u = 1, X_v = 1]` for the hard-core model with fugacity `lambda` and
/// vertex weights `theta`, by brute force.
fn hard_core_pair_probs(
    g: &TargetGraph,
    lambda: f64,
    theta: &[f64],
) -> BTreeMap<(usize, usize), f64> {
    let n = g.n();
    let hfield = [0.0, lambda.ln()];
    let edges: Vec<(usize, usize, f64)> = g.edges().map(|(u, v)| (u, v, 1.0)).collect();
    let j = |a: usize, b: usize| if a == 1 && b == 1 { None } else { Some(0.0) };
    let mut z = 0.0;
    let mut acc: BTreeMap<(usize, usize), f64> =
        g.non_edges().into_iter().map(|p| (p, 0.0)).collect();
    for s in assignments(n, 2) {
        let w = gibbs_weight(&j, &hfield, &edges, theta, &s);
        z += w;
        for (&(u, v), x) in acc.iter_mut() {
            if s[u] == 1 && s[v] == 1 {
                *x += w;
            }
        }
    }
    acc.values_mut().for_each(|x| *x /= z);
    acc
}

fn permissive_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut instances = 0;
    let mut pair_checks = 0;
    let mut pair_viol = 0;
    let mut block_checks = 0;
    let mut block_viol = 0;
    let mut scaled_viol = 0;
    let mut large_checks = 0;
    let mut large_stated_viol = 0;
    let mut all_permissive = true;
    while instances < 60 {
        let n = rng.gen_range(3..=7);
        let d = rng.gen_range(1..=3);
        let g = random_graph(&mut rng, n, d);
        let lambda = rng.gen_range(-1.0f64..=1.0).exp();
        let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let s = SpinSystem::hard_core(lambda);
        let ew = g.edges().map(|e| (e, rng.gen_range(0.5..1.5))).collect();
        let gw = WeightedGraph::new(g.clone(), ew, theta.clone()).unwrap();
        all_permissive &= is_permissive(
            &gen_hardcore(),
            &g,
            PermissiveMode::Full,
            &permissive_limits(),
        )
        .unwrap()
        .permissive;
        let (beta_hat, gamma_hat) = potentials_hat(&s, &gw).unwrap();
        let dg = g.max_degree();
        let bound = delta_permissive(2, dg, beta_hat, gamma_hat).unwrap();
        let probs = hard_core_pair_probs(&g, lambda, &theta);
        for p in probs.values() {
            pair_checks += 1;
            if *p < bound {
                pair_viol += 1;
            }
        }
        // Block conditionals: random regions, all boundary colorings that
        // leave the block satisfiable.
        let m = Gibbs::new(&s, &gw);
        for _ in 0..4 {
            let size = rng.gen_range(1..=n.min(5));
            let mut region: Vec<usize> = (0..n).collect();
            for k in 0..size {
                let r = rng.gen_range(k..n);
                region.swap(k, r);
            }
            region.truncate(size);
            region.sort_unstable();
            let outside: Vec<usize> = (0..n).filter(|v| !region.contains(v)).collect();
            for tau in assignments(outside.len(), 2) {
                let mut full = vec![0; n];
                for (&v, &c) in outside.iter().zip(&tau) {
                    full[v] = c;
                }
                let Some(law) = block_conditional(&m, &region, &full) else {
                    continue;
                };
                let stated = log_block_bound(2, dg, size, beta_hat, gamma_hat);
                let scaled = log_block_bound_scaled(2, dg, size, beta_hat, gamma_hat);
                for (_, p) in law {
                    let lp = p.ln();
                    if lp < scaled - 1e-12 {
                        scaled_viol += 1;
                    }
                    if size <= 3 {
                        block_checks += 1;
                        if lp < stated - 1e-12 {
                            block_viol += 1;
                        }
                    } else {
                        large_checks += 1;
                        if lp < stated - 1e-12 {
                            large_stated_viol += 1;
                        }
                    }
                }
            }
        }
        instances += 1;
    }
    outcome(
        all_permissive && pair_viol == 0 && block_viol == 0 && scaled_viol == 0,
        format!(
            "{instances} instances; pair bound {pair_checks} checks / {pair_viol} violations; block bound |R|<=3 {block_checks} / {block_viol}; \
             scaled block bound {scaled_viol} violations; unscaled bound on |R|>=4: {large_stated_viol} of {large_checks} below (informational)"
        ),
    )
}

fn end_to_end_learning() -> Outcome {
    let (q, d, n, eps) = (4usize, 3usize, 8usize, 0.1);
    let delta = delta_colorings::<f64>(q, d).unwrap();
    let l = sample_bound_generic(delta, n, eps).unwrap() as usize;
    let expected =
        (8.0 * (q * (d + 1).pow(3)) as f64 * ((n * n) as f64 / (2.0 * eps)).ln()).ceil() as usize;
    let cfg = ExperimentConfig {
        h: ConstraintSpec::of(&ConstraintGraph::complete(q).unwrap()),
        graph: GraphSource::Random { n, d },
        trials: 100,
        epsilon: eps,
        schedule: LSchedule::List { values: vec![l] },
        seed: 2024,
        sampler: SamplerChoice::Exact,
        mode: LearnMode::AnyIncompatible,
    };
    let start = Instant::now();
    let rows = learn_curve(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let rate = rows[0].success_rate;
    outcome(
        l == expected && rate >= 0.9 && secs <= 600.0,
        format!(
            "L = {l}; exact recovery {}/100; {secs:.1}s",
            rows[0].successes
        ),
    )
}

fn approximate_learning() -> Outcome {
    let h = ConstraintGraph::complete(3).unwrap();
    let (g, _) = gen_nonid_pair(3, 5).unwrap();
    let l = tv_bound_samples(0.2, 5, 0.1).unwrap() as usize;
    let gamma = ratio(1, 5);
    let mut close = 0;
    let mut supergraph = true;
    for t in 0..100u64 {
        let samples = exact_sample(&h, &g, l, 1000 + t).unwrap().samples;
        let est = struct_learn(&h, 5, &samples, LearnMode::AnyIncompatible)
            .unwrap()
            .estimate;
        supergraph &= g.is_subgraph_of(&est);
        if tv_distance(&h, &g, &est).unwrap() < gamma {
            close += 1;
        }
    }
    outcome(
        supergraph && close >= 90,
        format!("L = {l}; TV < 0.2 in {close}/100 trials; supergraph every trial: {supergraph}"),
    )
}

fn chi_square_p(counts: &[u64], total: u64) -> f64 {
    let k = counts.len() as f64;
    let e = total as f64 / k;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    1.0 - ChiSquared::new(k - 1.0).unwrap().cdf(stat)
}

fn sampler_correctness() -> Outcome {
    let k3 = ConstraintGraph::complete(3).unwrap();
    let fixtures = vec![
        (
            "K3/edge",
            k3.clone(),
            TargetGraph::new(2, [(0, 1)]).unwrap(),
        ),
        (
            "K3/P3",
            k3.clone(),
            TargetGraph::new(3, [(0, 1), (1, 2)]).unwrap(),
        ),
        (
            "K3/C4",
            k3.clone(),
            TargetGraph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap(),
        ),
        (
            "hardcore/P4",
            gen_hardcore(),
            TargetGraph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap(),
        ),
        (
            "hardcore/C5",
            gen_hardcore(),
            TargetGraph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap(),
        ),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    let total = 100_000u64;
    for (name, h, g) in &fixtures {
        let support = brute_colorings(h, g);
        let index: BTreeMap<Vec<usize>, usize> = support
            .iter()
            .cloned()
            .enumerate()
            .map(|(k, s)| (s, k))
            .collect();
        let mut counts = vec![0u64; support.len()];
        for s in exact_sample(h, g, total as usize, 99).unwrap().samples {
            match index.get(s.as_slice()) {
                Some(&k) => counts[k] += 1,
                None => ok = false,
            }
        }
        let p = chi_square_p(&counts, total);
        ok &= support.len() <= 30 && p > 0.001;
        notes.push(format!("{name}(|Ω|={}, p={p:.3})", support.len()));
    }

    let k4 = ConstraintGraph::complete(4).unwrap();
    let tri = TargetGraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
    let (burn_in, thinning, l) = (1000, 10, 20_000);
    let set = glauber_sample(
        &Uniform::new(&k4, &tri),
        l,
        GlauberParams {
            burn_in,
            thinning,
            seed: 5,
        },
        GlauberInit::Greedy,
    )
    .unwrap();
    let all = brute_colorings(&k4, &tri);
    let mut max_dev: f64 = 0.0;
    for (u, v) in [(0, 1), (1, 2), (0, 2)] {
        for a in 0..4 {
            for b in 0..4 {
                let exact = uniform_joint(&all, u, v, a, b).to_f64().unwrap();
                let emp = set
                    .samples
                    .iter()
                    .filter(|s| s.0[u] == a && s.0[v] == b)
                    .count() as f64
                    / l as f64;
                max_dev = max_dev.max((exact - emp).abs());
            }
        }
    }
    for v in 0..3 {
        for a in 0..4 {
            let emp = set.samples.iter().filter(|s| s.0[v] == a).count() as f64 / l as f64;
            max_dev = max_dev.max((0.25 - emp).abs());
        }
    }
    ok &= max_dev <= 0.02 && set.approximate;
    outcome(
        ok,
        format!(
            "chi-square: {}; Glauber K4/triangle burn-in {burn_in}, thinning {thinning}: max marginal deviation {max_dev:.4}",
            notes.join(", ")
        ),
    )
}

fn learner_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut cases = 0;
    let mut failures = 0;
    while cases < 600 {
        let q = rng.gen_range(2..=4);
        let pairs: Vec<(usize, usize)> = (0..q).flat_map(|a| (a..q).map(move |b| (a, b))).collect();
        let h = ConstraintGraph::new(q, pairs.into_iter().filter(|_| rng.gen_bool(0.6))).unwrap();
        if !h.has_hard_constraint() {
            continue;
        }
        let n = rng.gen_range(2..=6);
        let g = random_graph(&mut rng, n, n - 1);
        let Ok(set) = exact_sample(&h, &g, rng.gen_range(1..40), rng.gen()) else {
            continue;
        };
        cases += 1;
        let s = &set.samples;
        let full = struct_learn(&h, n, s, LearnMode::AnyIncompatible)
            .unwrap()
            .estimate;
        let cut = rng.gen_range(1..=s.len());
        let prefix = struct_learn(&h, n, &s[..cut], LearnMode::AnyIncompatible)
            .unwrap()
            .estimate;
        let mut ok = g.is_subgraph_of(&full) && full.is_subgraph_of(&prefix);
        for (i, j) in h.hard_constraints() {
            let des = struct_learn(&h, n, s, LearnMode::Designated(i, j))
                .unwrap()
                .estimate;
            ok &= full.is_subgraph_of(&des) && g.is_subgraph_of(&des);
        }
        if !ok {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("{cases} randomized cases, {failures} failures"),
    )
}

fn lower_bound_machinery() -> Outcome {
    let (q, t, m) = (3, 2, 2);
    let h = ConstraintGraph::complete(q).unwrap();
    let lo = gen_gmt(q, t, m, &[false, false]).unwrap();
    let hi = gen_gmt(q, t, m, &[true, true]).unwrap();
    let rep = eta(&h, &lo, &hi).unwrap();
    let bound = rep.implied_lower_bound(&ratio(1, 8));
    let mut ok = rep.eta == ratio(1, 4)
        && bound == LowerBound::Finite(ratio(1, 2))
        && gmt_eta_exact(q, m).unwrap() == rep.eta;
    // The closed form against enumeration on other small members.
    for (q, m) in [(3, 1), (3, 3), (4, 1), (4, 2)] {
        let h = ConstraintGraph::complete(q).unwrap();
        let lo = gen_gmt(q, 2, m, &vec![false; m]).unwrap();
        let hi = gen_gmt(q, 2, m, &vec![true; m]).unwrap();
        ok &= eta(&h, &lo, &hi).unwrap().eta == gmt_eta_exact(q, m).unwrap();
    }
    let growth: Vec<_> = [10, 20, 40, 80]
        .iter()
        .map(|&m| gmt_growth(3, m).unwrap())
        .collect();
    ok &= growth
        .windows(2)
        .all(|w| w[1].lower_bound > w[0].lower_bound);
    ok &= growth
        .iter()
        .all(|g| g.eta <= g.eta_upper && g.lower_bound >= g.asymptotic);
    let shown: Vec<String> = growth
        .iter()
        .map(|g| format!("m={}: {:.3e}", g.m, g.lower_bound))
        .collect();
    outcome(
        ok,
        format!(
            "eta {}, margin 1/8 -> L >= {}; growth {}",
            rep.eta,
            show_bound(&bound),
            shown.join(", ")
        ),
    )
}

fn show_bound(b: &LowerBound) -> String {
    match b {
        LowerBound::Finite(x) => x.to_string(),
        LowerBound::Unbounded => "unbounded".into(),
    }
}

fn weighted_identifiability() -> Outcome {
    let k3 = ConstraintGraph::complete(3).unwrap();
    let constant = SpinSystem::with_constant_coupling(&k3, ratio(7, 10));
    let constant_verdict = is_identifiable_weighted(&constant, &BigRational::zero(), None).unwrap();

    // J(a,b) = w_a + w_b on K_3 edges: the separation gap vanishes identically.
    let w = [ratio(3, 10), ratio(-1, 2), ratio(11, 10)];
    let jm: Vec<Vec<Potential<BigRational>>> = (0..3)
        .map(|a| {
            (0..3)
                .map(|b| {
                    if a == b {
                        Potential::Forbidden
                    } else {
                        Potential::Finite(&w[a] + &w[b])
                    }
                })
                .collect()
        })
        .collect();
    let additive = SpinSystem::new(jm, vec![BigRational::zero(); 3]).unwrap();
    let verdict = is_identifiable_weighted(&additive, &BigRational::zero(), None).unwrap();
    let (f1, f2) = weighted_counterexample(&additive, 0, 1, &BigRational::zero(), None).unwrap();
    let wf: Vec<f64> = w.iter().map(|x| x.to_f64().unwrap()).collect();
    let j = |a: usize, b: usize| (a != b).then(|| wf[a] + wf[b]);
    let dist = |g: &TargetGraph| -> Vec<f64> {
        let edges: Vec<(usize, usize, f64)> = g.edges().map(|(u, v)| (u, v, 1.0)).collect();
        let wts: Vec<f64> = assignments(g.n(), 3)
            .map(|s| gibbs_weight(&j, &[0.0; 3], &edges, &vec![1.0; g.n()], &s))
            .collect();
        let z: f64 = wts.iter().sum();
        wts.into_iter().map(|x| x / z).collect()
    };
    let (p1, p2) = (dist(&f1), dist(&f2));
    let max_rel = p1
        .iter()
        .zip(&p2)
        .map(|(a, b)| {
            if a.max(*b) == 0.0 {
                0.0
            } else {
                (a - b).abs() / a.max(*b)
            }
        })
        .fold(0.0, f64::max);
    let distinct_values = {
        let mut v: Vec<f64> = p1.iter().copied().filter(|&x| x > 0.0).collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs());
        v.len()
    };
    let ok = matches!(constant_verdict.status, IdStatus::NotIdentifiable(_))
        && matches!(verdict.status, IdStatus::NotIdentifiable(_))
        && f1.n() == 7
        && f1 != f2
        && p1.len() == 2187
        && distinct_values > 1
        && max_rel <= 1e-9;
    outcome(
        ok,
        format!(
            "constant J {:?}; additive J {:?}; F1 != F2 on 7 vertices, {distinct_values} distinct probabilities, max relative difference {max_rel:.2e}",
            constant_verdict.status, verdict.status
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("gadget count fixtures", gadget_counts),
        (
            "non-identifiable pairs share supports",
            non_identifiable_pairs,
        ),
        ("identifiability verdicts", identifiability_verdicts),
        (
            "same-color bound on connected graphs n <= 6",
            same_color_bound,
        ),
        ("Dobrushin pair bound", dobrushin_bound),
        ("permissive pair and block bounds", permissive_bounds),
        ("end-to-end learning K_4 on G(8,3)", end_to_end_learning),
        ("approximate learning in TV", approximate_learning),
        ("sampler correctness", sampler_correctness),
        ("learner invariants", learner_invariants),
        ("lower-bound machinery", lower_bound_machinery),
        ("weighted identifiability", weighted_identifiability),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (k, (name, f)) in criteria.into_iter().enumerate() {
        let id = format!("{:02}", k + 1);
        if filter
            .as_ref()
            .is_some_and(|x| !id.contains(x.as_str()) && !name.contains(x.as_str()))
        {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "[{id}] {status} {name}: {} ({:.1}s)",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
