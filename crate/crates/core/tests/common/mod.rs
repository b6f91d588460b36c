//! Brute-force oracles shared by the integration tests. They use nothing from
//! the library except the graph accessors.
#![allow(dead_code)]

use hcolor::{ConstraintGraph, TargetGraph};

/// Every assignment in `[q]^n`, in lexicographic order.
pub fn assignments(n: usize, q: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = q.pow(n as u32);
    (0..total).map(move |mut code| {
        let mut s = vec![0; n];
        for slot in s.iter_mut().rev() {
            *slot = code % q;
            code /= q;
        }
        s
    })
}

pub fn is_coloring(h: &ConstraintGraph, g: &TargetGraph, s: &[usize]) -> bool {
    g.edges().all(|(u, v)| h.compatible(s[u], s[v]))
}

/// All `H`-colorings by exhaustive scan of `[q]^n`.
pub fn brute_colorings(h: &ConstraintGraph, g: &TargetGraph) -> Vec<Vec<usize>> {
    assignments(g.n(), h.q())
        .filter(|s| is_coloring(h, g, s))
        .collect()
}

/// Plain depth-first count in vertex order, without any propagation.
pub fn dfs_count(h: &ConstraintGraph, g: &TargetGraph, pinned: &[(usize, usize)]) -> u128 {
    fn rec(
        h: &ConstraintGraph,
        g: &TargetGraph,
        fixed: &[Option<usize>],
        s: &mut Vec<usize>,
    ) -> u128 {
        let v = s.len();
        if v == g.n() {
            return 1;
        }
        let mut total = 0;
        for c in 0..h.q() {
            if fixed[v].is_some_and(|f| f != c) {
                continue;
            }
            if g.neighbors(v)
                .iter()
                .all(|&u| u > v || h.compatible(s[u], c))
            {
                s.push(c);
                total += rec(h, g, fixed, s);
                s.pop();
            }
        }
        total
    }
    let mut fixed = vec![None; g.n()];
    for &(v, c) in pinned {
        fixed[v] = Some(c);
    }
    rec(h, g, &fixed, &mut Vec::new())
}

/// Unnormalized Gibbs weight `exp(Σ θ_e J + Σ θ_v h)`, zero when forbidden.
pub fn gibbs_weight(
    j: &dyn Fn(usize, usize) -> Option<f64>,
    h: &[f64],
    edges: &[(usize, usize, f64)],
    theta_v: &[f64],
    s: &[usize],
) -> f64 {
    let mut e = 0.0;
    for &(u, v, t) in edges {
        match j(s[u], s[v]) {
            Some(x) => e += t * x,
            None => return 0.0,
        }
    }
    for (v, &a) in s.iter().enumerate() {
        e += theta_v[v] * h[a];
    }
    e.exp()
}
