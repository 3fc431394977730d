//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use editlab::crg::{crg_count, Crg, EdgeColor, VertexColor};
use editlab::graph::SimpleGraph;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_crg(rng: &mut ChaCha8Rng, kmax: usize) -> Crg {
    let k = rng.gen_range(1..=kmax);
    Crg::from_index(k, rng.gen_range(0..crg_count(k))).unwrap()
}

pub fn random_graph(rng: &mut ChaCha8Rng, nmin: usize, nmax: usize) -> SimpleGraph {
    let n = rng.gen_range(nmin..=nmax);
    let density: f64 = rng.gen();
    SimpleGraph::from_fn(n, |_, _| rng.gen::<f64>() < density).unwrap()
}

/// Matrix entries written out from the color rules, not taken from the
/// library's matrix builder.
pub fn reference_matrix(k: &Crg, p: f64) -> Vec<Vec<f64>> {
    let n = k.order();
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = if i == j {
                match k.vertex(i) {
                    VertexColor::White => p,
                    VertexColor::Black => 1.0 - p,
                }
            } else {
                match k.edge(i, j) {
                    EdgeColor::White => p,
                    EdgeColor::Gray => 0.0,
                    EdgeColor::Black => 1.0 - p,
                }
            };
        }
    }
    m
}

/// Exact minimum of `uᵀMu` over the simplex grid `{u : N u ∈ ℤ^k}` with
/// `N = steps`. The first `k - 2` coordinates are enumerated; along the
/// last two the objective is a quadratic in one integer variable, minimized
/// exactly by checking the ends and the integers around the vertex.
pub fn simplex_grid_min(m: &[Vec<f64>], steps: usize) -> f64 {
    let k = m.len();
    let h = 1.0 / steps as f64;
    match k {
        1 => m[0][0],
        _ => {
            let mut prefix = vec![0usize; k - 2];
            let mut best = f64::INFINITY;
            grid_rec(m, h, 0, steps, &mut prefix, &mut best);
            best
        }
    }
}

fn grid_rec(m: &[Vec<f64>], h: f64, depth: usize, left: usize, prefix: &mut Vec<usize>, best: &mut f64) {
    let k = m.len();
    if depth == k - 2 {
        // u(s) = f + s d with f = (prefix, 0, r) and d = e_{k-2} - e_{k-1},
        // so q(s) = fᵀMf + 2s dᵀMf + s² dᵀMd
        let (a, b) = (k - 2, k - 1);
        let mut f: Vec<f64> = prefix.iter().map(|&c| c as f64 * h).collect();
        f.push(0.0);
        f.push(left as f64 * h);
        let mf: Vec<f64> = (0..k).map(|i| (0..k).map(|j| m[i][j] * f[j]).sum()).collect();
        let constant: f64 = (0..k).map(|i| f[i] * mf[i]).sum();
        let linear = 2.0 * (mf[a] - mf[b]);
        let quadratic = m[a][a] - 2.0 * m[a][b] + m[b][b];
        let q = |t: usize| {
            let s = t as f64 * h;
            constant + linear * s + quadratic * s * s
        };
        let mut candidates = vec![0, left];
        if quadratic > 0.0 {
            let vertex = (-linear / (2.0 * quadratic) / h).floor();
            for t in [vertex, vertex + 1.0] {
                if t >= 0.0 && t <= left as f64 {
                    candidates.push(t as usize);
                }
            }
        }
        for t in candidates {
            *best = best.min(q(t));
        }
        return;
    }
    for c in 0..=left {
        prefix[depth] = c;
        grid_rec(m, h, depth + 1, left - c, prefix, best);
    }
}

/// Largest edge count of a graph on `n` vertices without a `(k+1)`-clique,
/// by branch and bound over the pairs.
pub fn brute_force_turan(n: usize, k: usize) -> usize {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut adj = vec![0u64; n];
    let mut best = 0;
    turan_rec(&pairs, 0, 0, k + 1, &mut adj, &mut best);
    best
}

fn has_clique_through(adj: &[u64], u: usize, v: usize, size: usize) -> bool {
    // a clique of `size` vertices containing the edge uv
    fn grow(adj: &[u64], cand: u64, need: usize) -> bool {
        if need == 0 {
            return true;
        }
        let mut rest = cand;
        while rest != 0 {
            let w = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if grow(adj, rest & adj[w], need - 1) {
                return true;
            }
        }
        false
    }
    grow(adj, adj[u] & adj[v], size - 2)
}

fn turan_rec(pairs: &[(usize, usize)], i: usize, edges: usize, clique: usize, adj: &mut [u64], best: &mut usize) {
    if edges + (pairs.len() - i) <= *best {
        return;
    }
    if i == pairs.len() {
        *best = edges;
        return;
    }
    let (u, v) = pairs[i];
    adj[u] |= 1 << v;
    adj[v] |= 1 << u;
    if !has_clique_through(adj, u, v, clique) {
        turan_rec(pairs, i + 1, edges + 1, clique, adj, best);
    }
    adj[u] &= !(1 << v);
    adj[v] &= !(1 << u);
    turan_rec(pairs, i + 1, edges, clique, adj, best);
}

/// `p(1-p)/(a(1-p)+cp)` extended continuously to `p ∈ {0, 1}`.
pub fn gray_closed_form_limit(a: usize, c: usize, p: f64) -> f64 {
    let (a, c) = (a as f64, c as f64);
    if p == 0.0 {
        return if a > 0.0 { 0.0 } else { 1.0 / c };
    }
    if p == 1.0 {
        return if c > 0.0 { 0.0 } else { 1.0 / a };
    }
    p * (1.0 - p) / (a * (1.0 - p) + c * p)
}
