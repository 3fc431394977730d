//! The `f` and `g` curves of a CRG.
//!
//! For a CRG `K` on `k` vertices and an edge density `p`:
//!
//! * `f_K(p) = [p(|VW| + 2|EW|) + (1-p)(|VB| + 2|EB|)] / k²` is the cost of
//!   editing along an equipartition;
//! * `g_K(p) = min { uᵀ M_K(p) u : u ≥ 0, Σu = 1 }` allows unequal parts,
//!   where `M_K(p) = p W_K + (1-p) B_K` and `W_K`, `B_K` are the 0/1
//!   indicator matrices of white and black vertices (diagonal) and edges.
//!
//! `g_of` solves the quadratic program exactly. The optimum sits on a
//! support `S` where `M_S` is invertible and the weights are
//! `M_S⁻¹1 / 1ᵀM_S⁻¹1`, so trying every vertex subset and keeping the best
//! feasible candidate finds it.

use rayon::prelude::*;
use thiserror::Error;

use crate::crg::{Crg, EdgeColor, VertexColor};
use crate::num::{csv_field, sig};

/// Relative pivot magnitude below which a principal submatrix is treated as
/// singular.
pub const PIVOT_THRESHOLD: f64 = 1e-11;
/// Slack allowed on weight non-negativity before a candidate is rejected.
pub const FEASIBILITY_EPS: f64 = 1e-9;
/// Clamped weights must reproduce the candidate value this closely.
pub const REVERIFY_EPS: f64 = 1e-10;

// Below this order the subset loop runs sequentially.
const PARALLEL_FROM: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("probability {0} is outside [0, 1]")]
    Probability(f64),
}

fn check_p(p: f64) -> Result<(), CurveError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(CurveError::Probability(p))
    }
}

/// `f_K` as a line, stored by its values at `p = 0` and `p = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearCurve {
    pub value_at_0: f64,
    pub value_at_1: f64,
}

impl LinearCurve {
    pub fn of(k: &Crg) -> LinearCurve {
        let kk = (k.order() * k.order()) as f64;
        LinearCurve {
            value_at_0: (k.black_vertices() + 2 * k.black_edges()) as f64 / kk,
            value_at_1: (k.white_vertices() + 2 * k.white_edges()) as f64 / kk,
        }
    }

    pub fn at(&self, p: f64) -> f64 {
        p * self.value_at_1 + (1.0 - p) * self.value_at_0
    }

    pub fn slope(&self) -> f64 {
        self.value_at_1 - self.value_at_0
    }
}

pub fn f_of(k: &Crg, p: f64) -> Result<f64, CurveError> {
    check_p(p)?;
    Ok(LinearCurve::of(k).at(p))
}

/// `M_K(p)`, a symmetric `k × k` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QpMatrix {
    dim: usize,
    p: f64,
    entries: Vec<f64>,
}

impl QpMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// `uᵀ M u` for a full-length vector `u`.
    pub fn quad_form(&self, u: &[f64]) -> f64 {
        assert_eq!(u.len(), self.dim);
        (0..self.dim)
            .map(|i| u[i] * (0..self.dim).map(|j| self.get(i, j) * u[j]).sum::<f64>())
            .sum()
    }

    /// `uᵀ M_S u` where `u` is indexed along `support`.
    pub fn quad_form_on(&self, support: &[usize], u: &[f64]) -> f64 {
        support
            .iter()
            .zip(u)
            .map(|(&i, &ui)| ui * support.iter().zip(u).map(|(&j, &uj)| self.get(i, j) * uj).sum::<f64>())
            .sum()
    }

    fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }
}

fn white_black(k: &Crg, i: usize, j: usize) -> (f64, f64) {
    let (white, black) = if i == j {
        let c = k.vertex(i);
        (c == VertexColor::White, c == VertexColor::Black)
    } else {
        let c = k.edge(i, j);
        (c == EdgeColor::White, c == EdgeColor::Black)
    };
    (white as u8 as f64, black as u8 as f64)
}

pub fn build_m(k: &Crg, p: f64) -> Result<QpMatrix, CurveError> {
    check_p(p)?;
    let dim = k.order();
    let mut entries = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let (w, b) = white_black(k, i, j);
            entries[i * dim + j] = p * w + (1.0 - p) * b;
        }
    }
    Ok(QpMatrix { dim, p, entries })
}

/// An optimal point of the simplex quadratic program.
#[derive(Debug, Clone, PartialEq)]
pub struct GSolution {
    pub value: f64,
    /// Vertices carrying positive weight, increasing.
    pub support: Vec<usize>,
    /// Weights aligned with `support`; positive, summing to one.
    pub weights: Vec<f64>,
}

impl GSolution {
    /// The weights as a full-length vector with zeros off the support.
    pub fn dense_weights(&self, k: usize) -> Vec<f64> {
        let mut u = vec![0.0; k];
        for (&i, &w) in self.support.iter().zip(&self.weights) {
            u[i] = w;
        }
        u
    }
}

/// Exact `g_K(p)` with an optimal weighting.
pub fn g_of(k: &Crg, p: f64) -> Result<GSolution, CurveError> {
    check_p(p)?;
    if p == 0.0 || p == 1.0 {
        return Ok(endpoint_solution(k, p));
    }
    Ok(solve_simplex_qp(&build_m(k, p)?))
}

/// `g_K` at `p = 0` or `p = 1`.
///
/// At `p = 0` the value is `0` if `K` has a white vertex (all weight goes
/// there), otherwise the minimum over the all-black matrix `B_K` computed by
/// the same candidate scheme; `p = 1` is symmetric.
pub fn g_endpoint(k: &Crg, end: Endpoint) -> f64 {
    endpoint_solution(k, end.p()).value
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Zero,
    One,
}

impl Endpoint {
    pub fn p(self) -> f64 {
        match self {
            Endpoint::Zero => 0.0,
            Endpoint::One => 1.0,
        }
    }
}

fn endpoint_solution(k: &Crg, p: f64) -> GSolution {
    let free = if p == 0.0 { VertexColor::White } else { VertexColor::Black };
    if let Some(i) = (0..k.order()).find(|&i| k.vertex(i) == free) {
        return GSolution { value: 0.0, support: vec![i], weights: vec![1.0] };
    }
    solve_simplex_qp(&build_m(k, p).expect("endpoint"))
}

/// `p(1-p) / (a(1-p) + cp)`, the value of `g` on the all-gray `K(a, c)`.
pub fn g_gray_closed_form(a: usize, c: usize, p: f64) -> f64 {
    assert!(a + c >= 1, "K(a, c) needs a vertex");
    p * (1.0 - p) / (a as f64 * (1.0 - p) + c as f64 * p)
}

/// `g_K(p)` together with a supergradient of the concave function `g_K` at
/// `p`: `uᵀ (W_K - B_K) u` for the optimal `u`. It is the derivative
/// whenever the optimal weighting is unique.
pub fn g_with_slope(k: &Crg, p: f64) -> Result<(GSolution, f64), CurveError> {
    let sol = g_of(k, p)?;
    let s = &sol.support;
    let mut slope = 0.0;
    for (x, &i) in s.iter().enumerate() {
        for (y, &j) in s.iter().enumerate() {
            let (w, b) = white_black(k, i, j);
            slope += sol.weights[x] * sol.weights[y] * (w - b);
        }
    }
    Ok((sol, slope))
}

/// Minimize `uᵀ M u` over the probability simplex by enumerating supports.
pub fn solve_simplex_qp(m: &QpMatrix) -> GSolution {
    let dim = m.dim();
    assert!((1..=24).contains(&dim), "QP dimension {dim} outside 1..=24");
    let threshold = PIVOT_THRESHOLD * m.max_abs();
    let last = 1u32 << dim;
    let best = if dim >= PARALLEL_FROM {
        (1..last)
            .into_par_iter()
            .filter_map(|mask| candidate(m, mask, threshold).map(|c| (c, mask)))
            .min_by(|a, b| a.0.value.total_cmp(&b.0.value).then(a.1.cmp(&b.1)))
    } else {
        (1..last)
            .filter_map(|mask| candidate(m, mask, threshold).map(|c| (c, mask)))
            .min_by(|a, b| a.0.value.total_cmp(&b.0.value).then(a.1.cmp(&b.1)))
    };
    best.expect("singletons are always candidates").0
}

fn candidate(m: &QpMatrix, mask: u32, threshold: f64) -> Option<GSolution> {
    let support: Vec<usize> = (0..m.dim()).filter(|&i| mask >> i & 1 == 1).collect();
    if support.len() == 1 {
        let i = support[0];
        return Some(GSolution { value: m.get(i, i), support, weights: vec![1.0] });
    }
    let x = solve_ones(m, &support, threshold)?;
    let total: f64 = x.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut u: Vec<f64> = x.iter().map(|xi| xi / total).collect();
    if u.iter().any(|&w| w < -FEASIBILITY_EPS) {
        return None;
    }
    let raw = 1.0 / total;
    let clamped = u.iter().any(|&w| w <= 0.0);
    if clamped {
        u.iter_mut().for_each(|w| *w = w.max(0.0));
        let s: f64 = u.iter().sum();
        u.iter_mut().for_each(|w| *w /= s);
    }
    let value = m.quad_form_on(&support, &u);
    if (value - raw).abs() > REVERIFY_EPS {
        return None;
    }
    let (support, weights): (Vec<usize>, Vec<f64>) = support.into_iter().zip(u).filter(|&(_, w)| w > 0.0).unzip();
    Some(GSolution { value, support, weights })
}

/// Solve `M_S x = 1` by Gaussian elimination with partial pivoting; `None`
/// when a pivot falls below `threshold`.
fn solve_ones(m: &QpMatrix, support: &[usize], threshold: f64) -> Option<Vec<f64>> {
    let s = support.len();
    let mut a = vec![0.0; s * (s + 1)];
    let w = s + 1;
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            a[r * w + c] = m.get(i, j);
        }
        a[r * w + s] = 1.0;
    }
    for col in 0..s {
        let pivot_row = (col..s).max_by(|&x, &y| a[x * w + col].abs().total_cmp(&a[y * w + col].abs()))?;
        if a[pivot_row * w + col].abs() < threshold || a[pivot_row * w + col] == 0.0 {
            return None;
        }
        if pivot_row != col {
            for c in 0..w {
                a.swap(pivot_row * w + c, col * w + c);
            }
        }
        let pivot = a[col * w + col];
        for r in col + 1..s {
            let factor = a[r * w + col] / pivot;
            if factor != 0.0 {
                for c in col..w {
                    a[r * w + c] -= factor * a[col * w + c];
                }
            }
        }
    }
    let mut x = vec![0.0; s];
    for r in (0..s).rev() {
        let tail: f64 = (r + 1..s).map(|c| a[r * w + c] * x[c]).sum();
        x[r] = (a[r * w + s] - tail) / a[r * w + r];
    }
    Some(x)
}

/// Upper bound on `g_K(p)` by projected gradient descent over the simplex,
/// restarted from the uniform weighting and from every vertex. Independent
/// of the support enumeration in [`g_of`].
pub fn g_numeric_fallback(k: &Crg, p: f64, iterations: usize) -> Result<f64, CurveError> {
    let m = build_m(k, p)?;
    let dim = k.order();
    let mut starts = vec![vec![1.0 / dim as f64; dim]];
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        starts.push(e);
    }
    Ok(starts
        .into_iter()
        .map(|u| descend(&m, u, iterations))
        .fold(f64::INFINITY, f64::min))
}

fn descend(m: &QpMatrix, mut u: Vec<f64>, iterations: usize) -> f64 {
    let dim = m.dim();
    // the largest absolute row sum bounds the spectral radius of M
    let lipschitz = 2.0
        * (0..dim)
            .map(|i| (0..dim).map(|j| m.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max);
    let mut best = m.quad_form(&u);
    if lipschitz == 0.0 {
        return best;
    }
    let step = 1.0 / lipschitz;
    let mut grad = vec![0.0; dim];
    for _ in 0..iterations {
        for i in 0..dim {
            grad[i] = 2.0 * (0..dim).map(|j| m.get(i, j) * u[j]).sum::<f64>();
        }
        let moved: Vec<f64> = u.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
        u = project_simplex(&moved);
        best = best.min(m.quad_form(&u));
    }
    best
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        cumulative += x;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Sample every curve at `grid` evenly spaced points of `[0, 1]` and emit
/// CSV with header `p,value,curve_id`, numbers to 12 significant digits.
pub fn curves_csv(curves: &[(String, Crg)], grid: usize) -> String {
    let mut out = String::from("p,value,curve_id\n");
    for (p, value, id) in sample_curves(curves, grid) {
        out.push_str(&format!("{},{},{}\n", sig(p, 12), sig(value, 12), csv_field(&id)));
    }
    out
}

/// `(p, g(p), curve id)` rows for [`curves_csv`] and other emitters.
pub fn sample_curves(curves: &[(String, Crg)], grid: usize) -> Vec<(f64, f64, String)> {
    let points = grid_points(grid);
    let mut rows = Vec::with_capacity(points.len() * curves.len());
    for (id, k) in curves {
        for &p in &points {
            rows.push((p, g_of(k, p).expect("grid lies in [0, 1]").value, id.clone()));
        }
    }
    rows
}

/// `grid` evenly spaced points from 0 to 1 inclusive (just `0` when
/// `grid == 1`).
pub fn grid_points(grid: usize) -> Vec<f64> {
    match grid {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crg::{gray_complete, parse_crg};

    fn kpp() -> Crg {
        parse_crg("crg 4\nwwww\nggg\ngg\nb").unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn f_examples() {
        assert!(close(f_of(&gray_complete(1, 2).unwrap(), 0.5).unwrap(), 1.0 / 6.0, 1e-15));
        let k = parse_crg("crg 3\nwbb\nbw\ng").unwrap();
        assert!(close(f_of(&k, 0.0).unwrap(), (2.0 + 2.0) / 9.0, 1e-15));
        assert!(f_of(&k, 1.5).is_err());
        let line = LinearCurve::of(&k);
        assert!(line.slope().abs() <= 1.0);
    }

    #[test]
    fn m_examples() {
        let m = build_m(&gray_complete(1, 2).unwrap(), 0.3).unwrap();
        assert_eq!((m.get(0, 0), m.get(1, 1), m.get(2, 2)), (0.3, 0.7, 0.7));
        assert_eq!((m.get(0, 1), m.get(1, 2)), (0.0, 0.0));

        let m = build_m(&kpp(), 0.25).unwrap();
        for i in 0..4 {
            assert_eq!(m.get(i, i), 0.25);
        }
        assert_eq!(m.get(2, 3), 0.75);
        assert_eq!(m.get(3, 2), 0.75);
        assert_eq!(m.get(0, 3), 0.0);
    }

    #[test]
    fn uniform_weights_give_f() {
        let k = parse_crg("crg 4\nwbwb\nbgw\nwb\ng").unwrap();
        let m = build_m(&k, 0.37).unwrap();
        assert!(close(m.quad_form(&[0.25; 4]), f_of(&k, 0.37).unwrap(), 1e-15));
    }

    #[test]
    fn g_of_k12() {
        let k = gray_complete(1, 2).unwrap();
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let g = g_of(&k, p).unwrap().value;
            assert!(close(g, p * (1.0 - p) / (1.0 + p), 1e-12), "p = {p}");
        }
    }

    #[test]
    fn g_of_kpp_is_piecewise() {
        // below 1/2 the three-vertex white face beats the full support
        let k = kpp();
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let want = if p <= 0.5 { p / 3.0 } else { p / (2.0 * (1.0 + p)) };
            assert!(close(g_of(&k, p).unwrap().value, want, 1e-12), "p = {p}");
        }
    }

    #[test]
    fn g_of_single_colors() {
        for i in 1..20 {
            let p = i as f64 / 20.0;
            assert!(close(g_of(&gray_complete(2, 0).unwrap(), p).unwrap().value, p / 2.0, 1e-12));
            assert!(close(g_of(&gray_complete(0, 1).unwrap(), p).unwrap().value, 1.0 - p, 1e-12));
        }
    }

    #[test]
    fn closed_form_matches() {
        for a in 0..=4 {
            for c in 0..=4 {
                if a + c == 0 {
                    continue;
                }
                let k = gray_complete(a, c).unwrap();
                for i in 1..20 {
                    let p = i as f64 / 20.0;
                    let g = g_of(&k, p).unwrap().value;
                    assert!(close(g, g_gray_closed_form(a, c, p), 1e-10), "({a},{c}) at {p}");
                }
            }
        }
        assert!(close(g_gray_closed_form(3, 0, 0.4), 0.4 / 3.0, 1e-15));
    }

    #[test]
    fn endpoints() {
        assert_eq!(g_endpoint(&gray_complete(1, 2).unwrap(), Endpoint::Zero), 0.0);
        for b in 1..=5 {
            let g = g_endpoint(&gray_complete(0, b).unwrap(), Endpoint::Zero);
            assert!(close(g, 1.0 / b as f64, 1e-12));
        }
        assert_eq!(g_endpoint(&kpp().swapped(), Endpoint::One), 0.0);
        assert_eq!(g_endpoint(&gray_complete(1, 2).unwrap(), Endpoint::One), 0.0);
        assert_eq!(g_of(&gray_complete(0, 2).unwrap(), 0.0).unwrap().value, 0.5);
    }

    #[test]
    fn solution_invariants() {
        let k = parse_crg("crg 4\nwbwb\nbgw\nwb\ng").unwrap();
        for i in 1..10 {
            let p = i as f64 / 10.0;
            let sol = g_of(&k, p).unwrap();
            let m = build_m(&k, p).unwrap();
            assert!(close(sol.weights.iter().sum::<f64>(), 1.0, 1e-12));
            assert!(sol.weights.iter().all(|&w| w > 0.0));
            assert!(close(m.quad_form(&sol.dense_weights(4)), sol.value, 1e-10));
            assert!(sol.value <= f_of(&k, p).unwrap() + 1e-12);
        }
    }

    #[test]
    fn fallback_examples() {
        let g = g_numeric_fallback(&gray_complete(1, 1).unwrap(), 0.5, 2000).unwrap();
        assert!(close(g, 0.25, 1e-9));
        let k = kpp();
        for i in 1..10 {
            let p = i as f64 / 10.0;
            let exact = g_of(&k, p).unwrap().value;
            let approx = g_numeric_fallback(&k, p, 5000).unwrap();
            assert!(approx >= exact - 1e-12 && approx - exact < 1e-6, "p = {p}: {approx} vs {exact}");
        }
    }

    #[test]
    fn slope_matches_difference_quotient() {
        let k = gray_complete(1, 2).unwrap();
        for i in 1..10 {
            let p = i as f64 / 10.0;
            let (_, slope) = g_with_slope(&k, p).unwrap();
            let h = 1e-6;
            let numeric = (g_gray_closed_form(1, 2, p + h) - g_gray_closed_form(1, 2, p - h)) / (2.0 * h);
            assert!(close(slope, numeric, 1e-6), "p = {p}: {slope} vs {numeric}");
        }
    }

    #[test]
    fn projection() {
        let u = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(u.iter().all(|&x| close(x, 1.0 / 3.0, 1e-15)));
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn csv_rows() {
        let csv = curves_csv(&[("K12".into(), gray_complete(1, 2).unwrap())], 5);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "p,value,curve_id");
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[3], "0.5,0.166666666667,K12");
        assert_eq!(lines[1], "0,0,K12");
    }

    #[test]
    fn large_order_uses_parallel_path() {
        let k = gray_complete(7, 6).unwrap();
        let g = g_of(&k, 0.3).unwrap().value;
        assert!(close(g, g_gray_closed_form(7, 6, 0.3), 1e-12));
    }
}
