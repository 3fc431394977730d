//! Edit-distance bounds from envelopes of `g` curves.
//!
//! For a hereditary property with admissible CRG family `𝒦`, the limiting
//! edit distance is `d* = max_p inf_{K ∈ 𝒦} g_K(p)`. Every `g_K` is concave,
//! so the envelope over any finite portfolio of admissible CRGs is concave
//! too and its maximum is an upper bound on `d*`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::crg::{enumerate_crgs, gray_complete, Crg, CrgError, Tableau};
use crate::curves::{f_of, g_of, g_with_slope, grid_points, CurveError};
use crate::graph::{binary_chromatic, SimpleGraph};
use crate::num::shortest;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_GRID: usize = 101;
pub const DEFAULT_MAX_K: usize = 4;

// A plateau must be at least this wide to be reported as flat.
const FLAT_WIDTH: f64 = 1e-3;
// Envelope values this close count as equal when looking for a plateau.
const FLAT_NOISE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("the CRG portfolio is empty")]
    EmptyPortfolio,
    #[error("binary chromatic number 1: Forb(K_1) contains no graph with a vertex")]
    Degenerate,
    #[error("tolerance must be positive and finite, got {0}")]
    Tolerance(f64),
    #[error("grid needs at least 2 points, got {0}")]
    Grid(usize),
    #[error(transparent)]
    Crg(#[from] CrgError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    EnvelopeTernary,
    ClosedForm,
    Exhaustive,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::EnvelopeTernary => "envelope-ternary",
            Method::ClosedForm => "closed-form",
            Method::Exhaustive => "exhaustive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub p_star: f64,
    pub d_star_upper: f64,
    pub d_star_lower: f64,
    /// Portfolio members whose curve is within `10 * tolerance` of the
    /// envelope at `p_star`.
    pub witnesses: Vec<Crg>,
    pub method: Method,
    pub grid: usize,
    pub tolerance: f64,
    /// Smallest `f_K(p_star)` over an enumerated family. Every admissible
    /// CRG has `f_K ≥ inf f`, so this is evidence about the true infimum,
    /// not a proof.
    pub min_f_evidence: Option<f64>,
    /// Set when the envelope is constant near its maximum: the interval on
    /// which it stays at the maximum, each end located to within
    /// `tolerance`.
    pub flat_interval: Option<(f64, f64)>,
}

impl BoundReport {
    /// JSON object with every number printed exactly (shortest round trip).
    pub fn to_json(&self) -> String {
        let num = shortest;
        let opt = |x: Option<f64>| x.map_or("null".to_string(), num);
        let witnesses: Vec<String> = self.witnesses.iter().map(|k| json_string(&k.to_text())).collect();
        let mut out = String::from("{");
        let _ = write!(
            out,
            "\"p_star\":{},\"d_star_upper\":{},\"d_star_lower\":{},\"witnesses\":[{}],\"method\":\"{}\",\"grid\":{},\"tolerance\":{},\"min_f_evidence\":{},\"flat_interval\":{}",
            num(self.p_star),
            num(self.d_star_upper),
            num(self.d_star_lower),
            witnesses.join(","),
            self.method.as_str(),
            self.grid,
            num(self.tolerance),
            opt(self.min_f_evidence),
            self.flat_interval.map_or("null".to_string(), |(a, b)| format!("[{},{}]", num(a), num(b))),
        );
        out.push('}');
        out
    }
}

/// Quote `s` as a JSON string literal.
pub(crate) fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// `min_K g_K(p)` over the portfolio.
pub fn envelope_value(portfolio: &[Crg], p: f64) -> Result<f64, BoundsError> {
    Ok(envelope_point(portfolio, p)?.0)
}

// (value, supergradient) of the envelope at p
fn envelope_point(portfolio: &[Crg], p: f64) -> Result<(f64, f64), BoundsError> {
    if portfolio.is_empty() {
        return Err(BoundsError::EmptyPortfolio);
    }
    let eval = |k: &Crg| g_with_slope(k, p).map(|(sol, slope)| (sol.value, slope));
    let points: Vec<(f64, f64)> = if portfolio.len() >= 64 {
        portfolio.par_iter().map(eval).collect::<Result<_, _>>()?
    } else {
        portfolio.iter().map(eval).collect::<Result<_, _>>()?
    };
    // the first minimizer keeps the result independent of thread scheduling
    Ok(points
        .into_iter()
        .reduce(|best, x| if x.0 < best.0 { x } else { best })
        .expect("non-empty"))
}

/// Maximize the envelope of `portfolio` on `[0, 1]` with the default grid.
pub fn maximize_envelope(portfolio: &[Crg], tolerance: f64) -> Result<BoundReport, BoundsError> {
    maximize_envelope_with(portfolio, tolerance, DEFAULT_GRID)
}

/// Maximize the envelope of `portfolio` on `[0, 1]`.
///
/// A coarse grid brackets the maximum. The bracket is then halved on the
/// sign of a supergradient of the envelope (the slope `uᵀ(W - B)u` of the
/// active curve at its optimal weighting), which for a concave function
/// points towards every maximizer, until it is narrower than `tolerance`.
/// A plateau at the top is reported through `flat_interval`, with `p_star`
/// at its left end.
pub fn maximize_envelope_with(portfolio: &[Crg], tolerance: f64, grid: usize) -> Result<BoundReport, BoundsError> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(BoundsError::Tolerance(tolerance));
    }
    if grid < 2 {
        return Err(BoundsError::Grid(grid));
    }
    if portfolio.is_empty() {
        return Err(BoundsError::EmptyPortfolio);
    }
    let portfolio = distinct(portfolio);
    let points = grid_points(grid);
    let values = points
        .iter()
        .map(|&p| envelope_value(&portfolio, p))
        .collect::<Result<Vec<_>, _>>()?;
    let best = (0..grid).fold(0, |b, i| if values[i] > values[b] { i } else { b });

    let mut lo = points[best.saturating_sub(1)];
    let mut hi = points[(best + 1).min(grid - 1)];
    let p_hat = if lo == 0.0 && envelope_point(&portfolio, 0.0)?.1 <= 0.0 {
        0.0
    } else if hi == 1.0 && envelope_point(&portfolio, 1.0)?.1 >= 0.0 {
        1.0
    } else {
        while hi - lo > tolerance {
            let mid = 0.5 * (lo + hi);
            let slope = envelope_point(&portfolio, mid)?.1;
            if slope > 0.0 {
                lo = mid;
            } else if slope < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let top = envelope_value(&portfolio, p_hat)?;

    let level = top - FLAT_NOISE;
    let plateau = (
        left_edge(&portfolio, p_hat, level, tolerance)?,
        right_edge(&portfolio, p_hat, level, tolerance)?,
    );
    let (p_star, flat_interval) = if plateau.1 - plateau.0 > FLAT_WIDTH {
        (plateau.0, Some(plateau))
    } else {
        (p_hat, None)
    };

    let d = envelope_value(&portfolio, p_star)?;
    let witnesses = witnesses_at(&portfolio, p_star, d, tolerance)?;
    Ok(BoundReport {
        p_star,
        d_star_upper: d,
        d_star_lower: 0.0,
        witnesses,
        method: Method::EnvelopeTernary,
        grid,
        tolerance,
        min_f_evidence: None,
        flat_interval,
    })
}

// The envelope is concave, so {p : e(p) ≥ level} is an interval around
// p_hat; locate its ends by bisection.
fn left_edge(portfolio: &[Crg], p_hat: f64, level: f64, tolerance: f64) -> Result<f64, BoundsError> {
    if envelope_value(portfolio, 0.0)? >= level {
        return Ok(0.0);
    }
    let (mut outside, mut inside) = (0.0, p_hat);
    while inside - outside > tolerance {
        let mid = 0.5 * (outside + inside);
        if envelope_value(portfolio, mid)? >= level {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(inside)
}

fn right_edge(portfolio: &[Crg], p_hat: f64, level: f64, tolerance: f64) -> Result<f64, BoundsError> {
    if envelope_value(portfolio, 1.0)? >= level {
        return Ok(1.0);
    }
    let (mut inside, mut outside) = (p_hat, 1.0);
    while outside - inside > tolerance {
        let mid = 0.5 * (outside + inside);
        if envelope_value(portfolio, mid)? >= level {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(inside)
}

fn witnesses_at(portfolio: &[Crg], p: f64, d: f64, tolerance: f64) -> Result<Vec<Crg>, BoundsError> {
    let mut out = Vec::new();
    for k in portfolio {
        if g_of(k, p)?.value <= d + 10.0 * tolerance {
            out.push(k.clone());
        }
    }
    Ok(out)
}

// Drop repeated and isomorphic portfolio members; g is an isomorphism
// invariant, so the envelope is unchanged.
fn distinct(portfolio: &[Crg]) -> Vec<Crg> {
    let mut seen = BTreeSet::new();
    let mut out: Vec<Crg> = Vec::new();
    for k in portfolio {
        let new = if k.order() <= 6 {
            seen.insert((k.order(), k.canonical_index()))
        } else {
            !out.contains(k)
        };
        if new {
            out.push(k.clone());
        }
    }
    out
}

/// `1 / (2(χ_B(h) - 1))`, a lower bound on `d*(Forb(h))`.
pub fn lower_bound_chi(h: &SimpleGraph) -> Result<f64, BoundsError> {
    let chi = binary_chromatic(h);
    if chi < 2 {
        return Err(BoundsError::Degenerate);
    }
    Ok(1.0 / (2.0 * (chi - 1) as f64))
}

/// Closed-form upper bound on `d*(Forb(h))` from the gray tableau of `h`,
/// with `k = χ_B - 1`:
///
/// * `1/(2k)` when `c_min ≤ k/2 ≤ c_max`;
/// * otherwise `1 / (k (1 + 2√(x(1-x))))` with `x = c0/k`, where `c0` is
///   whichever of `c_min`, `c_max` is closer to `k/2`;
/// * when `c0 = 0` any admissible `K(α, γ)` with `γ ≥ 1` improves this to
///   `(k-α) / (k(k-α+γ))`, the height where its curve crosses `p/k`, and
///   symmetrically when `c0 = k`.
///
/// The partner search only sees cells inside the tableau's `limit`; use a
/// limit of at least `k`.
pub fn cnaught_bound(t: &Tableau) -> f64 {
    closed_form(t).0
}

/// [`cnaught_bound`] with the point where it is attained and the gray CRGs
/// that certify it.
pub fn closed_form_bound(h: &SimpleGraph) -> Result<BoundReport, BoundsError> {
    let chi = binary_chromatic(h);
    if chi < 2 {
        return Err(BoundsError::Degenerate);
    }
    let t = crate::crg::tableau(h, chi - 1);
    let (d, p, cells) = closed_form(&t);
    Ok(BoundReport {
        p_star: p,
        d_star_upper: d,
        d_star_lower: lower_bound_chi(h)?,
        witnesses: cells.into_iter().map(|(a, c)| gray_complete(a, c)).collect::<Result<_, _>>()?,
        method: Method::ClosedForm,
        grid: 0,
        tolerance: 0.0,
        min_f_evidence: None,
        flat_interval: None,
    })
}

// (bound, p where it is attained, cells of the certifying gray CRGs)
fn closed_form(t: &Tableau) -> (f64, f64, Vec<(usize, usize)>) {
    assert!(t.chi_b >= 2, "closed-form bound needs chi_b >= 2");
    let k = t.k();
    let kf = k as f64;
    if 2 * t.c_min <= k && k <= 2 * t.c_max {
        let mut cells = vec![(k - t.c_max, t.c_max)];
        if t.c_min != t.c_max {
            cells.push((k - t.c_min, t.c_min));
        }
        return (1.0 / (2.0 * kf), 0.5, cells);
    }
    let c0 = if 2 * t.c_max < k { t.c_max } else { t.c_min };
    let x = c0 as f64 / kf;
    let base = 1.0 / (kf * (1.0 + 2.0 * (x * (1.0 - x)).sqrt()));
    let (a0, c0f) = ((k - c0) as f64, c0 as f64);
    let base_p = a0.sqrt() / (a0.sqrt() + c0f.sqrt());
    let mut best = (base, base_p, vec![(k - c0, c0)]);

    // at c0 = 0 the base curve is p/k; at c0 = k it is (1-p)/k
    if c0 == 0 || c0 == k {
        for &(alpha, gamma) in &t.cells {
            let (own, other) = if c0 == 0 { (alpha, gamma) } else { (gamma, alpha) };
            if other == 0 || own >= k {
                continue;
            }
            let gap = (k - own) as f64;
            let value = gap / (kf * (gap + other as f64));
            if value < best.0 {
                let p = gap / (gap + other as f64);
                best = (value, if c0 == 0 { p } else { 1.0 - p }, vec![(k - c0, c0), (alpha, gamma)]);
            }
        }
    }
    best
}

/// Envelope maximum over the all-gray CRGs of a tableau.
pub fn gray_bound(t: &Tableau, tolerance: f64) -> Result<BoundReport, BoundsError> {
    maximize_envelope(&t.gray_portfolio(), tolerance)
}

/// Maximize the envelope over every admissible CRG with at most `kmax`
/// vertices.
///
/// The enumerated family is a subset of the admissible CRGs, so the
/// resulting `d_star_upper` is a valid upper bound on `d*(Forb(h))`; the
/// smallest `f_K(p_star)` over the family is reported as evidence for the
/// matching lower bound.
pub fn exhaustive_bound(h: &SimpleGraph, kmax: usize, tolerance: f64) -> Result<BoundReport, BoundsError> {
    exhaustive_bound_with(h, kmax, tolerance, DEFAULT_GRID)
}

pub fn exhaustive_bound_with(h: &SimpleGraph, kmax: usize, tolerance: f64, grid: usize) -> Result<BoundReport, BoundsError> {
    let family = enumerate_crgs(kmax, std::slice::from_ref(h))?;
    if family.is_empty() {
        return Err(BoundsError::EmptyPortfolio);
    }
    let mut report = maximize_envelope_with(&family, tolerance, grid)?;
    let p = report.p_star;
    let min_f = family
        .par_iter()
        .map(|k| f_of(k, p))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    report.method = Method::Exhaustive;
    report.min_f_evidence = Some(min_f);
    report.d_star_lower = lower_bound_chi(h).unwrap_or(0.0);
    Ok(report)
}
