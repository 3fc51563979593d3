//! Piecewise-linear density envelopes and rejection constants.
//!
//! A density is bounded per grid segment by the tighter of two lines: the
//! chord through the segment's endpoint pdf values and the tangent at the
//! segment midpoint. On a purely convex segment the chord bounds from above
//! and the tangent from below; on a concave segment the roles swap, which is
//! why a valid grid must contain every inflection point. The elementwise
//! max/min of the two candidate lines therefore picks the correct bound
//! without any explicit convexity bookkeeping.
//!
//! The rejection constant of a (proposal, target) pair is the maximum over
//! all segment edges of upper-target over lower-proposal. The ratio of two
//! linear functions is monotone between edges, so the edge maximum bounds the
//! ratio everywhere on the grid span.

use serde::Serialize;

use crate::dist::{ContinuousDensity, Density};
use crate::error::{Error, Result};

/// Proposal lower-bound values below this floor make the edge ratio
/// meaningless; we surface the unbounded-ratio error instead.
const LOWER_BOUND_FLOOR: f64 = 1e-300;

/// Contiguity tolerance used when deduplicating grid edges.
const EDGE_DEDUP_REL: f64 = 1e-12;

/// A partition of a span of (0, inf) into segments.
///
/// Stored as parallel left/right edge arrays; `build_grid` always produces
/// contiguous segments (`right[i] == left[i+1]`).
#[derive(Debug, Clone, Serialize)]
pub struct Grid {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// The (lower, upper) probability coverage the span was built from.
    pub coverage: (f64, f64),
}

impl Grid {
    /// Builds a contiguous grid from ascending edges.
    pub fn from_edges(edges: &[f64], coverage: (f64, f64)) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidConfig("grid needs at least two edges".into()));
        }
        for w in edges.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidConfig(format!(
                    "grid edges must be strictly ascending: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if edges[0] <= 0.0 {
            return Err(Error::Domain("grid edges must be positive".into()));
        }
        Ok(Grid {
            left: edges[..edges.len() - 1].to_vec(),
            right: edges[1..].to_vec(),
            coverage,
        })
    }

    pub fn segment_count(&self) -> usize {
        self.left.len()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.left[0], *self.right.last().unwrap())
    }

    /// Splits each segment at its arithmetic midpoint (the tangent point of
    /// the coarser grid), doubling the segment count.
    pub fn refined(&self) -> Grid {
        let mut edges = Vec::with_capacity(2 * self.left.len() + 1);
        for (l, r) in self.left.iter().zip(&self.right) {
            edges.push(*l);
            edges.push(0.5 * (l + r));
        }
        edges.push(*self.right.last().unwrap());
        Grid::from_edges(&edges, self.coverage).expect("refining preserves validity")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundDirection {
    Upper,
    Lower,
}

/// Per-segment linear bound values at the segment edges.
///
/// Adjacent segments need not agree at their shared edge; both values take
/// part in the rejection-constant maximum.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeBound {
    pub grid: Grid,
    pub y_left: Vec<f64>,
    pub y_right: Vec<f64>,
    pub direction: BoundDirection,
}

impl EnvelopeBound {
    /// Evaluates the bound at `x`, or `None` outside the grid span.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let idx = self
            .grid
            .left
            .iter()
            .zip(&self.grid.right)
            .position(|(l, r)| x >= *l && x <= *r)?;
        Some(self.eval_segment(idx, x))
    }

    pub fn eval_segment(&self, segment: usize, x: f64) -> f64 {
        let l = self.grid.left[segment];
        let r = self.grid.right[segment];
        let t = (x - l) / (r - l);
        self.y_left[segment] + t * (self.y_right[segment] - self.y_left[segment])
    }
}

/// Computes the per-segment linear bound of a density on a grid.
///
/// Per segment: pdf values P at both edges, tangent line values Z at both
/// edges from the midpoint pdf and derivative; upper bounds take the
/// elementwise max(P, Z), lower bounds the elementwise min clamped at zero.
/// Mixture components are bounded independently on the shared grid and
/// combined by weighted sum.
///
/// If a lower-bound line dips negative at either edge the whole segment's
/// lower bound collapses to zero (zero is always valid), which downstream
/// surfaces as an unbounded ratio rather than a wrong constant.
pub fn get_bounds(
    d: &dyn Density,
    grid: &Grid,
    direction: BoundDirection,
) -> Result<EnvelopeBound> {
    let n = grid.segment_count();
    let mut y_left = vec![0.0; n];
    let mut y_right = vec![0.0; n];

    let mut result: Result<()> = Ok(());
    d.for_each_component(&mut |w, comp| {
        if result.is_err() || w == 0.0 {
            return;
        }
        match component_bounds(comp, grid, direction) {
            Ok((cl, cr)) => {
                for i in 0..n {
                    y_left[i] += w * cl[i];
                    y_right[i] += w * cr[i];
                }
            }
            Err(e) => result = Err(e),
        }
    });
    result?;

    Ok(EnvelopeBound {
        grid: grid.clone(),
        y_left,
        y_right,
        direction,
    })
}

fn component_bounds(
    d: &dyn Density,
    grid: &Grid,
    direction: BoundDirection,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = grid.segment_count();
    let mut y_left = Vec::with_capacity(n);
    let mut y_right = Vec::with_capacity(n);
    for i in 0..n {
        let l = grid.left[i];
        let r = grid.right[i];
        let m = 0.5 * (l + r);
        let p_left = d.pdf(l)?;
        let p_right = d.pdf(r)?;
        let p_mid = d.pdf(m)?;
        let d_mid = d.pdf_derivative(m)?;
        let z_left = p_mid + d_mid * (l - m);
        let z_right = p_mid + d_mid * (r - m);
        match direction {
            BoundDirection::Upper => {
                y_left.push(p_left.max(z_left));
                y_right.push(p_right.max(z_right));
            }
            BoundDirection::Lower => {
                let lo_l = p_left.min(z_left);
                let lo_r = p_right.min(z_right);
                if lo_l < 0.0 || lo_r < 0.0 {
                    y_left.push(0.0);
                    y_right.push(0.0);
                } else {
                    y_left.push(lo_l);
                    y_right.push(lo_r);
                }
            }
        }
    }
    Ok((y_left, y_right))
}

/// Builds the shared grid for a (proposal, target) pair.
///
/// The span runs from the smaller (1 - alpha)-quantile of the two densities
/// to the larger alpha-quantile; edges are `n` geometrically spaced points
/// across the span plus every inflection point of either density (all mixture
/// components) that falls strictly inside.
pub fn build_grid(
    proposal: &dyn Density,
    target: &dyn Density,
    alpha: f64,
    n: usize,
) -> Result<Grid> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "coverage alpha must lie in (0.5, 1), got {alpha}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidConfig("grid needs n >= 2 points".into()));
    }
    let lo = proposal
        .quantile(1.0 - alpha)?
        .min(target.quantile(1.0 - alpha)?)
        .max(1e-12);
    let hi = proposal.quantile(alpha)?.max(target.quantile(alpha)?);
    if !(hi > lo) {
        return Err(Error::InvalidConfig(format!(
            "degenerate grid span [{lo}, {hi}]"
        )));
    }

    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    let mut edges: Vec<f64> = (0..n).map(|i| lo * ratio.powi(i as i32)).collect();
    edges[n - 1] = hi;
    for d in [proposal, target] {
        for p in d.inflection_points() {
            if p > lo && p < hi {
                edges.push(p);
            }
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() <= EDGE_DEDUP_REL * b.abs());

    Grid::from_edges(&edges, (1.0 - alpha, alpha))
}

/// Target probability mass outside the grid span. Positive mass marks the
/// constant as domain-restricted ("inexact").
pub fn truncated_mass(target: &dyn Density, grid: &Grid) -> f64 {
    let (lo, hi) = grid.span();
    (target.cdf(lo) + (1.0 - target.cdf(hi))).max(0.0)
}

/// The (time constant, mark constant) pair used by the speculative sampler,
/// with the target mass lost to domain restriction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RejectionConstants {
    pub time_constant: f64,
    pub mark_constant: f64,
    pub truncated_mass: f64,
}

/// Upper bound on max f_T / f_P over the grid span: upper-bounds the
/// target, lower-bounds the proposal, and takes the worst segment-edge
/// ratio, scanning segments left to right. The ratio of two linear bounds
/// is monotone inside each segment, so the edge maximum is the grid-wide
/// maximum.
pub fn rejection_const_on_grid(
    proposal: &dyn Density,
    target: &dyn Density,
    grid: &Grid,
) -> Result<f64> {
    let upper = get_bounds(target, grid, BoundDirection::Upper)?;
    let lower = get_bounds(proposal, grid, BoundDirection::Lower)?;
    let mut best = 0.0_f64;
    for i in 0..grid.segment_count() {
        for (g, h, x) in [
            (upper.y_left[i], lower.y_left[i], grid.left[i]),
            (upper.y_right[i], lower.y_right[i], grid.right[i]),
        ] {
            if g <= 0.0 {
                continue;
            }
            if h < LOWER_BOUND_FLOOR {
                return Err(Error::UnboundedRatio(format!(
                    "proposal lower bound vanishes at x={x} where target bound is {g}"
                )));
            }
            best = best.max(g / h);
        }
    }
    Ok(best)
}

/// Builds the grid for the pair and returns the envelope rejection constant.
pub fn rejection_const(
    proposal: &dyn Density,
    target: &dyn Density,
    alpha: f64,
    n: usize,
) -> Result<f64> {
    let grid = build_grid(proposal, target, alpha, n)?;
    rejection_const_on_grid(proposal, target, &grid)
}

/// Closed-form constant for an exponential proposal/target pair.
///
/// The density ratio is (rate_t / rate_p) * exp((rate_p - rate_t) x). With
/// rate_p < rate_t it decreases, so the maximum sits at x = 0. With
/// rate_p > rate_t it is unbounded and the domain is restricted to the
/// target's alpha-quantile, where the ratio is evaluated.
pub fn analytic_exponential_const(rate_p: f64, rate_t: f64, alpha: f64) -> f64 {
    debug_assert!(rate_p > 0.0 && rate_t > 0.0);
    if rate_p == rate_t {
        return 1.0;
    }
    if rate_p < rate_t {
        return rate_t / rate_p;
    }
    let x_alpha = -libm::log1p(-alpha) / rate_t;
    (rate_t / rate_p) * ((rate_p - rate_t) * x_alpha).exp()
}

/// Convenience wrapper for exponential pairs expressed as catalog densities.
pub fn analytic_exponential_pair(
    proposal: &ContinuousDensity,
    target: &ContinuousDensity,
    alpha: f64,
) -> Option<f64> {
    match (proposal, target) {
        (
            ContinuousDensity::Exponential { rate: rp },
            ContinuousDensity::Exponential { rate: rt },
        ) => Some(analytic_exponential_const(*rp, *rt, alpha)),
        _ => None,
    }
}
