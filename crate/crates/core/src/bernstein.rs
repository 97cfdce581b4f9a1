//! Bernstein safe approximation of the V2V chance constraint and the
//! bisection power allocation for one CUE–VUE pair.

use std::io;

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::geometry_channel::LinkState;
use crate::pair::{ratio, PairContext, PairSolution, PowerPair, CONSTRAINT_TOL};

/// Moment families for the normalized error ξ ∈ [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionFamily {
    /// Any distribution supported on [−1, 1].
    BoundedSupport,
    /// Unimodal on [−1, 1].
    UnimodalBounded,
    /// Unimodal and symmetric on [−1, 1].
    UnimodalSymmetric,
}

impl DistributionFamily {
    pub fn mu_minus(self) -> f64 {
        match self {
            Self::BoundedSupport => -1.0,
            Self::UnimodalBounded => -0.5,
            Self::UnimodalSymmetric => 0.0,
        }
    }

    pub fn mu_plus(self) -> f64 {
        -self.mu_minus()
    }

    pub fn sigma(self) -> f64 {
        match self {
            Self::BoundedSupport => 0.0,
            Self::UnimodalBounded => 1.0 / 12f64.sqrt(),
            Self::UnimodalSymmetric => 1.0 / 3f64.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinParams {
    /// Mean VUE link gain ḡ_d.
    pub g_bar_d: f64,
    /// Mean CUE-to-VUE interference gain ḡ_x.
    pub g_bar_cross: f64,
    /// Deviation scale ĝ_d.
    pub g_hat_d: f64,
    /// Deviation scale ĝ_x.
    pub g_hat_cross: f64,
    pub family: DistributionFamily,
    pub beta: f64,
    pub ctx: PairContext,
}

impl BernsteinParams {
    pub fn from_link(cfg: &ScenarioConfig, link: &LinkState, j: usize, s: usize) -> Self {
        let q = cfg.deviation_scale;
        Self {
            g_bar_d: link.nominal_d(s),
            g_bar_cross: link.nominal_cross(j, s),
            g_hat_d: link.deviation_d(s, q),
            g_hat_cross: link.deviation_cross(j, s, q),
            family: cfg.family,
            beta: cfg.outage_prob,
            ctx: PairContext::from_link(cfg, link, j, s),
        }
    }

    fn k(&self) -> f64 {
        (4.0 * (1.0 / self.beta).ln()).sqrt()
    }

    /// Coefficients of the margin `a_d p_d − a_x p_c − max(c_x p_c, c_d p_d) − σ²`.
    fn coefficients(&self) -> Coefficients {
        let gamma = self.ctx.gamma_min_d;
        let f = self.family;
        let ks = self.k() * f.sigma();
        Coefficients {
            a_d: (self.g_bar_d + f.mu_minus() * self.g_hat_d) / gamma,
            a_x: self.g_bar_cross + f.mu_plus() * self.g_hat_cross,
            c_d: ks * self.g_hat_d / gamma,
            c_x: ks * self.g_hat_cross,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Coefficients {
    a_d: f64,
    a_x: f64,
    c_d: f64,
    c_x: f64,
}

/// Left side minus right side of the Bernstein constraint; nonnegative means
/// the pair is robust-feasible.
pub fn bernstein_margin(p: PowerPair, params: &BernsteinParams) -> f64 {
    let gamma = params.ctx.gamma_min_d;
    let f = params.family;
    let vue = p.p_d * params.g_hat_d / gamma;
    let cue = p.p_c * params.g_hat_cross;
    p.p_d * params.g_bar_d / gamma - p.p_c * params.g_bar_cross + f.mu_minus() * vue
        - f.mu_plus() * cue
        + params.k() * (-f.sigma() * cue).min(-f.sigma() * vue)
        - params.ctx.sigma2
}

/// Largest p_c with nonnegative margin at this p_d. May be negative (no
/// p_c ≥ 0 qualifies) or +∞ (the margin does not bind).
///
/// The min{} is split into its two linear branches; a branch's bound is kept
/// only if it satisfies that branch's assumption.
pub fn robust_cue_bound(p_d: f64, params: &BernsteinParams) -> f64 {
    let Coefficients { a_d, a_x, c_d, c_x } = params.coefficients();
    let s2 = params.ctx.sigma2;
    // Branch i: c_x p_c >= c_d p_d, protection term is −c_x p_c.
    let u1 = ratio(a_d * p_d - s2, a_x + c_x);
    let branch1 = if c_x * u1 >= c_d * p_d { Some(u1) } else { None };
    // Branch ii: c_x p_c <= c_d p_d, protection term is −c_d p_d.
    let u2 = ratio((a_d - c_d) * p_d - s2, a_x);
    let t = ratio(c_d * p_d, c_x);
    let branch2 = Some(u2.min(t));
    match (branch1, branch2) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => f64::NEG_INFINITY,
    }
}

/// Slope of [`robust_cue_bound`] in p_d, from whichever branch is active.
fn robust_cue_bound_slope(p_d: f64, params: &BernsteinParams) -> f64 {
    let Coefficients { a_d, a_x, c_d, c_x } = params.coefficients();
    let s2 = params.ctx.sigma2;
    let u1 = ratio(a_d * p_d - s2, a_x + c_x);
    let u2 = ratio((a_d - c_d) * p_d - s2, a_x);
    if u1 <= u2 {
        ratio(a_d, a_x + c_x)
    } else {
        ratio(a_d - c_d, a_x)
    }
}

/// Inner problem at fixed p_d: the largest p_c meeting both the V2I threshold
/// and the Bernstein constraint, or `None`.
pub fn solve_inner_cue_power(p_d: f64, params: &BernsteinParams) -> Option<f64> {
    let u = robust_cue_bound(p_d, params);
    let floor = params.ctx.cue_floor(p_d);
    (u >= 0.0 && u >= floor * (1.0 - CONSTRAINT_TOL)).then_some(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BisectionStep {
    pub iteration: usize,
    pub lo: f64,
    pub hi: f64,
    pub p_d: f64,
    pub p_c_bound: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionOutcome {
    pub solution: Option<PairSolution>,
    pub iterations: usize,
    pub trace: Vec<BisectionStep>,
}

impl BisectionOutcome {
    pub fn write_trace_csv<W: io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for step in &self.trace {
            wr.serialize(step)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Upper bound on bisection iterations for threshold ξ.
pub fn max_bisection_iterations(p_max_d: f64, xi: f64) -> usize {
    (p_max_d / xi).log2().ceil() as usize + 1
}

/// Bisection on p_d over [0, p_max_d].
///
/// At each midpoint the inner problem gives p_c. If p_c overshoots p_max_c
/// the VUE power is lowered, if it falls short it is raised, and the search
/// stops once p_c is within ξ of p_max_c or the bracket is narrower than ξ.
/// Where the inner problem is infeasible the side is taken from the slope of
/// the V2I slack, which is concave in p_d.
pub fn bisection_power_allocation(params: &BernsteinParams, xi: f64) -> BisectionOutcome {
    let ctx = &params.ctx;
    let (mut lo, mut hi) = (0.0, ctx.p_max_d);
    let mut trace = Vec::new();
    let mut hit = None;
    let floor_slope = ctx.gamma_min_c * ctx.g_b / ctx.g_c;
    let mut iterations = 0;
    while hi - lo > xi {
        iterations += 1;
        let p_d = 0.5 * (lo + hi);
        let u = robust_cue_bound(p_d, params);
        trace.push(BisectionStep {
            iteration: iterations,
            lo,
            hi,
            p_d,
            p_c_bound: u,
            margin: bernstein_margin(PowerPair::new(u.clamp(0.0, ctx.p_max_c), p_d), params),
        });
        if solve_inner_cue_power(p_d, params).is_some() {
            if u > ctx.p_max_c + xi {
                hi = p_d;
            } else if u < ctx.p_max_c - xi {
                lo = p_d;
            } else {
                hit = Some(p_d);
                break;
            }
        } else if robust_cue_bound_slope(p_d, params) > floor_slope {
            lo = p_d;
        } else {
            hi = p_d;
        }
    }
    let candidates: Vec<f64> = match hit {
        Some(p) => vec![p],
        None => vec![hi, lo],
    };
    let solution = candidates
        .into_iter()
        .filter_map(|p_d| {
            let u = robust_cue_bound(p_d, params);
            let p = PowerPair::new(u.min(ctx.p_max_c), p_d);
            (p.p_c > 0.0 && ctx.cue_ok(p)).then(|| PairSolution::new(ctx, p))
        })
        .fold(None::<PairSolution>, |best, c| match best {
            Some(b) if b.capacity >= c.capacity => Some(b),
            _ => Some(c),
        });
    BisectionOutcome { solution, iterations, trace }
}
