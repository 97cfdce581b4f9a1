//! Deterministic corner solver, the nominal optimum, the non-robust and
//! transformed-threshold baselines, and capacity-gap measurement.

use crate::config::Method;
use crate::geometry_channel::LinkState;
use crate::harness::DropResult;
use crate::pair::{PairContext, PairSolution, PowerPair};

/// Maximizes CUE capacity subject to the V2I threshold, the deterministic V2V
/// threshold `p_d g_d / (σ² + p_c g_x) ≥ Γ` and the power box.
///
/// Capacity grows with p_c along the V2V boundary, so the optimum is the
/// highest p_c on that boundary inside the box. The V2I slack is linear along
/// the boundary and negative at p_c = 0, so checking the end point suffices.
pub fn solve_deterministic(g_d: f64, g_x: f64, gamma_d: f64, ctx: &PairContext) -> Option<PairSolution> {
    let a = g_d / gamma_d;
    if !(a > 0.0) || ctx.sigma2 / a > ctx.p_max_d {
        return None;
    }
    let p_c = if g_x > 0.0 { ctx.p_max_c.min((a * ctx.p_max_d - ctx.sigma2) / g_x) } else { ctx.p_max_c };
    if p_c <= 0.0 {
        return None;
    }
    let p = PowerPair::new(p_c, ((ctx.sigma2 + g_x * p_c) / a).min(ctx.p_max_d));
    ctx.cue_ok(p).then(|| PairSolution::new(ctx, p))
}

/// Optimum when the V2V gains are taken at their nominal values.
pub fn solve_opt_perfect_csi(g_d: f64, g_x: f64, ctx: &PairContext) -> Option<PairSolution> {
    solve_deterministic(g_d, g_x, ctx.gamma_min_d, ctx)
}

/// Uses the large-scale V2V gains only.
pub fn solve_nrra(link: &LinkState, j: usize, s: usize, ctx: &PairContext) -> Option<PairSolution> {
    solve_deterministic(link.omega_d[s], link.omega_cross[j][s], ctx.gamma_min_d, ctx)
}

/// Γ̄₀ = Γ / (−ln(1 − β)).
pub fn apra_threshold(gamma_min_d: f64, beta: f64) -> f64 {
    gamma_min_d / -(-beta).ln_1p()
}

/// Large-scale gains with the transformed threshold Γ̄₀.
pub fn solve_apra(link: &LinkState, j: usize, s: usize, gamma_bar: f64, ctx: &PairContext) -> Option<PairSolution> {
    solve_deterministic(link.omega_d[s], link.omega_cross[j][s], gamma_bar, ctx)
}

/// Capacity loss of one method relative to OPT.
#[derive(Debug, Clone, PartialEq)]
pub struct GapStat {
    pub method: Method,
    /// C_OPT − C_method per drop, bit/s.
    pub per_drop: Vec<f64>,
    pub mean: f64,
    /// mean gap / mean OPT capacity.
    pub relative: f64,
    /// Smallest per-drop gap (negative means the method beat OPT).
    pub min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// Bernstein gap.
    pub d1: Option<GapStat>,
    /// Self-learning gaps.
    pub d2: Vec<GapStat>,
}

impl GapReport {
    pub fn get(&self, m: Method) -> Option<&GapStat> {
        self.d1.iter().chain(&self.d2).find(|g| g.method == m)
    }
}

fn gap_for(results: &[DropResult], m: Method) -> Option<GapStat> {
    let pairs: Vec<(f64, f64)> = results
        .iter()
        .map(|r| Some((r.method(Method::Opt)?.capacity_bps, r.method(m)?.capacity_bps)))
        .collect::<Option<_>>()?;
    if pairs.is_empty() {
        return None;
    }
    let per_drop: Vec<f64> = pairs.iter().map(|(o, c)| o - c).collect();
    let n = pairs.len() as f64;
    let mean = per_drop.iter().sum::<f64>() / n;
    let opt = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let min = per_drop.iter().copied().fold(f64::INFINITY, f64::min);
    Some(GapStat { method: m, per_drop, mean, relative: if opt > 0.0 { mean / opt } else { 0.0 }, min })
}

/// Gaps d1 (BRRA) and d2 (SLAA, SLWA) versus OPT over drops evaluated with
/// every method present.
pub fn measure_gaps(results: &[DropResult]) -> GapReport {
    GapReport {
        d1: gap_for(results, Method::Brra),
        d2: [Method::Slaa, Method::Slwa].into_iter().filter_map(|m| gap_for(results, m)).collect(),
    }
}
