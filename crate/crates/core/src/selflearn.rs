//! Sample-based learning of an affine high-probability region for the V2V
//! gains, order-statistic calibration of its size, and the closed-form power
//! allocation over that region.

use crate::baselines::solve_deterministic;
use crate::config::AnchorRule;
use crate::error::ModelError;
use crate::geometry_channel::SampleSet;
use crate::pair::{ratio, PairContext, PairSolution, PowerPair};

/// Which sample statistic the anchor is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorMode {
    /// Smallest VUE gain and largest interference gain over the samples.
    Worst,
    /// Sample means.
    Average,
}

/// Anchor gains (g_d, g_x) of pair (j, s) under `mode`.
pub fn anchor_gains(samples: &SampleSet, j: usize, s: usize, mode: AnchorMode) -> (f64, f64) {
    let n = samples.len();
    match mode {
        AnchorMode::Worst => (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(d, x), i| {
            (d.min(samples.g_d(i, s)), x.max(samples.g_cross(i, j, s)))
        }),
        AnchorMode::Average => {
            let (d, x) = (0..n).fold((0.0, 0.0), |(d, x), i| (d + samples.g_d(i, s), x + samples.g_cross(i, j, s)));
            (d / n as f64, x / n as f64)
        }
    }
}

/// Intersection of the V2I and V2V threshold lines at gains (g_d, g_x): the
/// componentwise smallest power pair meeting both. `None` if it does not
/// exist or leaves the power box.
pub fn vertex_power(g_d: f64, g_x: f64, ctx: &PairContext) -> Option<PowerPair> {
    let a = g_d / ctx.gamma_min_d;
    let c = ctx.g_c / ctx.gamma_min_c;
    // c p_c − g_b p_d = σ², a p_d − g_x p_c = σ²
    let det = a * c - g_x * ctx.g_b;
    if det <= 0.0 {
        return None;
    }
    let p_c = ctx.sigma2 * (a + ctx.g_b) / det;
    let p_d = ctx.sigma2 * (c + g_x) / det;
    let p = PowerPair::new(p_c, p_d);
    (p_c > 0.0 && p_d > 0.0 && ctx.in_box(p)).then_some(p)
}

/// Anchor power pair p̃ for pair (j, s).
pub fn initial_feasible(
    mode: AnchorMode,
    rule: AnchorRule,
    ctx: &PairContext,
    samples: &SampleSet,
    j: usize,
    s: usize,
) -> Option<PowerPair> {
    if samples.is_empty() {
        return None;
    }
    let (g_d, g_x) = anchor_gains(samples, j, s, mode);
    match rule {
        AnchorRule::Vertex => vertex_power(g_d, g_x, ctx),
        AnchorRule::Corner => solve_deterministic(g_d, g_x, ctx.gamma_min_d, ctx).map(|s| s.power),
    }
}

/// Smallest k with Σ_{t<k} C(N,t)(1−β)^t β^(N−t) ≥ 1 − ς, evaluated in log space.
pub fn calibration_index(n: usize, beta: f64, varsigma: f64) -> Result<usize, ModelError> {
    let err = ModelError::NoValidIndex { n, beta, varsigma };
    if n == 0 || !(beta > 0.0 && beta < 1.0) || !(varsigma > 0.0 && varsigma < 1.0) {
        return Err(err);
    }
    let target = (1.0 - varsigma).ln();
    let (ln_q, ln_b) = ((1.0 - beta).ln(), beta.ln());
    let mut ln_choose = 0.0f64;
    let mut acc = f64::NEG_INFINITY;
    for k in 1..=n {
        let t = k - 1;
        if t > 0 {
            ln_choose += ((n - t + 1) as f64).ln() - (t as f64).ln();
        }
        let term = ln_choose + t as f64 * ln_q + (n - t) as f64 * ln_b;
        acc = log_add_exp(acc, term);
        if acc >= target - 1e-12 {
            return Ok(k);
        }
    }
    Err(err)
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// The k-th smallest value (1-based) by partial selection.
pub fn order_statistic(values: &mut [f64], k: usize) -> f64 {
    assert!(k >= 1 && k <= values.len(), "order statistic index out of range");
    let (_, v, _) = values.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
    *v
}

/// Affine region {θ = (g_d, g_x) : p̃_d g_d / Γd − p̃_c g_x ≥ r_d}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineUncertaintySet {
    pub p_tilde: PowerPair,
    pub gamma_min_d: f64,
    pub r_d: f64,
}

impl AffineUncertaintySet {
    /// Direction vector (p̃_d / Γd, −p̃_c).
    pub fn direction(&self) -> [f64; 2] {
        [self.p_tilde.p_d / self.gamma_min_d, -self.p_tilde.p_c]
    }

    pub fn contains(&self, g_d: f64, g_x: f64) -> bool {
        mapped_value(self.p_tilde, self.gamma_min_d, g_d, g_x) >= self.r_d
    }
}

/// ⟨(p̃_d/Γd, −p̃_c), (g_d, g_x)⟩.
pub fn mapped_value(p_tilde: PowerPair, gamma_min_d: f64, g_d: f64, g_x: f64) -> f64 {
    p_tilde.p_d * g_d / gamma_min_d - p_tilde.p_c * g_x
}

/// Radius from mapped sample values f(χⁿ): the ascending k-th order
/// statistic of the score −f, negated. The region {f ≥ r_d} then holds at
/// least 1 − β of the mass with confidence 1 − ς.
pub fn calibrate_radius(mapped: &[f64], k: usize) -> f64 {
    let mut score: Vec<f64> = mapped.iter().map(|v| -v).collect();
    -order_statistic(&mut score, k)
}

/// Calibrates the region of pair (j, s) from its own anchor.
pub fn calibrate_pair(
    samples: &SampleSet,
    j: usize,
    s: usize,
    p_tilde: PowerPair,
    gamma_min_d: f64,
    k: usize,
) -> AffineUncertaintySet {
    let mapped: Vec<f64> = (0..samples.len())
        .map(|n| mapped_value(p_tilde, gamma_min_d, samples.g_d(n, s), samples.g_cross(n, j, s)))
        .collect();
    AffineUncertaintySet { p_tilde, gamma_min_d, r_d: calibrate_radius(&mapped, k) }
}

/// One radius shared by all anchored pairs, from f(χⁿ) = min over pairs.
pub fn calibrate_joint(
    samples: &SampleSet,
    anchors: &[((usize, usize), PowerPair)],
    gamma_min_d: f64,
    k: usize,
) -> f64 {
    let mapped: Vec<f64> = (0..samples.len())
        .map(|n| {
            anchors
                .iter()
                .map(|&((j, s), p)| mapped_value(p, gamma_min_d, samples.g_d(n, s), samples.g_cross(n, j, s)))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    calibrate_radius(&mapped, k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerConstants {
    /// Smallest ray scale z meeting the V2I threshold (+∞ if none).
    pub upsilon: f64,
    /// σ² / r_d.
    pub delta: f64,
    /// p_max_d / p̃_d.
    pub lambda_d: f64,
    /// p_max_c / p̃_c.
    pub lambda_c: f64,
    /// Largest z keeping the V2I threshold at p_c = p_max_c.
    pub omega: f64,
}

impl CornerConstants {
    pub fn new(ctx: &PairContext, set: &AffineUncertaintySet) -> Self {
        let (pc, pd) = (set.p_tilde.p_c, set.p_tilde.p_d);
        let den = pc * ctx.g_c - ctx.gamma_min_c * pd * ctx.g_b;
        let upsilon = if den > 0.0 { ctx.sigma2 * ctx.gamma_min_c / den } else { f64::INFINITY };
        Self {
            upsilon,
            delta: ctx.sigma2 / set.r_d,
            lambda_d: ctx.p_max_d / pd,
            lambda_c: ctx.p_max_c / pc,
            omega: ratio(ctx.p_max_c * ctx.g_c - ctx.sigma2 * ctx.gamma_min_c, ctx.gamma_min_c * pd * ctx.g_b),
        }
    }
}

/// Corner of the closed-form solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// p_c = p_max_c on the anchor ray.
    CueCap,
    /// p_d = p_max_d on the anchor ray.
    VueCap,
    /// p_c = p_max_c with p_d = σ² p̃_d / r_d.
    Protection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormSolution {
    pub solution: PairSolution,
    pub branch: Branch,
    /// Dual scale z*.
    pub z: f64,
}

fn le(a: f64, b: f64) -> bool {
    if a.is_finite() && b.is_finite() {
        a <= b + 1e-12 * a.abs().max(b.abs())
    } else {
        a <= b
    }
}

/// Closed-form power allocation over the learned region, or `None`
/// (zero capacity) when no corner is admissible.
pub fn closed_form_power(ctx: &PairContext, set: &AffineUncertaintySet) -> Option<ClosedFormSolution> {
    if !(set.r_d > 0.0 && set.p_tilde.p_c > 0.0 && set.p_tilde.p_d > 0.0) {
        return None;
    }
    let k = CornerConstants::new(ctx, set);
    let pt = set.p_tilde;
    let mut candidates = Vec::with_capacity(3);
    if le(k.upsilon.max(k.delta), k.lambda_c) && le(k.lambda_c, k.omega.min(k.lambda_d)) {
        let p = PowerPair::new(ctx.p_max_c, ctx.p_max_c * pt.p_d / pt.p_c);
        candidates.push((Branch::CueCap, p, k.lambda_c));
    }
    if le(k.upsilon.max(k.delta), k.lambda_d) && le(k.lambda_d, k.lambda_c) {
        let p = PowerPair::new(ctx.p_max_d * pt.p_c / pt.p_d, ctx.p_max_d);
        candidates.push((Branch::VueCap, p, k.lambda_d));
    }
    if le(k.lambda_c, k.delta) && le(k.delta, k.omega.min(k.lambda_d)) {
        let p = PowerPair::new(ctx.p_max_c, ctx.sigma2 * pt.p_d / set.r_d);
        candidates.push((Branch::Protection, p, k.delta));
    }
    candidates
        .into_iter()
        .map(|(branch, p, z)| ClosedFormSolution { solution: PairSolution::new(ctx, p), branch, z })
        .fold(None, |best: Option<ClosedFormSolution>, c| match best {
            Some(b) if b.solution.capacity >= c.solution.capacity => Some(b),
            _ => Some(c),
        })
}

/// Dual feasibility of (p, z): z r_d ≥ σ², z p̃_d ≤ p_d, z p̃_c ≥ p_c, z ≥ 0.
pub fn dual_feasibility_check(p: PowerPair, z: f64, p_tilde: PowerPair, r_d: f64, sigma2: f64) -> bool {
    let tol = 1e-12;
    z >= 0.0
        && z * r_d >= sigma2 * (1.0 - tol)
        && z * p_tilde.p_d <= p.p_d * (1.0 + tol)
        && z * p_tilde.p_c >= p.p_c * (1.0 - tol)
}
