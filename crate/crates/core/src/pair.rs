//! Types shared by every per-pair power allocator.

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::geometry_channel::LinkState;

/// Relative slack used when checking constraints at computed corners.
pub const CONSTRAINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PowerPair {
    /// CUE transmit power, W.
    pub p_c: f64,
    /// VUE transmit power, W.
    pub p_d: f64,
}

impl PowerPair {
    pub fn new(p_c: f64, p_d: f64) -> Self {
        Self { p_c, p_d }
    }
}

/// CUE-side data of one candidate (j, s) pair: exact gains, thresholds and caps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairContext {
    /// CUE j to gNB gain.
    pub g_c: f64,
    /// VUE s transmitter to gNB gain.
    pub g_b: f64,
    pub sigma2: f64,
    pub gamma_min_c: f64,
    pub gamma_min_d: f64,
    pub p_max_c: f64,
    pub p_max_d: f64,
    pub bandwidth: f64,
}

impl PairContext {
    pub fn from_link(cfg: &ScenarioConfig, link: &LinkState, j: usize, s: usize) -> Self {
        Self {
            g_c: link.g_c(j),
            g_b: link.g_b(s),
            sigma2: cfg.sigma2(),
            gamma_min_c: cfg.sinr_min_cue,
            gamma_min_d: cfg.sinr_min_vue,
            p_max_c: cfg.p_max_cue(),
            p_max_d: cfg.p_max_vue(),
            bandwidth: cfg.bandwidth_hz,
        }
    }

    /// Smallest p_c meeting the V2I threshold for a given p_d.
    pub fn cue_floor(&self, p_d: f64) -> f64 {
        self.gamma_min_c * (self.sigma2 + p_d * self.g_b) / self.g_c
    }

    /// `p_c g_c / Γc − p_d g_b − σ²`, nonnegative when the V2I threshold holds.
    pub fn cue_slack(&self, p: PowerPair) -> f64 {
        p.p_c * self.g_c / self.gamma_min_c - p.p_d * self.g_b - self.sigma2
    }

    pub fn cue_ok(&self, p: PowerPair) -> bool {
        self.cue_slack(p) >= -CONSTRAINT_TOL * self.sigma2
    }

    pub fn in_box(&self, p: PowerPair) -> bool {
        p.p_c >= 0.0
            && p.p_d >= 0.0
            && p.p_c <= self.p_max_c * (1.0 + CONSTRAINT_TOL)
            && p.p_d <= self.p_max_d * (1.0 + CONSTRAINT_TOL)
    }

    /// CUE capacity in bit/s.
    pub fn capacity(&self, p: PowerPair) -> f64 {
        self.bandwidth * (1.0 + p.p_c * self.g_c / (self.sigma2 + p.p_d * self.g_b)).log2()
    }

    /// Interference-free CUE capacity at full power, used for virtual VUEs.
    pub fn solo_capacity(&self) -> f64 {
        self.bandwidth * (1.0 + self.p_max_c * self.g_c / self.sigma2).log2()
    }
}

/// A feasible power pair and its CUE capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairSolution {
    pub power: PowerPair,
    pub capacity: f64,
}

impl PairSolution {
    pub fn new(ctx: &PairContext, power: PowerPair) -> Self {
        Self { power, capacity: ctx.capacity(power) }
    }
}

/// `x / y` with the sign of an unbounded limit when y is zero.
pub(crate) fn ratio(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        if x >= 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        x / y
    }
}
