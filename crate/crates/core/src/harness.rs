//! Monte Carlo driver: drops, allocation by every enabled method, held-out
//! evaluation, aggregation and parameter sweeps.

use std::io;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{apra_threshold, solve_apra, solve_nrra, solve_opt_perfect_csi};
use crate::bernstein::{bisection_power_allocation, BernsteinParams};
use crate::config::{CalibrationScope, Method, ScenarioConfig, SweepParam};
use crate::error::{ConfigError, ModelError, Result};
use crate::geometry_channel::{generate_link_state, sinr_vue, LinkState, SampleSet};
use crate::matching::{build_capacity_matrix, match_pairs, CapacityMatrix, ReuseAssignment};
use crate::pair::{PairContext, PairSolution, PowerPair};
use crate::selflearn::{
    calibrate_joint, calibrate_pair, calibration_index, closed_form_power, initial_feasible, AffineUncertaintySet,
    AnchorMode,
};

const STREAM_LINKS: u64 = 0;
const STREAM_SAMPLES: u64 = 1;
const STREAM_TEST: u64 = 2;

/// Independent RNG stream for one drop and purpose.
pub fn drop_rng(seed: u64, drop_id: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(drop_id * 4 + stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VueOutcome {
    pub s: usize,
    pub j: usize,
    pub power: PowerPair,
    pub violations: usize,
    /// Fraction of test realizations below the V2V threshold.
    pub outage: f64,
    /// Mean of 10 log10(SINR) over test realizations.
    pub mean_sinr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub method: Method,
    pub assignment: ReuseAssignment,
    /// Power pair used by each CUE's matched link.
    pub powers: Vec<PowerPair>,
    pub capacity_bps: f64,
    /// Real VUEs matched to a feasible pair.
    pub vues: Vec<VueOutcome>,
    /// Every real VUE was scheduled.
    pub feasible: bool,
}

impl MethodOutcome {
    pub fn scheduled(&self) -> usize {
        self.vues.len()
    }

    /// Mean outage over scheduled VUEs.
    pub fn outage(&self) -> Option<f64> {
        (!self.vues.is_empty()).then(|| self.vues.iter().map(|v| v.outage).sum::<f64>() / self.vues.len() as f64)
    }

    pub fn mean_sinr_db(&self) -> Option<f64> {
        (!self.vues.is_empty())
            .then(|| self.vues.iter().map(|v| v.mean_sinr_db).sum::<f64>() / self.vues.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropResult {
    pub drop_id: u64,
    pub num_vues: usize,
    pub test_count: usize,
    pub methods: Vec<MethodOutcome>,
}

impl DropResult {
    pub fn method(&self, m: Method) -> Option<&MethodOutcome> {
        self.methods.iter().find(|o| o.method == m)
    }
}

/// Inputs shared by all per-pair solvers of one drop.
struct DropInputs<'a> {
    cfg: &'a ScenarioConfig,
    link: &'a LinkState,
    samples: Option<&'a SampleSet>,
    k_star: usize,
}

impl DropInputs<'_> {
    fn ctx(&self, j: usize, s: usize) -> PairContext {
        PairContext::from_link(self.cfg, self.link, j, s)
    }

    /// Interference-free CUE at full power (virtual VUE column).
    fn solo(&self, j: usize) -> PairSolution {
        let cfg = self.cfg;
        let ctx = PairContext {
            g_c: self.link.g_c(j),
            g_b: 0.0,
            sigma2: cfg.sigma2(),
            gamma_min_c: cfg.sinr_min_cue,
            gamma_min_d: cfg.sinr_min_vue,
            p_max_c: cfg.p_max_cue(),
            p_max_d: cfg.p_max_vue(),
            bandwidth: cfg.bandwidth_hz,
        };
        PairSolution { power: PowerPair::new(ctx.p_max_c, 0.0), capacity: ctx.solo_capacity() }
    }

    fn capacity_matrix(&self, m: Method) -> CapacityMatrix {
        let (jn, sn) = (self.link.num_cues(), self.link.num_vues());
        let solo = |j| self.solo(j);
        match m {
            Method::Opt => build_capacity_matrix(jn, sn, |j, s| {
                solve_opt_perfect_csi(self.link.nominal_d(s), self.link.nominal_cross(j, s), &self.ctx(j, s))
            }, solo),
            Method::Brra => {
                let xi = self.cfg.bisection_tol * self.cfg.p_max_vue();
                build_capacity_matrix(jn, sn, |j, s| {
                    bisection_power_allocation(&BernsteinParams::from_link(self.cfg, self.link, j, s), xi).solution
                }, solo)
            }
            Method::Nrra => build_capacity_matrix(jn, sn, |j, s| solve_nrra(self.link, j, s, &self.ctx(j, s)), solo),
            Method::Apra => {
                let g = apra_threshold(self.cfg.sinr_min_vue, self.cfg.outage_prob);
                build_capacity_matrix(jn, sn, |j, s| solve_apra(self.link, j, s, g, &self.ctx(j, s)), solo)
            }
            Method::Slaa | Method::Slwa => {
                let mode = if m == Method::Slaa { AnchorMode::Average } else { AnchorMode::Worst };
                let sets = self.learned_sets(mode);
                build_capacity_matrix(jn, sn, |j, s| {
                    let set = sets[j][s]?;
                    closed_form_power(&self.ctx(j, s), &set).map(|c| c.solution)
                }, solo)
            }
        }
    }

    /// Calibrated region for every pair that has an anchor.
    fn learned_sets(&self, mode: AnchorMode) -> Vec<Vec<Option<AffineUncertaintySet>>> {
        let samples = self.samples.expect("samples drawn for self-learning methods");
        let (jn, sn) = (self.link.num_cues(), self.link.num_vues());
        let gamma = self.cfg.sinr_min_vue;
        let anchors: Vec<((usize, usize), PowerPair)> = (0..jn)
            .flat_map(|j| (0..sn).map(move |s| (j, s)))
            .filter_map(|(j, s)| {
                initial_feasible(mode, self.cfg.anchor_rule, &self.ctx(j, s), samples, j, s).map(|p| ((j, s), p))
            })
            .collect();
        let mut sets = vec![vec![None; sn]; jn];
        match self.cfg.calibration_scope {
            CalibrationScope::Pair => {
                for &((j, s), p) in &anchors {
                    sets[j][s] = Some(calibrate_pair(samples, j, s, p, gamma, self.k_star));
                }
            }
            CalibrationScope::Joint if !anchors.is_empty() => {
                let r_d = calibrate_joint(samples, &anchors, gamma, self.k_star);
                for &((j, s), p) in &anchors {
                    sets[j][s] = Some(AffineUncertaintySet { p_tilde: p, gamma_min_d: gamma, r_d });
                }
            }
            CalibrationScope::Joint => {}
        }
        sets
    }
}

fn evaluate(
    m: Method,
    matrix: &CapacityMatrix,
    assignment: ReuseAssignment,
    total: f64,
    test: &SampleSet,
    cfg: &ScenarioConfig,
) -> MethodOutcome {
    let sigma2 = cfg.sigma2();
    let gamma = cfg.sinr_min_vue;
    let powers: Vec<PowerPair> = assignment
        .col_of_row
        .iter()
        .enumerate()
        .map(|(j, &s)| matrix.power[j][s].unwrap_or_default())
        .collect();
    let mut vues = Vec::new();
    for (j, s) in assignment.real_pairs() {
        let Some(p) = matrix.power[j][s] else { continue };
        if matrix.entries[j][s] <= 0.0 {
            continue;
        }
        let mut violations = 0;
        let mut db = 0.0;
        for n in 0..test.len() {
            let sinr = sinr_vue(p.p_c, p.p_d, test.g_d(n, s), test.g_cross(n, j, s), sigma2);
            if sinr < gamma {
                violations += 1;
            }
            db += 10.0 * sinr.log10();
        }
        let mtot = test.len() as f64;
        vues.push(VueOutcome {
            s,
            j,
            power: p,
            violations,
            outage: violations as f64 / mtot,
            mean_sinr_db: db / mtot,
        });
    }
    vues.sort_by_key(|v| v.s);
    let feasible = vues.len() == matrix.num_real;
    MethodOutcome { method: m, assignment, powers, capacity_bps: total, vues, feasible }
}

/// One drop: channels, samples, allocation by each method in
/// `cfg.methods`, and evaluation on `test_count` fresh realizations.
pub fn run_drop(cfg: &ScenarioConfig, drop_id: u64) -> Result<DropResult, ModelError> {
    let (_, link) = generate_link_state(cfg, &mut drop_rng(cfg.seed, drop_id, STREAM_LINKS))?;
    let learn = cfg.methods.iter().any(|m| m.is_self_learning());
    let samples = if learn {
        let mut rng = drop_rng(cfg.seed, drop_id, STREAM_SAMPLES);
        Some(SampleSet::draw(&link, cfg.error_model, cfg.sample_count, &mut rng))
    } else {
        None
    };
    let k_star = if learn { calibration_index(cfg.sample_count, cfg.outage_prob, cfg.confidence_risk)? } else { 0 };
    let test = SampleSet::draw(&link, cfg.error_model, cfg.test_count, &mut drop_rng(cfg.seed, drop_id, STREAM_TEST));
    let inputs = DropInputs { cfg, link: &link, samples: samples.as_ref(), k_star };
    let methods = cfg
        .methods
        .iter()
        .map(|&m| {
            let matrix = inputs.capacity_matrix(m);
            let (assignment, total) = match_pairs(&matrix);
            evaluate(m, &matrix, assignment, total, &test, cfg)
        })
        .collect();
    Ok(DropResult { drop_id, num_vues: cfg.num_vues, test_count: cfg.test_count, methods })
}

/// Drops `0..cfg.drops`, in parallel, returned in drop order.
pub fn run_drops(cfg: &ScenarioConfig) -> Result<Vec<DropResult>, ModelError> {
    (0..cfg.drops as u64).into_par_iter().map(|d| run_drop(cfg, d)).collect()
}

pub fn run_drops_serial(cfg: &ScenarioConfig) -> Result<Vec<DropResult>, ModelError> {
    (0..cfg.drops as u64).map(|d| run_drop(cfg, d)).collect()
}

/// Aggregate statistics of one method over drops.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub drops: usize,
    pub mean_capacity_bps: f64,
    /// Mean over drops of the per-drop mean VUE SINR in dB (NaN if none scheduled).
    pub mean_vue_sinr_db: f64,
    /// Mean over drops of per-drop outage (NaN if none scheduled).
    pub outage_prob: f64,
    pub violations: usize,
    pub trials: usize,
    /// Scheduled real VUEs over all real VUEs.
    pub feasibility_rate: f64,
}

impl MethodSummary {
    /// Binomial standard error of the pooled outage.
    pub fn outage_se(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        let p = self.violations as f64 / self.trials as f64;
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

pub fn summarize(results: &[DropResult], m: Method) -> Option<MethodSummary> {
    let outs: Vec<&MethodOutcome> = results.iter().filter_map(|r| r.method(m)).collect();
    if outs.is_empty() {
        return None;
    }
    let n = outs.len() as f64;
    let mean = |v: Vec<f64>| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
    let total_real: usize = results.iter().map(|r| r.num_vues).sum();
    let scheduled: usize = outs.iter().map(|o| o.scheduled()).sum();
    Some(MethodSummary {
        method: m,
        drops: outs.len(),
        mean_capacity_bps: outs.iter().map(|o| o.capacity_bps).sum::<f64>() / n,
        mean_vue_sinr_db: mean(outs.iter().filter_map(|o| o.mean_sinr_db()).collect()),
        outage_prob: mean(outs.iter().filter_map(|o| o.outage()).collect()),
        violations: outs.iter().flat_map(|o| &o.vues).map(|v| v.violations).sum(),
        trials: results.iter().zip(&outs).map(|(r, o)| o.scheduled() * r.test_count).sum(),
        feasibility_rate: if total_real == 0 { 1.0 } else { scheduled as f64 / total_real as f64 },
    })
}

/// Right-continuous empirical CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// Distinct values with the cumulative fraction at each.
    pub fn table(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &v) in self.sorted.iter().enumerate() {
            let frac = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = frac,
                _ => out.push((v, frac)),
            }
        }
        out
    }
}

pub fn empirical_cdf(samples: &[f64]) -> Result<EmpiricalCdf, ModelError> {
    if samples.is_empty() {
        return Err(ModelError::EmptyInput);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    Ok(EmpiricalCdf { sorted })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub drops: usize,
    pub methods: Vec<Method>,
}

/// Parses `START:STEP:END` into an inclusive increasing grid.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, ConfigError> {
    let err = || ConfigError::Grid(s.to_string());
    let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| err())?;
    let [start, step, end] = parts[..] else { return Err(err()) };
    if !(step > 0.0 && end >= start && start.is_finite() && end.is_finite()) {
        return Err(err());
    }
    let n = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sweep_param: String,
    pub value: f64,
    pub method: Method,
    pub mean_cue_capacity_bps: f64,
    /// dB.
    pub mean_vue_sinr: f64,
    pub outage_prob: f64,
    pub feasibility_rate: f64,
    pub drops: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawRow {
    pub sweep_param: String,
    pub value: f64,
    pub drop_id: u64,
    pub method: Method,
    pub capacity_bps: f64,
    pub scheduled_vues: usize,
    pub outage: Option<f64>,
    pub mean_vue_sinr_db: Option<f64>,
}

pub fn raw_rows(param: &str, value: f64, results: &[DropResult]) -> Vec<RawRow> {
    results
        .iter()
        .flat_map(|r| {
            r.methods.iter().map(move |o| RawRow {
                sweep_param: param.to_string(),
                value,
                drop_id: r.drop_id,
                method: o.method,
                capacity_bps: o.capacity_bps,
                scheduled_vues: o.scheduled(),
                outage: o.outage(),
                mean_vue_sinr_db: o.mean_sinr_db(),
            })
        })
        .collect()
}

pub fn summary_rows(param: &str, value: f64, results: &[DropResult], cfg: &ScenarioConfig) -> Vec<SweepRow> {
    cfg.methods
        .iter()
        .filter_map(|&m| summarize(results, m))
        .map(|s| SweepRow {
            sweep_param: param.to_string(),
            value,
            method: s.method,
            mean_cue_capacity_bps: s.mean_capacity_bps,
            mean_vue_sinr: s.mean_vue_sinr_db,
            outage_prob: s.outage_prob,
            feasibility_rate: s.feasibility_rate,
            drops: s.drops,
            seed: cfg.seed,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub raw: Vec<RawRow>,
}

/// Runs every grid point over the same drop indices, so points share random
/// draws wherever the swept parameter does not change them.
pub fn run_sweep(spec: &SweepSpec, base: &ScenarioConfig) -> Result<SweepOutput> {
    if spec.values.is_empty() || spec.values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::Invalid("sweep grid must be nonempty and increasing".into()).into());
    }
    let mut rows = Vec::new();
    let mut raw = Vec::new();
    for &v in &spec.values {
        let mut cfg = base.clone();
        cfg.set_param(spec.param, v);
        cfg.drops = spec.drops;
        cfg.methods = spec.methods.clone();
        cfg.validate()?;
        let results = run_drops(&cfg)?;
        rows.extend(summary_rows(spec.param.name(), v, &results, &cfg));
        raw.extend(raw_rows(spec.param.name(), v, &results));
    }
    Ok(SweepOutput { rows, raw })
}

pub fn write_csv<W: io::Write, T: Serialize>(rows: &[T], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
