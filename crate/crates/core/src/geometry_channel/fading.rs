use std::io;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::geometry::{generate_geometry, Geometry};
use crate::config::{ErrorModel, ScenarioConfig};
use crate::error::{ModelError, Result};

/// `PL(dB) = constant + exponent * log10(d_km)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pathloss {
    pub constant_db: f64,
    pub exponent_db: f64,
}

impl Pathloss {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self { constant_db: cfg.pathloss_constant_db, exponent_db: cfg.pathloss_exponent_db }
    }

    pub fn db(&self, d_m: f64) -> f64 {
        self.constant_db + self.exponent_db * (d_m / 1000.0).log10()
    }
}

impl Default for Pathloss {
    fn default() -> Self {
        Self { constant_db: 128.1, exponent_db: 37.6 }
    }
}

/// Large-scale gain ω with log-normal shadowing. One normal is always drawn.
pub fn large_scale_gain<R: Rng + ?Sized>(d_m: f64, shadow_db: f64, pl: &Pathloss, rng: &mut R) -> f64 {
    let x: f64 = rng.sample(StandardNormal);
    10f64.powf(-(pl.db(d_m) + shadow_db * x) / 10.0)
}

fn cn01<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// h = λĥ + √(1−λ²)e with e ~ CN(0, 1).
pub fn sample_true_channel<R: Rng + ?Sized>(h_hat: Complex64, lambda: f64, rng: &mut R) -> Complex64 {
    h_hat * lambda + cn01(rng) * (1.0 - lambda * lambda).sqrt()
}

/// Channel knowledge at the gNB for one drop.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState {
    pub omega_c: Vec<f64>,
    pub omega_d: Vec<f64>,
    /// CUE j to VUE s receiver, `[j][s]`.
    pub omega_cross: Vec<Vec<f64>>,
    /// VUE s transmitter to gNB.
    pub omega_b: Vec<f64>,
    pub h_c: Vec<Complex64>,
    pub h_b: Vec<Complex64>,
    pub h_hat_d: Vec<Complex64>,
    pub h_hat_cross: Vec<Vec<Complex64>>,
    pub lambda: f64,
}

impl LinkState {
    pub fn num_cues(&self) -> usize {
        self.omega_c.len()
    }

    pub fn num_vues(&self) -> usize {
        self.omega_d.len()
    }

    /// Exact CUE to gNB gain.
    pub fn g_c(&self, j: usize) -> f64 {
        self.h_c[j].norm_sqr() * self.omega_c[j]
    }

    /// Exact VUE transmitter to gNB gain.
    pub fn g_b(&self, s: usize) -> f64 {
        self.h_b[s].norm_sqr() * self.omega_b[s]
    }

    fn l2(&self) -> f64 {
        self.lambda * self.lambda
    }

    /// Conditional mean of the true V2V gain given the estimate.
    pub fn nominal_d(&self, s: usize) -> f64 {
        self.omega_d[s] * (self.l2() * self.h_hat_d[s].norm_sqr() + 1.0 - self.l2())
    }

    pub fn nominal_cross(&self, j: usize, s: usize) -> f64 {
        self.omega_cross[j][s] * (self.l2() * self.h_hat_cross[j][s].norm_sqr() + 1.0 - self.l2())
    }

    /// Deviation scale (1−λ²)ω·q of the V2V gain.
    pub fn deviation_d(&self, s: usize, q: f64) -> f64 {
        (1.0 - self.l2()) * self.omega_d[s] * q
    }

    pub fn deviation_cross(&self, j: usize, s: usize, q: f64) -> f64 {
        (1.0 - self.l2()) * self.omega_cross[j][s] * q
    }

    fn true_gain<R: Rng + ?Sized>(&self, omega: f64, h_hat: Complex64, model: ErrorModel, rng: &mut R) -> f64 {
        match model {
            ErrorModel::PowerSplit => {
                let e: f64 = rng.sample(Exp1);
                omega * (self.l2() * h_hat.norm_sqr() + (1.0 - self.l2()) * e)
            }
            ErrorModel::Complex => omega * sample_true_channel(h_hat, self.lambda, rng).norm_sqr(),
        }
    }

    /// One draw of the true V2V-side gains around the estimates.
    pub fn draw_realization<R: Rng + ?Sized>(&self, model: ErrorModel, rng: &mut R) -> ChannelRealization {
        let g_d = (0..self.num_vues())
            .map(|s| self.true_gain(self.omega_d[s], self.h_hat_d[s], model, rng))
            .collect();
        let g_cross = (0..self.num_cues())
            .map(|j| {
                (0..self.num_vues())
                    .map(|s| self.true_gain(self.omega_cross[j][s], self.h_hat_cross[j][s], model, rng))
                    .collect()
            })
            .collect();
        ChannelRealization { g_d, g_cross }
    }
}

/// True V2V-side gains of one channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub g_d: Vec<f64>,
    pub g_cross: Vec<Vec<f64>>,
}

/// Draws geometry, large-scale gains and small-scale fading of one drop.
pub fn generate_link_state<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> std::result::Result<(Geometry, LinkState), ModelError> {
    let lambda = cfg.lambda()?;
    let geo = generate_geometry(cfg, rng);
    let pl = Pathloss::from_config(cfg);
    let (sc, sv) = (cfg.shadowing_cue_db, cfg.shadowing_vue_db);
    let omega_c = geo.d_cue.iter().map(|&d| large_scale_gain(d, sc, &pl, rng)).collect();
    let omega_b = geo.d_vue_gnb.iter().map(|&d| large_scale_gain(d, sc, &pl, rng)).collect();
    let omega_d = geo.d_vue.iter().map(|&d| large_scale_gain(d, sv, &pl, rng)).collect();
    let omega_cross = geo
        .d_cross
        .iter()
        .map(|row| row.iter().map(|&d| large_scale_gain(d, sv, &pl, rng)).collect())
        .collect();
    let (j, s) = (cfg.num_cues, cfg.num_vues);
    let h_c = (0..j).map(|_| cn01(rng)).collect();
    let h_b = (0..s).map(|_| cn01(rng)).collect();
    let h_hat_d = (0..s).map(|_| cn01(rng)).collect();
    let h_hat_cross = (0..j).map(|_| (0..s).map(|_| cn01(rng)).collect()).collect();
    let link = LinkState { omega_c, omega_d, omega_cross, omega_b, h_c, h_b, h_hat_d, h_hat_cross, lambda };
    Ok((geo, link))
}

/// N i.i.d. draws of all V2V-side gains, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    n: usize,
    num_cues: usize,
    num_vues: usize,
    g_d: Vec<f64>,
    g_cross: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleRow {
    drop_id: u64,
    sample_id: usize,
    s: usize,
    j: usize,
    g_d: f64,
    g_cross: f64,
}

impl SampleSet {
    pub fn draw<R: Rng + ?Sized>(link: &LinkState, model: ErrorModel, n: usize, rng: &mut R) -> Self {
        let (jn, sn) = (link.num_cues(), link.num_vues());
        let mut g_d = Vec::with_capacity(n * sn);
        let mut g_cross = Vec::with_capacity(n * jn * sn);
        for _ in 0..n {
            let r = link.draw_realization(model, rng);
            g_d.extend_from_slice(&r.g_d);
            for row in &r.g_cross {
                g_cross.extend_from_slice(row);
            }
        }
        Self { n, num_cues: jn, num_vues: sn, g_d, g_cross }
    }

    /// Builds a set from per-sample gains; `g_cross[n][j][s]`.
    pub fn from_gains(g_d: Vec<Vec<f64>>, g_cross: Vec<Vec<Vec<f64>>>) -> Self {
        let n = g_d.len();
        assert_eq!(n, g_cross.len(), "sample count mismatch");
        let num_vues = g_d.first().map_or(0, Vec::len);
        let num_cues = g_cross.first().map_or(0, Vec::len);
        Self {
            n,
            num_cues,
            num_vues,
            g_d: g_d.into_iter().flatten().collect(),
            g_cross: g_cross.into_iter().flatten().flatten().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn g_d(&self, n: usize, s: usize) -> f64 {
        self.g_d[n * self.num_vues + s]
    }

    pub fn g_cross(&self, n: usize, j: usize, s: usize) -> f64 {
        self.g_cross[(n * self.num_cues + j) * self.num_vues + s]
    }

    pub fn write_csv<W: io::Write>(&self, drop_id: u64, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for n in 0..self.n {
            for j in 0..self.num_cues {
                for s in 0..self.num_vues {
                    wr.serialize(SampleRow {
                        drop_id,
                        sample_id: n,
                        s,
                        j,
                        g_d: self.g_d(n, s),
                        g_cross: self.g_cross(n, j, s),
                    })?;
                }
            }
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads the rows of one drop written by [`SampleSet::write_csv`].
    pub fn read_csv<Rd: io::Read>(drop_id: u64, r: Rd) -> Result<Self> {
        let mut rows = Vec::new();
        for row in csv::Reader::from_reader(r).deserialize() {
            let row: SampleRow = row?;
            if row.drop_id == drop_id {
                rows.push(row);
            }
        }
        let n = rows.iter().map(|r| r.sample_id + 1).max().unwrap_or(0);
        let jn = rows.iter().map(|r| r.j + 1).max().unwrap_or(0);
        let sn = rows.iter().map(|r| r.s + 1).max().unwrap_or(0);
        let mut g_d = vec![0.0; n * sn];
        let mut g_cross = vec![0.0; n * jn * sn];
        for r in rows {
            g_d[r.sample_id * sn + r.s] = r.g_d;
            g_cross[(r.sample_id * jn + r.j) * sn + r.s] = r.g_cross;
        }
        Ok(Self { n, num_cues: jn, num_vues: sn, g_d, g_cross })
    }
}
