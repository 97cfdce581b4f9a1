//! Reference computations for the integration tests. Nothing here calls the
//! solvers under test.

#![allow(dead_code)]

use robust_v2x::pair::{PairContext, PowerPair};

/// J0 by its power series with compensated summation; fine for x ≤ 10.
pub fn series_j0(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let (mut sum, mut comp, mut term) = (1.0f64, 0.0f64, 1.0f64);
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() < 1e-30 {
            break;
        }
    }
    sum
}

/// −ln(1 − b) = Σ b^k / k.
pub fn neg_ln_one_minus(b: f64) -> f64 {
    let (mut s, mut p) = (0.0, 1.0);
    for k in 1..400 {
        p *= b;
        s += p / k as f64;
    }
    s
}

pub fn cue_sinr(ctx: &PairContext, p: PowerPair) -> f64 {
    p.p_c * ctx.g_c / (ctx.sigma2 + p.p_d * ctx.g_b)
}

pub fn capacity(ctx: &PairContext, p: PowerPair) -> f64 {
    ctx.bandwidth * (1.0 + cue_sinr(ctx, p)).log2()
}

/// Maximizes capacity over the power box restricted by `feasible`.
///
/// p_c is gridded; in each column the lowest feasible p_d (capacity falls in
/// p_d) is located from a p_d grid and sharpened by bisection. The window
/// shrinks fourfold around the incumbent each pass.
pub fn grid_max<F: Fn(PowerPair) -> bool>(ctx: &PairContext, feasible: F) -> Option<(PowerPair, f64)> {
    const N: usize = 100;
    const PASSES: usize = 10;
    let mut win = [0.0, ctx.p_max_c, 0.0, ctx.p_max_d];
    let mut best: Option<(PowerPair, f64)> = None;
    for _ in 0..PASSES {
        let [c0, c1, d0, d1] = win;
        for a in 0..=N {
            let p_c = c0 + (c1 - c0) * a as f64 / N as f64;
            let pd = |b: usize| d0 + (d1 - d0) * b as f64 / N as f64;
            let Some(b) = (0..=N).find(|&b| feasible(PowerPair::new(p_c, pd(b)))) else { continue };
            let mut hi = pd(b);
            if b > 0 {
                let mut lo = pd(b - 1);
                for _ in 0..64 {
                    let m = 0.5 * (lo + hi);
                    if feasible(PowerPair::new(p_c, m)) {
                        hi = m;
                    } else {
                        lo = m;
                    }
                }
            }
            let p = PowerPair::new(p_c, hi);
            let v = capacity(ctx, p);
            if best.map_or(true, |(_, w)| v > w) {
                best = Some((p, v));
            }
        }
        let (p, _) = best?;
        let (hc, hd) = ((c1 - c0) / 8.0, (d1 - d0) / 8.0);
        win = [(p.p_c - hc).max(0.0), (p.p_c + hc).min(ctx.p_max_c), (p.p_d - hd).max(0.0), (p.p_d + hd).min(ctx.p_max_d)];
    }
    best
}

/// Maximum total weight over all permutations (Heap's algorithm).
pub fn permutation_max(c: &[Vec<f64>]) -> f64 {
    let n = c.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let value = |p: &[usize]| p.iter().enumerate().map(|(j, &k)| c[j][k]).sum::<f64>();
    let mut best = value(&perm);
    let mut idx = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if idx[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(idx[i], i);
            }
            best = best.max(value(&perm));
            idx[i] += 1;
            i = 0;
        } else {
            idx[i] = 0;
            i += 1;
        }
    }
    best
}

/// Empirical q-quantile by full sort (lower order statistic ⌈qn⌉).
pub fn sorted_quantile(mut v: Vec<f64>, q: f64) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let k = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[k - 1]
}
