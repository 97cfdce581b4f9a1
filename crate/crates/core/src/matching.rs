//! Capacity matrix over CUE–VUE pairs (padded with virtual VUEs) and
//! maximum-weight bipartite matching.

use std::io;

use serde::Serialize;

use crate::error::Result;
use crate::pair::{PairSolution, PowerPair};

/// J×J capacities; columns `num_real..J` are virtual VUEs.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityMatrix {
    pub num_real: usize,
    pub entries: Vec<Vec<f64>>,
    /// Power pair behind each entry; `None` for infeasible real pairs.
    pub power: Vec<Vec<Option<PowerPair>>>,
}

impl CapacityMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_virtual(&self, s: usize) -> bool {
        s >= self.num_real
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            j: usize,
            s: usize,
            #[serde(rename = "C")]
            c: f64,
            p_c: f64,
            p_d: f64,
            virtual_flag: bool,
        }
        let mut wr = csv::Writer::from_writer(w);
        for (j, row) in self.entries.iter().enumerate() {
            for (s, &c) in row.iter().enumerate() {
                let p = self.power[j][s].unwrap_or_default();
                wr.serialize(Row { j, s, c, p_c: p.p_c, p_d: p.p_d, virtual_flag: self.is_virtual(s) })?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Fills real columns from `solver(j, s)` (infeasible pairs get 0) and
/// virtual columns from `solo(j)`, the interference-free CUE solution.
pub fn build_capacity_matrix<F, G>(num_cues: usize, num_vues: usize, solver: F, solo: G) -> CapacityMatrix
where
    F: Fn(usize, usize) -> Option<PairSolution>,
    G: Fn(usize) -> PairSolution,
{
    assert!(num_vues <= num_cues, "need J >= S");
    let mut entries = vec![vec![0.0; num_cues]; num_cues];
    let mut power = vec![vec![None; num_cues]; num_cues];
    for j in 0..num_cues {
        for s in 0..num_cues {
            let sol = if s < num_vues { solver(j, s) } else { Some(solo(j)) };
            if let Some(sol) = sol {
                entries[j][s] = sol.capacity;
                power[j][s] = Some(sol.power);
            }
        }
    }
    CapacityMatrix { num_real: num_vues, entries, power }
}

/// One-to-one reuse pattern: row j uses column `col_of_row[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReuseAssignment {
    pub col_of_row: Vec<usize>,
    pub num_real: usize,
}

impl ReuseAssignment {
    pub fn rho(&self, j: usize, s: usize) -> bool {
        self.col_of_row[j] == s
    }

    /// Pairs (j, s) matched to real VUEs.
    pub fn real_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.col_of_row.iter().enumerate().filter(|(_, &s)| s < self.num_real).map(|(j, &s)| (j, s))
    }
}

/// Minimum-cost perfect assignment on a square matrix (shortest augmenting
/// paths with potentials). Returns the column of each row.
fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            col[p[j] - 1] = j - 1;
        }
    }
    col
}

/// Optimal total weight over the given rows and columns.
fn max_weight_value(c: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let top = rows.iter().flat_map(|&r| cols.iter().map(move |&k| c[r][k])).fold(0.0, f64::max);
    let cost: Vec<Vec<f64>> = rows.iter().map(|&r| cols.iter().map(|&k| top - c[r][k]).collect()).collect();
    let assign = min_cost_assignment(&cost);
    rows.iter().zip(&assign).map(|(&r, &k)| c[r][cols[k]]).sum()
}

/// Maximum-weight perfect matching of a square nonnegative matrix.
///
/// Among optimal assignments the one with the lexicographically smallest
/// column sequence (row 0 first) is returned.
pub fn hungarian_max_weight(c: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = c.len();
    assert!(c.iter().all(|r| r.len() == n), "matrix must be square");
    let all: Vec<usize> = (0..n).collect();
    let total = max_weight_value(c, &all, &all);
    let tol = 1e-9 * total.abs().max(1.0);
    let mut free: Vec<usize> = all.clone();
    let mut col_of_row = Vec::with_capacity(n);
    let mut fixed = 0.0;
    for j in 0..n {
        let rows: Vec<usize> = (j + 1..n).collect();
        let pick = free
            .iter()
            .position(|&k| {
                let rest: Vec<usize> = free.iter().copied().filter(|&x| x != k).collect();
                fixed + c[j][k] + max_weight_value(c, &rows, &rest) >= total - tol
            })
            .expect("an optimal completion exists");
        let k = free.remove(pick);
        fixed += c[j][k];
        col_of_row.push(k);
    }
    let total = col_of_row.iter().enumerate().map(|(j, &k)| c[j][k]).sum();
    (col_of_row, total)
}

/// Matches a capacity matrix and returns the reuse pattern and total capacity.
pub fn match_pairs(m: &CapacityMatrix) -> (ReuseAssignment, f64) {
    let (col_of_row, total) = hungarian_max_weight(&m.entries);
    (ReuseAssignment { col_of_row, num_real: m.num_real }, total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(c: &[Vec<f64>]) -> (Vec<usize>, f64) {
        fn rec(c: &[Vec<f64>], row: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, best: &mut (Vec<usize>, f64)) {
            if row == c.len() {
                let v: f64 = cur.iter().enumerate().map(|(j, &k)| c[j][k]).sum();
                if best.0.is_empty() || v > best.1 + 1e-9 * best.1.abs().max(1.0) {
                    *best = (cur.clone(), v);
                }
                return;
            }
            for k in 0..c.len() {
                if !used[k] {
                    used[k] = true;
                    cur.push(k);
                    rec(c, row + 1, used, cur, best);
                    cur.pop();
                    used[k] = false;
                }
            }
        }
        let mut best = (Vec::new(), f64::NEG_INFINITY);
        rec(c, 0, &mut vec![false; c.len()], &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn two_by_two() {
        let (a, t) = hungarian_max_weight(&[vec![3.0, 1.0], vec![2.0, 4.0]]);
        assert_eq!(a, vec![0, 1]);
        assert_eq!(t, 7.0);
    }

    #[test]
    fn identity_dominant() {
        let c: Vec<Vec<f64>> = (0..5).map(|i| (0..5).map(|k| if i == k { 10.0 } else { (i + k) as f64 * 0.1 }).collect()).collect();
        assert_eq!(hungarian_max_weight(&c).0, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn matches_permutation_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..300 {
            let n = rng.gen_range(1..=6);
            let c: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0.0..10.0)).collect()).collect();
            let (a, t) = hungarian_max_weight(&c);
            let (b, bt) = brute_force(&c);
            assert!((t - bt).abs() <= 1e-9 * bt.max(1.0));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn ties_resolve_lexicographically() {
        let c = vec![vec![1.0; 4]; 4];
        assert_eq!(hungarian_max_weight(&c).0, vec![0, 1, 2, 3]);
        let c = vec![vec![0.0, 5.0, 5.0], vec![5.0, 0.0, 5.0], vec![5.0, 5.0, 0.0]];
        // optima: (1,2,0) and (2,0,1); the first is lexicographically smaller
        assert_eq!(hungarian_max_weight(&c).0, vec![1, 2, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let n = rng.gen_range(2..=5);
            let c: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..3) as f64).collect()).collect();
            assert_eq!(hungarian_max_weight(&c).0, brute_force(&c).0);
        }
    }

    #[test]
    fn raising_an_entry_never_lowers_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..=6);
            let mut c: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0.0..10.0)).collect()).collect();
            let (_, t0) = hungarian_max_weight(&c);
            c[rng.gen_range(0..n)][rng.gen_range(0..n)] += rng.gen_range(0.0..5.0);
            assert!(hungarian_max_weight(&c).1 >= t0 - 1e-12);
        }
    }

    #[test]
    fn capacity_matrix_layout() {
        let solo = |j: usize| PairSolution { power: PowerPair::new(1.0, 0.0), capacity: 10.0 + j as f64 };
        let m = build_capacity_matrix(3, 0, |_, _| None, solo);
        assert!(m.entries.iter().enumerate().all(|(j, r)| r.iter().all(|&c| c == 10.0 + j as f64)));
        let (a, _) = match_pairs(&m);
        assert_eq!(a.real_pairs().count(), 0);

        let solver = |j: usize, s: usize| {
            (j != s).then(|| PairSolution { power: PowerPair::new(0.5, 0.2), capacity: (j * 3 + s) as f64 })
        };
        let m = build_capacity_matrix(3, 2, solver, solo);
        assert_eq!(m.entries[0][0], 0.0);
        assert_eq!(m.power[0][0], None);
        assert_eq!(m.entries[2][1], solver(2, 1).unwrap().capacity);
        assert_eq!(m.entries[1][2], 11.0);
        assert!(m.is_virtual(2) && !m.is_virtual(1));
        let (a, _) = match_pairs(&m);
        let rows: Vec<usize> = a.col_of_row.clone();
        let mut sorted = rows.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2]);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 10);
    }
}
