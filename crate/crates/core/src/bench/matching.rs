use crate::harmonic::angular_distance;
use crate::sim::{ChannelParamSet, PathParams};

/// Optimal one-to-one pairing of true and estimated paths.
#[derive(Clone, Debug, PartialEq)]
pub struct PathMatch {
    /// `(truth index, estimate index)` pairs, sorted by truth index.
    pub pairs: Vec<(usize, usize)>,
    /// Sum over pairs of the summed wrapped distance of the four frequencies.
    pub total_cost: f64,
    pub unmatched_truth: Vec<usize>,
    pub unmatched_est: Vec<usize>,
    /// RMSE over pairs of the wrapped error in ω₁, ω₂, ψ, ς.
    pub frequency_rmse: [f64; 4],
    /// RMSE over pairs of `|b − b̂|`.
    pub gain_rmse: f64,
}

fn path_cost(a: &PathParams, b: &PathParams) -> f64 {
    a.frequencies()
        .iter()
        .zip(b.frequencies())
        .map(|(x, y)| angular_distance(*x, y))
        .sum()
}

/// Minimum-cost assignment for `cost` with `rows ≤ cols`; returns the column
/// of every row.
fn hungarian(cost: &[Vec<f64>], cols: usize) -> Vec<usize> {
    let n = cost.len();
    let (mut u, mut v) = (vec![0.0; n + 1], vec![0.0; cols + 1]);
    let (mut p, mut way) = (vec![0usize; cols + 1], vec![0usize; cols + 1]);
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let (mut delta, mut j1) = (f64::INFINITY, 0);
            for j in 1..=cols {
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
            for j in 0..=cols {
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
    let mut assignment = vec![0; n];
    for j in 1..=cols {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Pairs true and estimated paths by the Hungarian method on the summed
/// wrapped frequency distance.
pub fn match_paths(truth: &ChannelParamSet, est: &ChannelParamSet) -> PathMatch {
    let (t, e) = (&truth.paths, &est.paths);
    let transpose = t.len() > e.len();
    let (rows, cols) = if transpose { (e, t) } else { (t, e) };
    let cost: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| cols.iter().map(|c| path_cost(r, c)).collect())
        .collect();
    let assignment = if rows.is_empty() { Vec::new() } else { hungarian(&cost, cols.len()) };
    let mut pairs: Vec<(usize, usize)> = assignment
        .iter()
        .enumerate()
        .map(|(r, &c)| if transpose { (c, r) } else { (r, c) })
        .collect();
    pairs.sort_unstable();

    let total_cost = pairs.iter().map(|&(i, j)| path_cost(&t[i], &e[j])).sum();
    let unmatched_truth = (0..t.len()).filter(|i| !pairs.iter().any(|p| p.0 == *i)).collect();
    let unmatched_est = (0..e.len()).filter(|j| !pairs.iter().any(|p| p.1 == *j)).collect();
    let k = pairs.len().max(1) as f64;
    let mut frequency_rmse = [0.0; 4];
    for (d, slot) in frequency_rmse.iter_mut().enumerate() {
        let ss: f64 = pairs
            .iter()
            .map(|&(i, j)| angular_distance(t[i].frequencies()[d], e[j].frequencies()[d]).powi(2))
            .sum();
        *slot = (ss / k).sqrt();
    }
    let gain_rmse = (pairs.iter().map(|&(i, j)| (t[i].b - e[j].b).norm_sqr()).sum::<f64>() / k).sqrt();
    PathMatch {
        pairs,
        total_cost,
        unmatched_truth,
        unmatched_est,
        frequency_rmse,
        gain_rmse,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_set(n: usize, rng: &mut ChaCha8Rng) -> ChannelParamSet {
        ChannelParamSet::new(
            (0..n)
                .map(|_| PathParams {
                    b: Complex64::new(rng.random(), rng.random()),
                    omega1: rng.random_range(-PI..PI),
                    omega2: rng.random_range(-PI..PI),
                    psi: rng.random_range(-PI..PI),
                    varsigma: rng.random_range(-PI..PI),
                })
                .collect(),
        )
    }

    fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
        if items.len() <= 1 {
            return vec![items.to_vec()];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let head = rest.remove(i);
            for mut p in permutations(&rest) {
                p.insert(0, head);
                out.push(p);
            }
        }
        out
    }

    #[test]
    fn permuted_copy_matches_at_zero_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let truth = random_set(5, &mut rng);
        let order = [3, 0, 4, 1, 2];
        let est = ChannelParamSet::new(order.iter().map(|&i| truth.paths[i]).collect());
        let m = match_paths(&truth, &est);
        assert_eq!(m.total_cost, 0.0);
        for (i, j) in m.pairs {
            assert_eq!(order[j], i);
        }
        assert_eq!(m.gain_rmse, 0.0);
    }

    #[test]
    fn distance_wraps() {
        let mk = |psi: f64| {
            ChannelParamSet::new(vec![PathParams {
                b: Complex64::new(1.0, 0.0),
                omega1: 0.0,
                omega2: 0.0,
                psi,
                varsigma: 0.0,
            }])
        };
        let m = match_paths(&mk(PI - 0.01), &mk(-PI + 0.01));
        assert!((m.total_cost - 0.02).abs() < 1e-12);
        assert!((m.frequency_rmse[2] - 0.02).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_and_reports_unmatched() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for trial in 0..40 {
            let (nt, ne) = (rng.random_range(1..=6usize), rng.random_range(1..=6usize));
            let truth = random_set(nt, &mut rng);
            let est = random_set(ne, &mut rng);
            let m = match_paths(&truth, &est);
            let k = nt.min(ne);
            let best = if nt <= ne {
                permutations(&(0..ne).collect::<Vec<_>>())
                    .iter()
                    .map(|p| (0..k).map(|i| path_cost(&truth.paths[i], &est.paths[p[i]])).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            } else {
                permutations(&(0..nt).collect::<Vec<_>>())
                    .iter()
                    .map(|p| (0..k).map(|j| path_cost(&truth.paths[p[j]], &est.paths[j])).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            };
            assert!((m.total_cost - best).abs() < 1e-9, "trial {trial}");
            assert_eq!(m.pairs.len(), k);
            assert_eq!(m.unmatched_truth.len(), nt - k);
            assert_eq!(m.unmatched_est.len(), ne - k);
        }
    }

    #[test]
    fn empty_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = match_paths(&random_set(2, &mut rng), &ChannelParamSet::default());
        assert!(m.pairs.is_empty());
        assert_eq!(m.unmatched_truth, vec![0, 1]);
    }
}
