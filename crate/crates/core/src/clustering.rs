//! k-means++ seeding, Lloyd K-Means, and the bias-aware clustering solver.
//!
//! The bias-aware solver minimizes `L_c + lambda * L_b`, where `L_c` is the
//! within-cluster sum of squared distances and `L_b` is minus the sum over
//! clusters of the squared accuracy gap between the two groups. Each
//! iteration is a sequential assignment sweep followed by a centroid update:
//!
//! * the sweep visits instances in order and moves each one to the cluster
//!   with the smallest exact change in the combined objective, holding
//!   centroids fixed and updating group/correctness counts after every move;
//! * the update sets every centroid to the mean of its members.
//!
//! Both steps can only lower the objective, so the recorded trace is
//! non-increasing. With `lambda = 0` the sweep picks the nearest centroid,
//! which is exactly a Lloyd assignment step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{ClusterModel, Dataset, LoganConfig, ObjectiveValue};
use crate::error::{Error, Result};

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared accuracy gap for one cluster; 0 when a group is absent.
pub(crate) fn squared_gap(n: [usize; 2], correct: [usize; 2]) -> f64 {
    if n[0] == 0 || n[1] == 0 {
        return 0.0;
    }
    let gap = correct[0] as f64 / n[0] as f64 - correct[1] as f64 / n[1] as f64;
    gap * gap
}

/// Sufficient statistics for each cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    pub size: Vec<usize>,
    /// Members per group.
    pub group_counts: Vec<[usize; 2]>,
    /// Correctly predicted members per group.
    pub correct_counts: Vec<[usize; 2]>,
    /// Coordinate-wise sum of member features.
    pub sums: Vec<Vec<f64>>,
}

impl ClusterStats {
    pub fn from_assignment(d: &Dataset, assignment: &[usize], k: usize) -> Self {
        let mut stats = ClusterStats {
            size: vec![0; k],
            group_counts: vec![[0; 2]; k],
            correct_counts: vec![[0; 2]; k],
            sums: vec![vec![0.0; d.dim()]; k],
        };
        for (i, &j) in assignment.iter().enumerate() {
            stats.add(d, i, j);
        }
        stats
    }

    pub fn k(&self) -> usize {
        self.size.len()
    }

    fn add(&mut self, d: &Dataset, i: usize, j: usize) {
        let g = d.group_of(i);
        self.size[j] += 1;
        self.group_counts[j][g] += 1;
        if d.instance(i).is_correct() {
            self.correct_counts[j][g] += 1;
        }
        for (s, &x) in self.sums[j].iter_mut().zip(d.features(i)) {
            *s += x;
        }
    }

    fn remove(&mut self, d: &Dataset, i: usize, j: usize) {
        let g = d.group_of(i);
        self.size[j] -= 1;
        self.group_counts[j][g] -= 1;
        if d.instance(i).is_correct() {
            self.correct_counts[j][g] -= 1;
        }
        for (s, &x) in self.sums[j].iter_mut().zip(d.features(i)) {
            *s -= x;
        }
    }

    /// Moves instance `i` from cluster `from` to cluster `to`.
    pub fn move_instance(&mut self, d: &Dataset, i: usize, from: usize, to: usize) {
        if from != to {
            self.remove(d, i, from);
            self.add(d, i, to);
        }
    }

    /// Mean of cluster `j`, or `None` when it is empty.
    pub fn centroid(&self, j: usize) -> Option<Vec<f64>> {
        let n = self.size[j];
        (n > 0).then(|| self.sums[j].iter().map(|s| s / n as f64).collect())
    }

    pub fn gap_term(&self, j: usize) -> f64 {
        squared_gap(self.group_counts[j], self.correct_counts[j])
    }

    /// `L_b`: minus the summed squared gaps.
    pub fn bias_loss(&self) -> f64 {
        -(0..self.k()).map(|j| self.gap_term(j)).sum::<f64>()
    }

    /// Exact change in `L_b` if instance `i` left cluster `from` for `to`.
    fn bias_delta(&self, d: &Dataset, i: usize, from: usize, to: usize) -> f64 {
        if from == to {
            return 0.0;
        }
        let g = d.group_of(i);
        let c = usize::from(d.instance(i).is_correct());

        let mut n_from = self.group_counts[from];
        let mut c_from = self.correct_counts[from];
        let before_from = squared_gap(n_from, c_from);
        n_from[g] -= 1;
        c_from[g] -= c;
        let after_from = squared_gap(n_from, c_from);

        let mut n_to = self.group_counts[to];
        let mut c_to = self.correct_counts[to];
        let before_to = squared_gap(n_to, c_to);
        n_to[g] += 1;
        c_to[g] += c;
        let after_to = squared_gap(n_to, c_to);

        // L_b is the negated sum, so a larger gap lowers it
        (before_from - after_from) + (before_to - after_to)
    }
}

/// Clustering loss, bias loss and combined objective, with centroids at the
/// cluster means given by `stats`.
pub fn objective(d: &Dataset, stats: &ClusterStats, assignment: &[usize], lambda: f64) -> ObjectiveValue {
    let means: Vec<Option<Vec<f64>>> = (0..stats.k()).map(|j| stats.centroid(j)).collect();
    let clustering = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let mu = means[j].as_ref().expect("assigned cluster has members");
            sq_dist(d.features(i), mu)
        })
        .sum::<f64>();
    let bias = stats.bias_loss();
    ObjectiveValue {
        clustering,
        bias,
        total: clustering + lambda * bias,
    }
}

/// Within-cluster sum of squared distances to the model's centroids.
pub fn inertia(d: &Dataset, model: &ClusterModel) -> f64 {
    model
        .assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| sq_dist(d.features(i), &model.centroids[j]))
        .sum()
}

fn kmeanspp_indices(d: &Dataset, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = d.len();
    if k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    let first = rng.random_range(0..n);
    chosen.push(first);
    taken[first] = true;

    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(d.features(i), d.features(first))).collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            let mut last_positive = None;
            for (i, &w) in nearest.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                last_positive = Some(i);
                acc += w;
                if acc > target {
                    pick = Some(i);
                    break;
                }
            }
            pick.or(last_positive).expect("positive total weight")
        } else {
            // every remaining point duplicates a chosen one
            let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        taken[next] = true;
        for (i, w) in nearest.iter_mut().enumerate() {
            *w = w.min(sq_dist(d.features(i), d.features(next)));
        }
    }
    Ok(chosen)
}

/// k-means++ seeding: the first centroid is a uniformly random instance, each
/// later one is drawn with probability proportional to its squared distance
/// to the nearest centroid chosen so far.
pub fn kmeanspp_init(d: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    Ok(kmeanspp_indices(d, k, seed)?
        .into_iter()
        .map(|i| d.features(i).to_vec())
        .collect())
}

fn nearest_centroid(x: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let dist = sq_dist(x, c);
        if dist < best_dist {
            best = j;
            best_dist = dist;
        }
    }
    best
}

fn assign_nearest(d: &Dataset, centroids: &[Vec<f64>]) -> Vec<usize> {
    (0..d.len())
        .into_par_iter()
        .map(|i| nearest_centroid(d.features(i), centroids))
        .collect()
}

/// Sets each centroid to its cluster mean. An empty cluster is moved onto the
/// instance farthest from its own centroid; the instance itself stays where it
/// is until the next sweep decides whether moving it pays off.
fn update_centroids(d: &Dataset, stats: &ClusterStats, assignment: &[usize], centroids: &mut [Vec<f64>]) {
    let mut empty = Vec::new();
    for (j, c) in centroids.iter_mut().enumerate() {
        match stats.centroid(j) {
            Some(mean) => *c = mean,
            None => empty.push(j),
        }
    }
    if empty.is_empty() {
        return;
    }
    let mut far: Vec<(f64, usize)> = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| (sq_dist(d.features(i), &centroids[j]), i))
        .collect();
    // farthest first, lower index on ties
    far.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for (j, &(_, i)) in empty.iter().zip(&far) {
        centroids[*j] = d.features(i).to_vec();
    }
}

fn check_features(d: &Dataset) -> Result<()> {
    for (row, inst) in d.instances().iter().enumerate() {
        if let Some(index) = inst.features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidRow {
                row,
                source: crate::error::RowError::NonFiniteFeature { index },
            });
        }
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Sweep {
    /// Sequential exact-delta moves on the combined objective.
    BiasAware,
    /// Independent nearest-centroid assignment.
    Lloyd,
}

struct Weights {
    lambda: f64,
    /// Multiplier applied to `L_c` in the reported objective.
    inertia_scale: f64,
}

impl Weights {
    fn new(d: &Dataset, lambda: f64, normalize_inertia: bool) -> Self {
        let inertia_scale = if normalize_inertia { 1.0 / d.len() as f64 } else { 1.0 };
        Weights { lambda, inertia_scale }
    }

    /// Lambda relative to unscaled distances, used when ranking moves.
    fn move_lambda(&self) -> f64 {
        self.lambda / self.inertia_scale
    }

    fn evaluate(&self, d: &Dataset, stats: &ClusterStats, assignment: &[usize]) -> ObjectiveValue {
        let raw = objective(d, stats, assignment, 0.0);
        let clustering = raw.clustering * self.inertia_scale;
        ObjectiveValue {
            clustering,
            bias: raw.bias,
            total: clustering + self.lambda * raw.bias,
        }
    }
}

fn sweep_bias_aware(
    d: &Dataset,
    centroids: &[Vec<f64>],
    assignment: &mut [usize],
    stats: &mut ClusterStats,
    order: &[usize],
    move_lambda: f64,
) -> bool {
    let mut changed = false;
    let mut dists = vec![0.0; centroids.len()];
    for &i in order {
        let x = d.features(i);
        for (slot, c) in dists.iter_mut().zip(centroids) {
            *slot = sq_dist(x, c);
        }
        let from = assignment[i];
        // comparing dist_q + lambda*dLb against dist_from is the same as
        // comparing the full deltas, and reduces to plain nearest-centroid
        // when lambda is zero
        let mut best = usize::MAX;
        let mut best_score = f64::INFINITY;
        for (q, &dist) in dists.iter().enumerate() {
            let score = if q == from {
                dist
            } else {
                dist + move_lambda * stats.bias_delta(d, i, from, q)
            };
            if score < best_score {
                best = q;
                best_score = score;
            }
        }
        if best != from {
            stats.move_instance(d, i, from, best);
            assignment[i] = best;
            changed = true;
        }
    }
    changed
}

fn run(d: &Dataset, cfg: &LoganConfig, lambda: f64, mut centroids: Vec<Vec<f64>>, order: &[usize], sweep: Sweep) -> Result<ClusterModel> {
    check_features(d)?;
    let k = centroids.len();
    let weights = Weights::new(d, lambda, cfg.normalize_inertia);

    let mut assignment = assign_nearest(d, &centroids);
    let mut stats = ClusterStats::from_assignment(d, &assignment, k);
    update_centroids(d, &stats, &assignment, &mut centroids);
    let mut trace = vec![weights.evaluate(d, &stats, &assignment)];

    let mut converged = false;
    let mut iterations_run = 0;
    while iterations_run < cfg.max_iter {
        iterations_run += 1;
        let changed = match sweep {
            Sweep::BiasAware => sweep_bias_aware(d, &centroids, &mut assignment, &mut stats, order, weights.move_lambda()),
            Sweep::Lloyd => {
                let next = assign_nearest(d, &centroids);
                let changed = next != assignment;
                assignment = next;
                changed
            }
        };
        if !changed {
            converged = true;
            break;
        }
        // rebuild from scratch so float sums do not drift across iterations
        stats = ClusterStats::from_assignment(d, &assignment, k);
        update_centroids(d, &stats, &assignment, &mut centroids);
        trace.push(weights.evaluate(d, &stats, &assignment));
    }

    Ok(ClusterModel {
        centroids,
        assignment,
        objective_trace: trace,
        converged,
        iterations_run,
    })
}

fn init(d: &Dataset, cfg: &LoganConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    kmeanspp_init(d, cfg.k, cfg.seed)
}

/// Fits the bias-aware clustering with `cfg.lambda`.
pub fn logan_fit(d: &Dataset, cfg: &LoganConfig) -> Result<ClusterModel> {
    let centroids = init(d, cfg)?;
    let order: Vec<usize> = (0..d.len()).collect();
    run(d, cfg, cfg.lambda, centroids, &order, Sweep::BiasAware)
}

/// Bias-aware fit from explicit starting centroids and sweep order.
pub fn logan_fit_with_init(d: &Dataset, cfg: &LoganConfig, centroids: Vec<Vec<f64>>, sweep_order: &[usize]) -> Result<ClusterModel> {
    cfg.validate()?;
    if centroids.len() > d.len() {
        return Err(Error::TooManyClusters { k: centroids.len(), n: d.len() });
    }
    if centroids.iter().any(|c| c.len() != d.dim()) {
        return Err(Error::Config("initial centroid dimension differs from dataset".into()));
    }
    let mut seen = vec![false; d.len()];
    for &i in sweep_order {
        if i >= d.len() || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Config("sweep order must be a permutation of instance indices".into()));
        }
    }
    if sweep_order.len() != d.len() {
        return Err(Error::Config("sweep order must be a permutation of instance indices".into()));
    }
    run(d, cfg, cfg.lambda, centroids, sweep_order, Sweep::BiasAware)
}

/// Plain Lloyd K-Means (bias weight zero) with k-means++ seeding.
pub fn kmeans_fit(d: &Dataset, cfg: &LoganConfig) -> Result<ClusterModel> {
    let centroids = init(d, cfg)?;
    run(d, cfg, 0.0, centroids, &[], Sweep::Lloyd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_dataset, RawRecord};
    use proptest::prelude::*;

    fn dataset(points: &[(Vec<f64>, &str, bool)]) -> Dataset {
        let rows: Vec<RawRecord> = points
            .iter()
            .enumerate()
            .map(|(i, (f, g, correct))| RawRecord {
                id: i.to_string(),
                features: f.clone(),
                group: g.to_string(),
                label: 1,
                pred: if *correct { 1 } else { 0 },
                score: None,
                text: None,
            })
            .collect();
        build_dataset(&rows).unwrap()
    }

    fn two_pairs() -> Dataset {
        dataset(&[
            (vec![0.0, 0.0], "a", true),
            (vec![0.0, 1.0], "b", true),
            (vec![100.0, 0.0], "a", true),
            (vec![100.0, 1.0], "b", false),
        ])
    }

    fn cfg(k: usize, lambda: f64, seed: u64) -> LoganConfig {
        LoganConfig {
            k,
            lambda,
            seed,
            min_clusters: 1,
            ..Default::default()
        }
    }

    #[test]
    fn kmeanspp_k_equals_n_uses_every_instance() {
        let d = two_pairs();
        for seed in 0..20 {
            let mut idx = kmeanspp_indices(&d, 4, seed).unwrap();
            idx.sort();
            assert_eq!(idx, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn kmeanspp_handles_duplicates() {
        let d = dataset(&[
            (vec![1.0], "a", true),
            (vec![1.0], "b", true),
            (vec![1.0], "a", true),
        ]);
        let mut idx = kmeanspp_indices(&d, 3, 5).unwrap();
        idx.sort();
        assert_eq!(idx, vec![0, 1, 2]);
    }

    #[test]
    fn kmeanspp_spreads_over_separated_pairs() {
        let d = two_pairs();
        let split = (0..100)
            .filter(|&seed| {
                let c = kmeanspp_init(&d, 2, seed).unwrap();
                (c[0][0] < 50.0) != (c[1][0] < 50.0)
            })
            .count();
        assert!(split >= 95, "only {split} of 100 seeds split the pairs");
    }

    #[test]
    fn kmeanspp_is_seeded_and_bounded() {
        let d = two_pairs();
        assert_eq!(kmeanspp_init(&d, 3, 9).unwrap(), kmeanspp_init(&d, 3, 9).unwrap());
        assert!(matches!(kmeanspp_init(&d, 5, 0), Err(Error::TooManyClusters { k: 5, n: 4 })));
    }

    #[test]
    fn objective_single_cluster_hand_count() {
        // all points coincide; group a 3/4 correct, group b 1/2 correct
        let pts: Vec<_> = [("a", true), ("a", true), ("a", true), ("a", false), ("b", true), ("b", false)]
            .iter()
            .map(|&(g, c)| (vec![2.0, -1.0], g, c))
            .collect();
        let d = dataset(&pts);
        let assignment = vec![0; 6];
        let stats = ClusterStats::from_assignment(&d, &assignment, 1);
        let obj = objective(&d, &stats, &assignment, 3.0);
        assert_eq!(obj.clustering, 0.0);
        assert_eq!(obj.bias, -0.0625);
        assert_eq!(obj.total, -0.1875);

        let zero = objective(&d, &stats, &assignment, 0.0);
        assert_eq!(zero.total, zero.clustering);
    }

    #[test]
    fn single_group_clusters_have_no_bias_loss() {
        let d = two_pairs();
        // clusters {0,2} all group a, {1,3} all group b
        let assignment = vec![0, 1, 0, 1];
        let stats = ClusterStats::from_assignment(&d, &assignment, 2);
        assert_eq!(objective(&d, &stats, &assignment, 10.0).bias, 0.0);
    }

    #[test]
    fn kmeans_finds_pair_midpoints() {
        let d = two_pairs();
        let m = kmeans_fit(&d, &cfg(2, 0.0, 1)).unwrap();
        let mut c = m.centroids.clone();
        c.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(c, vec![vec![0.0, 0.5], vec![100.0, 0.5]]);
        assert!(m.converged);
    }

    #[test]
    fn kmeans_is_deterministic() {
        let d = crate::synthetic::generate(&crate::synthetic::PlantedBiasSpec {
            n_per_component: 60,
            seed: 4,
            ..Default::default()
        })
        .unwrap();
        let a = kmeans_fit(&d, &cfg(6, 0.0, 17)).unwrap();
        let b = kmeans_fit(&d, &cfg(6, 0.0, 17)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        for w in a.objective_trace.windows(2) {
            assert!(w[1].clustering <= w[0].clustering + 1e-9 * w[0].clustering.abs());
        }
    }

    #[test]
    fn zero_lambda_matches_kmeans() {
        let d = crate::synthetic::generate(&crate::synthetic::PlantedBiasSpec {
            n_per_component: 50,
            seed: 8,
            ..Default::default()
        })
        .unwrap();
        for seed in 0..5 {
            let a = logan_fit(&d, &cfg(7, 0.0, seed)).unwrap();
            let b = kmeans_fit(&d, &cfg(7, 0.0, seed)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = two_pairs();
        assert!(matches!(logan_fit(&d, &cfg(5, 1.0, 0)), Err(Error::TooManyClusters { .. })));
        assert!(logan_fit(&d, &cfg(2, -1.0, 0)).is_err());
        assert!(logan_fit_with_init(&d, &cfg(2, 1.0, 0), vec![vec![0.0, 0.0]], &[0, 1, 2]).is_err());
        assert!(logan_fit_with_init(&d, &cfg(2, 1.0, 0), vec![vec![0.0, 0.0]], &[0, 1, 2, 2]).is_err());
    }

    #[test]
    fn empty_cluster_is_reseeded_on_farthest_point() {
        let d = dataset(&[
            (vec![0.0], "a", true),
            (vec![1.0], "b", true),
            (vec![10.0], "a", true),
        ]);
        let stats = ClusterStats::from_assignment(&d, &[0, 0, 0], 2);
        let mut centroids = vec![vec![0.0], vec![-50.0]];
        update_centroids(&d, &stats, &[0, 0, 0], &mut centroids);
        assert!((centroids[0][0] - 11.0 / 3.0).abs() < 1e-12);
        assert_eq!(centroids[1], vec![10.0]);
    }

    fn arb_problem() -> impl Strategy<Value = (Vec<(f64, f64, bool, bool)>, usize, u64)> {
        (
            prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64, any::<bool>(), any::<bool>()), 6..40),
            2usize..5,
            any::<u64>(),
        )
    }

    fn build((pts, _, _): &(Vec<(f64, f64, bool, bool)>, usize, u64)) -> Option<Dataset> {
        let rows: Vec<_> = pts
            .iter()
            .map(|&(x, y, g, c)| (vec![x, y], if g { "a" } else { "b" }, c))
            .collect();
        let rows: Vec<RawRecord> = rows
            .iter()
            .enumerate()
            .map(|(i, (f, g, c))| RawRecord {
                id: i.to_string(),
                features: f.clone(),
                group: g.to_string(),
                label: 0,
                pred: if *c { 0 } else { 1 },
                score: None,
                text: None,
            })
            .collect();
        build_dataset(&rows).ok()
    }

    proptest! {
        #[test]
        fn incremental_stats_match_recount(problem in arb_problem(), moves in prop::collection::vec((any::<prop::sample::Index>(), 0usize..5), 1..50)) {
            let Some(d) = build(&problem) else { return Ok(()) };
            let k = problem.1;
            let mut assignment: Vec<usize> = (0..d.len()).map(|i| i % k).collect();
            let mut stats = ClusterStats::from_assignment(&d, &assignment, k);
            for (idx, to) in moves {
                let i = idx.index(d.len());
                let to = to % k;
                stats.move_instance(&d, i, assignment[i], to);
                assignment[i] = to;
            }
            let fresh = ClusterStats::from_assignment(&d, &assignment, k);
            prop_assert_eq!(&stats.size, &fresh.size);
            prop_assert_eq!(&stats.group_counts, &fresh.group_counts);
            prop_assert_eq!(&stats.correct_counts, &fresh.correct_counts);
            for (a, b) in stats.sums.iter().flatten().zip(fresh.sums.iter().flatten()) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
            let lb = stats.bias_loss();
            prop_assert!(lb <= 0.0 && lb >= -(k as f64));
        }

        #[test]
        fn bias_delta_matches_recomputation(problem in arb_problem(), pick in any::<prop::sample::Index>(), to in 0usize..5) {
            let Some(d) = build(&problem) else { return Ok(()) };
            let k = problem.1;
            let assignment: Vec<usize> = (0..d.len()).map(|i| (i * 7) % k).collect();
            let stats = ClusterStats::from_assignment(&d, &assignment, k);
            let i = pick.index(d.len());
            let to = to % k;
            let mut moved = assignment.clone();
            moved[i] = to;
            let after = ClusterStats::from_assignment(&d, &moved, k).bias_loss();
            let delta = stats.bias_delta(&d, i, assignment[i], to);
            prop_assert!((delta - (after - stats.bias_loss())).abs() < 1e-12);
        }

        #[test]
        fn trace_never_increases(problem in arb_problem(), lambda in prop::sample::select(vec![0.0, 1.0, 10.0, 100.0])) {
            let Some(d) = build(&problem) else { return Ok(()) };
            let model = logan_fit(&d, &cfg(problem.1, lambda, problem.2)).unwrap();
            for w in model.objective_trace.windows(2) {
                prop_assert!(w[1].total <= w[0].total + 1e-9 * w[0].total.abs());
            }
            prop_assert_eq!(model.assignment.len(), d.len());
        }

        #[test]
        fn permuted_instances_give_permuted_assignment(problem in arb_problem(), lambda in prop::sample::select(vec![0.0, 5.0]), shuffle_seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let Some(d) = build(&problem) else { return Ok(()) };
            let k = problem.1;
            let c = cfg(k, lambda, problem.2);
            let init = kmeanspp_init(&d, k, problem.2).unwrap();
            let identity: Vec<usize> = (0..d.len()).collect();
            let base = logan_fit_with_init(&d, &c, init.clone(), &identity).unwrap();

            // perm[new] = old
            let mut perm = identity.clone();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
            let records = d.to_records();
            let permuted_rows: Vec<RawRecord> = perm.iter().map(|&old| records[old].clone()).collect();
            let pd = build_dataset(&permuted_rows).unwrap();
            let mut position = vec![0; d.len()];
            for (new, &old) in perm.iter().enumerate() {
                position[old] = new;
            }
            // visit instances in the same underlying order as the base run
            let order: Vec<usize> = identity.iter().map(|&old| position[old]).collect();
            let permuted = logan_fit_with_init(&pd, &c, init, &order).unwrap();
            for (new, &old) in perm.iter().enumerate() {
                prop_assert_eq!(permuted.assignment[new], base.assignment[old]);
            }
        }
    }
}
