//! Planted-bias dataset generator and brute-force reference implementations.
//!
//! The generator draws well-separated isotropic Gaussian components. One
//! component favors the first group by `planted_gap`, a counter component
//! favors the second group by the same amount, and every other component is
//! group-neutral. The two local gaps cancel at corpus level, so the global
//! accuracy gap stays near zero while two regions carry large local bias.
//!
//! The oracles here recompute everything from scratch and share no code with
//! the clustering or metrics modules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{build_dataset, Dataset, Instance, RawRecord};
use crate::error::{Error, Result};

pub const GROUP_A: &str = "group_a";
pub const GROUP_B: &str = "group_b";

/// Largest realized global accuracy gap the generator accepts.
pub const MAX_GLOBAL_GAP: f64 = 0.02;
const MAX_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedBiasSpec {
    pub n_clusters: usize,
    pub n_per_component: usize,
    pub dim: usize,
    /// Distance between neighboring component means, in units of the
    /// per-coordinate standard deviation (which is 1).
    pub component_separation: f64,
    pub planted_component: usize,
    /// Component whose gap has the opposite sign. `None` leaves the planted
    /// gap uncompensated, which usually breaks global parity.
    pub counter_component: Option<usize>,
    pub planted_gap: f64,
    pub background_acc: f64,
    /// Probability an instance belongs to the first group.
    pub group_balance: f64,
    pub seed: u64,
}

impl Default for PlantedBiasSpec {
    fn default() -> Self {
        Self {
            n_clusters: 5,
            n_per_component: 400,
            dim: 2,
            component_separation: 8.0,
            planted_component: 0,
            counter_component: Some(1),
            planted_gap: 0.30,
            background_acc: 0.85,
            group_balance: 0.5,
            seed: 0,
        }
    }
}

impl PlantedBiasSpec {
    /// Every prediction correct, no planted gap.
    pub fn all_correct(seed: u64) -> Self {
        Self {
            planted_gap: 0.0,
            background_acc: 1.0,
            seed,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InfeasibleSpec(msg));
        if self.n_clusters == 0 || self.n_per_component == 0 || self.dim == 0 {
            return fail("n_clusters, n_per_component and dim must be positive".into());
        }
        if self.planted_component >= self.n_clusters {
            return fail(format!("planted_component {} out of range", self.planted_component));
        }
        if let Some(c) = self.counter_component {
            if c >= self.n_clusters || c == self.planted_component {
                return fail(format!("counter_component {c} must be another valid component"));
            }
        }
        if !(0.0..=1.0).contains(&self.planted_gap) {
            return fail(format!("planted_gap {} outside [0, 1]", self.planted_gap));
        }
        let half = self.planted_gap / 2.0;
        for p in [self.background_acc + half, self.background_acc - half] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!(
                    "background_acc {} +/- planted_gap/2 leaves [0, 1]",
                    self.background_acc
                ));
            }
        }
        if !(self.group_balance > 0.0 && self.group_balance < 1.0) {
            return fail(format!("group_balance {} must lie strictly inside (0, 1)", self.group_balance));
        }
        if !(self.component_separation.is_finite() && self.component_separation >= 0.0) {
            return fail("component_separation must be finite and non-negative".into());
        }
        Ok(())
    }

    /// Expected accuracy for `group` (0 or 1) inside `component`.
    pub fn expected_accuracy(&self, component: usize, group: usize) -> f64 {
        let half = self.planted_gap / 2.0;
        let sign = if group == 0 { 1.0 } else { -1.0 };
        if component == self.planted_component {
            self.background_acc + sign * half
        } else if Some(component) == self.counter_component {
            self.background_acc - sign * half
        } else {
            self.background_acc
        }
    }

    /// Component means: evenly spaced on a circle in the first two
    /// coordinates, or on a line when `dim == 1`.
    pub fn component_means(&self) -> Vec<Vec<f64>> {
        let m = self.n_clusters;
        let sep = self.component_separation;
        (0..m)
            .map(|c| {
                let mut mean = vec![0.0; self.dim];
                if self.dim == 1 {
                    mean[0] = c as f64 * sep;
                } else if m > 1 {
                    let radius = sep / (2.0 * (std::f64::consts::PI / m as f64).sin());
                    let angle = 2.0 * std::f64::consts::PI * c as f64 / m as f64;
                    mean[0] = radius * angle.cos();
                    mean[1] = radius * angle.sin();
                }
                mean
            })
            .collect()
    }
}

/// Component index of each generated instance, in dataset order.
pub fn component_of(spec: &PlantedBiasSpec, index: usize) -> usize {
    index / spec.n_per_component
}

struct Draft {
    features: Vec<f64>,
    group: usize,
    label: u8,
    component: usize,
}

pub fn generate(spec: &PlantedBiasSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let means = spec.component_means();

    let mut drafts = Vec::with_capacity(spec.n_clusters * spec.n_per_component);
    for (component, mean) in means.iter().enumerate() {
        for _ in 0..spec.n_per_component {
            let features = mean
                .iter()
                .map(|m| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    m + z
                })
                .collect();
            let group = usize::from(!rng.random_bool(spec.group_balance));
            let label = u8::from(rng.random_bool(0.5));
            drafts.push(Draft { features, group, label, component });
        }
    }

    let mut last_gap = f64::NAN;
    for _ in 0..MAX_ATTEMPTS {
        let mut n = [0usize; 2];
        let mut correct = [0usize; 2];
        let mut outputs = Vec::with_capacity(drafts.len());
        for draft in &drafts {
            let acc = spec.expected_accuracy(draft.component, draft.group);
            let is_correct = rng.random_bool(acc);
            let pred = if is_correct { draft.label } else { 1 - draft.label };
            let u: f64 = rng.random();
            let score = if pred == 1 { 0.5 + 0.5 * u } else { 0.5 * u };
            n[draft.group] += 1;
            correct[draft.group] += usize::from(is_correct);
            outputs.push((pred, score));
        }
        if n[0] == 0 || n[1] == 0 {
            return Err(Error::InfeasibleSpec("a group received no instances".into()));
        }
        last_gap = (correct[0] as f64 / n[0] as f64 - correct[1] as f64 / n[1] as f64).abs();
        if last_gap < MAX_GLOBAL_GAP {
            let rows: Vec<RawRecord> = drafts
                .iter()
                .zip(outputs)
                .enumerate()
                .map(|(i, (draft, (pred, score)))| RawRecord {
                    id: format!("s{i:06}"),
                    features: draft.features.clone(),
                    group: if draft.group == 0 { GROUP_A } else { GROUP_B }.to_string(),
                    label: draft.label as i64,
                    pred: pred as i64,
                    score: Some(score),
                    text: None,
                })
                .collect();
            return build_dataset(&rows);
        }
    }
    Err(Error::ResamplingExhausted {
        attempts: MAX_ATTEMPTS,
        last_gap,
    })
}

/// Exhaustive minimum of the combined objective.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceOptimum {
    pub total: f64,
    pub clustering: f64,
    pub bias: f64,
    pub assignment: Vec<usize>,
}

pub const BRUTE_FORCE_LIMIT: f64 = 2e6;

/// Objective of one assignment with centroids at the cluster means.
pub fn reference_objective(d: &Dataset, assignment: &[usize], k: usize, lambda: f64) -> (f64, f64, f64) {
    let dim = d.dim();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut sizes = vec![0usize; k];
    let mut n = vec![[0usize; 2]; k];
    let mut c = vec![[0usize; 2]; k];
    for (i, &j) in assignment.iter().enumerate() {
        let inst = d.instance(i);
        sizes[j] += 1;
        for (s, x) in sums[j].iter_mut().zip(&inst.features) {
            *s += x;
        }
        let g = d.group_of(i);
        n[j][g] += 1;
        if inst.label == inst.prediction {
            c[j][g] += 1;
        }
    }
    let mut clustering = 0.0;
    for (i, &j) in assignment.iter().enumerate() {
        for (x, s) in d.instance(i).features.iter().zip(&sums[j]) {
            let diff = x - s / sizes[j] as f64;
            clustering += diff * diff;
        }
    }
    let mut bias = 0.0;
    for j in 0..k {
        if n[j][0] > 0 && n[j][1] > 0 {
            let gap = c[j][0] as f64 / n[j][0] as f64 - c[j][1] as f64 / n[j][1] as f64;
            bias -= gap * gap;
        }
    }
    (clustering + lambda * bias, clustering, bias)
}

/// Enumerates all `k^n` assignments (empty clusters allowed).
pub fn brute_force_objective(d: &Dataset, k: usize, lambda: f64) -> Result<BruteForceOptimum> {
    let n = d.len();
    let size = (k as f64).powi(n as i32);
    if k == 0 || size > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge { size, limit: BRUTE_FORCE_LIMIT });
    }
    let mut assignment = vec![0usize; n];
    let mut best: Option<BruteForceOptimum> = None;
    loop {
        let (total, clustering, bias) = reference_objective(d, &assignment, k, lambda);
        if best.as_ref().is_none_or(|b| total < b.total) {
            best = Some(BruteForceOptimum {
                total,
                clustering,
                bias,
                assignment: assignment.clone(),
            });
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(best.expect("at least one assignment"));
            }
            assignment[pos] += 1;
            if assignment[pos] < k {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

/// All-pairs AUC: each (positive, negative) pair scores 1 if ranked
/// correctly, 0.5 if tied.
pub fn brute_force_auc(subset: &[&Instance]) -> Result<f64> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for inst in subset {
        let s = inst.score.ok_or(Error::MissingScore)?;
        if inst.label == 1 {
            pos.push(s);
        } else {
            neg.push(s);
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Degenerate("AUC needs both classes"));
    }
    let mut credit = 0.0;
    for &p in &pos {
        for &q in &neg {
            if p > q {
                credit += 1.0;
            } else if p == q {
                credit += 0.5;
            }
        }
    }
    Ok(credit / (pos.len() * neg.len()) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::GroupId;
    use crate::metrics::{global_bias, MetricKind};

    fn inst(label: u8, score: f64) -> Instance {
        Instance {
            id: String::new(),
            features: vec![0.0],
            group: GroupId::new("a"),
            label,
            prediction: label,
            score: Some(score),
            text: None,
        }
    }

    #[test]
    fn auc_oracle_examples() {
        let a = [inst(1, 0.9), inst(0, 0.1)];
        assert_eq!(brute_force_auc(&a.iter().collect::<Vec<_>>()).unwrap(), 1.0);
        let b = [inst(1, 0.1), inst(0, 0.9)];
        assert_eq!(brute_force_auc(&b.iter().collect::<Vec<_>>()).unwrap(), 0.0);
        let c = [inst(1, 0.6), inst(1, 0.4), inst(0, 0.5)];
        assert_eq!(brute_force_auc(&c.iter().collect::<Vec<_>>()).unwrap(), 0.5);
        let d = [inst(1, 0.6)];
        assert!(matches!(
            brute_force_auc(&d.iter().collect::<Vec<_>>()),
            Err(Error::Degenerate(_))
        ));
    }

    /// Accuracy gap between the groups restricted to one component.
    fn component_gap(spec: &PlantedBiasSpec, d: &Dataset, component: usize) -> f64 {
        let mut n = [0usize; 2];
        let mut c = [0usize; 2];
        for i in 0..d.len() {
            if component_of(spec, i) == component {
                let g = d.group_of(i);
                n[g] += 1;
                c[g] += usize::from(d.instance(i).is_correct());
            }
        }
        c[0] as f64 / n[0] as f64 - c[1] as f64 / n[1] as f64
    }

    #[test]
    fn default_spec_plants_gap() {
        for seed in 0..10 {
            let spec = PlantedBiasSpec { seed, ..Default::default() };
            let d = generate(&spec).unwrap();
            assert_eq!(d.len(), 2000);
            let gap = component_gap(&spec, &d, spec.planted_component);
            assert!((0.22..=0.38).contains(&gap), "seed {seed}: planted gap {gap}");
            let counter = component_gap(&spec, &d, 1);
            assert!((-0.38..=-0.22).contains(&counter), "seed {seed}: counter gap {counter}");
            let global = global_bias(&d, MetricKind::Accuracy).unwrap().gap.unwrap();
            assert!(global < MAX_GLOBAL_GAP);
        }
    }

    #[test]
    fn zero_gap_spec_is_neutral_everywhere() {
        for seed in 0..10 {
            let spec = PlantedBiasSpec {
                planted_gap: 0.0,
                n_per_component: 5000,
                seed,
                ..Default::default()
            };
            let d = generate(&spec).unwrap();
            assert!(global_bias(&d, MetricKind::Accuracy).unwrap().gap.unwrap() < 0.02);
            for comp in 0..spec.n_clusters {
                let gap = component_gap(&spec, &d, comp).abs();
                assert!(gap < 0.05, "seed {seed} component {comp}: {gap}");
            }
        }
    }

    #[test]
    fn generator_is_seeded() {
        let spec = PlantedBiasSpec { n_per_component: 50, seed: 12, ..Default::default() };
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn means_are_separated() {
        for dim in [1, 2, 8] {
            let spec = PlantedBiasSpec { dim, ..Default::default() };
            let means = spec.component_means();
            for a in 0..means.len() {
                for b in a + 1..means.len() {
                    let d2: f64 = means[a].iter().zip(&means[b]).map(|(x, y)| (x - y) * (x - y)).sum();
                    assert!(d2.sqrt() >= spec.component_separation - 1e-9);
                }
            }
        }
    }

    #[test]
    fn infeasible_specs_rejected() {
        let bad = [
            PlantedBiasSpec { background_acc: 0.95, ..Default::default() },
            PlantedBiasSpec { planted_gap: 1.5, ..Default::default() },
            PlantedBiasSpec { planted_component: 7, ..Default::default() },
            PlantedBiasSpec { counter_component: Some(0), ..Default::default() },
            PlantedBiasSpec { group_balance: 1.0, ..Default::default() },
        ];
        for spec in bad {
            assert!(matches!(generate(&spec), Err(Error::InfeasibleSpec(_))), "{spec:?}");
        }
    }

    #[test]
    fn uncompensated_gap_exhausts_resampling() {
        let spec = PlantedBiasSpec {
            counter_component: None,
            planted_gap: 0.6,
            background_acc: 0.6,
            ..Default::default()
        };
        assert!(matches!(generate(&spec), Err(Error::ResamplingExhausted { attempts: 10, .. })));
    }

    fn rows_dataset(points: &[(f64, &str, bool)]) -> Dataset {
        let rows: Vec<RawRecord> = points
            .iter()
            .enumerate()
            .map(|(i, &(x, g, c))| RawRecord {
                id: i.to_string(),
                features: vec![x, 0.0],
                group: g.into(),
                label: 1,
                pred: i64::from(c),
                score: None,
                text: None,
            })
            .collect();
        build_dataset(&rows).unwrap()
    }

    #[test]
    fn brute_force_splits_distant_pairs() {
        let d = rows_dataset(&[(0.0, "a", true), (1.0, "b", true), (50.0, "a", true), (51.0, "b", true)]);
        let best = brute_force_objective(&d, 2, 0.0).unwrap();
        let a = &best.assignment;
        assert_eq!(a[0], a[1]);
        assert_eq!(a[2], a[3]);
        assert_ne!(a[0], a[2]);
        assert_eq!(best.clustering, 1.0);
    }

    #[test]
    fn brute_force_respects_limit() {
        let pts: Vec<_> = (0..25).map(|i| (i as f64, if i % 2 == 0 { "a" } else { "b" }, true)).collect();
        let d = rows_dataset(&pts);
        assert!(matches!(brute_force_objective(&d, 2, 0.0), Err(Error::InstanceTooLarge { .. })));
    }

    #[test]
    fn zero_lambda_brute_force_is_kmeans_optimum() {
        let d = rows_dataset(&[
            (0.0, "a", true),
            (0.5, "b", false),
            (3.0, "a", false),
            (3.2, "b", true),
            (9.0, "a", true),
            (9.9, "b", true),
        ]);
        let best = brute_force_objective(&d, 2, 0.0).unwrap();
        // with lambda 0 the total is the clustering loss alone
        assert_eq!(best.total, best.clustering);
        let with_bias = brute_force_objective(&d, 2, 10.0).unwrap();
        assert!(with_bias.total <= best.total);
    }
}
