//! Random ensembles of gate sets, parameter sweeps, histograms and the
//! completion search.
//!
//! Member `i` of an ensemble is drawn from `stream(seed, MEMBER, i)` alone, so
//! any subset of members (a shard) reproduces exactly the same gate sets as a
//! full run, and results are collected in member order whatever the scheduling.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gates::{
    derived_set, finite_order_sample, haar_sample, GateSet, ProjectiveGate, Provenance, ProvenanceKind,
};
use crate::io::{gate_to_json, MatrixJson};
use crate::moments::{delta_profile, singular_spectrum, DeltaProfile, SpectrumSample, Weighting};
use crate::overhead::{KmDensity, OverheadReport, Variant};
use crate::rng::{member_seed, purpose, stream, Stream};

pub const DEFAULT_BINS: usize = 40;
pub const DEFAULT_SIZE: usize = 200;
pub const DEFAULT_T_LIST: [u32; 3] = [5, 50, 100];
pub const STABILIZATION_THRESHOLD: f64 = 0.1;
pub const AXIS_GRID_POINTS: usize = 1000;

fn serialize_label<S: Serializer>(set: &GateSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(set.label())
}

fn serialize_gate<S: Serializer>(g: &ProjectiveGate, s: S) -> std::result::Result<S::Ok, S::Error> {
    gate_to_json(g).serialize(s)
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnsembleKind {
    /// `n` independent gates; Haar-random when `order` is `None`, else of that projective order.
    Haar { n: usize, order: Option<u32> },
    /// A finite group plus one random gate of the given order.
    GroupCompletion {
        #[serde(serialize_with = "serialize_label")]
        group: GateSet,
        order: Option<u32>,
    },
    /// A finite group plus a fixed gate; every member is identical.
    FixedCompletion {
        #[serde(serialize_with = "serialize_label")]
        group: GateSet,
        #[serde(serialize_with = "serialize_gate")]
        gate: ProjectiveGate,
        gate_label: String,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub kind: EnsembleKind,
    pub size: usize,
    pub seed: u64,
    pub t_list: Vec<u32>,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidArgument("ensemble size must be >= 1".into()));
        }
        if self.t_list.is_empty() || self.t_list[0] == 0 || self.t_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("t_list must be strictly increasing positive integers".into()));
        }
        match &self.kind {
            EnsembleKind::Haar { n, order } => {
                if *n == 0 {
                    return Err(Error::InvalidSize { n: *n });
                }
                check_order(*order)
            }
            EnsembleKind::GroupCompletion { order, .. } => check_order(*order),
            EnsembleKind::FixedCompletion { .. } => Ok(()),
        }
    }

    pub fn t_max(&self) -> u32 {
        self.t_list.last().copied().unwrap_or(0)
    }

    /// The group whose conjugates of the completion form the derived set.
    pub fn base_group(&self) -> Option<&GateSet> {
        match &self.kind {
            EnsembleKind::Haar { .. } => None,
            EnsembleKind::GroupCompletion { group, .. } | EnsembleKind::FixedCompletion { group, .. } => Some(group),
        }
    }
}

fn check_order(order: Option<u32>) -> Result<()> {
    match order {
        Some(r) if r < 2 => Err(Error::InvalidOrder(r)),
        _ => Ok(()),
    }
}

fn random_gate(rng: &mut Stream, order: Option<u32>) -> Result<ProjectiveGate> {
    match order {
        None => Ok(haar_sample(rng)),
        Some(r) => finite_order_sample(rng, r),
    }
}

/// A sampled member: the gate set itself and, for completions, the added gate.
#[derive(Clone, Debug)]
pub struct Member {
    pub set: GateSet,
    pub completion: Option<ProjectiveGate>,
}

pub fn sample_member(spec: &EnsembleSpec, index: usize) -> Result<Member> {
    let mut rng = stream(spec.seed, purpose::MEMBER, index as u64);
    let provenance = |kind, order| Provenance {
        kind,
        order,
        seed: Some(spec.seed),
        member: Some(index as u64),
        source: None,
    };
    match &spec.kind {
        EnsembleKind::Haar { n, order } => {
            let gates = (0..*n).map(|_| random_gate(&mut rng, *order)).collect::<Result<Vec<_>>>()?;
            let set = GateSet::new(gates, format!("haar-{index}"), provenance(ProvenanceKind::Haar, *order))?;
            Ok(Member { set, completion: None })
        }
        EnsembleKind::GroupCompletion { group, order } => {
            let t = random_gate(&mut rng, *order)?;
            let set = group
                .clone()
                .with_gate(t)
                .with_label(format!("{}+{index}", group.label()))
                .with_provenance(provenance(ProvenanceKind::GroupCompletion, *order));
            Ok(Member { set, completion: Some(t) })
        }
        EnsembleKind::FixedCompletion { group, gate, gate_label } => {
            let set = group
                .clone()
                .with_gate(*gate)
                .with_label(format!("{}+{gate_label}", group.label()))
                .with_provenance(provenance(ProvenanceKind::FixedCompletion, None));
            Ok(Member { set, completion: Some(*gate) })
        }
    }
}

pub fn sample_ensemble(spec: &EnsembleSpec) -> Result<Vec<GateSet>> {
    spec.validate()?;
    (0..spec.size).map(|i| sample_member(spec, i).map(|m| m.set)).collect()
}

/// Members `i` with `i mod total == index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Shard {
    pub index: usize,
    pub total: usize,
}

impl Shard {
    pub const ALL: Shard = Shard { index: 0, total: 1 };

    pub fn new(index: usize, total: usize) -> Result<Self> {
        if total == 0 || index >= total {
            return Err(Error::InvalidArgument(format!("shard {index}/{total}: need index < total")));
        }
        Ok(Self { index, total })
    }

    pub fn members(&self, size: usize) -> Vec<usize> {
        (self.index..size).step_by(self.total).collect()
    }
}

impl std::str::FromStr for Shard {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("shard must look like i/N, got {s}"));
        let (i, n) = s.split_once('/').ok_or_else(bad)?;
        Shard::new(i.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunResult {
    pub member_index: usize,
    pub member_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub completion: Option<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<DeltaProfile>,
    pub reports: Vec<OverheadReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Excluded from serialization so equal seeds give identical output.
    #[serde(skip)]
    pub wall_time: f64,
}

impl RunResult {
    pub fn report_at(&self, t: u32) -> Option<&OverheadReport> {
        self.reports.iter().find(|r| r.t == t)
    }
}

/// The set whose moments are measured: the derived multiset for Q_T, the raw set for Q.
pub fn measured_set(spec: &EnsembleSpec, member: &Member, variant: Variant) -> Result<GateSet> {
    match variant {
        Variant::Q => Ok(member.set.clone()),
        Variant::QT => {
            let group = spec
                .base_group()
                .ok_or_else(|| Error::InvalidArgument("Q_T needs a group-completion ensemble".into()))?;
            let t = member.completion.expect("completion kinds carry their gate");
            derived_set(group, &t)
        }
    }
}

fn run_member(spec: &EnsembleSpec, index: usize, variant: Variant) -> RunResult {
    let start = Instant::now();
    let mut result = RunResult {
        member_index: index,
        member_seed: member_seed(spec.seed, index as u64),
        completion: None,
        profile: None,
        reports: Vec::new(),
        error: None,
        wall_time: 0.0,
    };
    let outcome = (|| -> Result<()> {
        let member = sample_member(spec, index)?;
        result.completion = member.completion.as_ref().map(gate_to_json);
        let measured = measured_set(spec, &member, variant)?;
        let mut profile = delta_profile(&measured, spec.t_max())?;
        profile.seed = Some(spec.seed);
        result.reports = spec
            .t_list
            .iter()
            .map(|&t| OverheadReport::from_profile(variant, &profile, t, None))
            .collect::<Result<_>>()?;
        result.profile = Some(profile);
        Ok(())
    })();
    if let Err(e) = outcome {
        result.error = Some(e.to_string());
    }
    result.wall_time = start.elapsed().as_secs_f64();
    result
}

pub fn run_sweep(spec: &EnsembleSpec, variant: Variant) -> Result<Vec<RunResult>> {
    run_sweep_with(spec, variant, Shard::ALL, &|_| {})
}

/// Evaluates the shard's members in parallel and returns them in member order.
/// `on_done` is called from worker threads as members finish.
pub fn run_sweep_with(
    spec: &EnsembleSpec,
    variant: Variant,
    shard: Shard,
    on_done: &(dyn Fn(&RunResult) + Sync),
) -> Result<Vec<RunResult>> {
    spec.validate()?;
    if variant == Variant::QT && spec.base_group().is_none() {
        return Err(Error::InvalidArgument("Q_T needs a group-completion or fixed-completion ensemble".into()));
    }
    Ok(shard
        .members(spec.size)
        .into_par_iter()
        .map(|i| {
            let r = run_member(spec, i, variant);
            on_done(&r);
            r
        })
        .collect())
}

/// Q or Q_T values at `t` over successful members with a finite value.
pub fn q_values_at(results: &[RunResult], t: u32) -> Vec<f64> {
    results
        .iter()
        .filter_map(|r| r.report_at(t))
        .map(|rep| rep.q)
        .filter(|q| q.is_finite())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub sample_count: usize,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    pub fn integral(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.bin_width()
    }

    /// Piecewise-linear CDF: mass spread uniformly within each bin.
    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = (self.bin_edges[0], *self.bin_edges.last().unwrap());
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let w = self.bin_width();
        let k = (((x - lo) / w).floor() as usize).min(self.densities.len() - 1);
        let before: f64 = self.densities[..k].iter().sum::<f64>() * w;
        (before + self.densities[k] * (x - self.bin_edges[k])).min(1.0)
    }
}

/// Uniform-bin density histogram of the finite values, over `range` or the
/// observed `[min, max]` (widened to unit width around a single distinct value).
/// Values outside an explicit range are dropped.
pub fn histogram(values: &[f64], bins: usize, range: Option<(f64, f64)>) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be >= 1".into()));
    }
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (lo, hi) = match range {
        Some((lo, hi)) if hi > lo => (lo, hi),
        Some((lo, hi)) => return Err(Error::InvalidArgument(format!("empty range [{lo}, {hi}]"))),
        None => {
            let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        }
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut used = 0;
    for v in finite {
        if v < lo || v > hi {
            continue;
        }
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
        used += 1;
    }
    if used == 0 {
        return Err(Error::EmptyInput);
    }
    let bin_edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    let densities = counts.iter().map(|&c| c as f64 / (used as f64 * width)).collect();
    Ok(Histogram { bin_edges, densities, sample_count: used })
}

/// Sup-distance between the piecewise-linear CDFs of two histograms, checked at
/// every bin edge of both (where the difference of two piecewise-linear functions
/// attains its extrema).
pub fn stabilization_distance(h1: &Histogram, h2: &Histogram) -> f64 {
    h1.bin_edges
        .iter()
        .chain(&h2.bin_edges)
        .map(|&x| (h1.cdf(x) - h2.cdf(x)).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStrategy {
    #[default]
    Random,
    AxisGrid,
}

impl std::str::FromStr for SearchStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            "axis-grid" => Ok(Self::AxisGrid),
            other => Err(Error::InvalidArgument(format!("unknown strategy {other}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Candidate {
    pub index: usize,
    pub axis: [f64; 3],
    pub angle: f64,
    #[serde(serialize_with = "serialize_gate")]
    pub gate: ProjectiveGate,
    pub delta: f64,
    /// Infinite when the candidate shows no gap or lies in the group.
    #[serde(serialize_with = "serialize_finite_or_null")]
    pub q_t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn serialize_finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub best: Candidate,
    pub strategy: SearchStrategy,
    pub order: Option<u32>,
    pub t: u32,
    pub trace: Vec<Candidate>,
}

/// `count` nearly uniform unit vectors on a golden-angle spiral.
pub fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

fn evaluate_candidate(group: &GateSet, index: usize, gate: ProjectiveGate, t: u32) -> Candidate {
    let (axis, angle) = gate.axis_angle();
    let mut c = Candidate { index, axis, angle, gate, delta: f64::NAN, q_t: f64::INFINITY, error: None };
    let outcome = derived_set(group, &gate).and_then(|d| {
        let profile = delta_profile(&d, t)?;
        OverheadReport::from_profile(Variant::QT, &profile, t, None)
    });
    match outcome {
        Ok(rep) => {
            c.delta = rep.delta;
            c.q_t = rep.q;
        }
        Err(e) => c.error = Some(e.to_string()),
    }
    c
}

/// Minimizes Q_T over completions of `group` by gates of order `order`.
///
/// `Random` draws `budget` gates from `stream(seed, SEARCH, i)`. `AxisGrid`
/// takes `budget` Fibonacci-sphere axes and every admissible angle `2 pi k / r`.
pub fn search_best_completion(
    group: &GateSet,
    order: Option<u32>,
    t: u32,
    budget: usize,
    strategy: SearchStrategy,
    seed: u64,
) -> Result<SearchResult> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be >= 1".into()));
    }
    check_order(order)?;
    let gates: Vec<ProjectiveGate> = match strategy {
        SearchStrategy::Random => (0..budget)
            .map(|i| random_gate(&mut stream(seed, purpose::SEARCH, i as u64), order))
            .collect::<Result<_>>()?,
        SearchStrategy::AxisGrid => {
            let r = order.ok_or_else(|| Error::InvalidArgument("axis-grid search needs a finite order".into()))?;
            let angles: Vec<f64> = crate::gates::coprime_residues(r)
                .into_iter()
                .map(|k| 2.0 * PI * f64::from(k) / f64::from(r))
                .collect();
            fibonacci_sphere(budget)
                .into_iter()
                .flat_map(|axis| angles.iter().map(move |&a| ProjectiveGate::rotation(axis, a)))
                .collect()
        }
    };
    let trace: Vec<Candidate> = gates
        .into_par_iter()
        .enumerate()
        .map(|(i, g)| evaluate_candidate(group, i, g, t))
        .collect();
    let best = trace
        .iter()
        .filter(|c| c.error.is_none())
        .min_by(|a, b| a.q_t.total_cmp(&b.q_t).then(a.index.cmp(&b.index)))
        .cloned()
        .ok_or_else(|| Error::InvalidArgument("no candidate could be evaluated".into()))?;
    Ok(SearchResult { best, strategy, order, t, trace })
}

/// Equal-weight aggregate of member spectra, with the matching one-sided
/// Kesten-McKay density (`n = |C|` for completions, the set size for Haar sets).
pub fn spectrum_ensemble(
    spec: &EnsembleSpec,
    t: u32,
    weighting: Weighting,
    shard: Shard,
) -> Result<(SpectrumSample, KmDensity)> {
    spec.validate()?;
    let variant = if spec.base_group().is_some() { Variant::QT } else { Variant::Q };
    let samples = shard
        .members(spec.size)
        .into_par_iter()
        .map(|i| {
            let member = sample_member(spec, i)?;
            singular_spectrum(&measured_set(spec, &member, variant)?, t, weighting)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = match (&spec.kind, spec.base_group()) {
        (_, Some(group)) => group.len(),
        (EnsembleKind::Haar { n, .. }, None) => *n,
        _ => unreachable!("completion kinds carry a group"),
    };
    Ok((SpectrumSample::aggregate(&samples)?, KmDensity::new(n, false)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{clifford_group, hurwitz_group, projective_order};
    use rand_distr::{Distribution, StandardNormal};

    fn completion_spec(group: GateSet, order: Option<u32>, size: usize) -> EnsembleSpec {
        EnsembleSpec { kind: EnsembleKind::GroupCompletion { group, order }, size, seed: 7, t_list: vec![2, 4] }
    }

    #[test]
    fn haar_ensemble_is_reproducible() {
        let spec = EnsembleSpec { kind: EnsembleKind::Haar { n: 24, order: None }, size: 3, seed: 7, t_list: vec![5] };
        let a = sample_ensemble(&spec).unwrap();
        let b = sample_ensemble(&spec).unwrap();
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|s| s.len() == 24));
        assert_eq!(a, b);
        assert_ne!(a[0].gates(), a[1].gates());
    }

    #[test]
    fn completions_have_requested_order() {
        for m in sample_ensemble(&completion_spec(clifford_group(), Some(8), 10)).unwrap() {
            assert_eq!(projective_order(m.gates().last().unwrap(), 100), Some(8));
        }
        for m in sample_ensemble(&completion_spec(hurwitz_group(), Some(2), 10)).unwrap() {
            let (_, angle) = m.gates().last().unwrap().axis_angle();
            assert!((angle - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn shards_partition_members() {
        let spec = completion_spec(hurwitz_group(), None, 7);
        let full = run_sweep(&spec, Variant::QT).unwrap();
        let mut parts: Vec<RunResult> = (0..3)
            .flat_map(|i| run_sweep_with(&spec, Variant::QT, Shard::new(i, 3).unwrap(), &|_| {}).unwrap())
            .collect();
        parts.sort_by_key(|r| r.member_index);
        assert_eq!(serde_json::to_string(&full).unwrap(), serde_json::to_string(&parts).unwrap());
        assert!("3/3".parse::<Shard>().is_err());
    }

    #[test]
    fn q_t_requires_group() {
        let spec = EnsembleSpec { kind: EnsembleKind::Haar { n: 4, order: None }, size: 1, seed: 1, t_list: vec![2] };
        assert!(run_sweep(&spec, Variant::QT).is_err());
        assert!(run_sweep(&spec, Variant::Q).is_ok());
    }

    #[test]
    fn histogram_contracts() {
        let single = histogram(&[3.0], DEFAULT_BINS, None).unwrap();
        assert!((single.integral() - 1.0).abs() < 1e-9);
        assert_eq!(single.densities.iter().filter(|d| **d > 0.0).count(), 1);

        let grid: Vec<f64> = (0..4000).map(|i| i as f64 / 4000.0).collect();
        let flat = histogram(&grid, 10, None).unwrap();
        assert!(flat.densities.iter().all(|d| (d - 1.0).abs() < 0.01));

        let mut rng = stream(5, purpose::GATE, 0);
        let normal: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let h = histogram(&normal, 80, Some((-4.0, 4.0))).unwrap();
        let mid = h.densities[39].max(h.densities[40]);
        assert!((mid / (1.0 / (2.0 * PI).sqrt()) - 1.0).abs() < 0.05);
        assert!((h.integral() - 1.0).abs() < 1e-9);

        assert!(matches!(histogram(&[], 4, None), Err(Error::EmptyInput)));
        assert!(matches!(histogram(&[f64::INFINITY], 4, None), Err(Error::EmptyInput)));
    }

    #[test]
    fn stabilization_distance_extremes() {
        let a = histogram(&[0.0, 1.0, 2.0], 5, None).unwrap();
        assert_eq!(stabilization_distance(&a, &a), 0.0);
        let b = histogram(&[10.0, 11.0], 5, None).unwrap();
        assert!((stabilization_distance(&a, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fibonacci_points_are_unit_and_spread() {
        let pts = fibonacci_sphere(AXIS_GRID_POINTS);
        assert!(pts.iter().all(|p| (p.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12));
        let mean_z: f64 = pts.iter().map(|p| p[2]).sum::<f64>() / pts.len() as f64;
        assert!(mean_z.abs() < 1e-12);
    }

    #[test]
    fn search_keeps_order() {
        let res = search_best_completion(&clifford_group(), Some(8), 4, 6, SearchStrategy::Random, 3).unwrap();
        assert_eq!(res.trace.len(), 6);
        assert!(res.trace.iter().all(|c| projective_order(&c.gate, 100) == Some(8)));
        assert!(res.trace.iter().all(|c| c.q_t >= res.best.q_t));
        let grid = search_best_completion(&clifford_group(), Some(8), 4, 5, SearchStrategy::AxisGrid, 0).unwrap();
        assert_eq!(grid.trace.len(), 10);
    }

    #[test]
    fn spectrum_weights_sum_to_one() {
        let spec = completion_spec(hurwitz_group(), Some(2), 3);
        let (s, km) = spectrum_ensemble(&spec, 6, Weighting::Multiplicity, Shard::ALL).unwrap();
        assert!((s.total_weight() - 1.0).abs() < 1e-12);
        assert_eq!(km.set_size, 12);
    }
}
