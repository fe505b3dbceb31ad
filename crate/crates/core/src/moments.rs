//! Moment operators of gate sets, block by block.
//!
//! `U^{t,t}` decomposes into the spin-`s` representations `0 <= s <= t`; the
//! Haar average kills every block except `s = 0`, where both averages equal one.
//! Hence `delta(nu, t) = max_{1 <= s <= t} ||T_{nu,s}||` with
//! `T_{nu,s} = (1/|S|) sum_i pi_s(U_i)`.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{haar_sample, projective_distance, GateSet, ProjectiveGate};
use crate::irreps::{multiplicity_weights, IrrepLadder};
use crate::linalg::{operator_norm_with, singular_values, NormEstimate, NormMethod, DEFAULT_TOL};
use crate::rng::{purpose, stream};

/// Entries closer than this are merged (with their counts) before averaging.
const MERGE_DISTANCE: f64 = 1e-12;

/// `(1/|S|) sum_i pi_s(U_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentBlock {
    pub spin: u32,
    pub matrix: DMatrix<Complex64>,
}

/// Streams the moment blocks `s = 1, 2, ...` of a gate set, carrying one
/// irrep ladder per distinct gate.
pub struct MomentStream {
    ladders: Vec<(IrrepLadder, f64)>,
    next_spin: u32,
}

impl MomentStream {
    pub fn new(set: &GateSet) -> Self {
        let mut distinct: Vec<(ProjectiveGate, usize)> = Vec::new();
        for g in set.iter() {
            match distinct
                .iter_mut()
                .find(|(h, _)| projective_distance(h, g) <= MERGE_DISTANCE)
            {
                Some((_, count)) => *count += 1,
                None => distinct.push((*g, 1)),
            }
        }
        let total = set.len() as f64;
        Self {
            ladders: distinct
                .into_iter()
                .map(|(g, count)| (IrrepLadder::new(&g), count as f64 / total))
                .collect(),
            next_spin: 1,
        }
    }

    pub fn next_spin(&self) -> u32 {
        self.next_spin
    }

    /// Advances every ladder by two degrees and returns the next spin's block.
    pub fn next_block(&mut self) -> MomentBlock {
        let s = self.next_spin;
        self.ladders
            .par_iter_mut()
            .for_each(|(ladder, _)| ladder.advance_to_spin(s));
        let dim = 2 * s as usize + 1;
        let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (ladder, weight) in &self.ladders {
            ladder.accumulate(*weight, &mut acc);
        }
        self.next_spin += 1;
        MomentBlock {
            spin: s,
            matrix: DMatrix::from_vec(dim, dim, acc),
        }
    }
}

pub fn moment_block(set: &GateSet, s: u32) -> Result<MomentBlock> {
    if s == 0 {
        return Err(Error::InvalidArgument("moment blocks start at spin 1".into()));
    }
    let mut stream = MomentStream::new(set);
    stream.ladders.par_iter_mut().for_each(|(l, _)| l.advance_to_spin(s - 1));
    stream.next_spin = s;
    Ok(stream.next_block())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinNorm {
    pub spin: u32,
    pub norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaProfile {
    pub per_spin: Vec<SpinNorm>,
    /// `delta_of_t[t - 1] = max_{1 <= s <= t} ||T_s||`.
    pub delta_of_t: Vec<f64>,
    pub t_max: u32,
    /// Cardinality entering the numerator of Q (|S|, or |C| for derived sets).
    pub set_size: usize,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip)]
    pub wall_time: f64,
}

impl DeltaProfile {
    pub fn delta(&self, t: u32) -> Option<f64> {
        if t == 0 {
            return None;
        }
        self.delta_of_t.get(t as usize - 1).copied()
    }

    pub fn all_converged(&self) -> bool {
        self.per_spin.iter().all(|n| n.converged)
    }

    /// Running maxima are non-decreasing and bounded by one.
    pub fn is_consistent(&self) -> bool {
        self.delta_of_t.windows(2).all(|w| w[0] <= w[1])
            && self.delta_of_t.iter().all(|&d| (0.0..=1.0 + 1e-10).contains(&d))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileOptions {
    pub tol: f64,
    pub method: NormMethod,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            method: NormMethod::Auto,
        }
    }
}

pub fn delta_profile(set: &GateSet, t_max: u32) -> Result<DeltaProfile> {
    delta_profile_with(set, t_max, ProfileOptions::default())
}

/// Block norms for `s = 1..=t_max` and their running maxima.
///
/// Blocks are produced in spin order and normed in parallel batches; results
/// are keyed by spin, so the output does not depend on the worker count.
pub fn delta_profile_with(set: &GateSet, t_max: u32, opts: ProfileOptions) -> Result<DeltaProfile> {
    if t_max == 0 {
        return Err(Error::InvalidArgument("t_max must be >= 1".into()));
    }
    let start = Instant::now();
    let mut stream = MomentStream::new(set);
    let batch = rayon::current_num_threads().max(1);
    let mut per_spin = Vec::with_capacity(t_max as usize);
    while stream.next_spin() <= t_max {
        let remaining = (t_max + 1 - stream.next_spin()) as usize;
        let blocks: Vec<MomentBlock> = (0..batch.min(remaining)).map(|_| stream.next_block()).collect();
        let norms: Vec<SpinNorm> = blocks
            .par_iter()
            .map(|b| {
                let NormEstimate { value, converged, iterations, .. } =
                    operator_norm_with(&b.matrix, opts.tol, opts.method);
                SpinNorm { spin: b.spin, norm: value, converged, iterations }
            })
            .collect();
        per_spin.extend(norms);
    }
    let delta_of_t = per_spin
        .iter()
        .scan(0.0f64, |run, n| {
            *run = run.max(n.norm);
            Some(*run)
        })
        .collect();
    Ok(DeltaProfile {
        per_spin,
        delta_of_t,
        t_max,
        set_size: set.len(),
        label: set.label().to_string(),
        seed: set.provenance().seed,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// `U^{⊗t} ⊗ conj(U)^{⊗t}` as a dense `4^t x 4^t` matrix.
fn tensor_moment(g: &ProjectiveGate, t: u32) -> DMatrix<Complex64> {
    let m = g.matrix();
    let u = DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]]);
    let ubar = u.map(|z| z.conj());
    let mut out = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for _ in 0..t {
        out = kron(&out, &u);
    }
    for _ in 0..t {
        out = kron(&out, &ubar);
    }
    out
}

const ORACLE_SEED: u64 = 0x0AC1E;
const ORACLE_WITNESSES: u64 = 6;
const NULL_TOL: f64 = 1e-9;

/// `||T_{nu,t} - T_{mu,t}||` from the literal `4^t`-dimensional moment operators.
///
/// The Haar moment is the orthogonal projector onto the common fixed space of
/// six Haar-random witnesses, found as the joint null space of `W_i^{t,t} - I`.
pub fn brute_force_delta(set: &GateSet, t: u32) -> Result<f64> {
    if t > 3 {
        return Err(Error::DimensionTooLarge { t });
    }
    if t == 0 {
        return Err(Error::InvalidArgument("t must be >= 1".into()));
    }
    let dim = 4usize.pow(t);
    let weight = Complex64::new(1.0 / set.len() as f64, 0.0);
    let mut average = DMatrix::zeros(dim, dim);
    for g in set.iter() {
        average += tensor_moment(g, t) * weight;
    }

    let id = DMatrix::<Complex64>::identity(dim, dim);
    let witnesses = ORACLE_WITNESSES as usize;
    let mut stacked = DMatrix::zeros(witnesses * dim, dim);
    for i in 0..witnesses {
        let w = haar_sample(&mut stream(ORACLE_SEED, purpose::ORACLE_WITNESS, i as u64));
        stacked
            .view_mut((i * dim, 0), (dim, dim))
            .copy_from(&(tensor_moment(&w, t) - &id));
    }
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let null_rows: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &sv)| sv <= NULL_TOL)
        .map(|(i, _)| i)
        .collect();
    let mut projector = DMatrix::<Complex64>::zeros(dim, dim);
    for &r in &null_rows {
        let row = v_t.row(r);
        projector += row.adjoint() * row;
    }
    Ok(singular_values(&(average - projector))[0])
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// Each block's singular values weighted by the block's multiplicity in `U^{t,t}`.
    #[default]
    Multiplicity,
    /// Every computed singular value weighted equally.
    Uniform,
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multiplicity" => Ok(Self::Multiplicity),
            "uniform" => Ok(Self::Uniform),
            other => Err(Error::InvalidArgument(format!("unknown weighting {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    /// `(singular value, weight)` pairs, blocks in spin order.
    pub values: Vec<(f64, f64)>,
    pub t: u32,
    pub weighting: Weighting,
}

impl SpectrumSample {
    pub fn total_weight(&self) -> f64 {
        self.values.iter().map(|(_, w)| w).sum()
    }

    /// Weight carried by singular values strictly above `x`.
    pub fn weight_above(&self, x: f64) -> f64 {
        self.values.iter().filter(|(v, _)| *v > x).map(|(_, w)| w).sum()
    }

    /// Equal-weight mixture of several samples.
    pub fn aggregate(samples: &[SpectrumSample]) -> Result<SpectrumSample> {
        let first = samples.first().ok_or(Error::EmptyInput)?;
        let scale = 1.0 / samples.len() as f64;
        Ok(SpectrumSample {
            values: samples
                .iter()
                .flat_map(|s| s.values.iter().map(move |(v, w)| (*v, w * scale)))
                .collect(),
            t: first.t,
            weighting: first.weighting,
        })
    }
}

/// All singular values of the blocks `s = 1..=t`, weighted per `weighting`.
pub fn singular_spectrum(set: &GateSet, t: u32, weighting: Weighting) -> Result<SpectrumSample> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be >= 1".into()));
    }
    let mut stream = MomentStream::new(set);
    let blocks: Vec<MomentBlock> = (1..=t).map(|_| stream.next_block()).collect();
    let per_block: Vec<Vec<f64>> = blocks.par_iter().map(|b| singular_values(&b.matrix)).collect();
    let block_weights: Vec<f64> = match weighting {
        Weighting::Multiplicity => multiplicity_weights(t),
        Weighting::Uniform => {
            let count: usize = per_block.iter().map(Vec::len).sum();
            vec![1.0 / count as f64; t as usize]
        }
    };
    let values = per_block
        .into_iter()
        .zip(block_weights)
        .flat_map(|(sv, w)| sv.into_iter().map(move |v| (v, w)))
        .collect();
    Ok(SpectrumSample { values, t, weighting })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{clifford_group, p_gate, Provenance};
    use crate::linalg::operator_norm;

    fn set_of(gates: Vec<ProjectiveGate>) -> GateSet {
        GateSet::new(gates, "test", Provenance::default()).unwrap()
    }

    #[test]
    fn identity_set_block_is_identity() {
        let set = set_of(vec![ProjectiveGate::identity()]);
        for s in 1..4 {
            let b = moment_block(&set, s).unwrap();
            let dim = 2 * s as usize + 1;
            assert!((b.matrix - DMatrix::identity(dim, dim)).norm() < 1e-14);
        }
        let p = delta_profile(&set, 5).unwrap();
        assert!(p.delta_of_t.iter().all(|d| (d - 1.0).abs() < 1e-12));
    }

    #[test]
    fn inverse_pair_gives_cosines() {
        let theta = 0.41;
        let u = ProjectiveGate::rotation([0.0, 0.0, 1.0], -2.0 * theta);
        let set = set_of(vec![u, u.adjoint()]);
        let b = moment_block(&set, 3).unwrap();
        for k in 0..7 {
            let m = k as f64 - 3.0;
            assert!((b.matrix[(k, k)] - Complex64::new((2.0 * m * theta).cos(), 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn clifford_is_a_three_design_but_not_four() {
        let cliff = clifford_group();
        for s in 1..=3 {
            let b = moment_block(&cliff, s).unwrap();
            assert!(operator_norm(&b.matrix, 1e-12).value < 1e-12);
        }
        let b4 = moment_block(&cliff, 4).unwrap();
        assert!(operator_norm(&b4.matrix, 1e-12).value > 0.3);
    }

    #[test]
    fn clifford_plus_p4_profile_jumps_at_four() {
        let set = clifford_group().with_gate(p_gate(std::f64::consts::FRAC_PI_4));
        let p = delta_profile(&set, 4).unwrap();
        assert!(p.delta(3).unwrap() < p.delta(4).unwrap());
        assert!(p.is_consistent());
    }

    #[test]
    fn brute_force_identity_is_one() {
        let set = set_of(vec![ProjectiveGate::identity()]);
        assert!((brute_force_delta(&set, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(brute_force_delta(&set, 4), Err(Error::DimensionTooLarge { t: 4 })));
    }

    #[test]
    fn haar_pair_matches_brute_force() {
        let mut rng = stream(11, purpose::GATE, 0);
        let set = set_of(vec![haar_sample(&mut rng), haar_sample(&mut rng)]);
        let p = delta_profile(&set, 3).unwrap();
        for t in 1..=3 {
            let brute = brute_force_delta(&set, t).unwrap();
            assert!((p.delta(t).unwrap() - brute).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn spectrum_weights_sum_to_one() {
        let set = set_of(vec![ProjectiveGate::identity()]);
        for weighting in [Weighting::Multiplicity, Weighting::Uniform] {
            let s = singular_spectrum(&set, 6, weighting).unwrap();
            assert!((s.total_weight() - 1.0).abs() < 1e-12);
            assert!(s.values.iter().all(|(v, _)| (v - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn duplicate_entries_are_merged_without_changing_blocks() {
        let g = p_gate(0.3);
        let h = ProjectiveGate::rotation([1.0, 0.0, 0.0], 0.7);
        let merged = moment_block(&set_of(vec![g, g, g, h]), 3).unwrap();
        let mut expect = crate::irreps::irrep(&g, 3).entries * Complex64::new(0.75, 0.0);
        expect += crate::irreps::irrep(&h, 3).entries * Complex64::new(0.25, 0.0);
        assert!((merged.matrix - expect).norm() < 1e-13);
    }
}
