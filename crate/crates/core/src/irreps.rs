//! Integer-spin irreducible representations of SU(2), which factor through PU(2).
//!
//! A gate is written in Euler form `U = R_z(alpha) R_y(beta) R_z(gamma)`, and
//! `pi_s(U)_{m' m} = e^{-i m' alpha} d^s_{m' m}(beta) e^{-i m gamma}` with rows and
//! columns indexed by `k = s + m`.
//!
//! The real matrices `d^s(beta)` are produced for `s = 0, 1, 2, ...` by the
//! three-term recurrence in `s`
//!
//! ```text
//! d^{j+1}_{m'm} = (j+1)(2j+1) / (r_{j+1}(m') r_{j+1}(m)) * (cos beta - m' m / (j (j+1))) d^j_{m'm}
//!               - (j+1) r_j(m') r_j(m) / (j r_{j+1}(m') r_{j+1}(m)) * d^{j-1}_{m'm}
//! ```
//!
//! with `r_j(m) = sqrt(j^2 - m^2)`. Entries on the new outer border
//! (`max(|m'|, |m|) = j + 1`) have a single-term closed form, evaluated in log
//! space. The recurrence runs forward in `s` and is numerically stable, unlike
//! raising symmetric powers one degree at a time, whose cancellations amplify
//! rounding error geometrically.

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::ProjectiveGate;

/// `pi_s(U)` for integer spin `s`; a `(2s+1) x (2s+1)` unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct IrrepMatrix {
    pub spin: u32,
    pub entries: DMatrix<Complex64>,
}

/// Euler angles `(alpha, beta, gamma)` with `U = +-R_z(alpha) R_y(beta) R_z(gamma)`.
pub fn euler_zyz(gate: &ProjectiveGate) -> (f64, f64, f64) {
    let [a, b, _, _] = gate.entries();
    let beta = 2.0 * b.norm().atan2(a.norm());
    let sum = if a.norm() > 0.0 { -2.0 * a.arg() } else { 0.0 };
    let diff = if b.norm() > 0.0 { -2.0 * (-b).arg() } else { 0.0 };
    (0.5 * (sum + diff), beta, 0.5 * (sum - diff))
}

/// Irreps of one gate for consecutive integer spins.
#[derive(Clone, Debug)]
pub struct IrrepLadder {
    alpha: f64,
    gamma: f64,
    cos_beta: f64,
    ln_cos_half: f64,
    ln_sin_half: f64,
    spin: u32,
    // column-major (2j+1) x (2j+1), rows m', columns m
    current: Vec<f64>,
    previous: Vec<f64>,
    scratch: Vec<f64>,
}

impl IrrepLadder {
    pub fn new(gate: &ProjectiveGate) -> Self {
        let (alpha, beta, gamma) = euler_zyz(gate);
        Self::from_euler(alpha, beta, gamma)
    }

    pub fn from_euler(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            alpha,
            gamma,
            cos_beta: beta.cos(),
            ln_cos_half: (0.5 * beta).cos().ln(),
            ln_sin_half: (0.5 * beta).sin().ln(),
            spin: 0,
            current: vec![1.0],
            previous: Vec::new(),
            scratch: Vec::new(),
        }
    }

    pub fn spin(&self) -> u32 {
        self.spin
    }

    pub fn dim(&self) -> usize {
        2 * self.spin as usize + 1
    }

    /// Column-major entries of the real matrix `d^s(beta)`.
    pub fn small_d(&self) -> &[f64] {
        &self.current
    }

    /// Adds `weight * pi_s(U)` to a column-major `dim x dim` buffer.
    pub fn accumulate(&self, weight: f64, out: &mut [Complex64]) {
        let dim = self.dim();
        assert_eq!(out.len(), dim * dim);
        let j = self.spin as f64;
        let rows: Vec<Complex64> = (0..dim)
            .map(|k| Complex64::from_polar(1.0, -(k as f64 - j) * self.alpha))
            .collect();
        for c in 0..dim {
            let col_phase = Complex64::from_polar(weight, -(c as f64 - j) * self.gamma);
            let src = &self.current[c * dim..(c + 1) * dim];
            let dst = &mut out[c * dim..(c + 1) * dim];
            for ((o, &d), &rp) in dst.iter_mut().zip(src).zip(&rows) {
                *o += rp * col_phase * d;
            }
        }
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut buf = vec![Complex64::new(0.0, 0.0); dim * dim];
        self.accumulate(1.0, &mut buf);
        DMatrix::from_vec(dim, dim, buf)
    }

    /// Single-term closed form of `d^j_{m'm}` when `j = max(|m'|, |m|)`.
    fn border(&self, ln_fact: &LnFactorials, j: i64, mp: i64, m: i64) -> f64 {
        let s = (m - mp).max(0);
        let cos_pow = 2 * j + m - mp - 2 * s;
        let sin_pow = mp - m + 2 * s;
        let ln_norm = 0.5
            * (ln_fact.get(j + mp) + ln_fact.get(j - mp) + ln_fact.get(j + m) + ln_fact.get(j - m))
            - ln_fact.get(j + m - s)
            - ln_fact.get(s)
            - ln_fact.get(mp - m + s)
            - ln_fact.get(j - mp - s);
        let mut ln = ln_norm;
        if cos_pow > 0 {
            ln += cos_pow as f64 * self.ln_cos_half;
        }
        if sin_pow > 0 {
            ln += sin_pow as f64 * self.ln_sin_half;
        }
        let sign = if (mp - m + s).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        sign * ln.exp()
    }

    /// Raises the spin by one.
    pub fn step(&mut self) {
        let j = i64::from(self.spin);
        let jn = j + 1;
        let (old, new) = ((2 * j + 1) as usize, (2 * jn + 1) as usize);
        let ln_fact = LnFactorials::up_to(2 * jn as usize);
        let r = |jj: i64, m: i64| ((jj * jj - m * m) as f64).max(0.0).sqrt();
        let jf = j as f64;

        self.scratch.clear();
        self.scratch.resize(new * new, 0.0);
        for c in 0..new {
            let m = c as i64 - jn;
            for row in 0..new {
                let mp = row as i64 - jn;
                let value = if m.abs() == jn || mp.abs() == jn {
                    self.border(&ln_fact, jn, mp, m)
                } else {
                    let cur = self.current[(m + j) as usize * old + (mp + j) as usize];
                    let denom = r(jn, mp) * r(jn, m);
                    let lead = if j == 0 {
                        self.cos_beta
                    } else {
                        self.cos_beta - (mp * m) as f64 / (jf * (jf + 1.0))
                    };
                    let mut v = (jf + 1.0) * (2.0 * jf + 1.0) / denom * lead * cur;
                    if mp.abs() < j && m.abs() < j {
                        let prev_dim = (2 * j - 1) as usize;
                        let prev = self.previous[(m + j - 1) as usize * prev_dim + (mp + j - 1) as usize];
                        v -= (jf + 1.0) * r(j, mp) * r(j, m) / (jf * denom) * prev;
                    }
                    v
                };
                self.scratch[c * new + row] = value;
            }
        }
        std::mem::swap(&mut self.previous, &mut self.current);
        std::mem::swap(&mut self.current, &mut self.scratch);
        self.spin += 1;
    }

    /// Advances to spin `s`. Panics if the ladder is already past it.
    pub fn advance_to_spin(&mut self, s: u32) {
        assert!(self.spin <= s, "ladder is past spin {s}");
        while self.spin < s {
            self.step();
        }
    }
}

struct LnFactorials(Vec<f64>);

impl LnFactorials {
    fn up_to(n: usize) -> Self {
        Self(ln_factorials(n))
    }

    fn get(&self, k: i64) -> f64 {
        self.0[k as usize]
    }
}

pub fn irrep(gate: &ProjectiveGate, s: u32) -> IrrepMatrix {
    let mut ladder = IrrepLadder::new(gate);
    ladder.advance_to_spin(s);
    IrrepMatrix {
        spin: s,
        entries: ladder.matrix(),
    }
}

/// `tr pi_s(U)`.
pub fn character(gate: &ProjectiveGate, s: u32) -> Complex64 {
    irrep(gate, s).entries.trace()
}

/// Number of spin-`s` copies in `U^{t,t}`, equivalently in `(1/2)^{⊗2t}`:
/// `C(2t, t-s) - C(2t, t-s-1)`.
pub fn irrep_multiplicity(s: u32, t: u32) -> Result<BigUint> {
    if s > t {
        return Err(Error::OutOfRange { spin: s, t });
    }
    let n = 2 * u64::from(t);
    let k = u64::from(t - s);
    let hi = binomial(n, k);
    let lo = if k == 0 { BigUint::from(0u32) } else { binomial(n, k - 1) };
    Ok(hi - lo)
}

fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    (0..k).fold(BigUint::from(1u32), |acc, i| acc * (n - i) / (i + 1))
}

/// Natural log of [`irrep_multiplicity`], via
/// `m_s = C(2t, t-s) (2s+1) / (t+s+1)` and accumulated log-factorials.
pub fn ln_irrep_multiplicity(s: u32, t: u32) -> Result<f64> {
    if s > t {
        return Err(Error::OutOfRange { spin: s, t });
    }
    let ln_fact = ln_factorials(2 * t as usize);
    Ok(ln_multiplicity_with(&ln_fact, s, t))
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

fn ln_multiplicity_with(ln_fact: &[f64], s: u32, t: u32) -> f64 {
    let (s, t) = (s as usize, t as usize);
    let ln_binom = ln_fact[2 * t] - ln_fact[t - s] - ln_fact[t + s];
    ln_binom + ((2 * s + 1) as f64).ln() - ((t + s + 1) as f64).ln()
}

/// Weight assigned to each singular value of block `s` (index `s - 1`) when the
/// spectrum of the full moment operator restricted to the nontrivial blocks is
/// normalized to one: `m_s / sum_{s' >= 1} m_{s'} (2s'+1)`.
pub fn multiplicity_weights(t: u32) -> Vec<f64> {
    let ln_fact = ln_factorials(2 * t as usize);
    let ln_m: Vec<f64> = (1..=t).map(|s| ln_multiplicity_with(&ln_fact, s, t)).collect();
    let ln_mass: Vec<f64> = ln_m
        .iter()
        .zip(1..=t)
        .map(|(lm, s)| lm + f64::from(2 * s + 1).ln())
        .collect();
    let peak = ln_mass.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ln_total = peak + ln_mass.iter().map(|x| (x - peak).exp()).sum::<f64>().ln();
    ln_m.iter().map(|lm| (lm - ln_total).exp()).collect()
}
