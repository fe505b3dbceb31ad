//! Single-qubit gates modulo global phase.
//!
//! A [`ProjectiveGate`] stores the SU(2) representative
//!
//! ```text
//! U = [[ a, b],
//!      [-b*, a*]]      |a|^2 + |b|^2 = 1
//! ```
//!
//! with the sign of `(a, b)` fixed by a canonical rule, so that `U` and `-U`
//! (the same element of PU(2)) have identical storage. The Bloch-sphere rotation
//! by angle `phi` about the unit axis `n` is `cos(phi/2) I - i sin(phi/2) n.sigma`.

mod closure;
mod named;
mod sampling;
mod set;
mod words;

pub use closure::{group_closure, GateIndex};
pub use named::{
    clifford_generators, clifford_group, hurwitz_generators, hurwitz_group, named_gate,
    named_group, p_gate, t12, t24, NamedConstants,
};
pub use sampling::{coprime_residues, finite_order_sample, haar_sample, random_axis};
pub use set::{derived_set, GateSet, Provenance, ProvenanceKind};
pub use words::{rewrite_to_derived, Letter, Word};

use num_complex::Complex64;
use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};

/// Relative tolerance for `M M^dagger = c I` in [`normalize_to_projective`].
pub const UNITARITY_TOL: f64 = 1e-9;
/// Default tolerance for projective equality and order detection.
pub const EQ_TOL: f64 = 1e-9;

const SIGNIFICANT: f64 = 1e-9;
const ZERO_RE: f64 = 1e-12;
const GRID: f64 = 1e-9;

/// Row-major 2x2 complex matrix.
pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Clone, Copy, PartialEq)]
pub struct ProjectiveGate {
    a: Complex64,
    b: Complex64,
}

fn is_positive(z: Complex64) -> bool {
    if z.re.abs() <= ZERO_RE {
        z.im > 0.0
    } else {
        z.re > 0.0
    }
}

impl ProjectiveGate {
    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// Builds a gate from the first row `(a, b)` of an SU(2) matrix, renormalizing
    /// `|a|^2 + |b|^2` to one and applying the canonical sign.
    pub(crate) fn from_su2_row(a: Complex64, b: Complex64) -> Self {
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (mut a, mut b) = (a / norm, b / norm);
        let lead = if a.norm() > SIGNIFICANT { a } else { b };
        if !is_positive(lead) {
            a = -a;
            b = -b;
        }
        Self { a, b }
    }

    /// Unit quaternion `(q0, q1, q2, q3)` to the gate `q0 I - i (q1 X + q2 Y + q3 Z)`.
    pub fn from_quaternion(q: [f64; 4]) -> Self {
        Self::from_su2_row(Complex64::new(q[0], -q[3]), Complex64::new(-q[2], -q[1]))
    }

    /// Bloch-sphere rotation by `angle` about `axis` (normalized internally).
    pub fn rotation(axis: [f64; 3], angle: f64) -> Self {
        let len = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let (s, c) = (angle / 2.0).sin_cos();
        Self::from_quaternion([c, s * axis[0] / len, s * axis[1] / len, s * axis[2] / len])
    }

    /// Quaternion of the canonical representative.
    pub fn quaternion(&self) -> [f64; 4] {
        [self.a.re, -self.b.im, -self.b.re, -self.a.im]
    }

    pub fn matrix(&self) -> Mat2 {
        [[self.a, self.b], [-self.b.conj(), self.a.conj()]]
    }

    /// Entries in scan order (0,0), (0,1), (1,0), (1,1).
    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, -self.b.conj(), self.a.conj()]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_su2_row(self.a.conj(), -self.b)
    }

    /// `c . self . c^dagger`
    pub fn conjugate_by(&self, c: &ProjectiveGate) -> Self {
        *c * *self * c.adjoint()
    }

    /// Real trace of the SU(2) representative (sign is representative-dependent).
    pub fn trace(&self) -> f64 {
        2.0 * self.a.re
    }

    /// Rotation axis and angle in `[0, pi]`. The axis of the identity is `(0, 0, 1)`.
    pub fn axis_angle(&self) -> ([f64; 3], f64) {
        let q = self.quaternion();
        let sign = if q[0] < 0.0 { -1.0 } else { 1.0 };
        let v = [sign * q[1], sign * q[2], sign * q[3]];
        let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let angle = 2.0 * len.atan2(q[0].abs());
        if len < 1e-15 {
            ([0.0, 0.0, 1.0], angle)
        } else {
            ([v[0] / len, v[1] / len, v[2] / len], angle)
        }
    }

    pub fn distance(&self, other: &ProjectiveGate) -> f64 {
        projective_distance(self, other)
    }

    pub fn approx_eq(&self, other: &ProjectiveGate, tol: f64) -> bool {
        projective_equal(self, other, tol)
    }

    pub fn pow(&self, m: u32) -> Self {
        let mut acc = Self::identity();
        for _ in 0..m {
            acc = acc * *self;
        }
        acc
    }

    /// Canonical entries `(a, b)` rounded to a `1e-9` grid.
    pub fn hash_key(&self) -> [i64; 4] {
        let q = |x: f64| (x / GRID).round() as i64;
        [q(self.a.re), q(self.a.im), q(self.b.re), q(self.b.im)]
    }

    /// Checks the stored-matrix invariants: unitarity, unit determinant and
    /// canonical sign.
    pub fn check_invariants(&self) -> bool {
        let m = self.matrix();
        let mut dev: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    s += m[i][k] * m[j][k].conj();
                }
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((s - target).norm());
            }
        }
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let lead = self
            .entries()
            .into_iter()
            .find(|z| z.norm() > SIGNIFICANT)
            .unwrap_or_default();
        dev <= 1e-12 && (det - 1.0).norm() <= 1e-12 && is_positive(lead)
    }
}

impl Mul for ProjectiveGate {
    type Output = ProjectiveGate;

    fn mul(self, rhs: ProjectiveGate) -> ProjectiveGate {
        // [[a, b], [-b*, a*]] . [[c, d], [-d*, c*]]
        let (a, b, c, d) = (self.a, self.b, rhs.a, rhs.b);
        ProjectiveGate::from_su2_row(a * c - b * d.conj(), a * d + b * c.conj())
    }
}

impl fmt::Debug for ProjectiveGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProjectiveGate[[{}, {}], [{}, {}]]", self.a, self.b, -self.b.conj(), self.a.conj())
    }
}

/// Normalizes a matrix proportional to a unitary to its canonical SU(2)
/// representative.
pub fn normalize_to_projective(m: &Mat2) -> Result<ProjectiveGate> {
    let mut mmh = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in mmh.iter_mut().enumerate() {
        for (j, out) in row.iter_mut().enumerate() {
            *out = m[i][0] * m[j][0].conj() + m[i][1] * m[j][1].conj();
        }
    }
    let c = 0.5 * (mmh[0][0].re + mmh[1][1].re);
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::SingularInput);
    }
    let deviation = [
        (mmh[0][0] - c).norm(),
        (mmh[1][1] - c).norm(),
        mmh[0][1].norm(),
        mmh[1][0].norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
        / c;
    if deviation > UNITARITY_TOL {
        return Err(Error::NotProportionalToUnitary { deviation });
    }
    let scale = c.sqrt();
    let u: Vec<Complex64> = [m[0][0], m[0][1], m[1][0], m[1][1]]
        .iter()
        .map(|z| z / scale)
        .collect();
    let det = u[0] * u[3] - u[1] * u[2];
    let root = det.sqrt();
    let (u00, u01, u10, u11) = (u[0] / root, u[1] / root, u[2] / root, u[3] / root);
    // project onto the SU(2) form [[a, b], [-b*, a*]]
    let a = 0.5 * (u00 + u11.conj());
    let b = 0.5 * (u01 - u10.conj());
    Ok(ProjectiveGate::from_su2_row(a, b))
}

/// `min_phi ||U - e^{i phi} V||` in closed form.
///
/// With `W = U V^dagger` having eigenvalues `e^{+-i theta}`, the projective
/// half-angle is `min(theta, pi - theta)` and the distance is twice its half sine.
/// The half-angle is taken from `atan2` on the quaternion of `W` so that small
/// distances keep full relative precision.
pub fn projective_distance(u: &ProjectiveGate, v: &ProjectiveGate) -> f64 {
    let w = *u * v.adjoint();
    let q = w.quaternion();
    let vec = (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    let half = vec.atan2(q[0].abs());
    2.0 * (half / 2.0).sin()
}

/// `|tr(U^dagger V)| >= 2 - tol`.
pub fn projective_equal(u: &ProjectiveGate, v: &ProjectiveGate, tol: f64) -> bool {
    let w = u.adjoint() * *v;
    w.trace().abs() >= 2.0 - tol
}

/// Smallest `m <= max_order` with `U^m` equal to the identity in PU(2), or `None`.
///
/// The identity test uses `projective_distance(U^m, I) <= EQ_TOL`.
pub fn projective_order(u: &ProjectiveGate, max_order: u32) -> Option<u32> {
    let id = ProjectiveGate::identity();
    let mut acc = id;
    for m in 1..=max_order {
        acc = acc * *u;
        if projective_distance(&acc, &id) <= EQ_TOL {
            return Some(m);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{purpose, stream};
    use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> ProjectiveGate {
        normalize_to_projective(&[[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]).unwrap()
    }

    #[test]
    fn identity_normalizes_to_identity() {
        let id = normalize_to_projective(&[[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]]).unwrap();
        assert_eq!(id, ProjectiveGate::identity());
        assert!(id.check_invariants());
    }

    #[test]
    fn t12_matrix_is_sqrt11_multiple_of_unitary() {
        let m = [[c(3., 0.), c(1., -1.)], [c(1., 1.), c(-3., 0.)]];
        // M M^dagger = 11 I by direct multiplication
        for i in 0..2 {
            for j in 0..2 {
                let s = m[i][0] * m[j][0].conj() + m[i][1] * m[j][1].conj();
                let target = if i == j { 11.0 } else { 0.0 };
                assert!((s - target).norm() < 1e-14);
            }
        }
        let g = normalize_to_projective(&m).unwrap();
        assert!(g.check_invariants());
        // proportional to M / sqrt(11)
        let e = g.entries();
        let raw = [m[0][0], m[0][1], m[1][0], m[1][1]].map(|z| z / 11f64.sqrt());
        let phase = e[0] / raw[0];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        for k in 0..4 {
            assert!((e[k] - phase * raw[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn p_pi_4_normalizes_to_z_rotation() {
        // diag(1, 1 + i) is only proportional to a unitary after 1 + i -> (1 + i)/sqrt(2)
        let literal = [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 1.)]];
        assert!(matches!(
            normalize_to_projective(&literal),
            Err(Error::NotProportionalToUnitary { .. })
        ));
        let g = normalize_to_projective(&[
            [c(1., 0.), c(0., 0.)],
            [c(0., 0.), c(1. / SQRT_2, 1. / SQRT_2)],
        ])
        .unwrap();
        let e = g.entries();
        assert!((e[0] - Complex64::from_polar(1.0, -PI / 8.0)).norm() < 1e-12);
        assert!((e[3] - Complex64::from_polar(1.0, PI / 8.0)).norm() < 1e-12);
        assert!(e[1].norm() < 1e-15 && e[2].norm() < 1e-15);
        assert!(g.check_invariants());
    }

    #[test]
    fn normalize_rejects_bad_input() {
        let zero = [[c(0., 0.); 2]; 2];
        assert!(matches!(normalize_to_projective(&zero), Err(Error::SingularInput)));
        let skew = [[c(1., 0.), c(1., 0.)], [c(0., 0.), c(1., 0.)]];
        assert!(matches!(
            normalize_to_projective(&skew),
            Err(Error::NotProportionalToUnitary { .. })
        ));
    }

    #[test]
    fn distance_identity_to_x_is_sqrt2() {
        let id = ProjectiveGate::identity();
        let x = pauli_x();
        assert!((projective_distance(&id, &x) - SQRT_2).abs() < 1e-14);
        assert_eq!(projective_distance(&x, &x), 0.0);
    }

    fn grid_distance(u: &ProjectiveGate, v: &ProjectiveGate, samples: usize) -> f64 {
        let (mu, mv) = (u.matrix(), v.matrix());
        let mut best = f64::INFINITY;
        for k in 0..samples {
            let phase = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / samples as f64);
            let d = [
                [mu[0][0] - phase * mv[0][0], mu[0][1] - phase * mv[0][1]],
                [mu[1][0] - phase * mv[1][0], mu[1][1] - phase * mv[1][1]],
            ];
            // largest singular value of a 2x2 matrix
            let fro = d.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>();
            let det = (d[0][0] * d[1][1] - d[0][1] * d[1][0]).norm();
            let disc = (fro * fro - 4.0 * det * det).max(0.0).sqrt();
            best = best.min(((fro + disc) / 2.0).sqrt());
        }
        best
    }

    #[test]
    fn closed_form_distance_matches_grid_minimization() {
        let mut rng = stream(11, purpose::GATE, 0);
        let x = pauli_x();
        assert!((grid_distance(&ProjectiveGate::identity(), &x, 100_000) - SQRT_2).abs() < 1e-4);
        for _ in 0..100 {
            let u = haar_sample(&mut rng);
            let v = haar_sample(&mut rng);
            let oracle = grid_distance(&u, &v, 100_000);
            assert!((projective_distance(&u, &v) - oracle).abs() < 1e-4);
        }
    }

    #[test]
    fn projective_equality_cases() {
        let mut rng = stream(3, purpose::GATE, 0);
        let u = haar_sample(&mut rng);
        // -U has the same canonical storage
        let neg = ProjectiveGate::from_su2_row(-u.a, -u.b);
        assert!(projective_equal(&u, &neg, 1e-9));
        assert!(!projective_equal(&ProjectiveGate::identity(), &pauli_x(), 1e-9));
        // tiny unit-norm perturbation times a phase
        for k in 0..20 {
            let e = haar_sample(&mut rng).matrix();
            let phase = Complex64::from_polar(1.0, 0.3 * k as f64);
            let m = u.matrix();
            let mut p = [[Complex64::new(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    let mut s = m[i][j];
                    for l in 0..2 {
                        s += 1e-13 * m[i][l] * e[l][j];
                    }
                    p[i][j] = phase * s;
                }
            }
            let v = normalize_to_projective(&p).unwrap();
            assert!(projective_equal(&u, &v, 1e-9));
        }
    }

    #[test]
    fn orders_of_named_gates() {
        assert_eq!(projective_order(&p_gate(FRAC_PI_4), 100), Some(8));
        assert_eq!(projective_order(&t24(), 100), Some(2));
        assert_eq!(projective_order(&t12(), 100), Some(2));
        assert_eq!(projective_order(&ProjectiveGate::identity(), 5), Some(1));
    }

    #[test]
    fn haar_gates_have_no_small_order() {
        let mut rng = stream(5, purpose::GATE, 0);
        for _ in 0..100 {
            let g = haar_sample(&mut rng);
            assert_eq!(projective_order(&g, 10_000), None);
        }
    }

    #[test]
    fn rotation_round_trips_through_axis_angle() {
        let g = ProjectiveGate::rotation([1.0, -2.0, 0.5], 2.0);
        let (axis, angle) = g.axis_angle();
        let n = (1.0f64 + 4.0 + 0.25).sqrt();
        assert!((angle - 2.0).abs() < 1e-12);
        assert!((axis[0] - 1.0 / n).abs() < 1e-12);
        assert!((axis[1] + 2.0 / n).abs() < 1e-12);
        assert!((axis[2] - 0.5 / n).abs() < 1e-12);
    }
}
