//! Built-in groups and distinguished completion gates. All matrices are given
//! unnormalized and pass through [`normalize_to_projective`].

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, SQRT_2};

use super::{
    group_closure, normalize_to_projective, GateSet, Mat2, ProjectiveGate, Provenance,
    ProvenanceKind,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn gate(m: Mat2) -> ProjectiveGate {
    normalize_to_projective(&m).expect("built-in matrix is proportional to a unitary")
}

/// Phase gate `diag(1, e^{i theta})`.
pub fn p_gate(theta: f64) -> ProjectiveGate {
    gate([[c(1., 0.), c(0., 0.)], [c(0., 0.), Complex64::from_polar(1.0, theta)]])
}

/// `diag(1, i)` and `[[1, 1], [-1, 1]]`.
pub fn clifford_generators() -> Vec<ProjectiveGate> {
    vec![
        gate([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 1.)]]),
        gate([[c(1., 0.), c(1., 0.)], [c(-1., 0.), c(1., 0.)]]),
    ]
}

/// `diag(i, -i)` and `[[1, 1], [i, -i]]`.
pub fn hurwitz_generators() -> Vec<ProjectiveGate> {
    vec![
        gate([[c(0., 1.), c(0., 0.)], [c(0., 0.), c(0., -1.)]]),
        gate([[c(1., 0.), c(1., 0.)], [c(0., 1.), c(0., -1.)]]),
    ]
}

/// Order-2 completion of the Clifford group.
pub fn t24() -> ProjectiveGate {
    gate([
        [c(-1. - SQRT_2, 0.), c(2. - SQRT_2, 1.)],
        [c(2. - SQRT_2, -1.), c(1. + SQRT_2, 0.)],
    ])
}

/// Order-2 completion of the Hurwitz group: the pi rotation about `(1, 1, 3)/sqrt(11)`.
pub fn t12() -> ProjectiveGate {
    gate([[c(3., 0.), c(1., -1.)], [c(1., 1.), c(-3., 0.)]])
}

pub fn clifford_group() -> GateSet {
    group_closure(&clifford_generators(), 64)
        .expect("Clifford group is finite")
        .with_label("clifford")
        .with_provenance(Provenance::of_kind(ProvenanceKind::Generators).with_source("clifford"))
}

pub fn hurwitz_group() -> GateSet {
    group_closure(&hurwitz_generators(), 64)
        .expect("Hurwitz group is finite")
        .with_label("hurwitz")
        .with_provenance(Provenance::of_kind(ProvenanceKind::Generators).with_source("hurwitz"))
}

/// Named gate lookup used by the command line: `p4`, `p3/4`, `t24`, `t12`, `identity`.
pub fn named_gate(name: &str) -> Option<ProjectiveGate> {
    match name.to_ascii_lowercase().as_str() {
        "p4" | "t" | "p(pi/4)" => Some(p_gate(FRAC_PI_4)),
        "p3/4" | "p(3pi/4)" => Some(p_gate(3.0 * FRAC_PI_4)),
        "t24" => Some(t24()),
        "t12" => Some(t12()),
        "identity" | "i" => Some(ProjectiveGate::identity()),
        _ => None,
    }
}

/// Named group lookup: `clifford` or `hurwitz`.
pub fn named_group(name: &str) -> Option<GateSet> {
    match name.to_ascii_lowercase().as_str() {
        "clifford" => Some(clifford_group()),
        "hurwitz" => Some(hurwitz_group()),
        _ => None,
    }
}

/// Catalog of the built-in generators and gates.
#[derive(Clone, Debug)]
pub struct NamedConstants {
    pub clifford_generators: Vec<ProjectiveGate>,
    pub hurwitz_generators: Vec<ProjectiveGate>,
    pub p_pi_4: ProjectiveGate,
    pub t24: ProjectiveGate,
    pub t12: ProjectiveGate,
}

impl NamedConstants {
    pub fn new() -> Self {
        Self {
            clifford_generators: clifford_generators(),
            hurwitz_generators: hurwitz_generators(),
            p_pi_4: p_gate(FRAC_PI_4),
            t24: t24(),
            t12: t12(),
        }
    }
}

impl Default for NamedConstants {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::projective_equal;

    #[test]
    fn t12_axis() {
        let (axis, angle) = t12().axis_angle();
        let n = 11f64.sqrt();
        let expect = [1.0 / n, 1.0 / n, 3.0 / n];
        let sign = axis[2].signum();
        for k in 0..3 {
            assert!((sign * axis[k] - expect[k]).abs() < 1e-10);
        }
        assert!((angle - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn p_gate_is_z_rotation() {
        let p = p_gate(FRAC_PI_4);
        let r = ProjectiveGate::rotation([0.0, 0.0, 1.0], FRAC_PI_4);
        assert!(projective_equal(&p, &r, 1e-12));
        let e = p.entries();
        let f = r.entries();
        for k in 0..4 {
            assert!((e[k] - f[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn t24_squares_to_identity() {
        let sq = t24() * t24();
        assert!(projective_equal(&sq, &ProjectiveGate::identity(), 1e-12));
        assert!(!projective_equal(&t24(), &ProjectiveGate::identity(), 1e-3));
    }

    #[test]
    fn lookups() {
        assert!(named_gate("P4").is_some());
        assert!(named_gate("nope").is_none());
        assert_eq!(named_group("clifford").unwrap().len(), 24);
        assert_eq!(named_group("Hurwitz").unwrap().len(), 12);
        assert!(named_group("e8").is_none());
    }
}
