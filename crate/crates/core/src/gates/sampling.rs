use rand::Rng;
use rand_distr::StandardNormal;

use super::ProjectiveGate;
use crate::error::{Error, Result};

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Uniform point on the unit sphere.
pub fn random_axis<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if len > 1e-12 {
            return [v[0] / len, v[1] / len, v[2] / len];
        }
    }
}

/// Haar-distributed element of PU(2): a normalized 4-vector of standard
/// Gaussians read as a unit quaternion.
pub fn haar_sample<R: Rng + ?Sized>(rng: &mut R) -> ProjectiveGate {
    loop {
        let q: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let len = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-12 {
            return ProjectiveGate::from_quaternion(q.map(|x| x / len));
        }
    }
}

/// Rotation by `2 pi k / r` about a uniform random axis, with `k` uniform over
/// `{1 <= k <= r/2 : gcd(k, r) = 1}`. The result has projective order exactly `r`.
pub fn finite_order_sample<R: Rng + ?Sized>(rng: &mut R, r: u32) -> Result<ProjectiveGate> {
    if r < 2 {
        return Err(Error::InvalidOrder(r));
    }
    let residues = coprime_residues(r);
    let k = residues[rng.random_range(0..residues.len())];
    let axis = random_axis(rng);
    let angle = 2.0 * std::f64::consts::PI * f64::from(k) / f64::from(r);
    Ok(ProjectiveGate::rotation(axis, angle))
}

/// Coprime residues `k <= r/2` used by [`finite_order_sample`].
pub fn coprime_residues(r: u32) -> Vec<u32> {
    (1..=r / 2).filter(|&k| gcd(k, r) == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::projective_order;
    use crate::rng::{purpose, stream};
    use std::f64::consts::PI;

    #[test]
    fn haar_first_and_second_moments() {
        let mut rng = stream(2024, purpose::GATE, 0);
        let n = 100_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let g = haar_sample(&mut rng);
            // random sign of the SU(2) lift; the first moment is over SU(2)
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            m1 += sign * g.trace() / 2.0;
            m2 += g.trace() * g.trace() / 4.0;
        }
        assert!((m1 / n as f64).abs() < 0.01);
        assert!((m2 / n as f64 - 0.25).abs() < 0.01);
    }

    #[test]
    fn haar_is_deterministic_per_seed() {
        let a = haar_sample(&mut stream(42, purpose::GATE, 0));
        let b = haar_sample(&mut stream(42, purpose::GATE, 0));
        assert_eq!(a, b);
    }

    #[test]
    fn finite_order_samples_have_exact_order() {
        let mut rng = stream(8, purpose::GATE, 0);
        for r in [2u32, 3, 5, 8, 12] {
            for _ in 0..100 {
                let g = finite_order_sample(&mut rng, r).unwrap();
                assert_eq!(projective_order(&g, 100), Some(r));
            }
        }
    }

    #[test]
    fn order_two_is_a_half_turn() {
        let mut rng = stream(1, purpose::GATE, 0);
        let (_, angle) = finite_order_sample(&mut rng, 2).unwrap().axis_angle();
        assert!((angle - PI).abs() < 1e-12);
    }

    #[test]
    fn order_eight_uses_both_forms() {
        let mut rng = stream(1, purpose::GATE, 0);
        let mut seen = [0usize; 2];
        for _ in 0..200 {
            let (_, angle) = finite_order_sample(&mut rng, 8).unwrap().axis_angle();
            if (angle - PI / 4.0).abs() < 1e-9 {
                seen[0] += 1;
            } else if (angle - 3.0 * PI / 4.0).abs() < 1e-9 {
                seen[1] += 1;
            } else {
                panic!("unexpected angle {angle}");
            }
        }
        assert!(seen[0] > 60 && seen[1] > 60);
    }

    #[test]
    fn invalid_order() {
        let mut rng = stream(1, purpose::GATE, 0);
        assert!(matches!(finite_order_sample(&mut rng, 1), Err(Error::InvalidOrder(1))));
        assert_eq!(coprime_residues(8), vec![1, 3]);
    }
}
