use std::collections::HashMap;

use super::{projective_equal, GateSet, ProjectiveGate, Provenance, ProvenanceKind, EQ_TOL};
use crate::error::{Error, Result};

/// Hash index over projective gates: candidates are bucketed by their
/// grid-rounded canonical entries and confirmed with [`projective_equal`].
#[derive(Debug, Default)]
pub struct GateIndex {
    buckets: HashMap<[i64; 4], Vec<usize>>,
    gates: Vec<ProjectiveGate>,
}

impl GateIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_gates(gates: &[ProjectiveGate]) -> Self {
        let mut index = Self::new();
        for g in gates {
            index.insert(*g);
        }
        index
    }

    pub fn find(&self, g: &ProjectiveGate) -> Option<usize> {
        self.buckets
            .get(&g.hash_key())?
            .iter()
            .copied()
            .find(|&i| projective_equal(&self.gates[i], g, EQ_TOL))
    }

    /// Inserts `g` unless already present; returns its index and whether it was new.
    pub fn insert(&mut self, g: ProjectiveGate) -> (usize, bool) {
        if let Some(i) = self.find(&g) {
            return (i, false);
        }
        let i = self.gates.len();
        self.gates.push(g);
        self.buckets.entry(g.hash_key()).or_default().push(i);
        (i, true)
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn into_gates(self) -> Vec<ProjectiveGate> {
        self.gates
    }
}

/// Breadth-first closure of `generators` under multiplication.
///
/// Elements are listed in discovery order starting from the identity; each
/// discovered element is right-multiplied by every generator in turn.
pub fn group_closure(generators: &[ProjectiveGate], cap: usize) -> Result<GateSet> {
    if generators.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut index = GateIndex::new();
    index.insert(ProjectiveGate::identity());
    let mut cursor = 0;
    while cursor < index.len() {
        let element = index.gates[cursor];
        for g in generators {
            let (_, fresh) = index.insert(element * *g);
            if fresh && index.len() > cap {
                return Err(Error::CapExceeded { cap });
            }
        }
        cursor += 1;
    }
    if index.len() > cap {
        return Err(Error::CapExceeded { cap });
    }
    GateSet::new(
        index.into_gates(),
        "closure",
        Provenance::of_kind(ProvenanceKind::Closure),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{clifford_generators, haar_sample, hurwitz_generators, p_gate};
    use crate::rng::{purpose, stream};
    use std::f64::consts::FRAC_PI_4;

    fn assert_closed(set: &GateSet) {
        let index = GateIndex::from_gates(set.gates());
        for a in set.iter() {
            for b in set.iter() {
                assert!(index.find(&(*a * *b)).is_some());
            }
        }
    }

    #[test]
    fn clifford_has_24_elements() {
        let c = group_closure(&clifford_generators(), 1000).unwrap();
        assert_eq!(c.len(), 24);
        assert_closed(&c);
        assert_eq!(c.gates()[0], ProjectiveGate::identity());
    }

    #[test]
    fn hurwitz_has_12_elements() {
        let h = group_closure(&hurwitz_generators(), 1000).unwrap();
        assert_eq!(h.len(), 12);
        assert_closed(&h);
    }

    #[test]
    fn p4_generates_cyclic_group_of_order_8() {
        let g = group_closure(&[p_gate(FRAC_PI_4)], 100).unwrap();
        assert_eq!(g.len(), 8);
        assert_closed(&g);
    }

    #[test]
    fn infinite_group_hits_cap() {
        let mut rng = stream(1, purpose::GATE, 0);
        let g = haar_sample(&mut rng);
        assert!(matches!(
            group_closure(&[g], 50),
            Err(Error::CapExceeded { cap: 50 })
        ));
    }

    #[test]
    fn closure_order_is_deterministic() {
        let a = group_closure(&clifford_generators(), 100).unwrap();
        let b = group_closure(&clifford_generators(), 100).unwrap();
        assert_eq!(a, b);
    }
}
