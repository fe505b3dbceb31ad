use serde::{Deserialize, Serialize};

use super::{projective_equal, ProjectiveGate, EQ_TOL};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProvenanceKind {
    #[default]
    Explicit,
    Generators,
    Closure,
    Derived,
    Haar,
    GroupCompletion,
    FixedCompletion,
    File,
}

/// How a gate set was constructed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default)]
    pub kind: ProvenanceKind,
    /// Order of the random gates, `None` for infinite order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member: Option<u64>,
    /// Free-form source description (group name, file path, gate name).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl Provenance {
    pub fn of_kind(kind: ProvenanceKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }
}

/// Ordered multiset of gates carrying the uniform measure (weight `1/len` per entry).
#[derive(Clone, Debug, PartialEq)]
pub struct GateSet {
    gates: Vec<ProjectiveGate>,
    label: String,
    provenance: Provenance,
}

impl GateSet {
    pub fn new(
        gates: Vec<ProjectiveGate>,
        label: impl Into<String>,
        provenance: Provenance,
    ) -> Result<Self> {
        if gates.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self {
            gates,
            label: label.into(),
            provenance,
        })
    }

    pub fn gates(&self) -> &[ProjectiveGate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn iter(&self) -> impl Iterator<Item = &ProjectiveGate> {
        self.gates.iter()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Index of the first element projectively equal to `g`.
    pub fn position(&self, g: &ProjectiveGate, tol: f64) -> Option<usize> {
        self.gates.iter().position(|h| projective_equal(h, g, tol))
    }

    /// Appends `g`, keeping the label and provenance.
    pub fn with_gate(mut self, g: ProjectiveGate) -> Self {
        self.gates.push(g);
        self
    }

    /// Every element replaced by its inverse.
    pub fn inverted(&self) -> Self {
        Self {
            gates: self.gates.iter().map(ProjectiveGate::adjoint).collect(),
            label: format!("{}^-1", self.label),
            provenance: self.provenance.clone(),
        }
    }

    /// Every element replaced by `v g v^dagger`.
    pub fn conjugated_by(&self, v: &ProjectiveGate) -> Self {
        Self {
            gates: self.gates.iter().map(|g| g.conjugate_by(v)).collect(),
            label: self.label.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Number of projectively distinct entries.
    pub fn distinct_count(&self, tol: f64) -> usize {
        let mut seen: Vec<ProjectiveGate> = Vec::new();
        for g in &self.gates {
            if !seen.iter().any(|h| projective_equal(h, g, tol)) {
                seen.push(*g);
            }
        }
        seen.len()
    }
}

/// The conjugates `{c T c^dagger : c in C}` in the order of `group`, duplicates kept.
pub fn derived_set(group: &GateSet, t: &ProjectiveGate) -> Result<GateSet> {
    if group.position(t, EQ_TOL).is_some() {
        return Err(Error::TInGroup);
    }
    let gates = group.gates.iter().map(|c| t.conjugate_by(c)).collect();
    let provenance = Provenance {
        kind: ProvenanceKind::Derived,
        ..group.provenance.clone()
    };
    GateSet::new(gates, format!("{}_T", group.label), provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{clifford_group, haar_sample, p_gate};
    use crate::rng::{purpose, stream};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn empty_set_is_rejected() {
        assert!(matches!(
            GateSet::new(vec![], "x", Provenance::default()),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn trivial_group_derives_t_itself() {
        let trivial =
            GateSet::new(vec![ProjectiveGate::identity()], "I", Provenance::default()).unwrap();
        let t = p_gate(FRAC_PI_4);
        let d = derived_set(&trivial, &t).unwrap();
        assert_eq!(d.len(), 1);
        assert!(projective_equal(&d.gates()[0], &t, 1e-12));
    }

    #[test]
    fn clifford_conjugates_of_generic_gate_are_distinct() {
        let cliff = clifford_group();
        let mut rng = stream(9, purpose::GATE, 0);
        let t = haar_sample(&mut rng);
        let d = derived_set(&cliff, &t).unwrap();
        assert_eq!(d.len(), 24);
        assert_eq!(d.distinct_count(EQ_TOL), 24);
    }

    #[test]
    fn clifford_conjugates_of_p4_repeat() {
        let cliff = clifford_group();
        let d = derived_set(&cliff, &p_gate(FRAC_PI_4)).unwrap();
        assert_eq!(d.len(), 24);
        // the four z-rotations in the Clifford group fix P(pi/4); six distinct conjugates
        assert_eq!(d.distinct_count(EQ_TOL), 6);
    }

    #[test]
    fn group_element_is_rejected_as_completion() {
        let cliff = clifford_group();
        let s = cliff.gates()[5];
        assert!(matches!(derived_set(&cliff, &s), Err(Error::TInGroup)));
    }
}
