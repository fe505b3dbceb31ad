//! File formats: gate-set JSON and the CSV/JSON writers for every result type.
//!
//! Gate matrices are stored as `[[[re, im], [re, im]], [[re, im], [re, im]]]`
//! (row-major). Loaded matrices need only be proportional to a unitary.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::{Histogram, RunResult};
use crate::error::{Error, Result};
use crate::gates::{normalize_to_projective, GateSet, ProjectiveGate, Provenance, ProvenanceKind};
use crate::moments::{DeltaProfile, SpectrumSample};
use crate::overhead::{csv_field, fmt_f64, KmDensity, OverheadReport, NO_GAP_TOL};

pub type MatrixJson = [[[f64; 2]; 2]; 2];

pub fn gate_to_json(g: &ProjectiveGate) -> MatrixJson {
    g.matrix().map(|row| row.map(|z| [z.re, z.im]))
}

pub fn gate_from_json(m: &MatrixJson) -> Result<ProjectiveGate> {
    if m.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Format("non-finite matrix entry".into()));
    }
    normalize_to_projective(&m.map(|row| row.map(|[re, im]| Complex64::new(re, im))))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateSetFile {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub provenance: Provenance,
    pub gates: Vec<MatrixJson>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GateSetInput {
    Full(GateSetFile),
    Bare(Vec<MatrixJson>),
    Single(MatrixJson),
}

impl GateSetFile {
    pub fn from_set(set: &GateSet) -> Self {
        Self {
            label: Some(set.label().to_string()),
            provenance: set.provenance().clone(),
            gates: set.iter().map(gate_to_json).collect(),
        }
    }

    pub fn into_set(self, default_label: &str) -> Result<GateSet> {
        let gates = self
            .gates
            .iter()
            .enumerate()
            .map(|(i, m)| gate_from_json(m).map_err(|e| Error::Format(format!("gate {i}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        GateSet::new(gates, self.label.unwrap_or_else(|| default_label.to_string()), self.provenance)
    }
}

/// Parses a gate set given as a full object, a bare list of matrices, or one matrix.
pub fn parse_gate_set(text: &str, default_label: &str) -> Result<GateSet> {
    let input: GateSetInput =
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let file = match input {
        GateSetInput::Full(f) => f,
        GateSetInput::Bare(gates) => GateSetFile {
            label: None,
            provenance: Provenance::of_kind(ProvenanceKind::File),
            gates,
        },
        GateSetInput::Single(m) => GateSetFile {
            label: None,
            provenance: Provenance::of_kind(ProvenanceKind::File),
            gates: vec![m],
        },
    };
    file.into_set(default_label)
}

pub fn read_gate_set(path: &Path) -> Result<GateSet> {
    let text = fs::read_to_string(path)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("file");
    parse_gate_set(&text, stem)
}

/// A single gate: a one-element gate-set file or a bare matrix.
pub fn read_gate(path: &Path) -> Result<ProjectiveGate> {
    let set = read_gate_set(path)?;
    match set.gates() {
        [g] => Ok(*g),
        gates => Err(Error::Format(format!("expected one gate, found {}", gates.len()))),
    }
}

pub fn gate_set_json(set: &GateSet) -> String {
    let mut s = serde_json::to_string_pretty(&GateSetFile::from_set(set)).expect("gate set serializes");
    s.push('\n');
    s
}

pub fn write_gate_set(path: &Path, set: &GateSet) -> Result<()> {
    fs::write(path, gate_set_json(set))?;
    Ok(())
}

pub fn profile_csv(profile: &DeltaProfile) -> String {
    let mut out = String::from("s,norm,delta,converged,no_gap\n");
    for (n, delta) in profile.per_spin.iter().zip(&profile.delta_of_t) {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            n.spin,
            fmt_f64(n.norm),
            fmt_f64(*delta),
            n.converged,
            *delta >= 1.0 - NO_GAP_TOL
        ));
    }
    out
}

#[derive(Serialize)]
struct ProfileEnvelope<'a> {
    label: &'a str,
    seed: Option<u64>,
    t: u32,
    set_size: usize,
    wall_time: f64,
    profile: &'a DeltaProfile,
}

pub fn profile_json(profile: &DeltaProfile) -> String {
    to_json(&ProfileEnvelope {
        label: &profile.label,
        seed: profile.seed,
        t: profile.t_max,
        set_size: profile.set_size,
        wall_time: profile.wall_time,
        profile,
    })
}

pub fn spectrum_csv(sample: &SpectrumSample) -> String {
    let mut out = String::from("value,weight\n");
    for (v, w) in &sample.values {
        out.push_str(&format!("{},{}\n", fmt_f64(*v), fmt_f64(*w)));
    }
    out
}

pub fn km_csv(km: &KmDensity, points: usize) -> String {
    let mut out = String::from("x,density\n");
    for (x, d) in km.grid(points) {
        out.push_str(&format!("{},{}\n", fmt_f64(x), fmt_f64(d)));
    }
    out
}

pub fn histogram_csv(h: &Histogram) -> String {
    let mut out = String::from("bin_left,bin_right,density\n");
    for (i, d) in h.densities.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(h.bin_edges[i]),
            fmt_f64(h.bin_edges[i + 1]),
            fmt_f64(*d)
        ));
    }
    out
}

pub fn report_csv(reports: &[OverheadReport]) -> String {
    let mut out = format!("{}\n", crate::overhead::CSV_HEADER);
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub const SWEEP_HEADER: &str = "member,member_seed,variant,label,n,t,delta,q,q_opt_bar,delta_opt,flags,error";

/// One row per `(member, t)`; failed members get a single row carrying the error.
pub fn sweep_csv(results: &[RunResult], header: bool) -> String {
    let mut out = String::new();
    if header {
        out.push_str(SWEEP_HEADER);
        out.push('\n');
    }
    for r in results {
        let prefix = format!("{},{}", r.member_index, r.member_seed);
        if let Some(err) = &r.error {
            out.push_str(&format!("{prefix},,,,,,,,,,{}\n", csv_field(err)));
            continue;
        }
        for rep in &r.reports {
            out.push_str(&format!("{prefix},{},\n", rep.csv_row()));
        }
    }
    out
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

/// Writes `content` to `path`, creating parent directories, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(p, content)?;
        }
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{clifford_group, p_gate, projective_equal};

    #[test]
    fn gate_set_round_trip() {
        let set = clifford_group();
        let back = parse_gate_set(&gate_set_json(&set), "x").unwrap();
        assert_eq!(back.label(), "clifford");
        assert_eq!(back.len(), 24);
        for (a, b) in set.iter().zip(back.iter()) {
            assert!(projective_equal(a, b, 1e-12));
        }
    }

    #[test]
    fn accepts_unnormalized_bare_matrices() {
        let text = "[[[[2,0],[0,0]],[[0,0],[0,2]]], [[[1,0],[0,0]],[[0,0],[0.7071067811865476,0.7071067811865476]]]]";
        let set = parse_gate_set(text, "bare").unwrap();
        assert_eq!(set.label(), "bare");
        assert!(projective_equal(&set.gates()[1], &p_gate(std::f64::consts::FRAC_PI_4), 1e-12));
        assert!(matches!(parse_gate_set("{\"gates\": [[[[1,0],[0,0]],[[0,0],[1,1]]]]}", "x"), Err(Error::Format(_))));
        assert!(matches!(parse_gate_set("not json", "x"), Err(Error::Format(_))));
    }
}
