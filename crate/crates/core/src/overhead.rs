//! Closed-form overhead quantities: the Kesten bound, Q and Q_T, length
//! scalings, and the Kesten-McKay density.
//!
//! Natural logarithms are used throughout. Every quantity here is a ratio of
//! logarithms (times `d^2 - 1` for the lengths), so the base cancels.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{derived_set, GateSet, ProjectiveGate};
use crate::moments::{delta_profile, DeltaProfile};

/// Volume constant `A_v` of an epsilon-ball in PU(2).
pub const A_V: f64 = 87.0;
/// Lower volume constant `a_v = 1/(9 pi)`.
pub const A_V_LOWER: f64 = 1.0 / (9.0 * PI);
/// Discrepancies within this distance of one count as no contraction.
pub const NO_GAP_TOL: f64 = 1e-12;
/// Trailing-window change in delta below which a profile counts as stable.
pub const STABILITY_TOL: f64 = 1e-6;

/// Kesten lower bound `2 sqrt(n-1) / n`.
pub fn delta_opt(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidSize { n });
    }
    let n = n as f64;
    Ok(2.0 * (n - 1.0).sqrt() / n)
}

/// `ln n / ln(1/delta)`.
pub fn q_value(n: usize, delta: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidSize { n });
    }
    check_delta(delta)?;
    Ok((n as f64).ln() / -delta.ln())
}

/// [`q_value`] with a non-positive delta replaced by machine epsilon.
/// The boolean reports whether the floor was applied.
pub fn q_value_floored(n: usize, delta: f64) -> Result<(f64, bool)> {
    match q_value(n, delta) {
        Err(Error::DegenerateDelta { .. }) => Ok((q_value(n, f64::EPSILON)?, true)),
        other => other.map(|q| (q, false)),
    }
}

/// `ln n / ln(n / (2 sqrt(n-1)))`, the value of Q at the Kesten bound.
pub fn q_opt_bar(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidSize { n });
    }
    if n == 2 {
        return Err(Error::Divergent);
    }
    let nf = n as f64;
    Ok(nf.ln() / (nf / (2.0 * (nf - 1.0).sqrt())).ln())
}

/// `ceil(d^{5/2} / epsilon)` with unit constant.
pub fn t_of_eps(epsilon: f64, d: u32) -> Result<u32> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {d}")));
    }
    let t = (f64::from(d).powf(2.5) / epsilon).ceil();
    if t > f64::from(u32::MAX) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} gives t beyond range")));
    }
    Ok(t as u32)
}

/// Epsilon implied by a given `t` under [`t_of_eps`]: `d^{5/2} / t`.
pub fn eps_of_t(t: u32, d: u32) -> f64 {
    f64::from(d).powf(2.5) / f64::from(t)
}

/// Volume lower bound on circuit length: `(d^2-1) ln(1/(A_v eps)) / ln n`.
pub fn ell_vol(n: usize, epsilon: f64, d: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidSize { n });
    }
    if !(epsilon > 0.0) || A_V * epsilon >= 1.0 {
        return Err(Error::EpsilonTooLarge { epsilon });
    }
    Ok(dim_factor(d) * (1.0 / (A_V * epsilon)).ln() / (n as f64).ln())
}

/// Spectral upper-bound scaling: `(d^2-1) ln(1/eps) / ln(1/delta)`.
pub fn ell_delta(delta: f64, epsilon: f64, d: u32) -> Result<f64> {
    check_delta(delta)?;
    check_eps(epsilon)?;
    Ok(dim_factor(d) * epsilon.ln() / delta.ln())
}

/// Asymptotic form `(d^2-1) ln(2/(A_v eps)) / ln(1/delta)`.
pub fn ell_delta_asymptotic(delta: f64, epsilon: f64, d: u32) -> Result<f64> {
    check_delta(delta)?;
    check_eps(epsilon)?;
    Ok(dim_factor(d) * (2.0 / (A_V * epsilon)).ln() / -delta.ln())
}

fn dim_factor(d: u32) -> f64 {
    f64::from(d * d - 1)
}

fn check_delta(delta: f64) -> Result<()> {
    if delta >= 1.0 - NO_GAP_TOL {
        return Err(Error::NoGapAtScale { delta });
    }
    if delta <= 0.0 {
        return Err(Error::DegenerateDelta { delta });
    }
    Ok(())
}

fn check_eps(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "Q")]
    Q,
    #[serde(rename = "Q_T")]
    QT,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Q => "Q",
            Variant::QT => "Q_T",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Q" | "q" => Ok(Variant::Q),
            "Q_T" | "q_t" | "qt" => Ok(Variant::QT),
            other => Err(Error::InvalidArgument(format!("unknown variant {other}"))),
        }
    }
}

/// In-band conditions attached to a report.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFlags {
    /// delta >= 1 at this t; `q` is infinite.
    pub no_gap: bool,
    /// delta was zero to machine precision and floored.
    pub degenerate: bool,
    /// Some block norm did not meet the iteration tolerance.
    pub unconverged: bool,
    /// epsilon is too large for the volume bound.
    pub vacuous_volume: bool,
}

impl ReportFlags {
    /// `;`-separated names of the set flags, or the empty string.
    pub fn render(&self) -> String {
        [
            (self.no_gap, "no_gap"),
            (self.degenerate, "degenerate"),
            (self.unconverged, "unconverged"),
            (self.vacuous_volume, "vacuous_volume"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, name)| *name)
        .collect::<Vec<_>>()
        .join(";")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverheadReport {
    pub variant: Variant,
    pub label: String,
    /// `|S|`, or `|C|` for the Q_T variant.
    pub set_size: usize,
    pub d: u32,
    pub t: u32,
    pub epsilon: Option<f64>,
    pub delta: f64,
    /// Infinite when `flags.no_gap`.
    #[serde(with = "float_or_inf")]
    pub q: f64,
    /// `None` below two gates, where the bound is undefined.
    pub q_opt_bar: Option<f64>,
    pub delta_opt: Option<f64>,
    pub ell_vol: Option<f64>,
    pub ell_delta: Option<f64>,
    pub flags: ReportFlags,
}

/// JSON has no infinity; encode it as `null`.
mod float_or_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

pub const CSV_HEADER: &str = "variant,label,n,t,delta,q,q_opt_bar,delta_opt,flags";

impl OverheadReport {
    /// Report for a measured `delta` at `t`. `epsilon` defaults to the one implied by `t`.
    pub fn build(
        variant: Variant,
        label: &str,
        set_size: usize,
        t: u32,
        delta: f64,
        epsilon: Option<f64>,
        converged: bool,
    ) -> Result<Self> {
        let d = 2;
        let mut flags = ReportFlags { unconverged: !converged, ..Default::default() };
        let q = if delta >= 1.0 - NO_GAP_TOL {
            flags.no_gap = true;
            f64::INFINITY
        } else {
            let (q, floored) = q_value_floored(set_size, delta)?;
            flags.degenerate = floored;
            q
        };
        let eps = epsilon.unwrap_or_else(|| eps_of_t(t, d));
        let ell_vol = match ell_vol(set_size, eps, d) {
            Ok(v) => Some(v),
            Err(Error::EpsilonTooLarge { .. }) => {
                flags.vacuous_volume = true;
                None
            }
            Err(_) => None,
        };
        let effective = if flags.degenerate { f64::EPSILON } else { delta };
        let ell_delta = ell_delta(effective, eps, d).ok();
        Ok(Self {
            variant,
            label: label.to_string(),
            set_size,
            d,
            t,
            epsilon,
            delta,
            q,
            q_opt_bar: q_opt_bar(set_size).ok(),
            delta_opt: delta_opt(set_size).ok(),
            ell_vol,
            ell_delta,
            flags,
        })
    }

    /// Report at `t` read from a computed profile.
    pub fn from_profile(variant: Variant, profile: &DeltaProfile, t: u32, epsilon: Option<f64>) -> Result<Self> {
        let delta = profile.delta(t).ok_or_else(|| {
            Error::InvalidArgument(format!("profile covers t <= {}, asked for {t}", profile.t_max))
        })?;
        let converged = profile.per_spin[..t as usize].iter().all(|s| s.converged);
        Self::build(variant, &profile.label, profile.set_size, t, delta, epsilon, converged)
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.variant,
            csv_field(&self.label),
            self.set_size,
            self.t,
            fmt_f64(self.delta),
            fmt_f64(self.q),
            self.q_opt_bar.map(fmt_f64).unwrap_or_default(),
            self.delta_opt.map(fmt_f64).unwrap_or_default(),
            self.flags.render()
        )
    }
}

/// Round-trip float formatting used by every CSV writer.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Quotes a CSV field when it contains a delimiter or quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Q_T of a group completed by `t_gate`, from the derived multiset `{c T c^dagger}`.
pub fn q_t(group: &GateSet, t_gate: &ProjectiveGate, t: u32) -> Result<OverheadReport> {
    let derived = derived_set(group, t_gate)?;
    let profile = delta_profile(&derived, t)?;
    OverheadReport::from_profile(Variant::QT, &profile, t, None)
}

/// Q at the largest computed `t` plus a stability flag: true when delta moved
/// by less than [`STABILITY_TOL`] over the trailing `window` values.
pub fn q_bar_estimate(profile: &DeltaProfile, window: u32) -> Result<(f64, bool)> {
    if window == 0 || profile.t_max < 2 * window {
        return Err(Error::InvalidArgument(format!(
            "window {window} needs a profile of length >= {}",
            2 * window
        )));
    }
    let t = profile.t_max as usize;
    let tail = &profile.delta_of_t[t - window as usize - 1..t];
    let change = tail.last().unwrap() - tail.first().unwrap();
    let (q, _) = q_value_floored(profile.set_size, profile.delta_of_t[t - 1])?;
    Ok((q, change.abs() < STABILITY_TOL))
}

/// Limiting spectral density of a free generating set of size `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmDensity {
    pub set_size: usize,
    /// One-sided singular-value form on `[0, edge]` when false.
    pub symmetric: bool,
    pub support_edge: f64,
}

impl KmDensity {
    pub fn new(set_size: usize, symmetric: bool) -> Result<Self> {
        if set_size < 3 {
            return Err(Error::InvalidSize { n: set_size });
        }
        Ok(Self { set_size, symmetric, support_edge: delta_opt(set_size)? })
    }

    pub fn density(&self, x: f64) -> f64 {
        let edge = self.support_edge;
        let lower = if self.symmetric { -edge } else { 0.0 };
        if x < lower || x > edge {
            return 0.0;
        }
        let scale = if self.symmetric { 2.0 * PI } else { PI };
        self.set_size as f64 * (edge * edge - x * x).max(0.0).sqrt() / (scale * (1.0 - x * x))
    }

    /// `(x, density)` on `points` equally spaced nodes spanning the support.
    pub fn grid(&self, points: usize) -> Vec<(f64, f64)> {
        let edge = self.support_edge;
        let lower = if self.symmetric { -edge } else { 0.0 };
        let step = if points > 1 { (edge - lower) / (points - 1) as f64 } else { 0.0 };
        (0..points)
            .map(|i| {
                let x = lower + step * i as f64;
                (x, self.density(x))
            })
            .collect()
    }

    /// Mass on `[lower, upper]`, after `x = edge sin(theta)` removes the square-root edge.
    pub fn mass(&self, lower: f64, upper: f64) -> f64 {
        let edge = self.support_edge;
        let lo = lower.max(if self.symmetric { -edge } else { 0.0 });
        let hi = upper.min(edge);
        if hi <= lo {
            return 0.0;
        }
        let (a, b) = ((lo / edge).asin(), (hi / edge).asin());
        let f = |theta: f64| {
            let x = edge * theta.sin();
            self.density(x) * edge * theta.cos()
        };
        gauss_legendre(f, a, b, 64)
    }

    pub fn total_mass(&self) -> f64 {
        self.mass(f64::NEG_INFINITY, f64::INFINITY)
    }
}

pub fn km_density(x: f64, n: usize, symmetric: bool) -> Result<f64> {
    Ok(KmDensity::new(n, symmetric)?.density(x))
}

/// Composite 5-point Gauss-Legendre rule on `panels` equal panels.
fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = a + h * (p as f64 + 0.5);
            NODES
                .iter()
                .zip(WEIGHTS)
                .map(|(x, w)| w * f(mid + 0.5 * h * x))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kesten_bound_values() {
        assert_eq!(delta_opt(2).unwrap(), 1.0);
        assert!((delta_opt(24).unwrap() - 2.0 * 23f64.sqrt() / 24.0).abs() < 1e-15);
        assert!(matches!(delta_opt(1), Err(Error::InvalidSize { n: 1 })));
    }

    #[test]
    fn q_at_kesten_bound_equals_q_opt_bar() {
        for n in [3usize, 12, 24, 100, 1_000_000] {
            let q = q_value(n, delta_opt(n).unwrap()).unwrap();
            assert!((q - q_opt_bar(n).unwrap()).abs() < 1e-12);
        }
        // reference values from an independent double-precision evaluation
        assert!((q_opt_bar(24).unwrap() - 3.465_104_690_542_264).abs() < 1e-12);
        assert!((q_opt_bar(12).unwrap() - 4.191_729_166_285_606).abs() < 1e-12);
        let big = q_opt_bar(1_000_000).unwrap();
        assert!((big - 2.223_070_099_936_993).abs() < 1e-9);
        assert!(q_opt_bar(1_000_000_000).unwrap() < big && big > 2.0);
        assert!(matches!(q_opt_bar(2), Err(Error::Divergent)));
    }

    #[test]
    fn q_value_domain() {
        assert!(matches!(q_value(24, 1.0), Err(Error::NoGapAtScale { .. })));
        assert!(matches!(q_value(24, 0.0), Err(Error::DegenerateDelta { .. })));
        let (_, floored) = q_value_floored(24, 0.0).unwrap();
        assert!(floored);
        let qs: Vec<f64> = [0.1, 0.4, 0.7, 0.99].iter().map(|&d| q_value(24, d).unwrap()).collect();
        assert!(qs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn length_scalings() {
        assert_eq!(t_of_eps(0.1, 2).unwrap(), 57);
        assert_eq!(t_of_eps(1.0, 2).unwrap(), 6);
        assert!((ell_vol(24, 1e-3, 2).unwrap() - 3.0 * (1e3f64 / 87.0).ln() / 24f64.ln()).abs() < 1e-12);
        assert!((ell_vol(24, 1e-6, 2).unwrap() - 8.825_781_064_525_95).abs() < 1e-10);
        assert!(matches!(ell_vol(24, 0.02, 2), Err(Error::EpsilonTooLarge { .. })));
        let d = delta_opt(24).unwrap();
        assert!((ell_delta(d, 1e-3, 2).unwrap() - 22.595_050_143_343_67).abs() < 1e-10);
    }

    #[test]
    fn km_density_normalizes() {
        for n in [3usize, 12, 24, 10_000] {
            for symmetric in [true, false] {
                let km = KmDensity::new(n, symmetric).unwrap();
                assert!((km.total_mass() - 1.0).abs() < 1e-6, "n={n} sym={symmetric}");
                assert_eq!(km.density(km.support_edge), 0.0);
                assert_eq!(km.density(1.0), 0.0);
            }
        }
    }

    #[test]
    fn csv_row_has_header_arity() {
        let r = OverheadReport::build(Variant::QT, "a,b", 24, 50, 0.5, None, true).unwrap();
        assert!(r.csv_row().starts_with("Q_T,\"a,b\",24,50,"));
        let nogap = OverheadReport::build(Variant::Q, "x", 24, 5, 1.0, None, true).unwrap();
        assert!(nogap.flags.no_gap && nogap.q.is_infinite());
        let single = OverheadReport::build(Variant::Q, "i", 1, 3, 1.0, None, true).unwrap();
        assert!(single.flags.no_gap && single.delta_opt.is_none());
        assert!(nogap.csv_row().contains(",no_gap"));
        let json = serde_json::to_string(&nogap).unwrap();
        let back: OverheadReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, nogap);
    }
}
