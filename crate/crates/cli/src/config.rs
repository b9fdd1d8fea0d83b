//! Run configuration: TOML layers, dotted-key overrides and sweep expansion.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use gatewave_core::two_photon::{ElasticMode, GateSetup, KernelVariant};
use gatewave_core::{ArrayConfig, MoleculeParams, DEFAULT_PHI};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SinglePhoton,
    TwoPhoton,
    LossSweep,
    DisorderSweep,
    OracleCheck,
    ChiralDesign,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::SinglePhoton => "single-photon",
            Mode::TwoPhoton => "two-photon",
            Mode::LossSweep => "loss-sweep",
            Mode::DisorderSweep => "disorder-sweep",
            Mode::OracleCheck => "oracle-check",
            Mode::ChiralDesign => "chiral-design",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fully resolved configuration of one run tuple. Frequencies in units of `Γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub seed: u64,
    pub molecule: MoleculeSection,
    pub array: ArraySection,
    pub pulse: PulseSection,
    pub grid: GridSection,
    pub two_photon: TwoPhotonSection,
    pub disorder: DisorderSection,
    pub oracle: OracleSection,
    /// Swept keys in dotted form; the run is the Cartesian product.
    pub sweep: BTreeMap<String, SweepAxis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MoleculeSection {
    pub omega0_tau: f64,
    pub j_tau: f64,
    /// Retardation `Γτ`. When absent it follows from `j_over_gamma`.
    pub gamma_tau: Option<f64>,
    pub j_over_gamma: Option<f64>,
    /// Total anharmonicity `Uₐ + U_b`.
    pub u: f64,
    /// Share of `u` carried by the coupled transmon.
    pub ua_fraction: f64,
    pub gamma0: f64,
    pub phi: f64,
}

impl Default for MoleculeSection {
    fn default() -> Self {
        MoleculeSection {
            omega0_tau: 21.0 * PI,
            j_tau: 1.5 * PI,
            gamma_tau: None,
            j_over_gamma: None,
            u: 100.0,
            ua_fraction: 0.5,
            gamma0: 0.0,
            phi: DEFAULT_PHI,
        }
    }
}

pub const DEFAULT_J_OVER_GAMMA: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArraySection {
    pub n: usize,
    /// Molecule spacing `D` in units of `vτ`.
    pub spacing_over_tau: f64,
}

impl Default for ArraySection {
    fn default() -> Self {
        ArraySection { n: 4, spacing_over_tau: 5.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseDirection {
    R,
    L,
    #[serde(rename = "both")]
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSection {
    pub sigma: f64,
    /// Take `sigma` from [`optimal_sigma`] for the array size.
    pub optimal_sigma: bool,
    /// Single-photon runs only.
    pub direction: PulseDirection,
}

impl Default for PulseSection {
    fn default() -> Self {
        PulseSection { sigma: 0.1, optimal_sigma: false, direction: PulseDirection::Both }
    }
}

/// Optimal bandwidths found for the gate at `N = 4, 8, 12`.
pub fn optimal_sigma(n: usize) -> Option<f64> {
    match n {
        4 => Some(0.1),
        8 => Some(0.06),
        12 => Some(0.045),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub points_1d: usize,
    pub points_2d: usize,
    pub half_width_sigmas: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            points_1d: gatewave_core::DEFAULT_POINTS_1D,
            points_2d: gatewave_core::DEFAULT_POINTS_2D,
            half_width_sigmas: gatewave_core::DEFAULT_HALF_WIDTH_SIGMAS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoPhotonSection {
    pub kernel: String,
    pub elastic: String,
}

impl Default for TwoPhotonSection {
    fn default() -> Self {
        TwoPhotonSection {
            kernel: KernelVariant::SimplifiedTotalU.name().into(),
            elastic: ElasticMode::IdealT.name().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderSection {
    /// Standard deviation of the transmon frequencies.
    pub delta_omega0: f64,
    pub n_realizations: usize,
}

impl Default for DisorderSection {
    fn default() -> Self {
        DisorderSection { delta_omega0: 0.01, n_realizations: 15 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub sites: usize,
    pub j_over_gamma: f64,
    pub sigma: f64,
    pub settle_time: f64,
    pub two_photon: bool,
    pub two_photon_sites: usize,
    pub two_photon_sigma: f64,
    pub two_photon_settle_time: f64,
    pub two_photon_points: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            sites: 2000,
            j_over_gamma: 20.0,
            sigma: 1.0,
            settle_time: 12.0,
            two_photon: false,
            two_photon_sites: 1400,
            two_photon_sigma: 2.0,
            two_photon_settle_time: 6.0,
            two_photon_points: 129,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: None,
            seed: 0,
            molecule: MoleculeSection::default(),
            array: ArraySection::default(),
            pulse: PulseSection::default(),
            grid: GridSection::default(),
            two_photon: TwoPhotonSection::default(),
            disorder: DisorderSection::default(),
            oracle: OracleSection::default(),
            sweep: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn from_table(table: Table) -> Result<Self> {
        let cfg: RunConfig = Value::Table(table).try_into().map_err(|e: toml::de::Error| anyhow!("config: {}", e.message()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.molecule;
        if let Some(g) = m.gamma_tau {
            if !(g > 0.0 && g.is_finite()) {
                bail!("molecule.gamma_tau: must be positive (Γ > 0), got {g}");
            }
        }
        if let Some(r) = m.j_over_gamma {
            if !(r > 0.0 && r.is_finite()) {
                bail!("molecule.j_over_gamma: must be positive (Γ > 0), got {r}");
            }
            if m.gamma_tau.is_some() {
                bail!("molecule: give either gamma_tau or j_over_gamma, not both");
            }
        }
        if !(0.0..=1.0).contains(&m.ua_fraction) {
            bail!("molecule.ua_fraction: must lie in [0, 1], got {}", m.ua_fraction);
        }
        if m.u < 0.0 || m.gamma0 < 0.0 {
            bail!("molecule: u and gamma0 must be non-negative");
        }
        if !(self.array.spacing_over_tau > 0.0) {
            bail!("array.spacing_over_tau: must be positive");
        }
        if !(self.pulse.sigma > 0.0) {
            bail!("pulse.sigma: must be positive");
        }
        KernelVariant::from_str(&self.two_photon.kernel).context("two_photon.kernel")?;
        ElasticMode::from_str(&self.two_photon.elastic).context("two_photon.elastic")?;
        if self.disorder.delta_omega0 < 0.0 {
            bail!("disorder.delta_omega0: must be non-negative");
        }
        if self.disorder.n_realizations == 0 {
            bail!("disorder.n_realizations: must be at least 1");
        }
        for (key, axis) in &self.sweep {
            if axis.expand()?.is_empty() {
                bail!("sweep.{key}: empty range");
            }
        }
        Ok(())
    }

    /// Resolved `Γτ`.
    pub fn gamma_tau(&self) -> f64 {
        let m = &self.molecule;
        m.gamma_tau.unwrap_or_else(|| m.j_tau / m.j_over_gamma.unwrap_or(DEFAULT_J_OVER_GAMMA))
    }

    pub fn molecule_params(&self) -> Result<MoleculeParams> {
        let m = &self.molecule;
        let tau = self.gamma_tau();
        let ua = m.u * m.ua_fraction;
        let mut p = MoleculeParams::new(m.omega0_tau / tau, m.j_tau / tau, ua, m.u - ua, m.gamma0, tau)?;
        p.phi = m.phi;
        p.validate()?;
        Ok(p)
    }

    pub fn sigma(&self) -> Result<f64> {
        if self.pulse.optimal_sigma {
            optimal_sigma(self.array.n).ok_or_else(|| anyhow!("pulse.optimal_sigma: no optimal bandwidth for N = {}", self.array.n))
        } else {
            Ok(self.pulse.sigma)
        }
    }

    pub fn array(&self, p: &MoleculeParams) -> Result<ArrayConfig> {
        Ok(ArrayConfig::clean(self.array.n, p.omega0, self.array.spacing_over_tau * p.tau)?)
    }

    pub fn kernel(&self) -> KernelVariant {
        self.two_photon.kernel.parse().expect("validated")
    }

    pub fn elastic(&self) -> ElasticMode {
        self.two_photon.elastic.parse().expect("validated")
    }

    pub fn gate(&self) -> Result<GateSetup> {
        let p = self.molecule_params()?;
        let mut g = GateSetup::new(p, self.array.n, self.sigma()?)?.with_array(self.array(&p)?);
        g.grid_points = self.grid.points_2d;
        g.half_width_sigmas = self.grid.half_width_sigmas;
        g.variant = self.kernel();
        g.elastic = self.elastic();
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepAxis {
    Values {
        values: Vec<Value>,
    },
    Range {
        from: f64,
        to: f64,
        points: usize,
        #[serde(default)]
        scale: Scale,
    },
}

impl SweepAxis {
    pub fn expand(&self) -> Result<Vec<Value>> {
        match *self {
            SweepAxis::Values { ref values } => Ok(values.clone()),
            SweepAxis::Range { from, to, points, scale } => {
                if scale == Scale::Log && !(from > 0.0 && to > 0.0) {
                    bail!("log range needs positive endpoints");
                }
                let at = |i: usize| {
                    if i == 0 {
                        return from;
                    }
                    let s = i as f64 / (points - 1) as f64;
                    match scale {
                        Scale::Linear => from + s * (to - from),
                        Scale::Log => (from.ln() + s * (to.ln() - from.ln())).exp(),
                    }
                };
                // pin the endpoints against rounding in exp/ln
                Ok((0..points)
                    .map(|i| Value::Float(if i + 1 == points && points > 1 { to } else { at(i) }))
                    .collect())
            }
        }
    }
}

impl FromStr for SweepAxis {
    type Err = anyhow::Error;

    /// `a..b:points`, `a..b:log:points` or a comma-separated list.
    fn from_str(s: &str) -> Result<Self> {
        if let Some((from, rest)) = s.split_once("..") {
            let parts: Vec<&str> = rest.split(':').collect();
            let (to, scale, points) = match parts.as_slice() {
                [to, points] => (to, Scale::Linear, points),
                [to, "log", points] => (to, Scale::Log, points),
                [to, "linear", points] => (to, Scale::Linear, points),
                _ => bail!("range `{s}`: expected a..b:points or a..b:log:points"),
            };
            return Ok(SweepAxis::Range {
                from: from.trim().parse().with_context(|| format!("range start in `{s}`"))?,
                to: to.trim().parse().with_context(|| format!("range end in `{s}`"))?,
                points: points.trim().parse().with_context(|| format!("point count in `{s}`"))?,
                scale,
            });
        }
        Ok(SweepAxis::Values { values: s.split(',').map(|v| parse_value(v.trim())).collect() })
    }
}

/// TOML literal, or a bare string when it does not parse as one.
pub fn parse_value(s: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {s}")).ok().and_then(|mut t| t.remove("v")).unwrap_or_else(|| Value::String(s.into()))
}

/// Sets `a.b.c = value`, creating intermediate tables.
pub fn set_path(table: &mut Table, key: &str, value: Value) -> Result<()> {
    let mut parts = key.split('.').peekable();
    let mut cur = table;
    while let Some(part) = parts.next() {
        if part.is_empty() {
            bail!("malformed key `{key}`");
        }
        if parts.peek().is_none() {
            cur.insert(part.into(), value);
            return Ok(());
        }
        let next = cur.entry(part).or_insert_with(|| Value::Table(Table::new()));
        cur = next.as_table_mut().ok_or_else(|| anyhow!("`{key}`: `{part}` is not a table"))?;
    }
    unreachable!()
}

/// Recursive merge; `over` wins.
pub fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// One point of the sweep: the assignments and the resolved config.
#[derive(Debug, Clone)]
pub struct RunTuple {
    pub assignments: Vec<(String, Value)>,
    pub config: RunConfig,
}

/// Cartesian product of the sweep axes, keys in sorted order with the first
/// key varying slowest.
pub fn expand_sweep(base: &Table) -> Result<Vec<RunTuple>> {
    let cfg = RunConfig::from_table(base.clone())?;
    let axes: Vec<(String, Vec<Value>)> =
        cfg.sweep.iter().map(|(k, a)| Ok((k.clone(), a.expand()?))).collect::<Result<_>>()?;
    let mut fixed = base.clone();
    fixed.remove("sweep");

    let mut tuples = vec![Vec::new()];
    for (key, values) in &axes {
        tuples = tuples
            .into_iter()
            .flat_map(|t: Vec<(String, Value)>| {
                values.iter().map(move |v| {
                    let mut t = t.clone();
                    t.push((key.clone(), v.clone()));
                    t
                })
            })
            .collect();
    }
    tuples
        .into_iter()
        .map(|assignments| {
            let mut table = fixed.clone();
            for (k, v) in &assignments {
                set_path(&mut table, k, v.clone()).with_context(|| format!("sweep key `{k}`"))?;
            }
            let config = RunConfig::from_table(table).with_context(|| format!("sweep point {assignments:?}"))?;
            Ok(RunTuple { assignments, config })
        })
        .collect()
}

/// Built-in figure configurations, as TOML layers.
pub fn preset(name: &str) -> Result<Table> {
    let text = match name {
        "fig2" => {
            r#"
            mode = "single-photon"
            molecule = { gamma_tau = 0.1 }
            array = { n = 2, spacing_over_tau = 5.0 }
            pulse = { sigma = 0.1, direction = "both" }
            [sweep]
            "molecule.gamma_tau" = { from = 0.01, to = 1.0, points = 20, scale = "log" }
            "#
        }
        "fig3a" => {
            r#"
            mode = "two-photon"
            molecule = { j_over_gamma = 100.0 }
            [sweep]
            "array.n" = { values = [4, 8, 12] }
            "molecule.u" = { values = [10.0, 100.0] }
            "pulse.sigma" = { from = 0.02, to = 0.4, points = 14, scale = "log" }
            "#
        }
        "fig3b" => {
            r#"
            mode = "two-photon"
            molecule = { j_over_gamma = 100.0 }
            pulse = { optimal_sigma = true }
            [sweep]
            "array.n" = { values = [4, 8, 12] }
            "molecule.u" = { from = 1.0, to = 1000.0, points = 13, scale = "log" }
            "#
        }
        "fig4a" => {
            r#"
            mode = "loss-sweep"
            molecule = { j_over_gamma = 100.0, u = 100.0 }
            pulse = { optimal_sigma = true }
            [sweep]
            "array.n" = { values = [4, 8, 12] }
            "molecule.gamma0" = { from = 1e-4, to = 0.1, points = 13, scale = "log" }
            "#
        }
        "fig4b" => {
            r#"
            mode = "disorder-sweep"
            molecule = { j_over_gamma = 100.0, u = 100.0 }
            pulse = { optimal_sigma = true }
            disorder = { n_realizations = 15 }
            [sweep]
            "array.n" = { values = [4, 8, 12] }
            "disorder.delta_omega0" = { from = 1e-3, to = 0.1, points = 9, scale = "log" }
            "#
        }
        _ => bail!("unknown preset `{name}` (fig2, fig3a, fig3b, fig4a, fig4b)"),
    };
    Ok(toml::from_str(text).expect("preset parses"))
}

pub const PRESETS: [&str; 5] = ["fig2", "fig3a", "fig3b", "fig4a", "fig4b"];

pub fn get_path<'a>(table: &'a Table, key: &str) -> Option<&'a Value> {
    let (head, rest) = match key.split_once('.') {
        Some((h, r)) => (h, Some(r)),
        None => (key, None),
    };
    let v = table.get(head)?;
    match rest {
        Some(r) => get_path(v.as_table()?, r),
        None => Some(v),
    }
}

/// Default sweeps for modes that are sweeps by nature, unless the swept key
/// was given.
pub fn mode_defaults(mode: Mode, table: &Table) -> Table {
    let swept = |key: &str| {
        let in_sweep = table.get("sweep").and_then(Value::as_table).is_some_and(|s| s.contains_key(key));
        in_sweep || get_path(table, key).is_some()
    };
    let text = match mode {
        Mode::LossSweep if !swept("molecule.gamma0") => {
            r#"sweep = { "molecule.gamma0" = { from = 1e-4, to = 0.1, points = 13, scale = "log" } }"#
        }
        Mode::DisorderSweep if !swept("disorder.delta_omega0") => {
            r#"sweep = { "disorder.delta_omega0" = { from = 1e-3, to = 0.1, points = 9, scale = "log" } }"#
        }
        _ => "",
    };
    toml::from_str(text).expect("defaults parse")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_range_expands_to_twenty_tuples() {
        let mut t = Table::new();
        set_path(&mut t, "sweep", Value::Table(Table::new())).unwrap();
        let axis: SweepAxis = "0.01..1:log:20".parse().unwrap();
        t["sweep"].as_table_mut().unwrap().insert("molecule.gamma_tau".into(), Value::try_from(axis).unwrap());
        let runs = expand_sweep(&t).unwrap();
        assert_eq!(runs.len(), 20);
        let first = runs[0].config.molecule.gamma_tau.unwrap();
        let last = runs[19].config.molecule.gamma_tau.unwrap();
        assert!((first - 0.01).abs() < 1e-15 && last == 1.0);
        let ratio = runs[1].config.molecule.gamma_tau.unwrap() / first;
        assert!((ratio - 100f64.powf(1.0 / 19.0)).abs() < 1e-12);
    }

    #[test]
    fn product_order_is_by_key() {
        let t: Table = toml::from_str(
            r#"
            [sweep]
            "molecule.u" = { values = [1.0, 2.0] }
            "array.n" = { values = [4, 8, 12] }
            "#,
        )
        .unwrap();
        let runs = expand_sweep(&t).unwrap();
        let pairs: Vec<(usize, f64)> = runs.iter().map(|r| (r.config.array.n, r.config.molecule.u)).collect();
        assert_eq!(pairs, [(4, 1.0), (4, 2.0), (8, 1.0), (8, 2.0), (12, 1.0), (12, 2.0)]);
    }

    #[test]
    fn compact_lists_keep_integers() {
        let axis: SweepAxis = "4,8,12".parse().unwrap();
        assert_eq!(axis.expand().unwrap(), [Value::Integer(4), Value::Integer(8), Value::Integer(12)]);
        assert!("1..2:cubic:3".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn presets_parse_and_expand() {
        for name in PRESETS {
            let runs = expand_sweep(&preset(name).unwrap()).unwrap();
            assert!(!runs.is_empty(), "{name}");
        }
        assert!(preset("fig9").is_err());
    }
}
