//! Parameter containers, unit conventions, frequency grids and spectra.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

// Needed without std; with std linked the inherent float methods take over.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quad;
use crate::C64;

/// Default coupling phase of the two coupling points.
pub const DEFAULT_PHI: f64 = -FRAC_PI_2;
/// Default tolerance (radians) of the chiral resonance check.
pub const CHIRAL_TOLERANCE: f64 = 1e-6;
/// Default number of points of a 1D frequency grid.
pub const DEFAULT_POINTS_1D: usize = 2049;
/// Default number of points per axis of a 2D frequency grid.
pub const DEFAULT_POINTS_2D: usize = 513;
/// Default grid half width in units of the pulse bandwidth.
pub const DEFAULT_HALF_WIDTH_SIGMAS: f64 = 8.0;
/// Minimum one-sided grid coverage, in bandwidths, accepted for a Gaussian.
pub const MIN_COVERAGE_SIGMAS: f64 = 6.0;

/// Rates and couplings of one transmon dimer.
///
/// Stored in internal units (Γ = 1 and v = 1 unless `gamma` is changed on
/// purpose, e.g. to study the uncoupled limit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoleculeParams {
    pub omega0: f64,
    pub j: f64,
    pub ua: f64,
    pub ub: f64,
    pub gamma: f64,
    pub gamma0: f64,
    pub tau: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Levels {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub u_total: f64,
}

/// Result of the chiral resonance check for both branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiralCheck {
    pub m_plus: Option<i64>,
    pub m_minus: Option<i64>,
    pub residual_plus: f64,
    pub residual_minus: f64,
}

impl ChiralCheck {
    pub fn is_chiral(&self) -> bool {
        self.m_plus.is_some() && self.m_minus.is_some()
    }
}

impl MoleculeParams {
    /// Molecule in internal units with Γ = 1 and the default phase.
    pub fn new(omega0: f64, j: f64, ua: f64, ub: f64, gamma0: f64, tau: f64) -> Result<Self> {
        let p = MoleculeParams { omega0, j, ua, ub, gamma: 1.0, gamma0, tau, phi: DEFAULT_PHI };
        p.validate()?;
        Ok(p)
    }

    /// Molecule specified by the phases `ω₀τ`, `Jτ` and the retardation `Γτ`.
    ///
    /// The anharmonicity is split evenly between the transmons.
    pub fn from_phases(omega0_tau: f64, j_tau: f64, gamma_tau: f64, u_total: f64) -> Result<Self> {
        if !(gamma_tau > 0.0) {
            return Err(Error::invalid("gamma_tau", "must be positive"));
        }
        let tau = gamma_tau;
        Self::new(omega0_tau / tau, j_tau / tau, u_total / 2.0, u_total / 2.0, 0.0, tau)
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool); 8] = [
            ("omega0", self.omega0, self.omega0 > 0.0),
            ("J", self.j, self.j >= 0.0),
            ("Ua", self.ua, self.ua >= 0.0),
            ("Ub", self.ub, self.ub >= 0.0),
            ("Gamma", self.gamma, self.gamma > 0.0),
            ("Gamma0", self.gamma0, self.gamma0 >= 0.0),
            ("tau", self.tau, self.tau > 0.0),
            ("phi", self.phi, true),
        ];
        for (name, value, ok) in checks {
            if !value.is_finite() {
                return Err(Error::invalid(name, alloc::format!("must be finite, got {value}")));
            }
            if !ok {
                return Err(Error::invalid(name, alloc::format!("out of range: {value}")));
            }
        }
        Ok(())
    }

    pub fn levels(&self) -> Levels {
        derive_levels(self)
    }

    pub fn omega_plus(&self) -> f64 {
        self.omega0 + self.j
    }

    pub fn omega_minus(&self) -> f64 {
        self.omega0 - self.j
    }

    pub fn u_total(&self) -> f64 {
        self.ua + self.ub
    }

    /// Resonance frequency `ω±` of `branch`.
    pub fn resonance(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.omega_plus(),
            Branch::Minus => self.omega_minus(),
        }
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn with_gamma0(mut self, gamma0: f64) -> Self {
        self.gamma0 = gamma0;
        self
    }

    pub fn with_anharmonicity(mut self, ua: f64, ub: f64) -> Self {
        self.ua = ua;
        self.ub = ub;
        self
    }

    pub fn with_j(mut self, j: f64) -> Self {
        self.j = j;
        self
    }

    pub fn check_chiral_condition(&self) -> ChiralCheck {
        check_chiral_condition(self, CHIRAL_TOLERANCE)
    }
}

pub fn derive_levels(p: &MoleculeParams) -> Levels {
    Levels { omega_plus: p.omega_plus(), omega_minus: p.omega_minus(), u_total: p.u_total() }
}

/// Nearest `m` with `phase = (2m + offset)π` and the residual `phase - (2m + offset)π`.
fn nearest_branch_index(phase: f64, offset: f64) -> (i64, f64) {
    let m = ((phase / PI - offset) / 2.0).round();
    let residual = phase - (2.0 * m + offset) * PI;
    (m as i64, residual)
}

/// Checks `ω₊τ = (2m₊ + ½)π` and `ω₋τ = (2m₋ − ½)π`.
///
/// Residuals are always reported; an index is `None` if its residual exceeds
/// `tolerance` radians.
pub fn check_chiral_condition(p: &MoleculeParams, tolerance: f64) -> ChiralCheck {
    let (mp, rp) = nearest_branch_index(p.omega_plus() * p.tau, 0.5);
    let (mm, rm) = nearest_branch_index(p.omega_minus() * p.tau, -0.5);
    ChiralCheck {
        m_plus: (rp.abs() <= tolerance).then_some(mp),
        m_minus: (rm.abs() <= tolerance).then_some(mm),
        residual_plus: rp,
        residual_minus: rm,
    }
}

/// Conversion between physical units and the internal Γ = 1, v = 1 units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitScale {
    /// Physical waveguide decay rate (angular frequency).
    pub rate: f64,
    /// Physical group velocity.
    pub velocity: f64,
}

impl UnitScale {
    pub fn new(rate: f64, velocity: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::invalid("Gamma", "physical rate must be positive"));
        }
        if !(velocity > 0.0 && velocity.is_finite()) {
            return Err(Error::invalid("v", "group velocity must be positive"));
        }
        Ok(UnitScale { rate, velocity })
    }

    pub fn frequency_to_internal(&self, w: f64) -> f64 {
        w / self.rate
    }

    pub fn frequency_to_physical(&self, w: f64) -> f64 {
        w * self.rate
    }

    pub fn time_to_internal(&self, t: f64) -> f64 {
        t * self.rate
    }

    pub fn time_to_physical(&self, t: f64) -> f64 {
        t / self.rate
    }

    pub fn length_to_internal(&self, x: f64) -> f64 {
        x * self.rate / self.velocity
    }

    pub fn length_to_physical(&self, x: f64) -> f64 {
        x * self.velocity / self.rate
    }

    /// Physical molecule (rates in rad/s, `tau` in s) to internal units.
    pub fn to_internal(&self, p: &MoleculeParams) -> MoleculeParams {
        let f = |w| self.frequency_to_internal(w);
        MoleculeParams {
            omega0: f(p.omega0),
            j: f(p.j),
            ua: f(p.ua),
            ub: f(p.ub),
            gamma: f(p.gamma),
            gamma0: f(p.gamma0),
            tau: self.time_to_internal(p.tau),
            phi: p.phi,
        }
    }

    pub fn to_physical(&self, p: &MoleculeParams) -> MoleculeParams {
        let f = |w| self.frequency_to_physical(w);
        MoleculeParams {
            omega0: f(p.omega0),
            j: f(p.j),
            ua: f(p.ua),
            ub: f(p.ub),
            gamma: f(p.gamma),
            gamma0: f(p.gamma0),
            tau: self.time_to_physical(p.tau),
            phi: p.phi,
        }
    }

    /// Scale that maps `p` (physical) onto Γ = 1.
    pub fn for_molecule(p: &MoleculeParams, velocity: f64) -> Result<Self> {
        Self::new(p.gamma, velocity)
    }
}

/// N molecules at spacing `spacing_time` (= D/v) with per-site frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayConfig {
    pub spacing_time: f64,
    pub site_omega0: Vec<f64>,
}

impl ArrayConfig {
    /// Array of `n` identical molecules at frequency `omega0`.
    pub fn clean(n: usize, omega0: f64, spacing_time: f64) -> Result<Self> {
        Self::with_sites(alloc::vec![omega0; n], spacing_time)
    }

    /// An empty waveguide section, used as the identity of composition.
    pub fn empty() -> Self {
        ArrayConfig { spacing_time: 1.0, site_omega0: Vec::new() }
    }

    pub fn with_sites(site_omega0: Vec<f64>, spacing_time: f64) -> Result<Self> {
        let a = ArrayConfig { spacing_time, site_omega0 };
        a.validate()?;
        Ok(a)
    }

    pub fn n_molecules(&self) -> usize {
        self.site_omega0.len()
    }

    /// `N = 0` is accepted as the empty array.
    pub fn validate(&self) -> Result<()> {
        if !(self.spacing_time > 0.0 && self.spacing_time.is_finite()) {
            return Err(Error::invalid("spacing_time", "must be positive"));
        }
        if let Some(w) = self.site_omega0.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::invalid("site_omega0", alloc::format!("bad site frequency {w}")));
        }
        Ok(())
    }
}

/// Propagation direction of a photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    R,
    L,
}

impl Direction {
    /// Right-movers address the upper transition, left-movers the lower one.
    pub fn branch(self) -> Branch {
        match self {
            Direction::R => Branch::Plus,
            Direction::L => Branch::Minus,
        }
    }
}

/// Single-excitation transition of the molecule, `ω± = ω₀ ± J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

/// Gaussian single-photon pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketSpec {
    pub center: f64,
    pub bandwidth: f64,
    pub direction: Direction,
}

impl WavepacketSpec {
    /// Pulse centred on the transition its direction addresses.
    pub fn resonant(p: &MoleculeParams, direction: Direction, bandwidth: f64) -> Self {
        WavepacketSpec { center: p.resonance(direction.branch()), bandwidth, direction }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::invalid("sigma", "bandwidth must be positive"));
        }
        if !self.center.is_finite() {
            return Err(Error::invalid("center", "must be finite"));
        }
        Ok(())
    }

    /// Default grid: `center ± 8σ` with `n_points` samples.
    pub fn default_grid(&self, n_points: usize) -> Result<FrequencyGrid> {
        FrequencyGrid::new(self.center, DEFAULT_HALF_WIDTH_SIGMAS * self.bandwidth, n_points)
    }
}

/// Uniform grid `center ± half_width` with an odd number of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    center: f64,
    half_width: f64,
    n_points: usize,
}

impl FrequencyGrid {
    pub fn new(center: f64, half_width: f64, n_points: usize) -> Result<Self> {
        if n_points < 3 || n_points % 2 == 0 {
            return Err(Error::invalid("n_points", alloc::format!("need an odd count >= 3, got {n_points}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) || !center.is_finite() {
            return Err(Error::invalid("half_width", "must be positive and finite"));
        }
        Ok(FrequencyGrid { center, half_width, n_points })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.n_points - 1) as f64
    }

    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn point(&self, i: usize) -> f64 {
        // Symmetric about the centre so that mirrored points agree exactly.
        let mid = (self.n_points - 1) / 2;
        let h = self.step();
        if i >= mid {
            self.center + h * (i - mid) as f64
        } else {
            self.center - h * (mid - i) as f64
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }

    /// Same span with `2n - 1` points.
    pub fn refined(&self) -> Self {
        FrequencyGrid { n_points: 2 * self.n_points - 1, ..*self }
    }
}

/// Complex spectral amplitude on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum1D {
    pub grid: FrequencyGrid,
    pub values: Vec<C64>,
}

impl Spectrum1D {
    pub fn from_fn(grid: FrequencyGrid, mut f: impl FnMut(f64) -> C64) -> Self {
        let values = grid.points().map(&mut f).collect();
        Spectrum1D { grid, values }
    }

    pub fn zeros(grid: FrequencyGrid) -> Self {
        Spectrum1D { grid, values: alloc::vec![C64::new(0.0, 0.0); grid.n_points()] }
    }

    pub fn norm_sqr(&self) -> f64 {
        let d: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        quad::integrate_real(&d, self.grid.step())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Spectrum1D) -> Result<C64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let prod: Vec<C64> = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).collect();
        Ok(quad::integrate(&prod, self.grid.step()))
    }

    pub fn scaled(&self, c: C64) -> Self {
        Spectrum1D { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }
}

/// Two-photon amplitude `ψ(ω_R, ω_L)`, row-major with the R photon first.
#[derive(Debug, Clone, PartialEq)]
pub struct Amplitude2D {
    pub grid_r: FrequencyGrid,
    pub grid_l: FrequencyGrid,
    pub values: Vec<C64>,
}

impl Amplitude2D {
    pub fn zeros(grid_r: FrequencyGrid, grid_l: FrequencyGrid) -> Self {
        let n = grid_r.n_points() * grid_l.n_points();
        Amplitude2D { grid_r, grid_l, values: alloc::vec![C64::new(0.0, 0.0); n] }
    }

    pub fn from_fn(grid_r: FrequencyGrid, grid_l: FrequencyGrid, mut f: impl FnMut(f64, f64) -> C64) -> Self {
        let mut values = Vec::with_capacity(grid_r.n_points() * grid_l.n_points());
        for wr in grid_r.points() {
            for wl in grid_l.points() {
                values.push(f(wr, wl));
            }
        }
        Amplitude2D { grid_r, grid_l, values }
    }

    /// Product state `a(ω_R) b(ω_L)`.
    pub fn product(a: &Spectrum1D, b: &Spectrum1D) -> Self {
        let mut values = Vec::with_capacity(a.values.len() * b.values.len());
        for x in &a.values {
            for y in &b.values {
                values.push(x * y);
            }
        }
        Amplitude2D { grid_r: a.grid, grid_l: b.grid, values }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.grid_l.n_points() + j]
    }

    pub fn norm_sqr(&self) -> f64 {
        let d: Vec<C64> = self.values.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
        self.integrate(&d).re
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Amplitude2D) -> Result<C64> {
        if self.grid_r != other.grid_r || self.grid_l != other.grid_l {
            return Err(Error::GridMismatch);
        }
        let prod: Vec<C64> = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).collect();
        Ok(self.integrate(&prod))
    }

    pub fn scaled(&self, c: C64) -> Self {
        Amplitude2D { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    fn integrate(&self, values: &[C64]) -> C64 {
        quad::integrate_2d(
            values,
            self.grid_r.n_points(),
            self.grid_l.n_points(),
            self.grid_r.step(),
            self.grid_l.step(),
        )
    }
}

/// Unit-norm Gaussian amplitude `(2πσ²)^(-1/4) exp(-(ω-ω_c)²/(4σ²))`.
pub fn make_gaussian_spectrum(spec: &WavepacketSpec, grid: &FrequencyGrid) -> Result<Spectrum1D> {
    spec.validate()?;
    let coverage = (spec.center - grid.lo()).min(grid.hi() - spec.center) / spec.bandwidth;
    if coverage < MIN_COVERAGE_SIGMAS {
        return Err(Error::GridTooNarrow { coverage });
    }
    Ok(Spectrum1D::from_fn(*grid, |w| C64::new(gaussian_amplitude(w, spec.center, spec.bandwidth), 0.0)))
}

pub fn gaussian_amplitude(w: f64, center: f64, sigma: f64) -> f64 {
    let x = w - center;
    (2.0 * PI * sigma * sigma).powf(-0.25) * (-x * x / (4.0 * sigma * sigma)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2(gamma_tau: f64) -> MoleculeParams {
        MoleculeParams::from_phases(21.0 * PI, 1.5 * PI, gamma_tau, 100.0).unwrap()
    }

    #[test]
    fn levels_of_fig2_geometry() {
        let p = fig2(0.05);
        let l = derive_levels(&p);
        assert!((l.omega_plus * p.tau - 22.5 * PI).abs() < 1e-12);
        assert!((l.omega_minus * p.tau - 19.5 * PI).abs() < 1e-12);
        assert_eq!(l.u_total, 100.0);
        let q = MoleculeParams::new(40.0, 0.0, 60.0, 40.0, 0.0, 0.1).unwrap();
        assert_eq!(q.omega_plus(), q.omega_minus());
        assert_eq!(q.u_total(), 100.0);
    }

    #[test]
    fn chiral_indices() {
        let c = fig2(0.05).check_chiral_condition();
        assert_eq!((c.m_plus, c.m_minus), (Some(11), Some(10)));
        assert!(c.residual_plus.abs() < 1e-12 && c.residual_minus.abs() < 1e-12);

        let off = MoleculeParams::new(22.6 * PI, 0.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        let c = off.check_chiral_condition();
        assert_eq!(c.m_plus, None);
        assert!((c.residual_plus - 0.1 * PI).abs() < 1e-12);

        let single = MoleculeParams::new(2.5 * PI, 0.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        let c = single.check_chiral_condition();
        assert_eq!(c.m_plus, Some(1));
        assert_eq!(c.m_minus, None);
    }

    #[test]
    fn validation_rejects_bad_values() {
        assert!(MoleculeParams::new(-1.0, 1.0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(MoleculeParams::new(1.0, 1.0, 0.0, 0.0, -0.1, 1.0).is_err());
        let mut p = fig2(0.1);
        p.gamma = -1.0;
        assert!(p.validate().is_err());
        p.gamma = f64::NAN;
        assert!(p.validate().is_err());
    }

    #[test]
    fn gaussian_normalization_and_shape() {
        let spec = WavepacketSpec { center: 3.0, bandwidth: 0.1, direction: Direction::R };
        let grid = spec.default_grid(DEFAULT_POINTS_1D).unwrap();
        let s = make_gaussian_spectrum(&spec, &grid).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-8);
        let ratio = gaussian_amplitude(3.0, 3.0, 0.1) / gaussian_amplitude(3.2, 3.0, 0.1);
        assert!((ratio - core::f64::consts::E).abs() < 1e-12);

        let narrow = FrequencyGrid::new(3.0, 0.4, 101).unwrap();
        assert!(matches!(make_gaussian_spectrum(&spec, &narrow), Err(Error::GridTooNarrow { .. })));
    }

    #[test]
    fn grid_rejects_even_counts() {
        assert!(FrequencyGrid::new(0.0, 1.0, 4).is_err());
        assert!(FrequencyGrid::new(0.0, 1.0, 1).is_err());
        let g = FrequencyGrid::new(1.0, 1.0, 5).unwrap();
        assert_eq!(g.point(0), 0.0);
        assert_eq!(g.point(2), 1.0);
        assert_eq!(g.point(4), 2.0);
        assert_eq!(g.refined().n_points(), 9);
    }

    #[test]
    fn unit_round_trip() {
        let scale = UnitScale::new(2.0 * PI * 5e6, 1e8).unwrap();
        let phys = MoleculeParams {
            omega0: 2.0 * PI * 5e9,
            j: 2.0 * PI * 5e8,
            ua: 2.0 * PI * 2.5e8,
            ub: 2.0 * PI * 2.5e8,
            gamma: 2.0 * PI * 5e6,
            gamma0: 2.0 * PI * 2.5e4,
            tau: 1e-9,
            phi: DEFAULT_PHI,
        };
        let internal = scale.to_internal(&phys);
        assert!((internal.gamma - 1.0).abs() < 1e-15);
        let back = scale.to_physical(&internal);
        for (a, b) in [
            (phys.omega0, back.omega0),
            (phys.j, back.j),
            (phys.gamma0, back.gamma0),
            (phys.tau, back.tau),
        ] {
            assert!(((a - b) / a).abs() < 1e-12);
        }
        let x = 0.37;
        assert!((scale.length_to_physical(scale.length_to_internal(x)) - x).abs() < 1e-12 * x);
    }
}
