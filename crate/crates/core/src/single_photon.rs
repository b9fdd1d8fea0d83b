//! Single-photon scattering by one molecule and by arrays of molecules.

use alloc::vec::Vec;
use core::f64::consts::PI;

// Needed without std; with std linked the inherent float methods take over.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::params::{
    make_gaussian_spectrum, ArrayConfig, Branch, FrequencyGrid, MoleculeParams, Spectrum1D, WavepacketSpec,
    DEFAULT_PHI,
};
use crate::quad;
use crate::C64;

/// Transfer-matrix inversion threshold on `|t_L|`.
pub const MIN_TRANSFER_T_L: f64 = 1e-12;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Non-local coupling `g(k) = sqrt(2/π) g cos((kd + φ)/2)` with `g = sqrt(Γv/2)`.
pub fn coupling_gk(k: f64, p: &MoleculeParams) -> C64 {
    let g = (p.gamma / 2.0).sqrt();
    C64::new((2.0 / PI).sqrt() * g * ((k * p.tau + p.phi) / 2.0).cos(), 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    pub gamma_r: f64,
    pub gamma_l: f64,
}

fn require_default_phase(p: &MoleculeParams) -> Result<()> {
    if (p.phi - DEFAULT_PHI).abs() > 1e-12 {
        return Err(Error::UnsupportedPhase { phi: p.phi });
    }
    Ok(())
}

/// `Γ_{R/L}(ω) = (Γ/2)(1 ± sin ωτ)`.
pub fn decay_rates(omega: f64, p: &MoleculeParams) -> Result<DecayRates> {
    require_default_phase(p)?;
    let s = (omega * p.tau).sin();
    Ok(DecayRates { gamma_r: p.gamma / 2.0 * (1.0 + s), gamma_l: p.gamma / 2.0 * (1.0 - s) })
}

/// Shifted detunings `x± = ω - ω± + iΓ₀/2`.
fn detunings(omega: f64, p: &MoleculeParams) -> (C64, C64) {
    let loss = C64::new(0.0, p.gamma0 / 2.0);
    (omega - p.omega_plus() + loss, omega - p.omega_minus() + loss)
}

/// Molecular Green's function in the dressed basis `|±⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenComponents {
    pub g_pp: C64,
    pub g_mm: C64,
    pub g_pm: C64,
    /// Large-J approximants `(ω - ω± + i(Γ+Γ₀)/2)⁻¹`; the mixed element is zero.
    pub approx_pp: C64,
    pub approx_mm: C64,
}

impl GreenComponents {
    /// `|⟨∓|G|±⟩| / |⟨±|G|±⟩|` for the upper branch.
    pub fn mixing_ratio(&self) -> f64 {
        self.g_pm.norm() / self.g_pp.norm()
    }
}

pub fn green_components(omega: f64, p: &MoleculeParams) -> Result<GreenComponents> {
    require_default_phase(p)?;
    let (xp, xm) = detunings(omega, p);
    let half = I * (p.gamma / 2.0);
    let q = xp * xm + half * (xp + xm);
    let scale = xp.norm() * xm.norm() + p.gamma * (xp.norm() + xm.norm());
    if q.norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SingularInput { omega });
    }
    let width = I * ((p.gamma + p.gamma0) / 2.0);
    Ok(GreenComponents {
        g_pp: (xm + half) / q,
        g_mm: (xp + half) / q,
        g_pm: -half / q,
        approx_pp: 1.0 / (omega - p.omega_plus() + width),
        approx_mm: 1.0 / (omega - p.omega_minus() + width),
    })
}

/// Single-molecule scattering amplitudes at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleSiteS {
    pub t_r: C64,
    pub t_l: C64,
    pub r: C64,
}

/// Resolvent sum over both transitions, `Σ_ν 1/(x_ν + i(Γ/2)...)`, in
/// pole-cleared form `2x / (x² - J² + iΓx)` with `x = ω - ω₀ + iΓ₀/2`.
fn resolvent_sum(omega: f64, p: &MoleculeParams) -> C64 {
    let x = C64::new(omega - p.omega0, p.gamma0 / 2.0);
    let ig = I * p.gamma;
    if p.j == 0.0 {
        return 2.0 / (x + ig);
    }
    2.0 * x / (x * x - p.j * p.j + ig * x)
}

/// Exact transmission and reflection of one molecule.
///
/// The reflection carries the sign of `cos ωτ`, which the interference of
/// the two coupling points imposes.
pub fn single_site_s(omega: f64, p: &MoleculeParams) -> Result<SingleSiteS> {
    let rates = decay_rates(omega, p)?;
    let s = resolvent_sum(omega, p);
    Ok(SingleSiteS {
        t_r: 1.0 - I * rates.gamma_r * s,
        t_l: 1.0 - I * rates.gamma_l * s,
        r: -I * (p.gamma / 2.0 * (omega * p.tau).cos()) * s,
    })
}

/// Chiral-limit transmission `(δ - iΓ/2 + iΓ₀/2)/(δ + i(Γ+Γ₀)/2)`, `δ = ω - ω±`.
pub fn ideal_t(omega: f64, branch: Branch, p: &MoleculeParams) -> C64 {
    let d = omega - p.resonance(branch);
    C64::new(d, (p.gamma0 - p.gamma) / 2.0) / C64::new(d, (p.gamma + p.gamma0) / 2.0)
}

/// Delay per molecule of the ideal chiral transfer.
pub fn ideal_delay(p: &MoleculeParams) -> f64 {
    4.0 / p.gamma
}

/// Amplitudes of a whole array. `r_r` is the reflection of a photon incident
/// from the left (moving right), `r_l` from the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayScattering {
    pub t_r: C64,
    pub t_l: C64,
    pub r_r: C64,
    pub r_l: C64,
}

fn site_transfer(s: &SingleSiteS) -> Mat2 {
    let inv = 1.0 / s.t_l;
    Mat2([[(s.t_r * s.t_l - s.r * s.r) * inv, s.r * inv], [-s.r * inv, inv]])
}

fn free_transfer(omega: f64, spacing: f64) -> Mat2 {
    let z = C64::new(0.0, 0.0);
    let ph = C64::from_polar(1.0, omega * spacing);
    Mat2([[ph, z], [z, ph.conj()]])
}

/// Composes the array by 2x2 transfer matrices in spatial order.
///
/// Amplitudes are referenced to the positions of the first and last
/// molecule, so the free flight across the array is included.
pub fn array_s(omega: f64, p: &MoleculeParams, arr: &ArrayConfig) -> Result<ArrayScattering> {
    let mut m = Mat2::identity();
    for (site, &w0) in arr.site_omega0.iter().enumerate() {
        if site > 0 {
            m = free_transfer(omega, arr.spacing_time) * m;
        }
        let s = single_site_s(omega, &p.with_omega0(w0))?;
        if s.t_l.norm() < MIN_TRANSFER_T_L {
            return Err(Error::IllConditionedTransfer { site, omega, t_l_abs: s.t_l.norm() });
        }
        m = site_transfer(&s) * m;
    }
    let [[m11, m12], [m21, m22]] = m.0;
    let _ = m11;
    Ok(ArrayScattering { t_r: m.det() / m22, t_l: 1.0 / m22, r_r: -m21 / m22, r_l: m12 / m22 })
}

/// Empty-waveguide phase `e^{iω(N-1)D}` across the array extent.
fn free_flight(omega: f64, arr: &ArrayConfig) -> C64 {
    let n = arr.n_molecules().saturating_sub(1) as f64;
    C64::from_polar(1.0, omega * n * arr.spacing_time)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseOutcome {
    /// Transmitted amplitude with the free-flight phase removed.
    pub output: Spectrum1D,
    pub transmittance: f64,
    pub reflectance: f64,
}

/// Sends a Gaussian pulse through the array.
pub fn propagate_pulse(
    spec: &WavepacketSpec,
    p: &MoleculeParams,
    arr: &ArrayConfig,
    grid: &FrequencyGrid,
) -> Result<PulseOutcome> {
    let input = make_gaussian_spectrum(spec, grid)?;
    let mut out = Vec::with_capacity(grid.n_points());
    let mut t_dens = Vec::with_capacity(grid.n_points());
    let mut r_dens = Vec::with_capacity(grid.n_points());
    for (w, psi) in grid.points().zip(&input.values) {
        let s = array_s(w, p, arr)?;
        let (t, r) = match spec.direction {
            crate::Direction::R => (s.t_r, s.r_r),
            crate::Direction::L => (s.t_l, s.r_l),
        };
        out.push(t * free_flight(w, arr).conj() * psi);
        t_dens.push(t.norm_sqr() * psi.norm_sqr());
        r_dens.push(r.norm_sqr() * psi.norm_sqr());
    }
    let h = grid.step();
    Ok(PulseOutcome {
        output: Spectrum1D { grid: *grid, values: out },
        transmittance: quad::integrate_real(&t_dens, h),
        reflectance: quad::integrate_real(&r_dens, h),
    })
}

/// Ideal chiral output `(-1)^N ψ_in(ω) e^{iNT(ω - ω±)}`, `T = 4/Γ`.
pub fn ideal_output_1(spec: &WavepacketSpec, p: &MoleculeParams, n: usize, grid: &FrequencyGrid) -> Result<Spectrum1D> {
    let input = make_gaussian_spectrum(spec, grid)?;
    let w_res = p.resonance(spec.direction.branch());
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let delay = n as f64 * ideal_delay(p);
    let values = grid
        .points()
        .zip(&input.values)
        .map(|(w, psi)| psi * C64::from_polar(sign, delay * (w - w_res)))
        .collect();
    Ok(Spectrum1D { grid: *grid, values })
}

/// `I₁ = ½|1 - Re⟨ideal|out⟩|`.
pub fn infidelity_1(out: &Spectrum1D, ideal: &Spectrum1D) -> Result<f64> {
    let overlap = ideal.inner(out)?;
    Ok(0.5 * (1.0 - overlap.re).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Direction;

    fn fig2(gamma_tau: f64) -> MoleculeParams {
        MoleculeParams::from_phases(21.0 * PI, 1.5 * PI, gamma_tau, 100.0).unwrap()
    }

    #[test]
    fn coupling_nodes_and_antinodes() {
        let mut p = fig2(0.05);
        p.phi = 0.0;
        let g = (p.gamma / 2.0).sqrt();
        assert!((coupling_gk(0.0, &p).re - (2.0 / PI).sqrt() * g).abs() < 1e-15);
        assert!(coupling_gk(PI / p.tau, &p).norm() < 1e-15);
        let p = fig2(0.05);
        let gk = coupling_gk(p.omega_plus(), &p);
        assert!((gk.norm_sqr() - p.gamma / PI).abs() < 1e-12);
    }

    #[test]
    fn decay_rates_at_special_phases() {
        let p = fig2(0.05);
        let r = decay_rates(PI / 2.0 / p.tau, &p).unwrap();
        assert!((r.gamma_r - 1.0).abs() < 1e-15 && r.gamma_l.abs() < 1e-15);
        let r = decay_rates(2.0 * PI / p.tau, &p).unwrap();
        assert!((r.gamma_r - 0.5).abs() < 1e-12 && (r.gamma_l - 0.5).abs() < 1e-12);
        let r = decay_rates(p.omega_minus(), &p).unwrap();
        assert!(r.gamma_r.abs() < 1e-12 && (r.gamma_l - 1.0).abs() < 1e-12);
        let mut q = p;
        q.phi = 0.3;
        assert!(matches!(decay_rates(1.0, &q), Err(Error::UnsupportedPhase { .. })));
    }

    #[test]
    fn bare_molecule_limit() {
        let mut p = fig2(0.05);
        p.gamma = 1e-9;
        let w = p.omega_plus() + 0.3;
        let g = green_components(w, &p).unwrap();
        assert!((g.g_pp - 1.0 / C64::new(0.3, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn degenerate_molecule_at_its_frequency_is_singular() {
        let p = MoleculeParams::new(10.0, 0.0, 0.0, 0.0, 0.0, 0.05).unwrap();
        assert!(matches!(green_components(10.0, &p), Err(Error::SingularInput { .. })));
        // The scattering amplitudes stay finite there.
        let s = single_site_s(10.0, &p).unwrap();
        assert!(s.t_r.is_finite() && s.r.is_finite());
    }

    #[test]
    fn single_site_chiral_limit() {
        let p = fig2(1e-3);
        let s = single_site_s(p.omega_plus(), &p).unwrap();
        assert!((s.t_r + 1.0).norm() < 1e-3);
        assert!(s.r.norm() < 1e-3);
        let lossy = p.with_gamma0(1.0 / 200.0);
        assert!(single_site_s(p.omega_plus(), &lossy).unwrap().t_r.norm_sqr() < 1.0);
    }

    #[test]
    fn ideal_t_is_all_pass_with_delay() {
        let p = fig2(0.05);
        assert!((ideal_t(p.omega_plus(), Branch::Plus, &p) + 1.0).norm() < 1e-15);
        for k in -20..20 {
            let w = p.omega_minus() + 0.37 * k as f64;
            assert!((ideal_t(w, Branch::Minus, &p).norm() - 1.0).abs() < 1e-14);
        }
        let h = 1e-4;
        let w0 = p.omega_plus();
        let delay = (ideal_t(w0 + h, Branch::Plus, &p) / ideal_t(w0 - h, Branch::Plus, &p)).arg() / (2.0 * h);
        assert!((delay / 4.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn one_site_array_matches_single_site() {
        let p = fig2(0.2);
        let arr = ArrayConfig::clean(1, p.omega0, 5.0 * p.tau).unwrap();
        for k in 0..50 {
            let w = p.omega_minus() - 3.0 + 0.4 * k as f64;
            let a = array_s(w, &p, &arr).unwrap();
            let s = single_site_s(w, &p).unwrap();
            assert!((a.t_r - s.t_r).norm() < 1e-12);
            assert!((a.t_l - s.t_l).norm() < 1e-12);
            assert!((a.r_r - s.r).norm() < 1e-12);
            assert!((a.r_l - s.r).norm() < 1e-12);
        }
    }

    #[test]
    fn empty_array_is_identity() {
        let p = fig2(0.05);
        let spec = WavepacketSpec::resonant(&p, Direction::R, 0.1);
        let grid = spec.default_grid(257).unwrap();
        let out = propagate_pulse(&spec, &p, &ArrayConfig::empty(), &grid).unwrap();
        let input = make_gaussian_spectrum(&spec, &grid).unwrap();
        assert_eq!(out.output, input);
        assert!((out.transmittance - 1.0).abs() < 1e-10 && out.reflectance == 0.0);
    }

    #[test]
    fn infidelity_reference_values() {
        let p = fig2(0.05);
        let spec = WavepacketSpec::resonant(&p, Direction::R, 0.1);
        let grid = spec.default_grid(1025).unwrap();
        let ideal = ideal_output_1(&spec, &p, 3, &grid).unwrap();
        assert!(infidelity_1(&ideal, &ideal).unwrap() < 1e-10);
        assert!((infidelity_1(&Spectrum1D::zeros(grid), &ideal).unwrap() - 0.5).abs() < 1e-15);
        let unsigned = ideal.scaled(C64::new(-1.0, 0.0));
        assert!((infidelity_1(&unsigned, &ideal).unwrap() - 1.0).abs() < 1e-8);
        let even = ideal_output_1(&spec, &p, 2, &grid).unwrap();
        let odd = ideal_output_1(&spec, &p, 0, &grid).unwrap();
        assert!((even.norm_sqr() - 1.0).abs() < 1e-8 && (odd.norm_sqr() - 1.0).abs() < 1e-8);
        let other = FrequencyGrid::new(grid.center(), grid.half_width(), 1027).unwrap();
        assert!(matches!(infidelity_1(&Spectrum1D::zeros(other), &ideal), Err(Error::GridMismatch)));
    }
}
