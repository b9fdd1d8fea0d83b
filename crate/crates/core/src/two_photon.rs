//! Two-photon scattering: single-site nonlinear kernels, their composition
//! along the array, the ideal gate output and the two-excitation spectrum.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use core::fmt;
use core::str::FromStr;


use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen3;
use crate::params::{
    make_gaussian_spectrum, Amplitude2D, ArrayConfig, Branch, Direction, FrequencyGrid, MoleculeParams,
    WavepacketSpec, DEFAULT_HALF_WIDTH_SIGMAS, DEFAULT_POINTS_2D,
};
use crate::quad;
use crate::single_photon::{coupling_gk, ideal_output_1, ideal_t, single_site_s};
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Below this `J/Γ` the kernels leave their validity range.
pub const RATIO_WARNING_J_OVER_GAMMA: f64 = 10.0;

/// Largest accepted ratio of the input amplitude on the grid boundary to its peak.
pub const MAX_EDGE_RATIO: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelVariant {
    /// Nested Lippmann-Schwinger solution with separate `Uₐ`, `U_b`.
    ExactAppendix,
    /// Closed form depending on `U = Uₐ + U_b` only.
    SimplifiedTotalU,
    /// `U → ∞` limit.
    LargeU,
}

impl KernelVariant {
    pub const ALL: [KernelVariant; 3] =
        [KernelVariant::ExactAppendix, KernelVariant::SimplifiedTotalU, KernelVariant::LargeU];

    pub fn name(self) -> &'static str {
        match self {
            KernelVariant::ExactAppendix => "exact_appendix",
            KernelVariant::SimplifiedTotalU => "simplified_totalU",
            KernelVariant::LargeU => "largeU_maintext",
        }
    }
}

impl fmt::Display for KernelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact_appendix" | "exact" => Ok(KernelVariant::ExactAppendix),
            "simplified_totalU" | "simplified" => Ok(KernelVariant::SimplifiedTotalU),
            "largeU_maintext" | "large_u" | "largeU" => Ok(KernelVariant::LargeU),
            _ => Err(Error::invalid("kernel", alloc::format!("unknown kernel variant `{s}`"))),
        }
    }
}

/// Elastic factors used between the nonlinear insertions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElasticMode {
    /// Chiral-limit transmissions.
    IdealT,
    /// Exact single-molecule transmissions (heuristic outside the chiral limit).
    ExactT,
}

impl ElasticMode {
    pub fn name(self) -> &'static str {
        match self {
            ElasticMode::IdealT => "ideal-t",
            ElasticMode::ExactT => "exact-t",
        }
    }
}

impl fmt::Display for ElasticMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ElasticMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal-t" | "ideal" => Ok(ElasticMode::IdealT),
            "exact-t" | "exact" => Ok(ElasticMode::ExactT),
            _ => Err(Error::invalid("elastic_mode", alloc::format!("unknown elastic mode `{s}`"))),
        }
    }
}

/// Nonlinear part of the single-site two-photon S matrix.
///
/// All variants factorize as `K = F(E) · Out(ω'_R, ω'_L) · In(ω_R, ω_L)`
/// with `E = ω'_R + ω'_L = ω_R + ω_L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonKernel {
    pub variant: KernelVariant,
    pub params: MoleculeParams,
}

pub fn kernel_exact(p: &MoleculeParams) -> TwoPhotonKernel {
    TwoPhotonKernel::new(KernelVariant::ExactAppendix, p)
}

pub fn kernel_simplified(p: &MoleculeParams) -> TwoPhotonKernel {
    TwoPhotonKernel::new(KernelVariant::SimplifiedTotalU, p)
}

pub fn kernel_large_u(p: &MoleculeParams) -> TwoPhotonKernel {
    TwoPhotonKernel::new(KernelVariant::LargeU, p)
}

impl TwoPhotonKernel {
    pub fn new(variant: KernelVariant, p: &MoleculeParams) -> Self {
        TwoPhotonKernel { variant, params: *p }
    }

    /// True when `J < 10Γ`.
    pub fn ratio_warning(&self) -> bool {
        self.params.j < RATIO_WARNING_J_OVER_GAMMA * self.params.gamma
    }

    fn width(&self) -> f64 {
        self.params.gamma + self.params.gamma0
    }

    fn h_plus(&self, w: f64) -> C64 {
        C64::new(w - self.params.omega_plus(), self.width() / 2.0)
    }

    fn h_minus(&self, w: f64) -> C64 {
        C64::new(w - self.params.omega_minus(), self.width() / 2.0)
    }

    /// `Δ = E - 2ω₀ + i(Γ+Γ₀)`.
    fn delta(&self, e: f64) -> C64 {
        C64::new(e - 2.0 * self.params.omega0, self.width())
    }

    fn four_pole_sum(&self, wr: f64, wl: f64) -> C64 {
        1.0 / self.h_plus(wr) + 1.0 / self.h_minus(wr) + 1.0 / self.h_plus(wl) + 1.0 / self.h_minus(wl)
    }

    pub fn energy_factor(&self, e: f64) -> C64 {
        let p = &self.params;
        let g2 = p.gamma * p.gamma;
        match self.variant {
            KernelVariant::SimplifiedTotalU => {
                let d = self.delta(e);
                let u = p.u_total();
                I * (g2 / (4.0 * PI)) * u * d / (d + u / 2.0)
            }
            KernelVariant::LargeU => I * (g2 / (2.0 * PI)),
            KernelVariant::ExactAppendix => {
                let d = self.delta(e);
                let coupling = coupling_gk(p.omega_plus(), p).norm_sqr() * coupling_gk(-p.omega_minus(), p).norm_sqr();
                I * (2.0 * PI / 8.0) * coupling * interaction_sum(p.ua, p.ub, d)
            }
        }
    }

    pub fn out_factor(&self, wr: f64, wl: f64) -> C64 {
        match self.variant {
            KernelVariant::SimplifiedTotalU => 1.0 / (self.h_plus(wr) * self.h_minus(wl)),
            KernelVariant::LargeU => 1.0 / self.h_plus(wr) + 1.0 / self.h_minus(wl),
            KernelVariant::ExactAppendix => self.four_pole_sum(wr, wl),
        }
    }

    pub fn in_factor(&self, wr: f64, wl: f64) -> C64 {
        match self.variant {
            KernelVariant::SimplifiedTotalU | KernelVariant::LargeU => 1.0 / (self.h_plus(wr) * self.h_minus(wl)),
            KernelVariant::ExactAppendix => self.four_pole_sum(wr, wl),
        }
    }

    /// `K(ω'_R, ω'_L; ω_R)` with `ω_L = ω'_R + ω'_L - ω_R`.
    pub fn eval(&self, wr_out: f64, wl_out: f64, wr_in: f64) -> C64 {
        let e = wr_out + wl_out;
        self.energy_factor(e) * self.out_factor(wr_out, wl_out) * self.in_factor(wr_in, e - wr_in)
    }
}

/// `Σ_α U_α ŷ_α σ_α / Δ` from the two coupled Lippmann-Schwinger relations
/// in the doubly-occupied states `|aa⟩`, `|bb⟩`.
///
/// The linear propagator between them is `M_αα = 1/(2Δ)`, `M_αᾱ = -1/(2Δ)`
/// and the source is `σ_α/Δ` with `σ = (1, -1)`.
fn interaction_sum(ua: f64, ub: f64, d: C64) -> C64 {
    let m_same = 1.0 / (2.0 * d);
    let m_cross = -m_same;
    let sigma = [1.0, -1.0];
    let u = [ua, ub];
    let mut acc = C64::new(0.0, 0.0);
    for alpha in 0..2 {
        let other = 1 - alpha;
        let source = sigma[alpha] / d;
        let source_other = sigma[other] / d;
        let dress = 1.0 + u[other] * m_same;
        let num = source - u[other] * m_cross * source_other / dress;
        let den = 1.0 + u[alpha] * m_same - u[alpha] * u[other] * m_cross * m_cross / dress;
        acc += u[alpha] * (num / den) * sigma[alpha];
    }
    acc / d
}

/// Two-excitation block of the molecule in the basis `(|aa⟩, |bb⟩, |ab⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoExcitationManifold {
    pub hamiltonian: [[f64; 3]; 3],
    /// Ascending.
    pub eigenvalues: [f64; 3],
    /// Eigenvectors as columns.
    pub eigenvectors: [[f64; 3]; 3],
    /// Index of the eigenstate closest to `2ω₀`.
    pub selection_index: usize,
    /// `|⟨E_k|d₊†d₋†|0⟩|` for that eigenstate.
    pub selection_amplitude: f64,
}

/// `d₊†d₋†|0⟩ = (|aa⟩ - |bb⟩)/√2`.
pub fn pair_state() -> [f64; 3] {
    [FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0]
}

pub fn two_excitation_spectrum(p: &MoleculeParams) -> TwoExcitationManifold {
    let w2 = 2.0 * p.omega0;
    let hop = SQRT_2 * p.j;
    let h = [[w2 - p.ua, 0.0, hop], [0.0, w2 - p.ub, hop], [hop, hop, w2]];
    let (eigenvalues, eigenvectors) = symmetric_eigen3(h);
    let selection_index = (0..3)
        .min_by(|&a, &b| {
            (eigenvalues[a] - w2).abs().partial_cmp(&(eigenvalues[b] - w2).abs()).unwrap_or(core::cmp::Ordering::Equal)
        })
        .unwrap_or(1);
    let pair = pair_state();
    let amp: f64 = (0..3).map(|r| eigenvectors[r][selection_index] * pair[r]).sum();
    TwoExcitationManifold { hamiltonian: h, eigenvalues, eigenvectors, selection_index, selection_amplitude: amp.abs() }
}

fn site_transmissions(
    p: &MoleculeParams,
    arr: &ArrayConfig,
    grid: &FrequencyGrid,
    dir: Direction,
    elastic: ElasticMode,
) -> Result<Vec<Vec<C64>>> {
    arr.site_omega0
        .iter()
        .map(|&w0| {
            let pn = p.with_omega0(w0);
            grid.points()
                .map(|w| match (elastic, dir) {
                    (ElasticMode::IdealT, Direction::R) => Ok(ideal_t(w, Branch::Plus, &pn)),
                    (ElasticMode::IdealT, Direction::L) => Ok(ideal_t(w, Branch::Minus, &pn)),
                    (ElasticMode::ExactT, Direction::R) => single_site_s(w, &pn).map(|s| s.t_r),
                    (ElasticMode::ExactT, Direction::L) => single_site_s(w, &pn).map(|s| s.t_l),
                })
                .collect()
        })
        .collect()
}

/// Products of the per-site transmissions over the sites in `range`.
fn product_over(t: &[Vec<C64>], range: core::ops::Range<usize>, n_points: usize) -> Vec<C64> {
    let mut acc = vec![C64::new(1.0, 0.0); n_points];
    for site in range {
        for (a, v) in acc.iter_mut().zip(&t[site]) {
            *a *= v;
        }
    }
    acc
}

fn check_energy_window(input: &Amplitude2D) -> Result<()> {
    let (nr, nl) = (input.grid_r.n_points(), input.grid_l.n_points());
    let peak = input.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if peak == 0.0 {
        return Ok(());
    }
    let mut edge = 0.0f64;
    for i in 0..nr {
        edge = edge.max(input.get(i, 0).norm()).max(input.get(i, nl - 1).norm());
    }
    for j in 0..nl {
        edge = edge.max(input.get(0, j).norm()).max(input.get(nr - 1, j).norm());
    }
    let ratio = edge / peak;
    if ratio > MAX_EDGE_RATIO {
        return Err(Error::EnergyWindowTooSmall { ratio });
    }
    Ok(())
}

/// Scatters a counter-propagating photon pair through the array.
///
/// The output is the all-site elastic product plus one nonlinear insertion
/// per site, each integrated along its energy shell `ω_R + ω_L = E` on the
/// input grid. Both axes must share one spacing so the shell passes through
/// grid points.
pub fn scatter_two_photon(
    input: &Amplitude2D,
    p: &MoleculeParams,
    arr: &ArrayConfig,
    variant: KernelVariant,
    elastic: ElasticMode,
) -> Result<Amplitude2D> {
    p.validate()?;
    arr.validate()?;
    let (gr, gl) = (input.grid_r, input.grid_l);
    let h = gr.step();
    if (gl.step() - h).abs() > 1e-12 * h {
        return Err(Error::invalid("grid", "R and L axes need equal spacing"));
    }
    check_energy_window(input)?;

    let (nr, nl) = (gr.n_points(), gl.n_points());
    let n_sites = arr.n_molecules();
    let tr = site_transmissions(p, arr, &gr, Direction::R, elastic)?;
    let tl = site_transmissions(p, arr, &gl, Direction::L, elastic)?;
    let wr: Vec<f64> = gr.points().collect();
    let wl: Vec<f64> = gl.points().collect();

    let all_r = product_over(&tr, 0..n_sites, nr);
    let all_l = product_over(&tl, 0..n_sites, nl);
    let mut out = Amplitude2D::zeros(gr, gl);
    for i in 0..nr {
        for j in 0..nl {
            out.values[i * nl + j] = all_r[i] * all_l[j] * input.values[i * nl + j];
        }
    }

    let n_lines = nr + nl - 1;
    let mut line = Vec::with_capacity(nr.min(nl));
    let mut shell = vec![C64::new(0.0, 0.0); n_lines];
    for site in 0..n_sites {
        let kernel = TwoPhotonKernel::new(variant, &p.with_omega0(arr.site_omega0[site]));
        // The pair meets at `site`: the R photon has crossed the sites before
        // it, the L photon those after it.
        let before_r = product_over(&tr, 0..site, nr);
        let after_l = product_over(&tl, site + 1..n_sites, nl);
        let after_r = product_over(&tr, site + 1..n_sites, nr);
        let before_l = product_over(&tl, 0..site, nl);

        for (s, slot) in shell.iter_mut().enumerate() {
            let i_lo = s.saturating_sub(nl - 1);
            let i_hi = s.min(nr - 1);
            line.clear();
            for i in i_lo..=i_hi {
                let j = s - i;
                line.push(kernel.in_factor(wr[i], wl[j]) * before_r[i] * after_l[j] * input.values[i * nl + j]);
            }
            *slot = quad::integrate(&line, h);
        }
        for i in 0..nr {
            for j in 0..nl {
                let e = wr[i] + wl[j];
                let k = kernel.energy_factor(e) * kernel.out_factor(wr[i], wl[j]);
                out.values[i * nl + j] += after_r[i] * before_l[j] * k * shell[i + j];
            }
        }
    }
    Ok(out)
}

/// Ideal gate output `-(ψ_R ⊗ ψ_L)` after `n` ideal chiral transfers.
pub fn ideal_output_2(
    spec_r: &WavepacketSpec,
    spec_l: &WavepacketSpec,
    p: &MoleculeParams,
    n: usize,
    grid_r: &FrequencyGrid,
    grid_l: &FrequencyGrid,
) -> Result<Amplitude2D> {
    let r = ideal_output_1(spec_r, p, n, grid_r)?;
    let l = ideal_output_1(spec_l, p, n, grid_l)?;
    Ok(Amplitude2D::product(&r, &l).scaled(C64::new(-1.0, 0.0)))
}

/// `I₂ = ½|1 - Re⟨ideal|out⟩|`.
pub fn infidelity_2(out: &Amplitude2D, ideal: &Amplitude2D) -> Result<f64> {
    let overlap = ideal.inner(out)?;
    Ok(0.5 * (1.0 - overlap.re).abs())
}

/// A clean or disordered gate with resonant Gaussian inputs on both ports.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSetup {
    pub params: MoleculeParams,
    pub array: ArrayConfig,
    pub sigma: f64,
    pub grid_points: usize,
    pub half_width_sigmas: f64,
    pub variant: KernelVariant,
    pub elastic: ElasticMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateOutcome {
    pub infidelity: f64,
    pub overlap: C64,
    pub output_norm: f64,
}

impl GateSetup {
    /// Clean array of `n` molecules spaced by `5τ`, simplified kernel, ideal-t.
    pub fn new(params: MoleculeParams, n: usize, sigma: f64) -> Result<Self> {
        let array = ArrayConfig::clean(n, params.omega0, 5.0 * params.tau)?;
        Ok(GateSetup {
            params,
            array,
            sigma,
            grid_points: DEFAULT_POINTS_2D,
            half_width_sigmas: DEFAULT_HALF_WIDTH_SIGMAS,
            variant: KernelVariant::SimplifiedTotalU,
            elastic: ElasticMode::IdealT,
        })
    }

    pub fn specs(&self) -> (WavepacketSpec, WavepacketSpec) {
        (
            WavepacketSpec::resonant(&self.params, Direction::R, self.sigma),
            WavepacketSpec::resonant(&self.params, Direction::L, self.sigma),
        )
    }

    pub fn grids(&self) -> Result<(FrequencyGrid, FrequencyGrid)> {
        let (r, l) = self.specs();
        let hw = self.half_width_sigmas * self.sigma;
        Ok((
            FrequencyGrid::new(r.center, hw, self.grid_points)?,
            FrequencyGrid::new(l.center, hw, self.grid_points)?,
        ))
    }

    pub fn input(&self) -> Result<Amplitude2D> {
        let (sr, sl) = self.specs();
        let (gr, gl) = self.grids()?;
        Ok(Amplitude2D::product(&make_gaussian_spectrum(&sr, &gr)?, &make_gaussian_spectrum(&sl, &gl)?))
    }

    pub fn with_array(&self, array: ArrayConfig) -> Self {
        GateSetup { array, ..self.clone() }
    }

    pub fn evaluate(&self) -> Result<GateOutcome> {
        let input = self.input()?;
        let out = scatter_two_photon(&input, &self.params, &self.array, self.variant, self.elastic)?;
        let (sr, sl) = self.specs();
        let (gr, gl) = self.grids()?;
        let ideal = ideal_output_2(&sr, &sl, &self.params, self.array.n_molecules(), &gr, &gl)?;
        let overlap = ideal.inner(&out)?;
        Ok(GateOutcome { infidelity: 0.5 * (1.0 - overlap.re).abs(), overlap, output_norm: out.norm_sqr() })
    }
}
