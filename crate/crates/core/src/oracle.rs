//! Brute-force reference: molecules on a tight-binding waveguide, evolved in
//! time in the one-excitation sector (one or more molecules) and the
//! two-excitation sector (one molecule).
//!
//! The waveguide is a chain with dispersion `ω = -2h cos k`. Transmon `a`
//! couples to two sites `d` apart with phases `e^{±iφ/2}`; transmon `b` only
//! couples to `a`. Scattering amplitudes are read off the outgoing wave
//! packets by Fourier transforming them on the lattice.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

// Needed without std; with std linked the inherent float methods take over.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::params::{Amplitude2D, Direction, FrequencyGrid, MoleculeParams, Spectrum1D, DEFAULT_PHI};
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Largest Bessel argument per Chebyshev step.
const CHEBYSHEV_ARGUMENT: f64 = 400.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModel {
    pub n_sites: usize,
    pub hopping: f64,
    pub coupling_sites: (usize, usize),
    pub coupling_phase: f64,
    /// Coupling per contact point.
    pub coupling: f64,
    /// Transmon frequency measured from the band centre.
    pub omega0: f64,
    pub j: f64,
    pub ua: f64,
    pub ub: f64,
    /// Length of one Chebyshev propagation step; `None` picks it from the
    /// spectral range.
    pub time_step: Option<f64>,
    /// Lattice rate taken as the unit of continuum frequencies. Equal to the
    /// decay rate of the coupled molecule and kept when the coupling changes.
    pub rate_unit: f64,
    /// Identical molecules in a row, `copy_spacing` sites apart.
    pub copies: usize,
    pub copy_spacing: usize,
}

impl LatticeModel {
    /// Molecule at the band centre with both transitions on the chiral phases.
    ///
    /// The contacts are `d = 4m` sites apart and `J = 2h sin(π/2d)`, which puts
    /// `ω±` at wavenumbers `π/2 ± π/2d`, i.e. `kd = 2mπ ± π/2`. `Γ` is set to
    /// `J / j_over_gamma`; `ua`, `ub` are in units of `Γ`.
    pub fn chiral(n_sites: usize, order: usize, j_over_gamma: f64, ua: f64, ub: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("order", "must be at least 1"));
        }
        if !(j_over_gamma > 0.0) {
            return Err(Error::invalid("j_over_gamma", "must be positive"));
        }
        let hopping = 1.0;
        let d = 4 * order;
        let dk = PI / (2.0 * d as f64);
        let j = 2.0 * hopping * dk.sin();
        let gamma = j / j_over_gamma;
        let v = 2.0 * hopping * dk.cos();
        let centre = n_sites / 2;
        if centre < d / 2 || centre + d / 2 >= n_sites {
            return Err(Error::invalid("n_sites", "lattice too short for the contacts"));
        }
        Ok(LatticeModel {
            n_sites,
            hopping,
            coupling_sites: (centre - d / 2, centre + d / 2),
            coupling_phase: DEFAULT_PHI,
            coupling: (gamma * v / 2.0).sqrt(),
            omega0: 0.0,
            j,
            ua: ua * gamma,
            ub: ub * gamma,
            time_step: None,
            rate_unit: gamma,
            copies: 1,
            copy_spacing: 0,
        })
    }

    /// Same lattice and molecule with the waveguide coupling switched off.
    pub fn decoupled(&self) -> Self {
        LatticeModel { coupling: 0.0, ..self.clone() }
    }

    pub fn with_sites(&self, n_sites: usize) -> Result<Self> {
        let d = self.contact_distance();
        let centre = n_sites / 2;
        let m = LatticeModel { n_sites, coupling_sites: (centre - d / 2, centre + d / 2), ..self.clone() };
        if centre < d / 2 || m.span().1 >= n_sites {
            return Err(Error::invalid("n_sites", "lattice too short for the contacts"));
        }
        Ok(m)
    }

    /// `copies` molecules, each `spacing` sites after the previous one.
    pub fn with_copies(&self, copies: usize, spacing: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::invalid("copies", "need at least one molecule"));
        }
        if copies > 1 && spacing <= self.contact_distance() {
            return Err(Error::invalid("copy_spacing", "molecules would overlap"));
        }
        let m = LatticeModel { copies, copy_spacing: spacing, ..self.clone() };
        if m.span().1 >= m.n_sites {
            return Err(Error::invalid("n_sites", "lattice too short for the molecules"));
        }
        Ok(m)
    }

    /// First and last contact site.
    pub fn span(&self) -> (usize, usize) {
        (self.coupling_sites.0, self.coupling_sites.1 + (self.copies - 1) * self.copy_spacing)
    }

    /// Continuum spacing time equivalent to `copy_spacing`, in units of `1/Γ`.
    pub fn spacing_time(&self) -> Result<f64> {
        let (_, tau) = self.continuum_geometry()?;
        Ok(self.copy_spacing as f64 * tau / self.contact_distance() as f64)
    }

    pub fn contact_distance(&self) -> usize {
        self.coupling_sites.1 - self.coupling_sites.0
    }

    /// Midpoint of the contacts, the origin of the continuum description.
    pub fn centre(&self) -> f64 {
        (self.coupling_sites.0 + self.coupling_sites.1) as f64 / 2.0
    }

    /// Contacts of the first molecule.
    fn contacts(&self) -> [(usize, C64); 2] {
        self.contacts_of(0)
    }

    fn contacts_of(&self, copy: usize) -> [(usize, C64); 2] {
        let shift = copy * self.copy_spacing;
        [
            (self.coupling_sites.0 + shift, C64::from_polar(self.coupling, self.coupling_phase / 2.0)),
            (self.coupling_sites.1 + shift, C64::from_polar(self.coupling, -self.coupling_phase / 2.0)),
        ]
    }

    /// `k ∈ (0, π)` with `-2h cos k = ω`.
    pub fn wavenumber(&self, omega: f64) -> Result<f64> {
        let c = -omega / (2.0 * self.hopping);
        if !(c > -1.0 && c < 1.0) {
            return Err(Error::invalid("omega", alloc::format!("{omega} is outside the lattice band")));
        }
        Ok(c.acos())
    }

    pub fn group_velocity(&self, k: f64) -> f64 {
        2.0 * self.hopping * k.sin()
    }

    /// Waveguide decay rate at the upper transition, `2g²/v`.
    pub fn gamma(&self) -> f64 {
        let k = self.wavenumber(self.omega0 + self.j).unwrap_or(PI / 2.0);
        2.0 * self.coupling * self.coupling / self.group_velocity(k)
    }

    /// Continuum `(ω₀, τ)` in units of [`Self::rate_unit`] whose phases
    /// `ω±τ` equal the lattice phases `k(ω±) d`.
    fn continuum_geometry(&self) -> Result<(f64, f64)> {
        if !(self.j > 0.0) {
            return Err(Error::invalid("J", "the lattice mapping needs J > 0"));
        }
        let d = self.contact_distance() as f64;
        let kp = self.wavenumber(self.omega0 + self.j)?;
        let km = self.wavenumber(self.omega0 - self.j)?;
        let tau = (kp - km) * d / (2.0 * self.j) * self.rate_unit;
        Ok(((kp + km) * d / (2.0 * tau), tau))
    }

    /// Continuum molecule in units of [`Self::rate_unit`].
    ///
    /// Lattice frequencies map to `ω₀ + (ω_lat - ω₀_lat)/Γ`.
    pub fn effective_params(&self) -> Result<MoleculeParams> {
        let (omega0, tau) = self.continuum_geometry()?;
        let unit = self.rate_unit;
        let p = MoleculeParams {
            omega0,
            j: self.j / unit,
            ua: self.ua / unit,
            ub: self.ub / unit,
            gamma: self.gamma() / unit,
            gamma0: 0.0,
            tau,
            phi: self.coupling_phase,
        };
        p.validate()?;
        Ok(p)
    }

    /// Continuum (internal units) to lattice frequency.
    pub fn to_lattice_frequency(&self, omega: f64) -> Result<f64> {
        let (w0, _) = self.continuum_geometry()?;
        Ok(self.omega0 + (omega - w0) * self.rate_unit)
    }

    /// Relative spread of the group velocity over `centre ± sigma` (continuum units).
    pub fn group_velocity_spread(&self, centre: f64, sigma: f64) -> Result<f64> {
        let v0 = self.group_velocity(self.wavenumber(self.to_lattice_frequency(centre)?)?);
        let mut worst = 0.0f64;
        for w in [centre - sigma, centre + sigma] {
            let v = self.group_velocity(self.wavenumber(self.to_lattice_frequency(w)?)?);
            worst = worst.max((v / v0 - 1.0).abs());
        }
        Ok(worst)
    }
}

/// Gaussian wave packet `exp(-(x-x₀)²/(4w²) + i k x)` on the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePulse {
    pub centre_site: f64,
    /// Signed carrier wavenumber; positive moves right.
    pub wavenumber: f64,
    /// Envelope width `w` in sites.
    pub width: f64,
}

impl LatticePulse {
    /// Pulse on the transition its direction addresses, spectral width
    /// `sigma` (units of `Γ`), started six widths plus half a contact spacing
    /// before the first contact it meets.
    pub fn resonant(model: &LatticeModel, direction: Direction, sigma: f64) -> Result<Self> {
        let omega = match direction {
            Direction::R => model.omega0 + model.j,
            Direction::L => model.omega0 - model.j,
        };
        let k = model.wavenumber(omega)?;
        let width = model.group_velocity(k) / (2.0 * sigma * model.rate_unit);
        let offset = 6.0 * width + model.contact_distance() as f64 / 2.0;
        let (first, last) = model.span();
        let (centre_site, wavenumber) = match direction {
            Direction::R => (first as f64 - offset, k),
            Direction::L => (last as f64 + offset, -k),
        };
        Ok(LatticePulse { centre_site, wavenumber, width })
    }

    pub fn direction(&self) -> Direction {
        if self.wavenumber >= 0.0 {
            Direction::R
        } else {
            Direction::L
        }
    }

    pub fn distance_to(&self, site: f64) -> f64 {
        (self.centre_site - site).abs()
    }

    /// Normalized amplitudes on `n` sites.
    pub fn amplitudes(&self, n: usize) -> Vec<C64> {
        let mut v: Vec<C64> = (0..n)
            .map(|x| {
                let dx = x as f64 - self.centre_site;
                C64::from_polar((-dx * dx / (4.0 * self.width * self.width)).exp(), self.wavenumber * x as f64)
            })
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= norm;
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Extra evolution after the pulses have crossed the molecule, in `1/Γ`.
    pub settle_time: f64,
    pub norm_tolerance: f64,
    pub edge_tolerance: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { settle_time: 12.0, norm_tolerance: 1e-8, edge_tolerance: 1e-4 }
    }
}

/// Hermitian operator applied without storing a matrix.
trait Hamiltonian {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64], y: &mut [C64]);
    /// Interval containing the spectrum.
    fn bounds(&self) -> (f64, f64);
}

struct OneExcitation<'a>(&'a LatticeModel);

impl Hamiltonian for OneExcitation<'_> {
    fn dim(&self) -> usize {
        self.0.n_sites + 2 * self.0.copies
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let m = self.0;
        let n = m.n_sites;
        hop_line(&x[..n], &mut y[..n], m.hopping);
        for c in 0..m.copies {
            let ia = n + 2 * c;
            let (a, b) = (x[ia], x[ia + 1]);
            let mut ya = m.omega0 * a + m.j * b;
            for (site, g) in m.contacts_of(c) {
                y[site] += g * a;
                ya += g.conj() * x[site];
            }
            y[ia] = ya;
            y[ia + 1] = m.omega0 * b + m.j * a;
        }
    }

    fn bounds(&self) -> (f64, f64) {
        let m = self.0;
        let g = m.coupling;
        let photon = 2.0 * m.hopping + g;
        let a = m.j + 2.0 * g;
        let lo = (-photon).min(m.omega0 - a).min(m.omega0 - m.j);
        let hi = photon.max(m.omega0 + a).max(m.omega0 + m.j);
        (lo, hi)
    }
}

/// `y = -h (x[i-1] + x[i+1])` with open ends.
fn hop_line(x: &[C64], y: &mut [C64], h: f64) {
    let n = x.len();
    for i in 0..n {
        let left = if i > 0 { x[i - 1] } else { ZERO };
        let right = if i + 1 < n { x[i + 1] } else { ZERO };
        y[i] = -h * (left + right);
    }
}

/// Two excitations: photon pair `f(x, y)` (symmetric, `L²` entries), one
/// photon with `a` or `b` excited, and `|aa⟩, |bb⟩, |ab⟩`.
struct TwoExcitation<'a>(&'a LatticeModel);

impl TwoExcitation<'_> {
    fn offsets(&self) -> (usize, usize, usize) {
        let n = self.0.n_sites;
        (n * n, n * n + n, n * n + 2 * n)
    }
}

impl Hamiltonian for TwoExcitation<'_> {
    fn dim(&self) -> usize {
        let n = self.0.n_sites;
        n * n + 2 * n + 3
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let m = self.0;
        let n = m.n_sites;
        let h = m.hopping;
        let (ia, ib, im) = self.offsets();
        let (f, yf) = (&x[..ia], &mut y[..ia]);
        for r in 0..n {
            let row = &f[r * n..(r + 1) * n];
            let out = &mut yf[r * n..(r + 1) * n];
            hop_line(row, out, h);
            if r > 0 {
                for (o, v) in out.iter_mut().zip(&f[(r - 1) * n..r * n]) {
                    *o -= h * v;
                }
            }
            if r + 1 < n {
                for (o, v) in out.iter_mut().zip(&f[(r + 1) * n..(r + 2) * n]) {
                    *o -= h * v;
                }
            }
        }
        let ea = &x[ia..ib];
        let eb = &x[ib..im];
        let (aa, bb, ab) = (x[im], x[im + 1], x[im + 2]);
        {
            let (ya, rest) = y[ia..].split_at_mut(n);
            let yb = &mut rest[..n];
            hop_line(ea, ya, h);
            hop_line(eb, yb, h);
            for i in 0..n {
                ya[i] += m.omega0 * ea[i] + m.j * eb[i];
                yb[i] += m.omega0 * eb[i] + m.j * ea[i];
            }
        }
        let mut y_aa = (2.0 * m.omega0 - m.ua) * aa + SQRT_2 * m.j * ab;
        let y_bb = (2.0 * m.omega0 - m.ub) * bb + SQRT_2 * m.j * ab;
        let mut y_ab = 2.0 * m.omega0 * ab + SQRT_2 * m.j * (aa + bb);
        for (s, g) in m.contacts() {
            let gs = g * FRAC_1_SQRT_2;
            // Photon absorbed at a contact while the other one stays at `i`.
            for i in 0..n {
                y[i * n + s] += gs * ea[i];
                y[s * n + i] += gs * ea[i];
                y[ia + i] += gs.conj() * (f[s * n + i] + f[i * n + s]);
            }
            y[ia + s] += SQRT_2 * g * aa;
            y[ib + s] += g * ab;
            y_aa += SQRT_2 * g.conj() * ea[s];
            y_ab += g.conj() * eb[s];
        }
        y[im] = y_aa;
        y[im + 1] = y_bb;
        y[im + 2] = y_ab;
    }

    fn bounds(&self) -> (f64, f64) {
        let m = self.0;
        let g = m.coupling;
        // Gershgorin discs of each block.
        let discs = [
            (0.0, 4.0 * m.hopping + 2.0 * SQRT_2 * g),
            (m.omega0, 2.0 * m.hopping + m.j + 2.0 * SQRT_2 * g + 2.0 * SQRT_2 * g),
            (m.omega0, 2.0 * m.hopping + m.j + 2.0 * g),
            (2.0 * m.omega0 - m.ua, SQRT_2 * m.j + 2.0 * SQRT_2 * g),
            (2.0 * m.omega0 - m.ub, SQRT_2 * m.j),
            (2.0 * m.omega0, 2.0 * SQRT_2 * m.j + 2.0 * g),
        ];
        let lo = discs.iter().map(|(c, r)| c - r).fold(f64::INFINITY, f64::min);
        let hi = discs.iter().map(|(c, r)| c + r).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// `J_0(z) .. J_{n-1}(z)` by Miller's backward recurrence.
pub(crate) fn bessel_j_sequence(z: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = n.max(z as usize) + 40 + (z.sqrt() * 10.0) as usize;
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1e-300;
    for k in (1..=start).rev() {
        vals[k - 1] = 2.0 * k as f64 / z * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let norm = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    for (o, v) in out.iter_mut().zip(&vals) {
        *o = v / norm;
    }
    out
}

/// Chebyshev expansion of `exp(-iHt)` applied in place.
fn chebyshev_step<H: Hamiltonian>(ham: &H, psi: &mut [C64], dt: f64, work: &mut [Vec<C64>; 3]) {
    let (lo, hi) = ham.bounds();
    let centre = (hi + lo) / 2.0;
    let radius = (hi - lo) / 2.0 * 1.01;
    let z = radius * dt;
    let n_terms = (z + 10.0 * z.cbrt() + 20.0) as usize;
    let coeffs = bessel_j_sequence(z, n_terms);
    let n = psi.len();
    let [prev, cur, next] = work;
    prev.copy_from_slice(psi);
    // cur = H̃ psi with H̃ = (H - centre)/radius.
    ham.apply(prev, cur);
    for (c, p) in cur.iter_mut().zip(prev.iter()) {
        *c = (*c - centre * p) / radius;
    }
    let mut phase = -I;
    for i in 0..n {
        psi[i] = coeffs[0] * prev[i] + 2.0 * coeffs[1] * phase * cur[i];
    }
    for (k, &ck) in coeffs.iter().enumerate().skip(2) {
        phase *= -I;
        ham.apply(cur, next);
        let w = 2.0 * ck * phase;
        for i in 0..n {
            let t = 2.0 * (next[i] - centre * cur[i]) / radius - prev[i];
            next[i] = t;
            psi[i] += w * t;
        }
        core::mem::swap(prev, cur);
        core::mem::swap(cur, next);
        if k > z as usize && ck.abs() < 1e-17 {
            break;
        }
    }
    let global = C64::from_polar(1.0, -centre * dt);
    for v in psi.iter_mut() {
        *v *= global;
    }
}

fn evolve<H: Hamiltonian>(
    ham: &H,
    psi: &mut [C64],
    t_final: f64,
    time_step: Option<f64>,
    mut edge: impl FnMut(&[C64]) -> f64,
    edge_tolerance: f64,
) -> Result<f64> {
    let (lo, hi) = ham.bounds();
    let dt = time_step.unwrap_or(2.0 * CHEBYSHEV_ARGUMENT / (hi - lo));
    let n = ham.dim();
    let mut work = [vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]];
    let mut t = 0.0;
    let mut worst_edge = 0.0f64;
    while t < t_final {
        let step = dt.min(t_final - t);
        chebyshev_step(ham, psi, step, &mut work);
        t += step;
        worst_edge = worst_edge.max(edge(psi));
        if worst_edge > edge_tolerance {
            return Err(Error::BoundaryContamination { amplitude: worst_edge });
        }
    }
    Ok(worst_edge)
}

fn check_norm(psi: &[C64], tolerance: f64) -> Result<f64> {
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let deviation = (norm - 1.0).abs();
    if deviation > tolerance {
        return Err(Error::NormDrift { deviation });
    }
    Ok(deviation)
}

/// Spectral amplitude of lattice amplitudes `psi` on sites `range` at
/// wavenumber `k`, phases taken from `origin`: `Σ ψ(x) e^{-ik(x-origin)} / sqrt(2π v)`.
fn lattice_transform(psi: &[C64], range: core::ops::Range<usize>, origin: f64, k: f64, v: f64) -> C64 {
    let step = C64::from_polar(1.0, -k);
    let mut phase = C64::from_polar(1.0, -k * (range.start as f64 - origin));
    let mut acc = ZERO;
    for x in range {
        acc += psi[x] * phase;
        phase *= step;
    }
    acc / (2.0 * PI * v).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleOracleResult {
    /// Transmission and reflection on the band grid (continuum units).
    pub t: Vec<C64>,
    pub r: Vec<C64>,
    /// Interaction-picture spectra, unit norm in continuum units.
    pub input: Spectrum1D,
    pub transmitted: Spectrum1D,
    pub reflected: Spectrum1D,
    /// Lattice probabilities beyond the contacts at the final time.
    pub transmitted_power: f64,
    pub reflected_power: f64,
    pub molecule_population: f64,
    pub norm_deviation: f64,
    pub edge_amplitude: f64,
    pub final_time: f64,
}

/// Time for every pulse to cross the molecules and get as far past the last
/// contact as it started before the first one.
fn crossing_time(model: &LatticeModel, pulses: &[LatticePulse], settle: f64) -> f64 {
    let (first, last) = model.span();
    pulses
        .iter()
        .map(|p| {
            let travel = p.distance_to(first as f64) + p.distance_to(last as f64);
            travel / model.group_velocity(p.wavenumber.abs())
        })
        .fold(0.0, f64::max)
        + settle / model.rate_unit
}

/// Scatters one photon off the molecule; `grid` is in continuum units.
pub fn evolve_single(
    model: &LatticeModel,
    pulse: &LatticePulse,
    grid: &FrequencyGrid,
    opts: &OracleOptions,
) -> Result<SingleOracleResult> {
    let n = model.n_sites;
    let ham = OneExcitation(model);
    let initial = pulse.amplitudes(n);
    let mut psi = vec![ZERO; ham.dim()];
    psi[..n].copy_from_slice(&initial);
    let t_final = crossing_time(model, &[*pulse], opts.settle_time);
    let edge = |v: &[C64]| v[0].norm().max(v[1].norm()).max(v[n - 1].norm()).max(v[n - 2].norm());
    let edge_amplitude = evolve(&ham, &mut psi, t_final, model.time_step, edge, opts.edge_tolerance)?;
    let norm_deviation = check_norm(&psi, opts.norm_tolerance)?;

    let (x1, x2) = model.span();
    let right = x2 + 1..n;
    let left = 0..x1;
    let (fwd, back) = match pulse.direction() {
        Direction::R => (right.clone(), left.clone()),
        Direction::L => (left.clone(), right.clone()),
    };
    let sign = if pulse.direction() == Direction::R { 1.0 } else { -1.0 };
    let centre = model.centre();
    let jac = model.rate_unit.sqrt();
    let mut input = Vec::with_capacity(grid.n_points());
    let mut transmitted = Vec::with_capacity(grid.n_points());
    let mut reflected = Vec::with_capacity(grid.n_points());
    let mut t = Vec::with_capacity(grid.n_points());
    let mut r = Vec::with_capacity(grid.n_points());
    for w in grid.points() {
        let wl = model.to_lattice_frequency(w)?;
        let k = model.wavenumber(wl)?;
        let v = model.group_velocity(k);
        let free = C64::from_polar(1.0, wl * t_final);
        let a_in = lattice_transform(&initial, 0..n, centre, sign * k, v) * jac;
        let a_t = lattice_transform(&psi, fwd.clone(), centre, sign * k, v) * free * jac;
        let a_r = lattice_transform(&psi, back.clone(), centre, -sign * k, v) * free * jac;
        input.push(a_in);
        transmitted.push(a_t);
        reflected.push(a_r);
        t.push(a_t / a_in);
        r.push(a_r / a_in);
    }
    let power = |range: core::ops::Range<usize>| psi[range].iter().map(|z| z.norm_sqr()).sum::<f64>();
    Ok(SingleOracleResult {
        t,
        r,
        input: Spectrum1D { grid: *grid, values: input },
        transmitted: Spectrum1D { grid: *grid, values: transmitted },
        reflected: Spectrum1D { grid: *grid, values: reflected },
        transmitted_power: power(fwd),
        reflected_power: power(back),
        molecule_population: psi[n..].iter().map(|z| z.norm_sqr()).sum(),
        norm_deviation,
        edge_amplitude,
        final_time: t_final,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoOracleResult {
    /// Incoming pair `ψ_R(ω_R) ψ_L(ω_L)` and the outgoing amplitude with both
    /// photons transmitted, interaction picture, continuum units.
    pub input: Amplitude2D,
    pub output: Amplitude2D,
    /// Lattice probability of the transmitted-transmitted configuration.
    pub rl_probability: f64,
    /// Largest population of `|aa⟩ + |bb⟩` seen at the step boundaries.
    pub max_double_population: f64,
    pub molecule_population: f64,
    pub norm_deviation: f64,
    pub edge_amplitude: f64,
    pub final_time: f64,
}

impl TwoOracleResult {
    /// Doubly-excited transmons above this population flag the run.
    pub const DOUBLE_POPULATION_WARNING: f64 = 0.1;

    pub fn truncation_warning(&self) -> bool {
        self.max_double_population > Self::DOUBLE_POPULATION_WARNING
    }
}

/// Scatters a counter-propagating photon pair off the molecule.
pub fn evolve_two(
    model: &LatticeModel,
    pulse_r: &LatticePulse,
    pulse_l: &LatticePulse,
    grid_r: &FrequencyGrid,
    grid_l: &FrequencyGrid,
    opts: &OracleOptions,
) -> Result<TwoOracleResult> {
    if model.copies != 1 {
        return Err(Error::invalid("copies", "the two-excitation oracle holds one molecule"));
    }
    if pulse_r.direction() != Direction::R || pulse_l.direction() != Direction::L {
        return Err(Error::invalid("pulse", "need one right- and one left-moving pulse"));
    }
    let n = model.n_sites;
    let ham = TwoExcitation(model);
    let (ia, _, im) = ham.offsets();
    let ar = pulse_r.amplitudes(n);
    let al = pulse_l.amplitudes(n);
    let mut psi = vec![ZERO; ham.dim()];
    for x in 0..n {
        for y in 0..n {
            psi[x * n + y] = (ar[x] * al[y] + al[x] * ar[y]) * FRAC_1_SQRT_2;
        }
    }
    let t_final = crossing_time(model, &[*pulse_r, *pulse_l], opts.settle_time);
    let mut max_double = 0.0f64;
    let edge = |v: &[C64]| {
        max_double = max_double.max(v[im].norm_sqr() + v[im + 1].norm_sqr());
        let mut e = 0.0f64;
        for i in 0..n {
            for (x, y) in [(0, i), (n - 1, i), (i, 0), (i, n - 1)] {
                e = e.max(v[x * n + y].norm());
            }
        }
        e
    };
    let edge_amplitude = evolve(&ham, &mut psi, t_final, model.time_step, edge, opts.edge_tolerance)?;
    let norm_deviation = check_norm(&psi, opts.norm_tolerance)?;

    let (x1, x2) = model.coupling_sites;
    let jac = model.rate_unit.sqrt();
    let axis = |grid: &FrequencyGrid| -> Result<Vec<(f64, f64, f64)>> {
        grid.points()
            .map(|w| {
                let wl = model.to_lattice_frequency(w)?;
                let k = model.wavenumber(wl)?;
                Ok((wl, k, model.group_velocity(k)))
            })
            .collect()
    };
    let centre = model.centre();
    let kr = axis(grid_r)?;
    let kl = axis(grid_l)?;
    let spectrum = |amps: &[C64], range: core::ops::Range<usize>, axis: &[(f64, f64, f64)], sign: f64| -> Vec<C64> {
        axis.iter().map(|&(_, k, v)| lattice_transform(amps, range.clone(), centre, sign * k, v) * jac).collect()
    };
    let in_r = spectrum(&ar, 0..n, &kr, 1.0);
    let in_l = spectrum(&al, 0..n, &kl, -1.0);
    let input = Amplitude2D::product(
        &Spectrum1D { grid: *grid_r, values: in_r },
        &Spectrum1D { grid: *grid_l, values: in_l },
    );

    // Both photons transmitted: R photon right of the contacts, L photon left.
    // The amplitude of the ordered pair is sqrt(2) f(x, y).
    let rows = x2 + 1..n;
    let cols = 0..x1;
    let mut rl_probability = 0.0;
    // Transform along y first: g[x][j] = Σ_y f(x, y) e^{+i k_j (y - centre)}.
    let mut partial = vec![ZERO; rows.len() * kl.len()];
    for (ri, x) in rows.clone().enumerate() {
        let row = &psi[x * n..(x + 1) * n];
        rl_probability += row[cols.clone()].iter().map(|z| z.norm_sqr()).sum::<f64>();
        for (j, &(_, k, v)) in kl.iter().enumerate() {
            partial[ri * kl.len() + j] = lattice_transform(row, cols.clone(), centre, -k, v);
        }
    }
    let mut output = Amplitude2D::zeros(*grid_r, *grid_l);
    let nl = kl.len();
    for (i, &(wr, k, v)) in kr.iter().enumerate() {
        let step = C64::from_polar(1.0, -k);
        let mut phase = C64::from_polar(1.0, -k * (rows.start as f64 - centre));
        let mut acc = vec![ZERO; nl];
        for ri in 0..rows.len() {
            for (a, p) in acc.iter_mut().zip(&partial[ri * nl..(ri + 1) * nl]) {
                *a += p * phase;
            }
            phase *= step;
        }
        for (j, &(wl, _, _)) in kl.iter().enumerate() {
            let free = C64::from_polar(1.0, (wr + wl) * t_final);
            output.values[i * nl + j] = SQRT_2 * acc[j] / (2.0 * PI * v).sqrt() * free * (jac * jac);
        }
    }
    let molecule_population = psi[ia..].iter().map(|z| z.norm_sqr()).sum();
    Ok(TwoOracleResult {
        input,
        output,
        rl_probability: 2.0 * rl_probability,
        max_double_population: max_double,
        molecule_population,
        norm_deviation,
        edge_amplitude,
        final_time: t_final,
    })
}
