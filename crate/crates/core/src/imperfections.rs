//! Frequency disorder ensembles and their geometric-mean statistics.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

// Needed without std; with std linked the inherent float methods take over.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::params::{ArrayConfig, MoleculeParams};
use crate::two_photon::{GateOutcome, GateSetup};

/// Generator name recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.3) seeded via seed_from_u64; StandardNormal (rand_distr 0.4)";

/// Values at or below zero are replaced by this before taking logarithms.
pub const ZERO_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderSpec {
    pub sigma_omega0: f64,
    pub n_realizations: usize,
    pub seed: u64,
}

impl DisorderSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_omega0 >= 0.0 && self.sigma_omega0.is_finite()) {
            return Err(Error::invalid("sigma_omega0", "must be non-negative"));
        }
        if self.n_realizations == 0 {
            return Err(Error::invalid("n_realizations", "must be at least 1"));
        }
        Ok(())
    }
}

/// Arrays whose site frequencies are `ω₀ + δω₀ z` with i.i.d. standard normal `z`.
///
/// The normal draws depend only on the seed, so ensembles at different
/// `δω₀` share their random numbers.
pub fn sample_disorder(spec: &DisorderSpec, base: &MoleculeParams, n: usize, spacing_time: f64) -> Result<Vec<ArrayConfig>> {
    sample_sites(spec, base, n)?.into_iter().map(|sites| ArrayConfig::with_sites(sites, spacing_time)).collect()
}

fn sample_sites(spec: &DisorderSpec, base: &MoleculeParams, n: usize) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..spec.n_realizations)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    base.omega0 + spec.sigma_omega0 * z
                })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub geometric_mean: f64,
    /// `exp` of the population standard deviation of `ln v`.
    pub multiplicative_dispersion: f64,
    pub raw_values: Vec<f64>,
    /// Number of exactly-zero values clamped to [`ZERO_CLAMP`].
    pub clamped: usize,
}

pub fn ensemble_stats(values: &[f64]) -> Result<EnsembleStats> {
    if values.is_empty() {
        return Err(Error::invalid("values", "empty ensemble"));
    }
    let mut clamped = 0;
    let mut logs = Vec::with_capacity(values.len());
    for (index, &v) in values.iter().enumerate() {
        if v == 0.0 {
            clamped += 1;
            logs.push(ZERO_CLAMP.ln());
        } else if v > 0.0 && v.is_finite() {
            logs.push(v.ln());
        } else {
            return Err(Error::NonPositiveValue { index, value: v });
        }
    }
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / n;
    Ok(EnsembleStats {
        geometric_mean: mean.exp(),
        multiplicative_dispersion: var.sqrt().exp(),
        raw_values: values.to_vec(),
        clamped,
    })
}

/// Ensemble at one disorder strength.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderPoint {
    pub sigma_omega0: f64,
    /// Over the realizations that succeeded; `None` if none did.
    pub stats: Option<EnsembleStats>,
    pub failures: Vec<(usize, Error)>,
}

/// Gate infidelity ensembles for each disorder strength in `deltas`.
///
/// `template` supplies the realization count and seed. The array geometry,
/// grid, kernel and elastic mode come from `setup`.
pub fn run_disorder_sweep(setup: &GateSetup, deltas: &[f64], template: &DisorderSpec) -> Result<Vec<DisorderPoint>> {
    deltas.iter().map(|&d| disorder_point(setup, d, template)).collect()
}

/// Gate outcome for each non-guided loss rate in `gamma0s`, clean array.
pub fn run_loss_sweep(setup: &GateSetup, gamma0s: &[f64]) -> Result<Vec<(f64, GateOutcome)>> {
    gamma0s
        .iter()
        .map(|&g0| {
            let mut s = setup.clone();
            s.params = s.params.with_gamma0(g0);
            s.params.validate()?;
            Ok((g0, s.evaluate()?))
        })
        .collect()
}

pub fn disorder_point(setup: &GateSetup, sigma_omega0: f64, template: &DisorderSpec) -> Result<DisorderPoint> {
    let spec = DisorderSpec { sigma_omega0, ..*template };
    let n = setup.array.n_molecules();
    let draws = sample_sites(&spec, &setup.params, n)?;
    let mut values = Vec::with_capacity(draws.len());
    let mut failures = Vec::new();
    for (k, sites) in draws.into_iter().enumerate() {
        let outcome = ArrayConfig::with_sites(sites, setup.array.spacing_time).and_then(|arr| setup.with_array(arr).evaluate());
        match outcome {
            Ok(o) => values.push(o.infidelity),
            Err(e) => failures.push((k, e)),
        }
    }
    let stats = if values.is_empty() { None } else { Some(ensemble_stats(&values)?) };
    Ok(DisorderPoint { sigma_omega0, stats, failures })
}
