use std::f64::consts::PI;

use gatewave_core::imperfections::*;
use gatewave_core::two_photon::GateSetup;
use gatewave_core::*;
use proptest::prelude::*;

fn gate(n: usize, sigma: f64) -> GateSetup {
    let p = MoleculeParams::from_phases(21.0 * PI, 1.5 * PI, 1.5 * PI / 100.0, 100.0).unwrap();
    GateSetup::new(p, n, sigma).unwrap()
}

fn template(seed: u64) -> DisorderSpec {
    DisorderSpec { sigma_omega0: 0.0, n_realizations: 15, seed }
}

#[test]
fn sampled_frequencies_are_unbiased() {
    let base = gate(1, 0.1).params;
    let spec = DisorderSpec { sigma_omega0: 0.3, n_realizations: 10_000, seed: 11 };
    let draws: Vec<f64> = sample_disorder(&spec, &base, 1, 0.1).unwrap().iter().map(|a| a.site_omega0[0] - base.omega0).collect();
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let sd = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(mean.abs() < 5.0 * 0.3 / n.sqrt(), "{mean}");
    assert!((sd - 0.3).abs() < 0.02, "{sd}");
}

#[test]
fn realizations_are_seed_determined() {
    let base = gate(1, 0.1).params;
    let spec = DisorderSpec { sigma_omega0: 0.05, n_realizations: 4, seed: 3 };
    assert_eq!(sample_disorder(&spec, &base, 8, 0.1).unwrap(), sample_disorder(&spec, &base, 8, 0.1).unwrap());
    let zero = DisorderSpec { sigma_omega0: 0.0, ..spec };
    for a in sample_disorder(&zero, &base, 8, 0.1).unwrap() {
        assert!(a.site_omega0.iter().all(|&w| w == base.omega0));
    }
}

#[test]
fn zero_disorder_reproduces_the_clean_gate() {
    let g = gate(4, 0.1);
    let clean = g.evaluate().unwrap().infidelity;
    let point = disorder_point(&g, 0.0, &template(1)).unwrap();
    let stats = point.stats.unwrap();
    assert!((stats.geometric_mean - clean).abs() < 1e-10 * clean);
    assert!((stats.multiplicative_dispersion - 1.0).abs() < 1e-10);
    assert!(point.failures.is_empty());
}

#[test]
fn weak_disorder_stays_near_the_clean_gate() {
    let g = gate(4, 0.1);
    let clean = g.evaluate().unwrap().infidelity;
    let gm = disorder_point(&g, 0.01, &template(5)).unwrap().stats.unwrap().geometric_mean;
    assert!(gm < 2.0 * clean && gm > 0.5 * clean, "{gm} {clean}");
}

#[test]
fn infidelity_grows_with_disorder() {
    let g = gate(4, 0.1);
    let sweep = run_disorder_sweep(&g, &[0.001, 0.01, 0.1], &template(9)).unwrap();
    let gm: Vec<f64> = sweep.iter().map(|p| p.stats.as_ref().unwrap().geometric_mean).collect();
    assert!(gm.windows(2).all(|w| w[1] >= w[0]), "{gm:?}");
}

#[test]
fn loss_degrades_longer_arrays_faster() {
    let rates = [1e-4, 1e-3, 1e-2];
    let short: Vec<f64> = run_loss_sweep(&gate(4, 0.1), &rates).unwrap().iter().map(|(_, o)| o.infidelity).collect();
    let long: Vec<f64> = run_loss_sweep(&gate(12, 0.045), &rates).unwrap().iter().map(|(_, o)| o.infidelity).collect();
    assert!(short.windows(2).all(|w| w[1] > w[0]), "{short:?}");
    assert!(long.windows(2).all(|w| w[1] > w[0]), "{long:?}");
    assert!(long[2] - long[0] > short[2] - short[0]);
}

#[test]
fn lossy_output_loses_norm() {
    let (_, o) = run_loss_sweep(&gate(4, 0.1), &[1e-2]).unwrap()[0];
    assert!(o.output_norm < 1.0);
}

#[test]
fn failed_realizations_are_recorded() {
    // A spread of 1000Γ pushes some site frequencies below zero.
    let g = gate(4, 0.1);
    let point = disorder_point(&g, 1000.0, &template(2)).unwrap();
    assert!(!point.failures.is_empty());
    let ok = point.stats.map_or(0, |s| s.raw_values.len());
    assert_eq!(ok + point.failures.len(), 15);
}

#[test]
fn stats_reference_values() {
    let s = ensemble_stats(&[0.01, 0.01, 0.01]).unwrap();
    assert!((s.geometric_mean - 0.01).abs() < 1e-15);
    assert!((s.multiplicative_dispersion - 1.0).abs() < 1e-12);
    let s = ensemble_stats(&[0.01, 0.04]).unwrap();
    assert!((s.geometric_mean - 0.02).abs() < 1e-15);
    assert!((s.multiplicative_dispersion - 2.0).abs() < 1e-12);
    assert!(ensemble_stats(&[]).is_err());
}

proptest! {
    #[test]
    fn geometric_mean_bounds(values in proptest::collection::vec(1e-8f64..1.0, 1..40)) {
        let s = ensemble_stats(&values).unwrap();
        let am = values.iter().sum::<f64>() / values.len() as f64;
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(s.geometric_mean <= am * (1.0 + 1e-12));
        prop_assert!(s.geometric_mean >= lo * (1.0 - 1e-12));
        prop_assert!(s.multiplicative_dispersion >= 1.0);
    }
}
