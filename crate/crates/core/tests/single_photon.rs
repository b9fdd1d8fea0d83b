use std::f64::consts::{FRAC_PI_2, PI};

use gatewave_core::single_photon::*;
use gatewave_core::*;
use proptest::prelude::*;

fn fig2(gamma_tau: f64) -> MoleculeParams {
    MoleculeParams::from_phases(21.0 * PI, 1.5 * PI, gamma_tau, 100.0).unwrap()
}

fn fig2_array(p: &MoleculeParams, n: usize) -> ArrayConfig {
    ArrayConfig::clean(n, p.omega0, 5.0 * p.tau).unwrap()
}

#[test]
fn coupling_nodes() {
    let p = fig2(0.05);
    let g = (0.5f64).sqrt();
    // kτ + φ = 0 and π
    let k0 = FRAC_PI_2 / p.tau;
    assert!((coupling_gk(k0, &p).norm() - (2.0 / PI).sqrt() * g).abs() < 1e-12);
    assert!(coupling_gk(k0 + PI / p.tau, &p).norm() < 1e-9);
    let right = coupling_gk(p.omega_plus(), &p).norm_sqr();
    assert!((right - 1.0 / PI).abs() < 1e-9);
}

#[test]
fn decay_rates_split_the_total() {
    let p = fig2(0.05);
    let at = |phase: f64| decay_rates(phase / p.tau, &p).unwrap();
    let d = at(FRAC_PI_2);
    assert!((d.gamma_r - 1.0).abs() < 1e-12 && d.gamma_l.abs() < 1e-12);
    let d = at(0.0);
    assert!((d.gamma_r - 0.5).abs() < 1e-12 && (d.gamma_l - 0.5).abs() < 1e-12);

    let plus = decay_rates(p.omega_plus(), &p).unwrap();
    let minus = decay_rates(p.omega_minus(), &p).unwrap();
    assert!((plus.gamma_r - 1.0).abs() < 1e-12 && plus.gamma_l.abs() < 1e-12);
    assert!(minus.gamma_r.abs() < 1e-12 && (minus.gamma_l - 1.0).abs() < 1e-12);

    let mut q = p;
    q.phi = 0.3;
    assert!(matches!(decay_rates(p.omega_plus(), &q), Err(Error::UnsupportedPhase { .. })));
}

#[test]
fn green_mixing_is_small_at_large_splitting() {
    let p = MoleculeParams::from_phases(21.0 * PI, 1.5 * PI, 1.5 * PI / 20.0, 100.0).unwrap();
    assert!((p.j - 20.0).abs() < 1e-12);
    let g = green_components(p.omega_plus(), &p).unwrap();
    assert!(g.mixing_ratio() < 0.05);
}

#[test]
fn green_bare_limit() {
    let mut p = fig2(0.05);
    p.gamma = 1e-10;
    let w = p.omega_plus() + 0.3;
    let g = green_components(w, &p).unwrap();
    let bare = 1.0 / (w - p.omega_plus());
    assert!((g.g_pp - bare).norm() < 1e-8 * bare);
    assert!(g.g_pm.norm() < 1e-8);
}

#[test]
fn green_approximant_deviation_at_j_ten() {
    let p = MoleculeParams::from_phases(21.0 * PI, 1.5 * PI, 1.5 * PI / 10.0, 100.0).unwrap();
    let mut worst = 0.0f64;
    for i in 0..=200 {
        let w = p.omega_plus() - 1.0 + i as f64 * 0.01;
        let g = green_components(w, &p).unwrap();
        worst = worst.max((g.g_pp - g.approx_pp).norm() / g.approx_pp.norm());
    }
    assert!(worst.is_finite() && worst > 0.0 && worst < 0.1, "{worst}");
}

#[test]
fn mixing_decreases_with_splitting() {
    let ratios: Vec<f64> = [1.0, 10.0, 20.0]
        .iter()
        .map(|&j| {
            let p = MoleculeParams::from_phases(21.0 * PI, 1.5 * PI, 1.5 * PI / j, 100.0).unwrap();
            (0..=400)
                .map(|i| p.omega_plus() - 2.0 + i as f64 * 0.01)
                .map(|w| green_components(w, &p).unwrap().mixing_ratio())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(ratios[0] > ratios[1] && ratios[1] > ratios[2], "{ratios:?}");
}

#[test]
fn chiral_single_site() {
    let p = fig2(1e-3);
    let s = single_site_s(p.omega_plus(), &p).unwrap();
    assert!((s.t_r + 1.0).norm() < 1e-3);
    assert!(s.r.norm() < 1e-3);
    let s = single_site_s(p.omega_minus(), &p).unwrap();
    assert!((s.t_l + 1.0).norm() < 1e-3);
}

#[test]
fn loss_makes_transmission_subunitary() {
    let p = fig2(0.05).with_gamma0(1.0 / 200.0);
    let s = single_site_s(p.omega_plus(), &p).unwrap();
    assert!(s.t_r.norm_sqr() < 1.0);
    assert!(s.t_r.norm_sqr() + s.r.norm_sqr() < 1.0);
}

#[test]
fn ideal_transmission_is_an_all_pass_with_fixed_delay() {
    let p = fig2(0.05);
    assert!((ideal_t(p.omega_plus(), Branch::Plus, &p) + 1.0).norm() < 1e-15);
    for i in 0..100 {
        let w = p.omega_minus() - 5.0 + 0.1 * i as f64;
        assert!((ideal_t(w, Branch::Minus, &p).norm() - 1.0).abs() < 1e-14);
    }
    let h = 1e-4;
    for (w, b) in [(p.omega_plus(), Branch::Plus), (p.omega_minus(), Branch::Minus)] {
        let ratio = ideal_t(w + h, b, &p) / ideal_t(w - h, b, &p);
        let delay = ratio.arg() / (2.0 * h);
        assert!((delay - 4.0).abs() < 4e-3, "{delay}");
    }
    assert_eq!(ideal_delay(&p), 4.0);
}

#[test]
fn one_site_array_is_the_single_site() {
    let p = fig2(0.05);
    let arr = fig2_array(&p, 1);
    for i in 0..101 {
        let w = p.omega_plus() - 3.0 + 0.06 * i as f64;
        let a = array_s(w, &p, &arr).unwrap();
        let s = single_site_s(w, &p).unwrap();
        assert!((a.t_r - s.t_r).norm() < 1e-12);
        assert!((a.t_l - s.t_l).norm() < 1e-12);
        assert!((a.r_r - s.r).norm() < 1e-12);
        assert!((a.r_l - s.r).norm() < 1e-12);
    }
}

#[test]
fn total_reflection_is_reported() {
    // Single transmon at a bidirectional point reflects fully on resonance.
    let p = MoleculeParams::from_phases(20.0 * PI, 0.0, 0.05, 0.0).unwrap();
    let arr = ArrayConfig::clean(2, p.omega0, 5.0 * p.tau).unwrap();
    assert!(matches!(array_s(p.omega0, &p, &arr), Err(Error::IllConditionedTransfer { .. })));
}

#[test]
fn empty_array_passes_the_pulse() {
    let p = fig2(0.05);
    let spec = WavepacketSpec::resonant(&p, Direction::R, 0.1);
    let grid = spec.default_grid(DEFAULT_POINTS_1D).unwrap();
    let out = propagate_pulse(&spec, &p, &ArrayConfig::empty(), &grid).unwrap();
    let input = make_gaussian_spectrum(&spec, &grid).unwrap();
    assert_eq!(out.output, input);
    assert!((out.transmittance - 1.0).abs() < 1e-12);
    assert_eq!(out.reflectance, 0.0);
}

#[test]
fn chiral_regime_transmits() {
    let p = fig2(0.05);
    for dir in [Direction::R, Direction::L] {
        let spec = WavepacketSpec::resonant(&p, dir, 0.1);
        let grid = spec.default_grid(DEFAULT_POINTS_1D).unwrap();
        let out = propagate_pulse(&spec, &p, &fig2_array(&p, 2), &grid).unwrap();
        assert!(out.transmittance > 0.99, "{}", out.transmittance);
    }
}

#[test]
fn lossless_flux_is_conserved_for_any_coupling() {
    for gamma_tau in [0.01, 0.03, 0.1, 0.3, 1.0] {
        let p = fig2(gamma_tau);
        let spec = WavepacketSpec::resonant(&p, Direction::R, 0.1);
        let grid = spec.default_grid(DEFAULT_POINTS_1D).unwrap();
        let out = propagate_pulse(&spec, &p, &fig2_array(&p, 4), &grid).unwrap();
        assert!((out.transmittance + out.reflectance - 1.0).abs() < 1e-6, "{gamma_tau}");
    }
}

#[test]
fn ideal_single_photon_output() {
    let p = fig2(0.05);
    let spec = WavepacketSpec::resonant(&p, Direction::L, 0.1);
    let grid = spec.default_grid(DEFAULT_POINTS_1D).unwrap();
    let gauss = make_gaussian_spectrum(&spec, &grid).unwrap();
    assert_eq!(ideal_output_1(&spec, &p, 0, &grid).unwrap(), gauss);

    let two = ideal_output_1(&spec, &p, 2, &grid).unwrap();
    let three = ideal_output_1(&spec, &p, 3, &grid).unwrap();
    assert!((two.norm_sqr() - 1.0).abs() < 1e-8 && (three.norm_sqr() - 1.0).abs() < 1e-8);
    let mid = grid.n_points() / 2;
    assert!((two.values[mid] + three.values[mid]).norm() < 1e-15);
}

#[test]
fn single_photon_infidelity_reference_values() {
    let p = fig2(0.05);
    let spec = WavepacketSpec::resonant(&p, Direction::R, 0.1);
    let grid = spec.default_grid(DEFAULT_POINTS_1D).unwrap();
    let ideal = ideal_output_1(&spec, &p, 3, &grid).unwrap();
    assert!(infidelity_1(&ideal, &ideal).unwrap() < 1e-12);
    assert!((infidelity_1(&Spectrum1D::zeros(grid), &ideal).unwrap() - 0.5).abs() < 1e-15);
    let unsigned = ideal.scaled(C64::new(-1.0, 0.0));
    assert!((infidelity_1(&unsigned, &ideal).unwrap() - 1.0).abs() < 1e-8);

    let other = FrequencyGrid::new(grid.center(), grid.half_width(), 101).unwrap();
    assert!(matches!(infidelity_1(&Spectrum1D::zeros(other), &ideal), Err(Error::GridMismatch)));
}

#[test]
fn infidelity_falls_as_the_molecules_shrink() {
    let values: Vec<f64> = (0..20)
        .map(|i| 10f64.powf(-2.0 + 2.0 * i as f64 / 19.0))
        .map(|gamma_tau| {
            let p = fig2(gamma_tau);
            let spec = WavepacketSpec::resonant(&p, Direction::R, 0.1);
            let grid = spec.default_grid(DEFAULT_POINTS_1D).unwrap();
            let arr = fig2_array(&p, 2);
            let out = propagate_pulse(&spec, &p, &arr, &grid).unwrap();
            infidelity_1(&out.output, &ideal_output_1(&spec, &p, 2, &grid).unwrap()).unwrap()
        })
        .collect();
    for w in values.windows(2) {
        assert!(w[0] < w[1], "{values:?}");
    }
}

proptest! {
    #[test]
    fn single_site_is_unitary(offset in -30.0f64..30.0, gamma_tau in 0.001f64..1.0, j_tau in 0.0f64..3.0) {
        let p = MoleculeParams::from_phases(21.0 * PI, j_tau * PI, gamma_tau, 100.0).unwrap();
        if let Ok(s) = single_site_s(p.omega0 + offset, &p) {
            prop_assert!((s.t_r.norm_sqr() + s.r.norm_sqr() - 1.0).abs() < 1e-9);
            prop_assert!((s.t_l.norm_sqr() + s.r.norm_sqr() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn two_site_array_is_unitary(offset in -30.0f64..30.0, gamma_tau in 0.001f64..1.0) {
        let p = fig2(gamma_tau);
        let s = array_s(p.omega0 + offset, &p, &fig2_array(&p, 2)).unwrap();
        prop_assert!((s.t_r.norm_sqr() + s.r_r.norm_sqr() - 1.0).abs() < 1e-9);
        prop_assert!((s.t_l.norm_sqr() + s.r_l.norm_sqr() - 1.0).abs() < 1e-9);
    }
}
