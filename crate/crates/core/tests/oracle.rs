use gatewave_core::oracle::*;
use gatewave_core::single_photon::{array_s, single_site_s};
use gatewave_core::*;

const TOLERANCE: f64 = 1e-2;

fn model() -> LatticeModel {
    LatticeModel::chiral(2000, 1, 20.0, 50.0, 50.0).unwrap()
}

fn run(model: &LatticeModel, dir: Direction, sigma: f64, opts: &OracleOptions) -> (SingleOracleResult, FrequencyGrid) {
    // the decoupled model has no Γ of its own; take the grid from the coupled one
    let p = LatticeModel { coupling: model.coupling.max(1e-3), ..model.clone() }.effective_params().unwrap();
    let pulse = LatticePulse::resonant(model, dir, sigma).unwrap();
    let grid = FrequencyGrid::new(p.resonance(dir.branch()), 8.0 * sigma, 129).unwrap();
    (evolve_single(model, &pulse, &grid, opts).unwrap(), grid)
}

/// Largest deviation over `centre ± band`.
fn worst(grid: &FrequencyGrid, band: f64, f: impl Fn(usize, f64) -> f64) -> f64 {
    let c = grid.center();
    grid.points().enumerate().filter(|(_, w)| (w - c).abs() <= band).map(|(i, w)| f(i, w)).fold(0.0, f64::max)
}

#[test]
fn effective_molecule_is_chiral() {
    let p = model().effective_params().unwrap();
    assert!(p.check_chiral_condition().is_chiral());
    assert!((p.gamma - 1.0).abs() < 1e-12);
    assert!((p.j - 20.0).abs() < 1e-12);
}

#[test]
fn decoupled_lattice_is_transparent() {
    let m = model().decoupled();
    for dir in [Direction::R, Direction::L] {
        let (res, grid) = run(&m, dir, 1.0, &OracleOptions::default());
        assert!(res.norm_deviation < 1e-8);
        assert!(worst(&grid, 2.0, |i, _| (res.t[i] - 1.0).norm()) < 1e-6);
        assert!(worst(&grid, 2.0, |i, _| res.r[i].norm()) < 1e-6);
    }
}

#[test]
fn single_photon_matches_the_continuum() {
    let m = model();
    let p = m.effective_params().unwrap();
    for dir in [Direction::R, Direction::L] {
        let (res, grid) = run(&m, dir, 1.0, &OracleOptions::default());
        let dt = worst(&grid, 2.0, |i, w| {
            let s = single_site_s(w, &p).unwrap();
            let t = if dir == Direction::R { s.t_r } else { s.t_l };
            (res.t[i] - t).norm()
        });
        let dr = worst(&grid, 2.0, |i, w| (res.r[i] - single_site_s(w, &p).unwrap().r).norm());
        assert!(dt < TOLERANCE && dr < TOLERANCE, "{dir:?} {dt} {dr}");
        assert!(res.reflected_power < 1e-3, "{}", res.reflected_power);
        assert!(res.norm_deviation < 1e-8);
    }
}

#[test]
fn lattice_dispersion_is_flat_over_the_pulse() {
    let m = model();
    let p = m.effective_params().unwrap();
    for b in [Branch::Plus, Branch::Minus] {
        assert!(m.group_velocity_spread(p.resonance(b), 1.0).unwrap() < 1e-2);
    }
}

#[test]
fn oracle_is_self_converged() {
    let m = model();
    let (base, grid) = run(&m, Direction::R, 1.0, &OracleOptions::default());

    let mut coarse = m.clone();
    coarse.time_step = Some(100.0);
    let mut fine = m.clone();
    fine.time_step = Some(50.0);
    let (coarse, _) = run(&coarse, Direction::R, 1.0, &OracleOptions::default());
    let (fine, _) = run(&fine, Direction::R, 1.0, &OracleOptions::default());
    let d = worst(&grid, 2.0, |i, _| (coarse.t[i] - fine.t[i]).norm());
    assert!(d < 1e-3, "{d}");
    let (longer, _) = run(&m.with_sites(4000).unwrap(), Direction::R, 1.0, &OracleOptions::default());
    for other in [fine, longer] {
        let d = worst(&grid, 2.0, |i, _| (other.t[i] - base.t[i]).norm());
        assert!(d < 1e-3, "{d}");
    }
}

#[test]
fn two_molecules_match_the_transfer_matrix() {
    // 8 sites apart, i.e. 0.157/Γ of travel between the molecules.
    let m = LatticeModel::chiral(2800, 1, 20.0, 50.0, 50.0).unwrap().with_copies(2, 8).unwrap();
    let p = m.effective_params().unwrap();
    let spacing = m.spacing_time().unwrap();
    let arr = ArrayConfig::clean(2, p.omega0, spacing).unwrap();
    let opts = OracleOptions { settle_time: 20.0, ..Default::default() };
    for dir in [Direction::R, Direction::L] {
        let (res, grid) = run(&m, dir, 1.0, &opts);
        let mid = grid.n_points() / 2;
        // the resonance and ±0.5Γ
        for i in [mid - 4, mid, mid + 4] {
            let w = grid.point(i);
            let s = array_s(w, &p, &arr).unwrap();
            let t = if dir == Direction::R { s.t_r } else { s.t_l } * C64::from_polar(1.0, -w * spacing);
            assert!((res.t[i] - t).norm() < TOLERANCE, "{dir:?} {i} {} {}", res.t[i], t);
        }
    }
}

#[test]
fn two_photon_oracle_rejects_arrays() {
    let m = LatticeModel::chiral(400, 1, 20.0, 50.0, 50.0).unwrap().with_copies(2, 8).unwrap();
    let pr = LatticePulse::resonant(&m, Direction::R, 2.0).unwrap();
    let pl = LatticePulse::resonant(&m, Direction::L, 2.0).unwrap();
    let g = FrequencyGrid::new(0.0, 16.0, 33).unwrap();
    assert!(evolve_two(&m, &pr, &pl, &g, &g, &OracleOptions::default()).is_err());
}
