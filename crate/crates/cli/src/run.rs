//! Mode pipelines. Each run tuple yields rows that echo its parameters.

use anyhow::Result;
use gatewave_core::imperfections::{disorder_point, DisorderSpec};
use gatewave_core::oracle::{evolve_single, evolve_two, LatticeModel, LatticePulse, OracleOptions};
use gatewave_core::single_photon::{decay_rates, ideal_output_1, infidelity_1, propagate_pulse, single_site_s};
use gatewave_core::two_photon::scatter_two_photon;
use gatewave_core::{Amplitude2D, ArrayConfig, Branch, Direction, FrequencyGrid, WavepacketSpec};

use crate::config::{Mode, PulseDirection, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
}

impl Cell {
    /// Round-trip scientific notation for floats.
    pub fn render(&self) -> String {
        match self {
            Cell::F(x) => format!("{x:e}"),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::F(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::I(i) => (*i).into(),
            Cell::S(s) => s.clone().into(),
            Cell::B(b) => (*b).into(),
        }
    }
}

/// Parameter column: header, config key it echoes, value.
pub type Param = (&'static str, &'static str, Cell);

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    /// Config key behind each parameter column.
    pub keys: Vec<(String, String)>,
    pub rows: Vec<Vec<Cell>>,
}

/// One run tuple's output rows, all sharing the parameter columns.
#[derive(Debug, Clone)]
pub struct Rows {
    pub params: Vec<Param>,
    pub result_names: Vec<&'static str>,
    pub results: Vec<Vec<Cell>>,
}

impl Table {
    pub fn push(&mut self, rows: Rows) {
        if self.columns.is_empty() {
            self.columns = rows.params.iter().map(|p| p.0.to_string()).chain(rows.result_names.iter().map(|s| s.to_string())).collect();
            self.keys = rows.params.iter().map(|p| (p.0.to_string(), p.1.to_string())).collect();
        }
        for r in rows.results {
            self.rows.push(rows.params.iter().map(|p| p.2.clone()).chain(r).collect());
        }
    }
}

/// Error with the parameter tuple that produced it.
#[derive(Debug)]
pub struct RunError {
    pub params: Vec<Param>,
    pub error: anyhow::Error,
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        self.error.downcast_ref::<gatewave_core::Error>().map_or("config", |e| e.kind())
    }
}

fn molecule_params(cfg: &RunConfig) -> Vec<Param> {
    let m = &cfg.molecule;
    vec![
        ("omega0_tau", "molecule.omega0_tau", Cell::F(m.omega0_tau)),
        ("J_tau", "molecule.j_tau", Cell::F(m.j_tau)),
        ("gamma_tau", "molecule.gamma_tau", Cell::F(cfg.gamma_tau())),
        ("phi_rad", "molecule.phi", Cell::F(m.phi)),
    ]
}

fn material_params(cfg: &RunConfig) -> Vec<Param> {
    let m = &cfg.molecule;
    vec![
        ("U_over_gamma", "molecule.u", Cell::F(m.u)),
        ("Ua_fraction", "molecule.ua_fraction", Cell::F(m.ua_fraction)),
        ("gamma0_over_gamma", "molecule.gamma0", Cell::F(m.gamma0)),
        ("N", "array.n", Cell::I(cfg.array.n as i64)),
        ("D_over_tau", "array.spacing_over_tau", Cell::F(cfg.array.spacing_over_tau)),
    ]
}

fn gate_params(cfg: &RunConfig) -> Result<Vec<Param>> {
    let mut v = molecule_params(cfg);
    v.extend(material_params(cfg));
    v.extend([
        ("sigma_over_gamma", "pulse.sigma", Cell::F(cfg.sigma()?)),
        ("kernel", "two_photon.kernel", Cell::S(cfg.kernel().name().into())),
        ("elastic", "two_photon.elastic", Cell::S(cfg.elastic().name().into())),
        ("grid_points_2d", "grid.points_2d", Cell::I(cfg.grid.points_2d as i64)),
        ("half_width_sigmas", "grid.half_width_sigmas", Cell::F(cfg.grid.half_width_sigmas)),
    ]);
    Ok(v)
}

fn oracle_params(cfg: &RunConfig) -> Vec<Param> {
    let o = &cfg.oracle;
    let mut v = vec![
        ("oracle_sites", "oracle.sites", Cell::I(o.sites as i64)),
        ("oracle_J_over_gamma", "oracle.j_over_gamma", Cell::F(o.j_over_gamma)),
        ("U_over_gamma", "molecule.u", Cell::F(cfg.molecule.u)),
        ("Ua_fraction", "molecule.ua_fraction", Cell::F(cfg.molecule.ua_fraction)),
        ("oracle_sigma_over_gamma", "oracle.sigma", Cell::F(o.sigma)),
        ("oracle_settle_time", "oracle.settle_time", Cell::F(o.settle_time)),
        ("oracle_two_photon", "oracle.two_photon", Cell::B(o.two_photon)),
    ];
    if o.two_photon {
        v.extend([
            ("oracle_two_photon_sites", "oracle.two_photon_sites", Cell::I(o.two_photon_sites as i64)),
            ("oracle_two_photon_sigma", "oracle.two_photon_sigma", Cell::F(o.two_photon_sigma)),
            ("oracle_two_photon_settle_time", "oracle.two_photon_settle_time", Cell::F(o.two_photon_settle_time)),
            ("oracle_two_photon_points", "oracle.two_photon_points", Cell::I(o.two_photon_points as i64)),
            ("kernel", "two_photon.kernel", Cell::S(cfg.kernel().name().into())),
            ("elastic", "two_photon.elastic", Cell::S(cfg.elastic().name().into())),
        ]);
    }
    v
}

/// Parameter columns of a mode, for error records.
pub fn params_of(mode: Mode, cfg: &RunConfig) -> Vec<Param> {
    let fallback = || {
        let mut v = molecule_params(cfg);
        v.extend(material_params(cfg));
        v
    };
    match mode {
        Mode::ChiralDesign => molecule_params(cfg),
        Mode::OracleCheck => oracle_params(cfg),
        _ => fallback(),
    }
}

pub fn run_tuple(mode: Mode, cfg: &RunConfig) -> Result<Rows, RunError> {
    let attempt = match mode {
        Mode::SinglePhoton => single_photon(cfg),
        Mode::TwoPhoton | Mode::LossSweep => two_photon(cfg),
        Mode::DisorderSweep => disorder(cfg),
        Mode::OracleCheck => oracle_check(cfg),
        Mode::ChiralDesign => chiral_design(cfg),
    };
    attempt.map_err(|error| RunError { params: params_of(mode, cfg), error })
}

fn directions(d: PulseDirection) -> Vec<Direction> {
    match d {
        PulseDirection::R => vec![Direction::R],
        PulseDirection::L => vec![Direction::L],
        PulseDirection::Both => vec![Direction::R, Direction::L],
    }
}

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::R => "R",
        Direction::L => "L",
    }
}

fn single_photon(cfg: &RunConfig) -> Result<Rows> {
    let p = cfg.molecule_params()?;
    let arr = cfg.array(&p)?;
    let sigma = cfg.sigma()?;
    let mut params = molecule_params(cfg);
    params.extend(material_params(cfg));
    params.extend([
        ("sigma_over_gamma", "pulse.sigma", Cell::F(sigma)),
        ("grid_points_1d", "grid.points_1d", Cell::I(cfg.grid.points_1d as i64)),
        ("half_width_sigmas", "grid.half_width_sigmas", Cell::F(cfg.grid.half_width_sigmas)),
    ]);
    let mut results = Vec::new();
    for dir in directions(cfg.pulse.direction) {
        let spec = WavepacketSpec::resonant(&p, dir, sigma);
        let grid = FrequencyGrid::new(spec.center, cfg.grid.half_width_sigmas * sigma, cfg.grid.points_1d)?;
        let out = propagate_pulse(&spec, &p, &arr, &grid)?;
        let ideal = ideal_output_1(&spec, &p, arr.n_molecules(), &grid)?;
        let i1 = infidelity_1(&out.output, &ideal)?;
        results.push(vec![
            Cell::S(direction_name(dir).into()),
            Cell::F(out.transmittance),
            Cell::F(out.reflectance),
            Cell::F(i1),
        ]);
    }
    // direction is a result label here so that `both` rows rerun as one tuple
    Ok(Rows { params, result_names: vec!["direction", "T", "R", "I1"], results })
}

fn two_photon(cfg: &RunConfig) -> Result<Rows> {
    let gate = cfg.gate()?;
    let o = gate.evaluate()?;
    let warn = gatewave_core::two_photon::TwoPhotonKernel::new(gate.variant, &gate.params).ratio_warning();
    Ok(Rows {
        params: gate_params(cfg)?,
        result_names: vec!["I2", "overlap_re", "overlap_im", "output_norm", "kernel_warning"],
        results: vec![vec![
            Cell::F(o.infidelity),
            Cell::F(o.overlap.re),
            Cell::F(o.overlap.im),
            Cell::F(o.output_norm),
            Cell::B(warn),
        ]],
    })
}

fn disorder(cfg: &RunConfig) -> Result<Rows> {
    let gate = cfg.gate()?;
    let template = DisorderSpec { sigma_omega0: 0.0, n_realizations: cfg.disorder.n_realizations, seed: cfg.seed };
    let point = disorder_point(&gate, cfg.disorder.delta_omega0, &template)?;
    let mut params = gate_params(cfg)?;
    params.extend([
        ("delta_omega0_over_gamma", "disorder.delta_omega0", Cell::F(cfg.disorder.delta_omega0)),
        ("n_realizations", "disorder.n_realizations", Cell::I(cfg.disorder.n_realizations as i64)),
        ("seed", "seed", Cell::I(cfg.seed as i64)),
    ]);
    let (gm, disp, clamped, values) = match &point.stats {
        Some(s) => (
            s.geometric_mean,
            s.multiplicative_dispersion,
            s.clamped as i64,
            s.raw_values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(";"),
        ),
        None => (f64::NAN, f64::NAN, 0, String::new()),
    };
    Ok(Rows {
        params,
        result_names: vec!["I2_gm", "I2_dispersion", "n_failed", "n_clamped", "I2_values"],
        results: vec![vec![
            Cell::F(gm),
            Cell::F(disp),
            Cell::I(point.failures.len() as i64),
            Cell::I(clamped),
            Cell::S(values),
        ]],
    })
}

fn chiral_design(cfg: &RunConfig) -> Result<Rows> {
    let p = cfg.molecule_params()?;
    let c = p.check_chiral_condition();
    let at_plus = decay_rates(p.omega_plus(), &p)?;
    let at_minus = decay_rates(p.omega_minus(), &p)?;
    let index = |m: Option<i64>| m.map_or(Cell::S(String::new()), Cell::I);
    Ok(Rows {
        params: molecule_params(cfg),
        result_names: vec![
            "omega_plus_tau",
            "omega_minus_tau",
            "m_plus",
            "m_minus",
            "residual_plus_rad",
            "residual_minus_rad",
            "gammaR_at_plus",
            "gammaL_at_plus",
            "gammaR_at_minus",
            "gammaL_at_minus",
            "chiral",
        ],
        results: vec![vec![
            Cell::F(p.omega_plus() * p.tau),
            Cell::F(p.omega_minus() * p.tau),
            index(c.m_plus),
            index(c.m_minus),
            Cell::F(c.residual_plus),
            Cell::F(c.residual_minus),
            Cell::F(at_plus.gamma_r),
            Cell::F(at_plus.gamma_l),
            Cell::F(at_minus.gamma_r),
            Cell::F(at_minus.gamma_l),
            Cell::B(c.is_chiral()),
        ]],
    })
}

/// Checks applied to the lattice runs.
pub const ORACLE_SINGLE_TOLERANCE: f64 = 1e-2;
pub const ORACLE_REFLECTED_POWER: f64 = 1e-3;
pub const ORACLE_OVERLAP: f64 = 0.99;
pub const ORACLE_FACTORIZATION: f64 = 1e-3;
/// Band around each resonance, in pulse widths.
pub const ORACLE_BAND_SIGMAS: f64 = 2.0;

fn check(name: &str, value: f64, tolerance: f64, at_least: bool) -> Vec<Cell> {
    let passed = if at_least { value >= tolerance } else { value <= tolerance };
    vec![Cell::S(name.into()), Cell::F(value), Cell::F(tolerance), Cell::B(passed)]
}

fn oracle_check(cfg: &RunConfig) -> Result<Rows> {
    let o = &cfg.oracle;
    let ua = cfg.molecule.u * cfg.molecule.ua_fraction;
    let ub = cfg.molecule.u - ua;
    let model = LatticeModel::chiral(o.sites, 1, o.j_over_gamma, ua, ub)?;
    let p = model.effective_params()?;
    let opts = OracleOptions { settle_time: o.settle_time, ..Default::default() };
    let mut results = Vec::new();
    for dir in [Direction::R, Direction::L] {
        let pulse = LatticePulse::resonant(&model, dir, o.sigma)?;
        let c = p.resonance(dir.branch());
        let grid = FrequencyGrid::new(c, 8.0 * o.sigma, 129)?;
        let res = evolve_single(&model, &pulse, &grid, &opts)?;
        let (mut dt, mut dr) = (0.0f64, 0.0f64);
        for (i, w) in grid.points().enumerate() {
            if (w - c).abs() > ORACLE_BAND_SIGMAS * o.sigma {
                continue;
            }
            let s = single_site_s(w, &p)?;
            let t = if dir == Direction::R { s.t_r } else { s.t_l };
            dt = dt.max((res.t[i] - t).norm());
            dr = dr.max((res.r[i] - s.r).norm());
        }
        let d = direction_name(dir);
        results.push(check(&format!("t_max_deviation_{d}"), dt, ORACLE_SINGLE_TOLERANCE, false));
        results.push(check(&format!("r_max_deviation_{d}"), dr, ORACLE_SINGLE_TOLERANCE, false));
        results.push(check(&format!("reflected_power_{d}"), res.reflected_power, ORACLE_REFLECTED_POWER, false));
    }
    if o.two_photon {
        let (overlap, factorization) = rayon::join(|| two_photon_overlap(cfg), || linear_factorization(cfg));
        let (overlap, max_double) = overlap?;
        results.push(check("two_photon_overlap", overlap, ORACLE_OVERLAP, true));
        results.push(check("max_double_population", max_double, gatewave_core::oracle::TwoOracleResult::DOUBLE_POPULATION_WARNING, false));
        results.push(check("linear_factorization_error", factorization?, ORACLE_FACTORIZATION, false));
    }
    Ok(Rows { params: oracle_params(cfg), result_names: vec!["check", "value", "tolerance", "passed"], results })
}

fn pair_setup(cfg: &RunConfig, u: f64) -> Result<(LatticeModel, LatticePulse, LatticePulse, FrequencyGrid, FrequencyGrid)> {
    let o = &cfg.oracle;
    let ua = u * cfg.molecule.ua_fraction;
    let model = LatticeModel::chiral(o.two_photon_sites, 1, o.j_over_gamma, ua, u - ua)?;
    let p = model.effective_params()?;
    let sigma = o.two_photon_sigma;
    let grid = |b: Branch| FrequencyGrid::new(p.resonance(b), 8.0 * sigma, o.two_photon_points);
    Ok((
        model.clone(),
        LatticePulse::resonant(&model, Direction::R, sigma)?,
        LatticePulse::resonant(&model, Direction::L, sigma)?,
        grid(Branch::Plus)?,
        grid(Branch::Minus)?,
    ))
}

fn pair_options(cfg: &RunConfig) -> OracleOptions {
    OracleOptions { settle_time: cfg.oracle.two_photon_settle_time, ..Default::default() }
}

/// Normalized `|⟨analytic|lattice⟩|` for one molecule, and the largest
/// doubly-excited population.
pub fn two_photon_overlap(cfg: &RunConfig) -> Result<(f64, f64)> {
    let (model, pr, pl, gr, gl) = pair_setup(cfg, cfg.molecule.u)?;
    let res = evolve_two(&model, &pr, &pl, &gr, &gl, &pair_options(cfg))?;
    let p = model.effective_params()?;
    let arr = ArrayConfig::clean(1, p.omega0, 1.0)?;
    let an = scatter_two_photon(&res.input, &p, &arr, cfg.kernel(), cfg.elastic())?;
    let o = an.inner(&res.output)?;
    Ok((o.norm() / (an.norm_sqr() * res.output.norm_sqr()).sqrt(), res.max_double_population))
}

/// Relative distance between the harmonic lattice pair and the product of the
/// lattice single-photon transmissions.
pub fn linear_factorization(cfg: &RunConfig) -> Result<f64> {
    let (model, pr, pl, gr, gl) = pair_setup(cfg, 0.0)?;
    let opts = pair_options(cfg);
    let pair = evolve_two(&model, &pr, &pl, &gr, &gl, &opts)?;
    let tr = evolve_single(&model, &pr, &gr, &opts)?.t;
    let tl = evolve_single(&model, &pl, &gl, &opts)?.t;
    let nl = gl.n_points();
    let product = Amplitude2D {
        values: pair.input.values.iter().enumerate().map(|(k, a)| tr[k / nl] * tl[k % nl] * a).collect(),
        ..pair.input.clone()
    };
    let diff = Amplitude2D { values: pair.output.values.iter().zip(&product.values).map(|(a, b)| a - b).collect(), ..product.clone() };
    Ok((diff.norm_sqr() / product.norm_sqr()).sqrt())
}
