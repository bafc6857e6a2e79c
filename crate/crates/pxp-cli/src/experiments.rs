//! Experiment runners: each takes a validated config, resolves symbolic
//! quantities (calibrating the revival period once per run when needed),
//! distributes sweep points over a work-stealing pool, and assembles a
//! deterministic table. Individual sweep-point failures become error rows;
//! only setup failures abort the run.

use ndarray::Array1;
use rayon::prelude::*;

use pxp_core::dynamics::{
    calibrate_tau_r, run_drive, CalibrationOptions, EvolveMethod, FloquetEngine, Propagator,
    PulseShape, Sampling, TrajectoryRecord,
};
use pxp_core::hilbert::{random_state, Basis};
use pxp_core::observables::{
    spatiotemporal_correlator, subharmonic_weight, time_averaged_entropy, Observable,
};
use pxp_core::operators::{number, Model, OperatorMatrix, RydbergParams};
use pxp_core::prethermal::{
    build_effective_model, extract_timescales, splitting_scaling, EffectiveFamily, EffectiveModel,
};
use pxp_core::scars::{bloch_trajectory, build_scar_subspace_with};
use pxp_core::C64;

use crate::config::{
    CliError, ExperimentConfig, ExperimentKind, InitialState, ModelKind, OutputFormat, PI,
};

/// One output cell: a float, an integer, free text, or empty/absent.
#[derive(Clone, Debug)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    Empty,
}

/// The run artifact: metadata comments, a fixed column list, and rows.
#[derive(Clone, Debug)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn push_metadata(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }
}

/// Render a table as CSV with `# key = value` comment lines.
pub fn to_csv(table: &Table) -> String {
    let mut out = String::new();
    for (k, v) in &table.metadata {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let mut first = true;
        for cell in row {
            if !first {
                out.push(',');
            }
            first = false;
            match cell {
                Cell::F(x) => out.push_str(&format!("{x:.12e}")),
                Cell::I(n) => out.push_str(&n.to_string()),
                Cell::S(s) => out.push_str(&s.replace(',', ";").replace('\n', " ")),
                Cell::Empty => {}
            }
        }
        out.push('\n');
    }
    out
}

/// Render a table as JSON lines: a metadata object, then one object per row.
pub fn to_jsonl(table: &Table) -> String {
    let mut out = String::new();
    let meta: serde_json::Map<String, serde_json::Value> = table
        .metadata
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
        .collect();
    out.push_str(&serde_json::json!({ "metadata": meta }).to_string());
    out.push('\n');
    for row in &table.rows {
        let mut obj = serde_json::Map::new();
        for (col, cell) in table.columns.iter().zip(row) {
            let value = match cell {
                Cell::F(x) => serde_json::Number::from_f64(*x)
                    .map(serde_json::Value::Number)
                    .unwrap_or(serde_json::Value::Null),
                Cell::I(n) => serde_json::Value::Number((*n).into()),
                Cell::S(s) => serde_json::Value::String(s.clone()),
                Cell::Empty => serde_json::Value::Null,
            };
            obj.insert(col.clone(), value);
        }
        out.push_str(&serde_json::Value::Object(obj).to_string());
        out.push('\n');
    }
    out
}

pub fn render(table: &Table, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => to_csv(table),
        OutputFormat::Jsonl => to_jsonl(table),
    }
}

fn runtime(msg: impl Into<String>) -> CliError {
    CliError::Runtime(msg.into())
}

fn model_for(cfg: &ExperimentConfig, v2: f64) -> Model {
    match cfg.model {
        ModelKind::Pxp => Model::Pxp,
        ModelKind::DeformedPxp => Model::DeformedPxp(cfg.deformation.clone()),
        ModelKind::PxpNnn => Model::PxpNnn { v2 },
        ModelKind::Rydberg => Model::Rydberg(RydbergParams { v2, ..cfg.rydberg }),
    }
}

/// Calibrate the revival period of the configured model once per run, at the
/// largest system size, from the alternating initial state.
fn calibrate(cfg: &ExperimentConfig) -> Result<f64, CliError> {
    let l = *cfg.sizes.iter().max().expect("validated non-empty sizes");
    let model = model_for(cfg, cfg.v2s[0]);
    let basis = model.basis(l, cfg.boundary)?;
    let h = model.hamiltonian(&basis)?;
    let psi = basis.neel_state()?;
    let tau_r = calibrate_tau_r(&h, &psi, 12.0, &CalibrationOptions::default())?;
    Ok(tau_r)
}

fn needs_tau_r(cfg: &ExperimentConfig) -> bool {
    cfg.taus.iter().any(|q| q.needs_tau_r())
        || cfg.tau_p.is_some_and(|q| q.needs_tau_r())
        || (cfg.experiment == ExperimentKind::Bloch
            && cfg.normalization == crate::config::SxNormalizationChoice::InverseTwoTauR)
}

fn initial_state(
    cfg: &ExperimentConfig,
    basis: &Basis,
    ground: Option<&EffectiveModel>,
) -> Result<Array1<C64>, pxp_core::Error> {
    match cfg.initial {
        InitialState::Z2 => basis.neel_state(),
        InitialState::Z2Prime => basis.neel_prime_state(),
        InitialState::Z4 => basis.z4_state(),
        InitialState::Random => Ok(random_state(basis.dim(), cfg.seed)),
        InitialState::Ground => {
            let em = ground.expect("ground initial state needs the effective model");
            Ok(em.vectors.column(0).to_owned())
        }
    }
}

fn build_engine(
    basis: &Basis,
    h: &OperatorMatrix,
    hold: Option<&Propagator>,
    theta: f64,
    tau: f64,
    cfg: &ExperimentConfig,
    tau_r: Option<f64>,
) -> Result<FloquetEngine, pxp_core::Error> {
    if cfg.finite_pulse {
        let tau_p = cfg
            .tau_p
            .expect("validated finite pulse width")
            .resolve_width(tau_r, tau);
        FloquetEngine::new(
            basis,
            h,
            theta,
            tau,
            PulseShape::Finite {
                tau_p,
                calibrated: cfg.calibrated,
            },
            EvolveMethod::Auto,
        )
    } else if let Some(p) = hold {
        FloquetEngine::with_propagator(basis, p, theta, tau)
    } else {
        FloquetEngine::new(basis, h, theta, tau, PulseShape::Delta, EvolveMethod::Auto)
    }
}

fn pulse_description(cfg: &ExperimentConfig) -> String {
    if cfg.finite_pulse {
        format!(
            "finite(tau_p = {:?}, calibrated = {})",
            cfg.tau_p.expect("validated"),
            cfg.calibrated
        )
    } else {
        "delta".into()
    }
}

fn base_metadata(cfg: &ExperimentConfig, tau_r: Option<f64>) -> Vec<(String, String)> {
    let mut meta = vec![
        ("experiment".into(), cfg.experiment.name().to_string()),
        ("model".into(), model_for(cfg, cfg.v2s[0]).label()),
        (
            "L".into(),
            cfg.sizes
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("boundary".into(), format!("{:?}", cfg.boundary).to_lowercase()),
        ("seed".into(), cfg.seed.to_string()),
        ("code_version".into(), env!("CARGO_PKG_VERSION").into()),
    ];
    if let Some(t) = tau_r {
        meta.push(("tau_r".into(), format!("{t}")));
    }
    meta
}

/// Cartesian sweep axes; points enumerate row-major (first axis slowest), so
/// output order is independent of the worker count.
struct Axes {
    names: Vec<&'static str>,
    values: Vec<Vec<f64>>,
}

impl Axes {
    fn len(&self) -> usize {
        self.values.iter().map(Vec::len).product()
    }

    fn point(&self, mut flat: usize) -> Vec<f64> {
        let mut coord = vec![0.0; self.values.len()];
        for (slot, axis) in self.values.iter().enumerate().rev() {
            coord[slot] = axis[flat % axis.len()];
            flat /= axis.len();
        }
        coord
    }
}

fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| runtime(e.to_string()))
}

/// Run one scalar-valued computation per sweep point; failures become error
/// rows carrying the sweep coordinates and the message.
fn sweep_table(
    cfg: &ExperimentConfig,
    axes: Axes,
    value_columns: &[&str],
    point: impl Fn(&[f64]) -> Result<Vec<Option<f64>>, pxp_core::Error> + Sync,
) -> Result<Table, CliError> {
    let pool = thread_pool(cfg.workers)?;
    let coords: Vec<Vec<f64>> = (0..axes.len()).map(|i| axes.point(i)).collect();
    let results: Vec<Result<Vec<Option<f64>>, String>> = pool.install(|| {
        coords
            .par_iter()
            .map(|c| point(c).map_err(|e| e.to_string()))
            .collect()
    });
    let mut columns: Vec<String> = axes.names.iter().map(|s| s.to_string()).collect();
    columns.extend(value_columns.iter().map(|s| s.to_string()));
    columns.push("error".into());
    let mut rows = Vec::with_capacity(coords.len());
    for (coord, result) in coords.iter().zip(results) {
        let mut row: Vec<Cell> = coord.iter().map(|&x| Cell::F(x)).collect();
        match result {
            Ok(values) => {
                debug_assert_eq!(values.len(), value_columns.len());
                row.extend(values.into_iter().map(|v| v.map_or(Cell::Empty, Cell::F)));
                row.push(Cell::Empty);
            }
            Err(msg) => {
                row.extend(std::iter::repeat_with(|| Cell::Empty).take(value_columns.len()));
                row.push(Cell::S(msg));
            }
        }
        rows.push(row);
    }
    Ok(Table {
        metadata: Vec::new(),
        columns,
        rows,
    })
}

/// Execute a validated experiment into a table (metadata filled in).
pub fn execute(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let tau_r = if needs_tau_r(cfg) {
        Some(calibrate(cfg)?)
    } else {
        None
    };
    let mut table = match cfg.experiment {
        ExperimentKind::EchoScan => echo_scan(cfg, tau_r)?,
        ExperimentKind::TauScan | ExperimentKind::NnnScan => drive_scan(cfg, tau_r)?,
        ExperimentKind::Pairing => pairing(cfg, tau_r)?,
        ExperimentKind::Splitting => splitting(cfg, tau_r)?,
        ExperimentKind::Bloch => bloch(cfg, tau_r)?,
        ExperimentKind::Timescales => timescales(cfg, tau_r)?,
        ExperimentKind::Ghz => ghz(cfg, tau_r)?,
        ExperimentKind::Correlator => correlator(cfg, tau_r)?,
        ExperimentKind::Custom => custom(cfg, tau_r)?,
    };
    let mut metadata = base_metadata(cfg, tau_r);
    metadata.append(&mut table.metadata);
    table.metadata = metadata;
    Ok(table)
}

/// Subharmonic weight of the stroboscopic imbalance at half the drive
/// frequency, plus the time-averaged entanglement entropy.
fn f2_and_entropy(
    engine: &FloquetEngine,
    basis: &Basis,
    psi0: &Array1<C64>,
    n_periods: usize,
) -> Result<(f64, f64), pxp_core::Error> {
    let record = run_drive(
        engine,
        basis,
        psi0,
        n_periods,
        &[
            Observable::Imbalance { normalised: true },
            Observable::EntanglementEntropy { cut: None },
        ],
        Sampling::Stroboscopic,
    )?;
    let imbalance = record.column("imbalance").expect("requested observable");
    let f2 = subharmonic_weight(imbalance, engine.tau, PI / engine.tau);
    let entropy = time_averaged_entropy(&record)?;
    Ok((f2, entropy))
}

fn echo_scan(cfg: &ExperimentConfig, tau_r: Option<f64>) -> Result<Table, CliError> {
    let l = cfg.sizes[0];
    let model = model_for(cfg, cfg.v2s[0]);
    let basis = model.basis(l, cfg.boundary)?;
    let h = model.hamiltonian(&basis)?;
    let hold = if cfg.finite_pulse {
        None
    } else {
        Some(Propagator::new(&h, EvolveMethod::Auto)?)
    };
    let z2 = basis.neel_state()?;
    let z4 = basis.z4_state()?;
    let axes = Axes {
        names: vec!["theta", "tau"],
        values: vec![
            cfg.thetas.iter().map(|q| q.resolve(tau_r)).collect(),
            cfg.taus.iter().map(|q| q.resolve(tau_r)).collect(),
        ],
    };
    let mut table = sweep_table(
        cfg,
        axes,
        &["f2_z2", "entropy_z2", "f2_z4", "entropy_z4"],
        |c| {
            let engine = build_engine(&basis, &h, hold.as_ref(), c[0], c[1], cfg, tau_r)?;
            let (f2_z2, s_z2) = f2_and_entropy(&engine, &basis, &z2, cfg.n_periods)?;
            let (f2_z4, s_z4) = f2_and_entropy(&engine, &basis, &z4, cfg.n_periods)?;
            Ok(vec![Some(f2_z2), Some(s_z2), Some(f2_z4), Some(s_z4)])
        },
    )?;
    table.push_metadata("n_periods", cfg.n_periods);
    table.push_metadata("pulse", pulse_description(cfg));
    Ok(table)
}

/// tau-scan and nnn-scan: one initial state, f2 and mean entropy per point.
fn drive_scan(cfg: &ExperimentConfig, tau_r: Option<f64>) -> Result<Table, CliError> {
    let l = cfg.sizes[0];
    let nnn = cfg.experiment == ExperimentKind::NnnScan;
    // The basis is v2-independent, so probe with the first value.
    let basis = model_for(cfg, cfg.v2s[0]).basis(l, cfg.boundary)?;
    let psi0 = initial_state(cfg, &basis, None)?;
    let mut axes = Axes {
        names: vec!["tau", "theta"],
        values: vec![
            cfg.taus.iter().map(|q| q.resolve(tau_r)).collect(),
            cfg.thetas.iter().map(|q| q.resolve(tau_r)).collect(),
        ],
    };
    // Shared diagonalization only when the Hamiltonian is fixed across points.
    let shared = if nnn && cfg.v2s.len() > 1 {
        axes.names.insert(0, "v2");
        axes.values.insert(0, cfg.v2s.clone());
        None
    } else {
        let h = model_for(cfg, cfg.v2s[0]).hamiltonian(&basis)?;
        let hold = if cfg.finite_pulse {
            None
        } else {
            Some(Propagator::new(&h, EvolveMethod::Auto)?)
        };
        Some((h, hold))
    };
    if nnn && shared.is_some() {
        // Single v2 value: still report it as a leading column.
        axes.names.insert(0, "v2");
        axes.values.insert(0, cfg.v2s.clone());
    }
    let mut table = sweep_table(cfg, axes, &["f2", "entropy_mean"], |c| {
        let (v2, theta, tau) = if nnn {
            (c[0], c[2], c[1])
        } else {
            (cfg.v2s[0], c[1], c[0])
        };
        let engine = match &shared {
            Some((h, hold)) => build_engine(&basis, h, hold.as_ref(), theta, tau, cfg, tau_r)?,
            None => {
                let h = model_for(cfg, v2).hamiltonian(&basis)?;
                build_engine(&basis, &h, None, theta, tau, cfg, tau_r)?
            }
        };
        let (f2, entropy) = f2_and_entropy(&engine, &basis, &psi0, cfg.n_periods)?;
        Ok(vec![Some(f2), Some(entropy)])
    })?;
    table.push_metadata("n_periods", cfg.n_periods);
    table.push_metadata("initial", cfg.initial.name());
    table.push_metadata("pulse", pulse_description(cfg));
    Ok(table)
}

fn pairing(cfg: &ExperimentConfig, tau_r: Option<f64>) -> Result<Table, CliError> {
    let l = cfg.sizes[0];
    let model = model_for(cfg, cfg.v2s[0]);
    let basis = model.basis(l, cfg.boundary)?;
    let h = model.hamiltonian(&basis)?;
    let n = number(&basis);
    let reference = initial_state(cfg, &basis, None)?;
    let epsilon = cfg.epsilons[0].resolve(tau_r);
    let family = EffectiveFamily::new(&h, &n)?;
    let taus: Vec<f64> = cfg.taus.iter().map(|q| q.resolve(tau_r)).collect();
    let pool = thread_pool(cfg.workers)?;
    let reports: Vec<Result<pxp_core::prethermal::PairingReport, String>> = pool.install(|| {
        taus.par_iter()
            .map(|&tau| {
                family
                    .model(tau, epsilon)
                    .and_then(|em| em.quasi_energies(&reference))
                    .map_err(|e| e.to_string())
            })
            .collect()
    });
    let mut rows = Vec::new();
    for (&tau, report) in taus.iter().zip(&reports) {
        match report {
            Ok(r) => {
                for (q, o) in r.quasi_energies.iter().zip(r.overlaps.iter()) {
                    rows.push(vec![Cell::F(tau), Cell::F(*q), Cell::F(*o), Cell::Empty]);
                }
            }
            Err(msg) => rows.push(vec![
                Cell::F(tau),
                Cell::Empty,
                Cell::Empty,
                Cell::S(msg.clone()),
            ]),
        }
    }
    let mut table = Table {
        metadata: Vec::new(),
        columns: vec![
            "tau".into(),
            "quasi_energy".into(),
            "overlap".into(),
            "error".into(),
        ],
        rows,
    };
    table.push_metadata("epsilon", epsilon);
    table.push_metadata("reference", cfg.initial.name());
    Ok(table)
}

fn splitting(cfg: &ExperimentConfig, tau_r: Option<f64>) -> Result<Table, CliError> {
    let tau = cfg.taus[0].resolve(tau_r);
    let model = model_for(cfg, cfg.v2s[0]);
    let scaling = splitting_scaling(&model, &cfg.sizes, tau)?;
    let mut rows = Vec::new();
    for &l in &cfg.sizes {
        if let Some(pos) = scaling.sizes.iter().position(|&k| k == l) {
            let d = scaling.splittings[pos];
            rows.push(vec![
                Cell::I(l as i64),
                Cell::F(d),
                Cell::F(d.ln()),
                Cell::Empty,
            ]);
        } else {
            rows.push(vec![
                Cell::I(l as i64),
                Cell::Empty,
                Cell::Empty,
                Cell::S("splitting below the 1e-13 numerical floor".into()),
            ]);
        }
    }
    let mut table = Table {
        metadata: Vec::new(),
        columns: vec![
            "l".into(),
            "delta_e".into(),
            "ln_delta_e".into(),
            "error".into(),
        ],
        rows,
    };
    table.push_metadata("tau", tau);
    table.push_metadata("slope", scaling.fit.slope);
    table.push_metadata("intercept", scaling.fit.intercept);
    table.push_metadata("r_squared", scaling.fit.r_squared);
    table.push_metadata("max_residual", scaling.max_residual);
    Ok(table)
}

fn timescales(cfg: &ExperimentConfig, tau_r: Option<f64>) -> Result<Table, CliError> {
    let l = cfg.sizes[0];
    let model = model_for(cfg, cfg.v2s[0]);
    let basis = model.basis(l, cfg.boundary)?;
    let h = model.hamiltonian(&basis)?;
    let n = number(&basis);
    let psi0 = initial_state(cfg, &basis, None)?;
    let hold = if cfg.finite_pulse {
        None
    } else {
        Some(Propagator::new(&h, EvolveMethod::Auto)?)
    };
    let angle_axis: (&'static str, Vec<f64>) = if cfg.epsilon_given {
        (
            "epsilon",
            cfg.epsilons.iter().map(|q| q.resolve(tau_r)).collect(),
        )
    } else {
        ("theta", cfg.thetas.iter().map(|q| q.resolve(tau_r)).collect())
    };
    let taus: Vec<f64> = cfg.taus.iter().map(|q| q.resolve(tau_r)).collect();
    // The effective spectrum is independent of the kick deviation, so one
    // model per distinct tau serves every angle.
    let family = EffectiveFamily::new(&h, &n)?;
    let models: Vec<Result<EffectiveModel, pxp_core::Error>> =
        taus.iter().map(|&tau| family.model(tau, 0.0)).collect();
    let epsilon_given = cfg.epsilon_given;
    let axes = Axes {
        names: vec![angle_axis.0, "tau"],
        values: vec![angle_axis.1, taus.clone()],
    };
    let mut table = sweep_table(
        cfg,
        axes,
        &["t_s", "t_b", "t_g", "t_g_dynamic", "delta_e", "gap"],
        |c| {
            let theta = if epsilon_given { PI - c[0] } else { c[0] };
            let tau = c[1];
            let slot = taus
                .iter()
                .position(|&t| t == tau)
                .expect("tau drawn from the axis");
            let em = match &models[slot] {
                Ok(em) => em.with_epsilon(PI - theta),
                Err(e) => return Err(pxp_core::Error::Invalid(e.to_string())),
            };
            let engine = build_engine(&basis, &h, hold.as_ref(), theta, tau, cfg, tau_r)?;
            let record = run_drive(
                &engine,
                &basis,
                &psi0,
                cfg.n_periods,
                &[Observable::RevivalFidelity],
                Sampling::Stroboscopic,
            )?;
            let report = extract_timescales(&record, &em)?;
            Ok(vec![
                Some(report.t_s),
                report.t_b,
                report.t_g,
                report.t_g_dynamic,
                Some(report.delta_e),
                Some(report.gap),
            ])
        },
    )?;
    table.push_metadata("n_periods", cfg.n_periods);
    table.push_metadata("initial", cfg.initial.name());
    table.push_metadata("pulse", pulse_description(cfg));
    Ok(table)
}

fn record_table(record: &TrajectoryRecord) -> Table {
    let mut columns = vec!["t".to_string()];
    columns.extend(record.labels.iter().cloned());
    let rows = record
        .times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut row = vec![Cell::F(t)];
            row.extend(record.series.iter().map(|s| Cell::F(s[i])));
            row
        })
        .collect();
    Table {
        metadata: Vec::new(),
        columns,
        rows,
    }
}

fn single_drive(
    cfg: &ExperimentConfig,
    tau_r: Option<f64>,
    observables: &[Observable],
) -> Result<(Table, f64, f64), CliError> {
    let l = cfg.sizes[0];
    let model = model_for(cfg, cfg.v2s[0]);
    let basis = model.basis(l, cfg.boundary)?;
    let h = model.hamiltonian(&basis)?;
    let theta = cfg.thetas[0].resolve(tau_r);
    let tau = cfg.taus[0].resolve(tau_r);
    let ground = if cfg.initial == InitialState::Ground {
        let n = number(&basis);
        Some(build_effective_model(&h, &n, tau, PI - theta)?)
    } else {
        None
    };
    let psi0 = initial_state(cfg, &basis, ground.as_ref())?;
    let engine = build_engine(&basis, &h, None, theta, tau, cfg, tau_r)?;
    let sampling = if cfg.substeps > 1 {
        Sampling::Micromotion {
            substeps: cfg.substeps,
        }
    } else {
        Sampling::Stroboscopic
    };
    let record = run_drive(&engine, &basis, &psi0, cfg.n_periods, observables, sampling)?;
    let mut table = record_table(&record);
    table.push_metadata("theta", theta);
    table.push_metadata("tau", tau);
    table.push_metadata("n_periods", cfg.n_periods);
    table.push_metadata("initial", cfg.initial.name());
    table.push_metadata("pulse", pulse_description(cfg));
    Ok((table, theta, tau))
}

fn ghz(cfg: &ExperimentConfig, tau_r: Option<f64>) -> Result<Table, CliError> {
    let (mut table, _, _) = single_drive(
        cfg,
        tau_r,
        &[Observable::GhzFidelity, Observable::Qfi { normalised: false }],
    )?;
    let ghz_col = table.columns.iter().position(|c| c == "ghz").expect("ghz column");
    let qfi_col = table.columns.iter().position(|c| c == "qfi").expect("qfi column");
    let mut best = (0usize, f64::MIN);
    for (i, row) in table.rows.iter().enumerate() {
        if let Cell::F(g) = row[ghz_col] {
            if g > best.1 {
                best = (i, g);
            }
        }
    }
    let best_row = &table.rows[best.0];
    let (t, qfi) = match (&best_row[0], &best_row[qfi_col]) {
        (Cell::F(t), Cell::F(q)) => (*t, *q),
        _ => unreachable!("trajectory rows are numeric"),
    };
    table.push_metadata("max_ghz", best.1);
    table.push_metadata("max_ghz_time", t);
    table.push_metadata("qfi_at_max_ghz", qfi);
    Ok(table)
}

fn custom(cfg: &ExperimentConfig, tau_r: Option<f64>) -> Result<Table, CliError> {
    let observables = cfg.observables.clone();
    let (mut table, _, _) = single_drive(cfg, tau_r, &observables)?;
    if cfg.substeps > 1 {
        table.push_metadata("substeps", cfg.substeps);
    }
    Ok(table)
}

fn bloch(cfg: &ExperimentConfig, tau_r: Option<f64>) -> Result<Table, CliError> {
    let l = cfg.sizes[0];
    let model = model_for(cfg, cfg.v2s[0]);
    let basis = model.basis(l, cfg.boundary)?;
    let h = model.hamiltonian(&basis)?;
    let subspace =
        build_scar_subspace_with(&basis, &cfg.deformation, cfg.normalization.build(tau_r))?;
    let theta = cfg.thetas[0].resolve(tau_r);
    let tau = cfg.taus[0].resolve(tau_r);
    let engine = build_engine(&basis, &h, None, theta, tau, cfg, tau_r)?;
    let psi0 = initial_state(cfg, &basis, None)?;
    let sampling = if cfg.substeps > 1 {
        Sampling::Micromotion {
            substeps: cfg.substeps,
        }
    } else {
        Sampling::Stroboscopic
    };
    let trajectory = bloch_trajectory(&engine, &subspace, &psi0, cfg.n_periods, sampling)?;
    let rows = trajectory
        .points
        .iter()
        .map(|p| {
            vec![
                Cell::F(p.t),
                Cell::F(p.x),
                Cell::F(p.y),
                Cell::F(p.z),
                Cell::I((p.period % 2) as i64),
            ]
        })
        .collect();
    let mut table = Table {
        metadata: Vec::new(),
        columns: vec![
            "t".into(),
            "x".into(),
            "y".into(),
            "z".into(),
            "parity_of_period".into(),
        ],
        rows,
    };
    table.push_metadata("theta", theta);
    table.push_metadata("tau", tau);
    table.push_metadata("n_periods", cfg.n_periods);
    table.push_metadata("substeps", cfg.substeps);
    table.push_metadata("initial", cfg.initial.name());
    table.push_metadata("h0", cfg.deformation.h0);
    table.push_metadata("n_max", cfg.deformation.n_max);
    table.push_metadata("sx_scale", subspace.sx_scale);
    Ok(table)
}

fn correlator(cfg: &ExperimentConfig, tau_r: Option<f64>) -> Result<Table, CliError> {
    let l = cfg.sizes[0];
    let model = model_for(cfg, cfg.v2s[0]);
    let basis = model.basis(l, cfg.boundary)?;
    let h = model.hamiltonian(&basis)?;
    let n = number(&basis);
    let epsilon = cfg.epsilons[0].resolve(tau_r);
    let tau = cfg.taus[0].resolve(tau_r);
    let theta = PI - epsilon;
    let em = build_effective_model(&h, &n, tau, epsilon)?;
    let psi0 = initial_state(cfg, &basis, Some(&em))?;
    let engine = build_engine(&basis, &h, None, theta, tau, cfg, tau_r)?;
    let grid = spatiotemporal_correlator(&psi0, &basis, &engine, cfg.n_periods)?;
    let mut rows = Vec::with_capacity(grid.qs.len() * grid.omegas.len());
    for (m, &q) in grid.qs.iter().enumerate() {
        for (k, &w) in grid.omegas.iter().enumerate() {
            let v = grid.values[(m, k)];
            rows.push(vec![
                Cell::F(q),
                Cell::F(w),
                Cell::F(v.re),
                Cell::F(v.im),
                Cell::F(v.norm()),
            ]);
        }
    }
    let mut table = Table {
        metadata: Vec::new(),
        columns: vec![
            "q".into(),
            "omega".into(),
            "re".into(),
            "im".into(),
            "abs".into(),
        ],
        rows,
    };
    table.push_metadata("epsilon", epsilon);
    table.push_metadata("theta", theta);
    table.push_metadata("tau", tau);
    table.push_metadata("n_periods", cfg.n_periods);
    table.push_metadata("initial", cfg.initial.name());
    if l % 2 == 0 && cfg.n_periods % 2 == 0 {
        table.push_metadata("c_pi_pi", grid.at(PI, PI).norm());
        table.push_metadata("c_pi_0", grid.at(PI, 0.0).norm());
        table.push_metadata("median_abs", grid.median_abs());
    }
    Ok(table)
}

/// Basis listing for `--dump-basis`: one row per configuration.
pub fn dump_basis(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let l = cfg.sizes[0];
    let model = model_for(cfg, cfg.v2s[0]);
    let basis = model.basis(l, cfg.boundary)?;
    let rows = basis
        .configs()
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let bits: String = (0..l)
                .map(|b| if c >> b & 1 == 1 { '1' } else { '0' })
                .collect();
            vec![
                Cell::I(i as i64),
                Cell::I(c as i64),
                Cell::S(bits),
                Cell::I(c.count_ones() as i64),
            ]
        })
        .collect();
    let mut table = Table {
        metadata: Vec::new(),
        columns: vec![
            "index".into(),
            "config".into(),
            "sites".into(),
            "occupation".into(),
        ],
        rows,
    };
    table.push_metadata("experiment", "dump-basis");
    table.push_metadata("model", model.label());
    table.push_metadata("L", l);
    table.push_metadata(
        "boundary",
        format!("{:?}", cfg.boundary).to_lowercase(),
    );
    table.push_metadata("dim", basis.dim());
    table.push_metadata("bit_order", "column `sites` lists site 1 first");
    Ok(table)
}
