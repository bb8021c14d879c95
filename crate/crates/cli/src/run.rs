//! Run directories and the prepare / evolve / merits pipeline.
//!
//! Layout of one replicate directory:
//!
//! ```text
//! config.txt                 configuration snapshot
//! manifest.txt               code version, seeds, progress
//! checkpoints/step_NNNNNN.ckpt
//! fig2_observables.csv       NNQS energy and single-site magnetizations
//! fig2_infidelity.csv        Σ_l I per step, R(t), and I_e(t), 𝓘_e(t) after merits
//! diagnostics.csv            per-block (p-tVMC) or per-step (tVMC) solver record
//! fig2_exact_observables.csv exact reference observables (merits)
//! fig3_amplitude_phase.csv   A_n(t), D_n(t) of NNQS and exact state (merits)
//! dense/                     optional dense-state exports (merits)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use quench_core::ansatz::Network;
use quench_core::evolution::{
    derive_seed, measure, prepare_initial_state, ptvmc_step, sample_count, default_solver, tvmc_rk4_step,
    FitOptions, StepReport,
};
use quench_core::oracle::{
    amplitude_ratio_and_phase_distance, dense_energy, dense_ratio_and_phase, dense_sigma_x, dense_sigma_z,
    exact_infidelity, integrate_series, nnqs_to_dense, ranked_configurations, DenseState, ExactPropagator,
    EXACT_MAX_SITES,
};
use quench_core::sampling::FULL_SUMMATION_MAX_SITES;
use quench_core::{Sampler, SolverDiagnostics, TrotterSchedule};

use crate::config::{ExperimentConfig, Method, OracleMode};
use crate::error::{CliError, CliResult};
use crate::io::{encode_dense, format_float, write_atomic, Cell, Checkpoint, NumericTable, Table};

pub const CONFIG_FILE: &str = "config.txt";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const OBSERVABLES_TABLE: &str = "fig2_observables.csv";
pub const INFIDELITY_TABLE: &str = "fig2_infidelity.csv";
pub const DIAGNOSTICS_TABLE: &str = "diagnostics.csv";
pub const EXACT_OBSERVABLES_TABLE: &str = "fig2_exact_observables.csv";
pub const AMPLITUDE_PHASE_TABLE: &str = "fig3_amplitude_phase.csv";

pub const CODE_VERSION: &str = concat!("quench ", env!("CARGO_PKG_VERSION"));
pub const GIT_REVISION: &str = env!("QUENCH_GIT_REVISION");

/// Directory of replicate `rep`.
pub fn replicate_dir(cfg: &ExperimentConfig, rep: usize) -> PathBuf {
    Path::new(&cfg.output).join(&cfg.name).join(format!("rep_{rep:02}"))
}

pub fn replicate_seed(cfg: &ExperimentConfig, rep: usize) -> u64 {
    derive_seed(cfg.seed, &[rep as u64])
}

fn checkpoint_path(dir: &Path, step: usize) -> PathBuf {
    dir.join("checkpoints").join(format!("step_{step:06}.ckpt"))
}

/// Checkpoints of a run, by ascending step.
pub fn list_checkpoints(dir: &Path) -> CliResult<Vec<(usize, PathBuf)>> {
    let ck = dir.join("checkpoints");
    if !ck.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(&ck).map_err(|e| CliError::io(&ck, e))? {
        let path = entry.map_err(|e| CliError::io(&ck, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if let Some(step) = name.strip_prefix("step_").and_then(|s| s.strip_suffix(".ckpt")) {
            if let Ok(step) = step.parse() {
                out.push((step, path));
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn load_run_config(dir: &Path) -> CliResult<ExperimentConfig> {
    let cfg = ExperimentConfig::from_file(&dir.join(CONFIG_FILE))?;
    cfg.validate()?;
    Ok(cfg)
}

fn oracle_enabled(cfg: &ExperimentConfig) -> CliResult<bool> {
    match cfg.oracle {
        OracleMode::Off => Ok(false),
        OracleMode::Auto => Ok(cfg.sites <= EXACT_MAX_SITES),
        OracleMode::On if cfg.sites > EXACT_MAX_SITES => Err(oracle_refusal(cfg.sites)),
        OracleMode::On => Ok(true),
    }
}

fn oracle_refusal(sites: usize) -> CliError {
    CliError::Resource(format!(
        "exact-reference merits need the full {sites}-site state vector; they are computed for at most {EXACT_MAX_SITES} sites"
    ))
}

fn write_manifest(dir: &Path, cfg: &ExperimentConfig, rep: usize, extra: &[(&str, String)]) -> CliResult<()> {
    let seed = replicate_seed(cfg, rep);
    let mut text = String::new();
    let mut line = |k: &str, v: String| {
        text.push_str(k);
        text.push_str(" = ");
        text.push_str(&v);
        text.push('\n');
    };
    line("code_version", CODE_VERSION.into());
    line("git_revision", GIT_REVISION.into());
    line("replicate", rep.to_string());
    line("base_seed", cfg.seed.to_string());
    line("replicate_seed", seed.to_string());
    line("fit_seed", derive_seed(seed, &[0]).to_string());
    line("n_params", cfg.shape()?.n_params().to_string());
    for (k, v) in extra {
        line(k, v.clone());
    }
    write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
}

fn read_manifest(dir: &Path) -> Vec<(String, String)> {
    fs::read_to_string(dir.join(MANIFEST_FILE))
        .unwrap_or_default()
        .lines()
        .filter_map(|l| l.split_once(" = ").map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}

fn manifest_value(dir: &Path, key: &str) -> Option<String> {
    read_manifest(dir).into_iter().find(|(k, _)| k == key).map(|(_, v)| v)
}

/// What `prepare` produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Prepared {
    pub dir: PathBuf,
    pub fit_steps: usize,
    pub fit_infidelity: f64,
    /// An existing, identical run was found and left untouched.
    pub reused: bool,
}

/// Creates the replicate directory and fits the initial state.
pub fn prepare(cfg: &ExperimentConfig, rep: usize) -> CliResult<Prepared> {
    cfg.validate()?;
    let dir = replicate_dir(cfg, rep);
    let snapshot = cfg.to_text();
    let cfg_path = dir.join(CONFIG_FILE);
    if cfg_path.exists() {
        let existing = fs::read_to_string(&cfg_path).map_err(|e| CliError::io(&cfg_path, e))?;
        if existing != snapshot {
            return Err(CliError::Config(format!(
                "{} already holds a run with a different configuration; use `resume` or another name",
                dir.display()
            )));
        }
        if !list_checkpoints(&dir)?.is_empty() {
            let fit_steps = manifest_value(&dir, "fit_steps").and_then(|v| v.parse().ok()).unwrap_or(0);
            let fit_infidelity = manifest_value(&dir, "fit_infidelity").and_then(|v| v.parse().ok()).unwrap_or(f64::NAN);
            return Ok(Prepared { dir, fit_steps, fit_infidelity, reused: true });
        }
    }
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    write_atomic(&cfg_path, snapshot.as_bytes())?;
    let shape = cfg.shape()?;
    let seed = replicate_seed(cfg, rep);
    let fit_sampler = if cfg.sites <= FULL_SUMMATION_MAX_SITES { Sampler::FullSummation } else { cfg.sampler() };
    let fit = FitOptions {
        noise: cfg.init_noise,
        seed: derive_seed(seed, &[0]),
        target: cfg.fit_target,
        max_steps: cfg.fit_max_steps,
        learning_rate: cfg.learning_rate,
        solver: Some(default_solver(shape.n_params(), sample_count(&fit_sampler, cfg.sites), cfg.fit_shift)),
        sampler: Some(fit_sampler),
    };
    let (network, report) = prepare_initial_state(&shape, &fit)?;
    Checkpoint { network, step: 0, time: 0.0, seed }.save(&checkpoint_path(&dir, 0))?;
    write_manifest(
        &dir,
        cfg,
        rep,
        &[
            ("fit_steps", report.steps.to_string()),
            ("fit_infidelity", format_float(report.infidelity)),
            ("fit_infidelity_exact", report.exact.to_string()),
            ("completed_step", "0".into()),
        ],
    )?;
    Ok(Prepared { dir, fit_steps: report.steps, fit_infidelity: report.infidelity, reused: false })
}

fn observable_columns(sites: usize) -> Vec<String> {
    let mut cols = vec!["step".to_string(), "t".to_string(), "energy".to_string()];
    cols.extend((1..=sites).map(|l| format!("sigma_x_{l}")));
    cols.extend((1..=sites).map(|l| format!("sigma_z_{l}")));
    cols
}

const INFIDELITY_COLUMNS: [&str; 6] =
    ["step", "t", "step_infidelity_sum", "accumulated_error", "exact_infidelity", "integrated_exact_infidelity"];

const DIAGNOSTICS_COLUMNS: [&str; 13] = [
    "step",
    "t",
    "block",
    "start",
    "span",
    "infidelity",
    "opt_steps",
    "converged",
    "condition",
    "residual",
    "fallback",
    "pseudo_inverse",
    "rank",
];

fn diagnostics_cells(d: &SolverDiagnostics) -> [Cell; 5] {
    [
        Cell::Float(d.condition),
        Cell::Float(d.residual),
        Cell::Bool(d.fallback),
        Cell::Bool(d.pseudo_inverse),
        d.rank.map_or(Cell::Raw(String::new()), |r| Cell::Int(r as u64)),
    ]
}

/// Reloads rows of `table` whose step is at most `max_step`; a missing
/// file gives an empty table with `columns`.
fn reload(dir: &Path, table: &str, columns: Vec<String>, max_step: usize) -> CliResult<Table> {
    let path = dir.join(table);
    let mut out = Table::new(columns.clone());
    if !path.exists() {
        return Ok(out);
    }
    let mut r = csv::Reader::from_path(&path).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != columns {
        return Err(CliError::Format(format!("{} has unexpected columns", path.display())));
    }
    for rec in r.records() {
        let rec = rec?;
        let step: usize = rec[0].parse().map_err(|_| CliError::Format(format!("{}: bad step", path.display())))?;
        if step <= max_step {
            out.push(rec.iter().map(|s| Cell::Raw(s.to_string())).collect());
        }
    }
    Ok(out)
}

/// Outcome of `evolve`.
#[derive(Clone, Debug, PartialEq)]
pub struct Evolved {
    pub dir: PathBuf,
    pub final_step: usize,
    /// Blocks that hit the step limit without reaching the cutoff.
    pub unconverged_blocks: usize,
    pub accumulated_error: f64,
}

/// Evolves the run in `dir` from its latest checkpoint to `t_final`.
pub fn evolve_dir(dir: &Path) -> CliResult<Evolved> {
    let cfg = load_run_config(dir)?;
    let checkpoints = list_checkpoints(dir)?;
    let (start_step, ck_path) =
        checkpoints.last().cloned().ok_or_else(|| CliError::Config(format!("{} has no checkpoint; run `prepare`", dir.display())))?;
    let ck = Checkpoint::load(&ck_path)?;
    if ck.step != start_step {
        return Err(CliError::Format(format!("{} records step {}", ck_path.display(), ck.step)));
    }
    let model = cfg.model()?;
    let sampler = cfg.sampler();
    let n_steps = cfg.n_steps();
    let stride = cfg.record_stride();
    let seed = ck.seed;
    let sites = cfg.sites;
    let mut observables = reload(dir, OBSERVABLES_TABLE, observable_columns(sites), start_step)?;
    let cols = |c: &[&str]| c.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let mut infidelity = reload(dir, INFIDELITY_TABLE, cols(&INFIDELITY_COLUMNS), start_step)?;
    let mut diagnostics = reload(dir, DIAGNOSTICS_TABLE, cols(&DIAGNOSTICS_COLUMNS), start_step)?;

    // running trapezoid for R(t), restored from the checkpoint row
    let (mut last_sum, mut accumulated) = match infidelity.rows.last() {
        Some(row) if start_step > 0 => {
            let get = |i: usize| match &row[i] {
                Cell::Raw(s) => crate::io::parse_float(s).unwrap_or(f64::NAN),
                Cell::Float(v) => *v,
                _ => f64::NAN,
            };
            (get(2), get(3))
        }
        _ => (0.0, 0.0),
    };

    let time_of = |step: usize| step as f64 * cfg.dt;
    let record = |psi: &Network, step: usize, observables: &mut Table| -> CliResult<()> {
        let obs = measure(psi, &model, &sampler, derive_seed(seed, &[2, step as u64]))?;
        let mut row = vec![Cell::Int(step as u64), Cell::Float(time_of(step)), Cell::Float(obs.energy)];
        row.extend(obs.sigma_x.iter().map(|&v| Cell::Float(v)));
        row.extend(obs.sigma_z.iter().map(|&v| Cell::Float(v)));
        observables.push(row);
        Ok(())
    };
    let unfilled = || [Cell::Float(f64::NAN), Cell::Float(f64::NAN)];

    if start_step == 0 && observables.rows.is_empty() {
        record(&ck.network, 0, &mut observables)?;
        let mut row = vec![Cell::Int(0), Cell::Float(0.0), Cell::Float(0.0), Cell::Float(0.0)];
        row.extend(unfilled());
        infidelity.push(row);
    }

    let schedule = match cfg.method {
        Method::Ptvmc => Some(TrotterSchedule::new(&model, cfg.span, cfg.dt)?),
        Method::Tvmc => None,
    };
    let ptvmc = match cfg.method {
        Method::Ptvmc => Some(cfg.ptvmc_options()?),
        Method::Tvmc => None,
    };
    let solver = cfg.solver()?;
    let mut psi = ck.network;
    let mut unconverged = 0;
    for step in start_step + 1..=n_steps {
        let step_seed = derive_seed(seed, &[1, step as u64]);
        let t = time_of(step);
        let step_sum = match cfg.method {
            Method::Ptvmc => {
                let (next, report): (Network, StepReport) =
                    ptvmc_step(&psi, schedule.as_ref().expect("ptvmc"), ptvmc.as_ref().expect("ptvmc"), step_seed)?;
                for (b, block) in report.blocks.iter().enumerate() {
                    if !block.converged {
                        unconverged += 1;
                    }
                    let mut row = vec![
                        Cell::Int(step as u64),
                        Cell::Float(t),
                        Cell::Int(b as u64),
                        Cell::Int(block.start as u64 + 1),
                        Cell::Int(block.span as u64),
                        Cell::Float(block.infidelity),
                        Cell::Int(block.steps as u64),
                        Cell::Bool(block.converged),
                    ];
                    row.extend(diagnostics_cells(&block.diagnostics));
                    diagnostics.push(row);
                }
                psi = next;
                report.infidelity_sum
            }
            Method::Tvmc => {
                let (next, report) = tvmc_rk4_step(&psi, &model, cfg.dt, &sampler, &solver, step_seed)?;
                let mut row = vec![
                    Cell::Int(step as u64),
                    Cell::Float(t),
                    Cell::Int(0),
                    Cell::Int(1),
                    Cell::Int(sites as u64),
                    Cell::Float(f64::NAN),
                    Cell::Int(4),
                    Cell::Bool(true),
                ];
                row.extend(diagnostics_cells(&report.diagnostics));
                diagnostics.push(row);
                psi = next;
                f64::NAN
            }
        };
        if step_sum.is_finite() {
            accumulated += 0.5 * cfg.dt * (last_sum + step_sum);
            last_sum = step_sum;
        } else {
            accumulated = f64::NAN;
            last_sum = f64::NAN;
        }
        if step % stride == 0 || step == n_steps {
            record(&psi, step, &mut observables)?;
            let mut row = vec![Cell::Int(step as u64), Cell::Float(t), Cell::Float(step_sum), Cell::Float(accumulated)];
            row.extend(unfilled());
            infidelity.push(row);
            // tables first: a checkpoint implies its rows are on disk
            observables.save(&dir.join(OBSERVABLES_TABLE))?;
            infidelity.save(&dir.join(INFIDELITY_TABLE))?;
            diagnostics.save(&dir.join(DIAGNOSTICS_TABLE))?;
            Checkpoint { network: psi.clone(), step, time: t, seed }.save(&checkpoint_path(dir, step))?;
        }
    }
    observables.save(&dir.join(OBSERVABLES_TABLE))?;
    infidelity.save(&dir.join(INFIDELITY_TABLE))?;
    diagnostics.save(&dir.join(DIAGNOSTICS_TABLE))?;
    let mut manifest: Vec<(String, String)> =
        read_manifest(dir).into_iter().filter(|(k, _)| k != "completed_step").collect();
    manifest.push(("completed_step".into(), n_steps.max(start_step).to_string()));
    let text: String = manifest.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(Evolved { dir: dir.to_path_buf(), final_step: n_steps.max(start_step), unconverged_blocks: unconverged, accumulated_error: accumulated })
}

/// Exact-reference merits of a finished (or partial) run.
#[derive(Clone, Debug, PartialEq)]
pub struct Merits {
    pub steps: Vec<usize>,
    pub times: Vec<f64>,
    pub exact_infidelity: Vec<f64>,
    pub integrated_exact_infidelity: Vec<f64>,
}

/// Computes `I_e`, `𝓘_e`, exact observables and `A_n`, `D_n` from the
/// checkpoints in `dir`. The reference is `e^{−iHt}|→…→⟩`.
pub fn merits_dir(dir: &Path) -> CliResult<Merits> {
    let cfg = load_run_config(dir)?;
    if cfg.sites > EXACT_MAX_SITES {
        return Err(oracle_refusal(cfg.sites));
    }
    let model = cfg.model()?;
    let checkpoints = list_checkpoints(dir)?;
    if checkpoints.is_empty() {
        return Err(CliError::Config(format!("{} has no checkpoint", dir.display())));
    }
    let loaded: Vec<Checkpoint> = checkpoints.iter().map(|(_, p)| Checkpoint::load(p)).collect::<CliResult<_>>()?;
    let prop = ExactPropagator::new(&model)?;
    let mut exact = Vec::with_capacity(loaded.len());
    let mut current = DenseState::uniform(cfg.sites);
    let mut t_prev = 0.0;
    for ck in &loaded {
        current = prop.evolve(&current, ck.time - t_prev)?;
        t_prev = ck.time;
        exact.push(current.clone());
    }
    let steps: Vec<usize> = loaded.iter().map(|c| c.step).collect();
    let times: Vec<f64> = loaded.iter().map(|c| c.time).collect();
    let ie: Vec<f64> = loaded.iter().zip(&exact).map(|(c, e)| exact_infidelity(&c.network, e)).collect::<Result<_, _>>()?;
    let integrated = integrate_nonuniform(&times, &ie);

    // exact observables
    let mut table = Table::new(observable_columns(cfg.sites));
    for ((s, t), e) in steps.iter().zip(&times).zip(&exact) {
        let mut row = vec![Cell::Int(*s as u64), Cell::Float(*t), Cell::Float(dense_energy(&model, e))];
        row.extend((0..cfg.sites).map(|l| Cell::Float(dense_sigma_x(e, l))));
        row.extend((0..cfg.sites).map(|l| Cell::Float(dense_sigma_z(e, l))));
        table.push(row);
    }
    table.save(&dir.join(EXACT_OBSERVABLES_TABLE))?;

    // amplitude ratio and phase distance against the final exact state's ranking
    let dim = 1usize << cfg.sites;
    let ranks: Vec<usize> = cfg.ranks.iter().copied().filter(|&r| r <= dim).collect();
    let max_rank = ranks.iter().copied().max().unwrap_or(1);
    let ranked = ranked_configurations(exact.last().expect("non-empty"), max_rank)?;
    let x_m = ranked[0];
    let mut ap = Table::new([
        "step",
        "t",
        "rank",
        "config_index",
        "amplitude_ratio",
        "phase_distance",
        "exact_amplitude_ratio",
        "exact_phase_distance",
    ]);
    for ((ck, t), e) in loaded.iter().zip(&times).zip(&exact) {
        for &n in &ranks {
            let y = ranked[n - 1];
            let (a, d) = amplitude_ratio_and_phase_distance(&ck.network, x_m, y)?;
            let (ea, ed) = dense_ratio_and_phase(e, x_m, y);
            ap.push(vec![
                Cell::Int(ck.step as u64),
                Cell::Float(*t),
                Cell::Int(n as u64),
                Cell::Int(y as u64),
                Cell::Float(a),
                Cell::Float(d),
                Cell::Float(ea),
                Cell::Float(ed),
            ]);
        }
    }
    ap.save(&dir.join(AMPLITUDE_PHASE_TABLE))?;

    // fill the exact columns of the infidelity table
    let path = dir.join(INFIDELITY_TABLE);
    if path.exists() {
        let cols: Vec<String> = INFIDELITY_COLUMNS.iter().map(|s| s.to_string()).collect();
        let mut t = reload(dir, INFIDELITY_TABLE, cols, usize::MAX)?;
        for row in &mut t.rows {
            let step: usize = match &row[0] {
                Cell::Raw(s) => s.parse().unwrap_or(usize::MAX),
                _ => usize::MAX,
            };
            if let Some(k) = steps.iter().position(|&s| s == step) {
                row[4] = Cell::Float(ie[k]);
                row[5] = Cell::Float(integrated[k]);
            }
        }
        t.save(&path)?;
    }

    if cfg.export_dense {
        for ((ck, s), e) in loaded.iter().zip(&steps).zip(&exact) {
            let d = dir.join("dense");
            write_atomic(&d.join(format!("nnqs_step_{s:06}.bin")), &encode_dense(&nnqs_to_dense(&ck.network)?))?;
            write_atomic(&d.join(format!("exact_step_{s:06}.bin")), &encode_dense(e))?;
        }
    }
    Ok(Merits { steps, times, exact_infidelity: ie, integrated_exact_infidelity: integrated })
}

/// Trapezoidal running integral on a possibly non-uniform grid.
fn integrate_nonuniform(times: &[f64], values: &[f64]) -> Vec<f64> {
    let uniform = times.windows(3).all(|w| ((w[2] - w[1]) - (w[1] - w[0])).abs() < 1e-9);
    if uniform && times.len() >= 2 && times[0] == 0.0 {
        return integrate_series(values, times[1] - times[0]);
    }
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for k in 0..values.len() {
        if k > 0 {
            acc += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
        }
        out.push(acc);
    }
    out
}

/// Runs `prepare`, `evolve` and (when enabled) `merits` for one replicate.
pub fn run_replicate(cfg: &ExperimentConfig, rep: usize) -> CliResult<(Prepared, Evolved, Option<Merits>)> {
    let with_oracle = oracle_enabled(cfg)?;
    let prepared = prepare(cfg, rep)?;
    let evolved = evolve_dir(&prepared.dir)?;
    let merits = if with_oracle { Some(merits_dir(&prepared.dir)?) } else { None };
    Ok((prepared, evolved, merits))
}

/// Continues an interrupted run and refreshes its merits.
pub fn resume_dir(dir: &Path) -> CliResult<(Evolved, Option<Merits>)> {
    let cfg = load_run_config(dir)?;
    let with_oracle = oracle_enabled(&cfg)?;
    let evolved = evolve_dir(dir)?;
    let merits = if with_oracle { Some(merits_dir(dir)?) } else { None };
    Ok((evolved, merits))
}

/// Reads a numeric column of a run table.
pub fn read_column(dir: &Path, table: &str, column: &str) -> CliResult<Vec<f64>> {
    let t = NumericTable::load(&dir.join(table))?;
    let c = t.column(column).ok_or_else(|| CliError::Format(format!("{table} has no column {column}")))?;
    Ok(t.rows.iter().map(|r| r[c]).collect())
}

/// Refuses oracle merits for long chains before any work is done.
pub fn check_oracle_request(cfg: &ExperimentConfig) -> CliResult<()> {
    oracle_enabled(cfg).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonuniform_integral() {
        assert_eq!(integrate_nonuniform(&[0.0, 1.0, 3.0], &[1.0, 1.0, 1.0]), vec![0.0, 1.0, 3.0]);
        assert_eq!(integrate_nonuniform(&[0.0, 0.5, 1.0], &[0.0, 1.0, 2.0]), vec![0.0, 0.25, 1.0]);
    }

    #[test]
    fn oracle_guard() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("sites", "16").unwrap();
        assert!(!oracle_enabled(&cfg).unwrap());
        cfg.set("oracle", "on").unwrap();
        assert_eq!(oracle_enabled(&cfg).unwrap_err().exit_code(), crate::error::EXIT_RESOURCE);
        cfg.set("sites", "14").unwrap();
        assert!(oracle_enabled(&cfg).unwrap());
    }
}
