//! Experiment dispatch and result emission.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use tensornet::mpo::{energy, MAX_DENSE_DIM};
use tensornet::mps::{mps_from_state_vector, CorrelationRange};
use tensornet::tebd::{self, EvolutionReport};
use tensornet::{ed, ops, oracle, trg, Model, Mps};

use crate::config::{Command, ExperimentConfig, Format};
use crate::error::CliError;
use crate::verify::{self, linear_fit, Suite};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: Command,
    pub config: ExperimentConfig,
    pub metrics: BTreeMap<String, Value>,
    pub wall_time_s: f64,
    pub version: String,
}

/// Numeric table emitted in CSV mode.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let wrap = |e: csv::Error| CliError::io("csv buffer", std::io::Error::other(e));
        w.write_record(&self.columns).map_err(wrap)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format!("{x:e}"))).map_err(wrap)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io("csv buffer", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let wrap = |e: csv::Error| CliError::Usage(format!("malformed csv: {e}"));
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let columns = r.headers().map_err(wrap)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(wrap)?;
            let row = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| CliError::Usage(format!("malformed csv field `{f}`: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }
}

pub struct RunOutput {
    pub record: ResultRecord,
    pub table: Table,
}

impl RunOutput {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(&self.record).expect("record serializes") + "\n"),
            Format::Csv => self.table.to_csv(),
        }
    }
}

type Metrics = BTreeMap<String, Value>;

fn model_of(config: &ExperimentConfig) -> Result<Model, CliError> {
    config.model.ok_or_else(|| CliError::Validation {
        field: "model".into(),
        message: format!("required by `{}`", config.command),
    })
}

/// Non-finite values become JSON null.
fn num(x: f64) -> Value {
    json!(x)
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    config.validate()?;
    let start = Instant::now();
    let (metrics, table) = match config.command {
        Command::Ed => run_ed(config)?,
        Command::Tebd => run_tebd(config)?,
        Command::Trg => run_trg(config)?,
        Command::MpsInfo => run_mps_info(config)?,
        Command::Corr => run_corr(config)?,
        Command::Verify => run_verify(config)?,
    };
    Ok(RunOutput {
        record: ResultRecord {
            command: config.command,
            config: config.clone(),
            metrics,
            wall_time_s: start.elapsed().as_secs_f64(),
            version: VERSION.to_string(),
        },
        table,
    })
}

fn spectrum(config: &ExperimentConfig, model: &Model) -> Result<(ed::SpectrumResult, &'static str), CliError> {
    let h = model.mpo()?;
    if (model.phys_dim() as f64).powi(model.n() as i32) <= MAX_DENSE_DIM as f64 {
        Ok((ed::solve_dense(&h)?, "dense"))
    } else {
        let a = &config.algorithm;
        Ok((ed::solve_iterative(&h, a.lanczos_iters, a.lanczos_tol)?, "lanczos"))
    }
}

fn run_ed(config: &ExperimentConfig) -> Result<(Metrics, Table), CliError> {
    let model = model_of(config)?;
    let (s, method) = spectrum(config, &model)?;
    let mut m = Metrics::new();
    m.insert("method".into(), json!(method));
    m.insert("dim".into(), json!(s.dim));
    m.insert("e0".into(), num(s.e0()));
    m.insert("residual".into(), num(s.residual));
    if let Some(gap) = s.gap() {
        m.insert("gap".into(), num(gap));
    }
    let mut table = Table::new(&["level", "energy"]);
    for (k, &e) in s.energies.iter().enumerate() {
        table.push(vec![k as f64, e]);
    }
    Ok((m, table))
}

fn bond_entropies(state: &Mps) -> Result<Vec<f64>, CliError> {
    Ok((0..state.len() - 1).map(|b| state.bond_entropy(b)).collect::<Result<_, _>>()?)
}

fn ground_state(config: &ExperimentConfig, model: &Model) -> Result<EvolutionReport, CliError> {
    Ok(tebd::find_ground_state(model, &config.algorithm.ground_state_options(config.seed))?)
}

fn run_tebd(config: &ExperimentConfig) -> Result<(Metrics, Table), CliError> {
    let model = model_of(config)?;
    let report = ground_state(config, &model)?;
    let state = &report.final_state;
    let mut m = Metrics::new();
    m.insert("final_energy".into(), num(report.final_energy));
    m.insert("converged".into(), json!(report.converged));
    m.insert("sweeps".into(), json!(report.sweeps()));
    m.insert("bond_dims".into(), json!(state.bond_dims()));
    m.insert("bond_entropies".into(), json!(bond_entropies(state)?));
    let max_dw = report.discarded_weight_trace.iter().copied().fold(0.0, f64::max);
    m.insert("max_discarded_weight".into(), num(max_dw));
    m.insert("energy_trace".into(), json!(report.energy_trace));
    m.insert("discarded_weight_trace".into(), json!(report.discarded_weight_trace));
    let mut table = Table::new(&["sweep", "tau", "energy", "discarded_weight", "norm"]);
    for k in 0..report.sweeps() {
        table.push(vec![
            (k + 1) as f64,
            report.tau_trace[k],
            report.energy_trace[k],
            report.discarded_weight_trace[k],
            report.norm_trace[k],
        ]);
    }
    Ok((m, table))
}

fn run_trg(config: &ExperimentConfig) -> Result<(Metrics, Table), CliError> {
    let a = &config.algorithm;
    let spec = a.truncation();
    let rows = std::thread::scope(|scope| {
        let handles: Vec<_> = a
            .betas
            .iter()
            .map(|&beta| {
                scope.spawn(move || trg::ln_z_per_site(beta, a.coupling, a.steps, &spec).map(|ln_z| (beta, ln_z)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("trg worker panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut table = Table::new(&["beta", "f", "ln_z_per_site", "steps", "chi"]);
    let (mut betas, mut fs, mut ln_zs) = (Vec::new(), Vec::new(), Vec::new());
    for (beta, ln_z) in rows {
        let f = -ln_z / beta;
        table.push(vec![beta, f, ln_z, a.steps as f64, a.chi_max as f64]);
        betas.push(beta);
        fs.push(f);
        ln_zs.push(ln_z);
    }
    let mut m = Metrics::new();
    m.insert("beta".into(), json!(betas));
    m.insert("f".into(), json!(fs));
    m.insert("ln_z_per_site".into(), json!(ln_zs));
    m.insert("steps".into(), json!(a.steps));
    m.insert("chi".into(), json!(a.chi_max));
    Ok((m, table))
}

fn run_mps_info(config: &ExperimentConfig) -> Result<(Metrics, Table), CliError> {
    let model = model_of(config)?;
    let (s, method) = spectrum(config, &model)?;
    let n = model.n();
    let psi = &s.ground_state;
    let compressed = mps_from_state_vector(psi, model.phys_dim(), n, &config.algorithm.truncation())?;
    let overlap = oracle::vdot(psi, &compressed.to_state_vector()?).norm_sqr();
    let entropies = bond_entropies(&compressed)?;
    let mut m = Metrics::new();
    m.insert("method".into(), json!(method));
    m.insert("e0".into(), num(s.e0()));
    m.insert("compressed_energy".into(), num(energy(&compressed, &model.mpo()?)?));
    m.insert("fidelity".into(), num(overlap));
    m.insert("bond_dims".into(), json!(compressed.bond_dims()));
    m.insert("bond_entropies".into(), json!(entropies));
    m.insert("norm".into(), num(compressed.norm()));
    let mut table = Table::new(&["bond", "chi", "entropy"]);
    for (b, (&chi, &e)) in compressed.bond_dims().iter().zip(&entropies).enumerate() {
        table.push(vec![b as f64, chi as f64, e]);
    }
    Ok((m, table))
}

fn range_name(r: CorrelationRange) -> &'static str {
    match r {
        CorrelationRange::Finite => "finite",
        CorrelationRange::ZeroRange => "zero",
        CorrelationRange::Infinite => "infinite",
    }
}

fn run_corr(config: &ExperimentConfig) -> Result<(Metrics, Table), CliError> {
    let model = model_of(config)?;
    let report = ground_state(config, &model)?;
    let state = &report.final_state;
    let transfer = state.correlation_length()?;
    let n = state.len();
    let reach = config.algorithm.max_distance.min(n - 1);
    let origin = (n - 1 - reach) / 2;
    let sz = ops::sz();
    let m0 = state.expect_local(&sz, origin)?.re;
    let mut table = Table::new(&["r", "connected", "raw"]);
    let mut fit_points = Vec::new();
    for r in 1..=reach {
        let j = origin + r;
        let raw = state.expect_two_site(&sz, origin, &sz, j)?.re;
        let connected = raw - m0 * state.expect_local(&sz, j)?.re;
        table.push(vec![r as f64, connected, raw]);
        if r >= 2 && connected.abs() > 1e-12 {
            fit_points.push((r as f64, connected.abs().ln()));
        }
    }
    let mut m = Metrics::new();
    m.insert("final_energy".into(), num(report.final_energy));
    m.insert("converged".into(), json!(report.converged));
    m.insert("xi".into(), num(transfer.xi));
    m.insert("range".into(), json!(range_name(transfer.range)));
    m.insert("transfer_eigs".into(), json!(transfer.transfer_eigs));
    m.insert("transfer_site".into(), json!(transfer.site));
    m.insert("origin".into(), json!(origin));
    if fit_points.len() >= 3 {
        let (slope, _) = linear_fit(&fit_points);
        m.insert("xi_fit".into(), num(-1.0 / slope));
    }
    Ok((m, table))
}

fn run_verify(config: &ExperimentConfig) -> Result<(Metrics, Table), CliError> {
    let suite: Suite = config.algorithm.suite.parse().map_err(CliError::Usage)?;
    let results = verify::verify(suite);
    let mut table = Table::new(&["criterion", "passed", "elapsed_s"]);
    for r in &results {
        table.push(vec![r.id as f64, r.passed as u8 as f64, r.elapsed_s]);
    }
    let mut m = Metrics::new();
    m.insert("all_passed".into(), json!(results.iter().all(|r| r.passed)));
    m.insert("criteria".into(), serde_json::to_value(&results).expect("results serialize"));
    Ok((m, table))
}

/// Writes `contents` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let shown = path.display().to_string();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(&shown, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::io(&shown, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(&shown, e))?;
    tmp.persist(path).map_err(|e| CliError::io(&shown, e.error))?;
    Ok(())
}

/// Emits the run to the configured destination.
pub fn emit(out: &RunOutput, config: &ExperimentConfig) -> Result<(), CliError> {
    let text = out.render(config.output.format)?;
    match config.output.path.as_deref() {
        None | Some("-") => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::io("stdout", e))?;
            Ok(())
        }
        Some(path) => write_atomic(Path::new(path), &text),
    }
}

pub fn read_record(path: &Path) -> Result<ResultRecord, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    Table::from_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn ed_reports_e0_and_gap() {
        let c = parse_config(r#"{"command":"ed","model":{"model":"heisenberg","n":4,"j":-1}}"#).unwrap();
        let out = run(&c).unwrap();
        let e0 = out.record.metrics["e0"].as_f64().unwrap();
        // open antiferromagnetic chain of four spins: E0 = -(3 + 2√3)/4
        assert!((e0 + (3.0 + 2.0 * 3f64.sqrt()) / 4.0).abs() < 1e-12);
        assert!(out.record.metrics["gap"].as_f64().unwrap() > 0.0);
        assert_eq!(out.table.rows.len(), 16);
    }

    #[test]
    fn table_csv_round_trip() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.0, -2.5e-17]);
        t.push(vec![0.1, 3.0]);
        let back = Table::from_csv(&t.to_csv().unwrap()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column("b").unwrap(), vec![-2.5e-17, 3.0]);
    }

    #[test]
    fn trg_grid_is_monotone_in_beta() {
        let c = parse_config(r#"{"command":"trg","algorithm":{"betas":[0.1,0.3,0.44,0.6,0.9],"steps":6,"chi_max":8}}"#)
            .unwrap();
        let out = run(&c).unwrap();
        let ln_z = out.table.column("ln_z_per_site").unwrap();
        assert!(ln_z.windows(2).all(|w| w[1] > w[0]), "{ln_z:?}");
        assert_eq!(out.table.column("beta").unwrap(), vec![0.1, 0.3, 0.44, 0.6, 0.9]);
    }

    #[test]
    fn tebd_without_sweeps_is_flagged() {
        let c = parse_config(r#"{"command":"tebd","model":{"model":"heisenberg","n":4,"j":1},"algorithm":{"max_sweeps":0}}"#)
            .unwrap();
        let out = run(&c).unwrap();
        assert_eq!(out.record.metrics["converged"], json!(false));
        assert_eq!(out.record.metrics["sweeps"], json!(0));
    }

    #[test]
    fn corr_rejects_long_range_models() {
        let c = parse_config(r#"{"command":"corr","model":{"model":"exp_decay","n":6,"xi":1}}"#).unwrap();
        assert_eq!(run(&c).err().unwrap().exit_code(), 2);
    }
}
