//! Time-evolving block decimation with first-order Trotter gates.
//!
//! A sweep applies every bond gate once, site by site, carrying the
//! orthogonality center along; consecutive sweeps alternate direction.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decomp::{self, TruncationSpec};
use crate::error::{Error, Result};
use crate::mpo::{energy, Model, Mpo};
use crate::mps::{Mps, SweepDirection};
use crate::random;
use crate::tensor::DenseTensor;
use crate::C64;

/// RNG stream used for TEBD start states.
pub const START_STATE_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeMode {
    /// Gates `exp(-τ h)`.
    Imaginary,
    /// Gates `exp(-i τ h)`.
    Real,
}

#[derive(Debug, Clone)]
pub struct TrotterSchedule {
    /// `(b, gate)` acting on sites `b, b+1`, in bond order.
    pub gates: Vec<(usize, DenseTensor)>,
    pub tau: f64,
    pub mode: TimeMode,
    pub order: u8,
}

pub fn build_gates(model: &Model, tau: f64, mode: TimeMode) -> Result<TrotterSchedule> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("tau must be finite and non-negative, got {tau}")));
    }
    let gates = model
        .bond_terms()?
        .iter()
        .enumerate()
        .map(|(b, h)| {
            let g = match mode {
                TimeMode::Imaginary => decomp::hermitian_function(h, |w| C64::new((-tau * w).exp(), 0.0)),
                TimeMode::Real => decomp::hermitian_function(h, |w| C64::from_polar(1.0, -tau * w)),
            }?;
            Ok((b, g))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrotterSchedule {
        gates,
        tau,
        mode,
        order: 1,
    })
}

/// One pass over all bonds in `direction`; returns the largest discarded weight.
pub fn sweep_in_place(m: &mut Mps, sched: &TrotterSchedule, spec: &TruncationSpec, direction: SweepDirection) -> Result<f64> {
    let n = m.len();
    let mut worst = 0.0f64;
    match direction {
        SweepDirection::Forward => {
            if m.center() != Some(0) {
                m.move_center_in_place(0, &TruncationSpec::unlimited())?;
            }
            for (b, g) in &sched.gates {
                worst = worst.max(m.apply_gate_in_place(g, *b, spec, direction)?);
            }
        }
        SweepDirection::Backward => {
            if m.center() != Some(n - 1) {
                m.move_center_in_place(n - 1, &TruncationSpec::unlimited())?;
            }
            for (b, g) in sched.gates.iter().rev() {
                worst = worst.max(m.apply_gate_in_place(g, *b, spec, direction)?);
            }
        }
    }
    Ok(worst)
}

pub fn sweep(m: &Mps, sched: &TrotterSchedule, spec: &TruncationSpec, direction: SweepDirection) -> Result<(Mps, f64)> {
    let mut out = m.clone();
    let worst = sweep_in_place(&mut out, sched, spec, direction)?;
    Ok((out, worst))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateOptions {
    pub chi_max: usize,
    pub cutoff: f64,
    pub tau_schedule: Vec<f64>,
    /// Per τ stage.
    pub max_sweeps: usize,
    pub energy_tol: f64,
    pub seed: u64,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self {
            chi_max: 16,
            cutoff: 0.0,
            tau_schedule: vec![0.1, 0.01, 0.001],
            max_sweeps: 5000,
            energy_tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionReport {
    /// `⟨H⟩ / ⟨ψ|ψ⟩` after each sweep.
    pub energy_trace: Vec<f64>,
    /// Largest discarded weight of each sweep.
    pub discarded_weight_trace: Vec<f64>,
    /// Norm after each sweep, before any renormalization.
    pub norm_trace: Vec<f64>,
    /// τ of each sweep.
    pub tau_trace: Vec<f64>,
    pub final_state: Mps,
    pub final_energy: f64,
    pub converged: bool,
}

impl EvolutionReport {
    pub fn sweeps(&self) -> usize {
        self.energy_trace.len()
    }
}

/// Random real product state.
pub fn random_product_state<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Mps> {
    let locals: Vec<Vec<C64>> = (0..n)
        .map(|_| (0..d).map(|_| C64::new(random::normal(rng), 0.0)).collect())
        .collect();
    Mps::product_state(&locals)
}

/// Imaginary-time evolution through a decreasing τ schedule. A stage ends
/// when the energy changes by less than `energy_tol` over a forward and
/// backward sweep pair, or after `max_sweeps` sweeps.
pub fn find_ground_state(model: &Model, opts: &GroundStateOptions) -> Result<EvolutionReport> {
    let h = model.mpo()?;
    let mut rng = random::stream(opts.seed, START_STATE_STREAM);
    let start = random_product_state(model.n(), model.phys_dim(), &mut rng)?;
    find_ground_state_from(start, model, &h, opts)
}

pub fn find_ground_state_from(start: Mps, model: &Model, h: &Mpo, opts: &GroundStateOptions) -> Result<EvolutionReport> {
    if opts.chi_max == 0 {
        return Err(Error::InvalidArgument("chi_max must be at least 1".into()));
    }
    let spec = TruncationSpec {
        chi_max: Some(opts.chi_max),
        cutoff: opts.cutoff,
        ..TruncationSpec::default()
    };
    spec.validate()?;
    let mut state = start.normalized()?;
    let mut direction = SweepDirection::Forward;
    let mut report = EvolutionReport {
        energy_trace: Vec::new(),
        discarded_weight_trace: Vec::new(),
        norm_trace: Vec::new(),
        tau_trace: Vec::new(),
        final_energy: energy(&state, h)?,
        final_state: state.clone(),
        converged: false,
    };
    let mut stage_converged = false;
    for &tau in &opts.tau_schedule {
        let sched = build_gates(model, tau, TimeMode::Imaginary)?;
        let mut recent: Vec<f64> = Vec::new();
        stage_converged = false;
        for _ in 0..opts.max_sweeps {
            let lost = sweep_in_place(&mut state, &sched, &spec, direction)?;
            direction = direction.reversed();
            report.norm_trace.push(state.normalize_in_place()?);
            let e = energy(&state, h)?;
            report.energy_trace.push(e);
            report.discarded_weight_trace.push(lost);
            report.tau_trace.push(tau);
            recent.push(e);
            let k = recent.len();
            if k >= 3 && (recent[k - 1] - recent[k - 3]).abs() < opts.energy_tol {
                stage_converged = true;
                break;
            }
        }
    }
    report.converged = stage_converged && opts.max_sweeps > 0;
    report.final_energy = energy(&state, h)?;
    report.final_state = state;
    Ok(report)
}

/// Real-time evolution with `round(t_total / dt)` sweeps of step `dt`.
pub fn evolve_real_time(m: &Mps, model: &Model, t_total: f64, dt: f64, spec: &TruncationSpec) -> Result<EvolutionReport> {
    if !(dt > 0.0) || !(t_total >= 0.0) || !t_total.is_finite() {
        return Err(Error::InvalidArgument(format!("need dt > 0 and t_total >= 0, got {dt}, {t_total}")));
    }
    spec.validate()?;
    let h = model.mpo()?;
    let sched = build_gates(model, dt, TimeMode::Real)?;
    let steps = (t_total / dt).round() as usize;
    let mut state = m.clone();
    let mut direction = SweepDirection::Forward;
    let mut report = EvolutionReport {
        energy_trace: Vec::with_capacity(steps),
        discarded_weight_trace: Vec::with_capacity(steps),
        norm_trace: Vec::with_capacity(steps),
        tau_trace: Vec::with_capacity(steps),
        final_energy: energy(&state, &h)?,
        final_state: state.clone(),
        converged: true,
    };
    for _ in 0..steps {
        let lost = sweep_in_place(&mut state, &sched, spec, direction)?;
        direction = direction.reversed();
        report.norm_trace.push(state.norm());
        report.energy_trace.push(energy(&state, &h)?);
        report.discarded_weight_trace.push(lost);
        report.tau_trace.push(dt);
    }
    report.final_energy = energy(&state, &h)?;
    report.final_state = state;
    Ok(report)
}
