//! Exact time evolution and Floquet analysis.
//!
//! Time-dependent problems are integrated with a fourth-order Magnus
//! scheme on two-point Gauss-Legendre nodes; every step applies an exact
//! matrix exponential of the step generator, so the evolution is unitary
//! by construction and norm drift signals a genuine failure. Dense
//! exponentials use an eigendecomposition (or a Taylor expansion at very
//! small dimension); systems past the dense threshold fall back to a
//! Lanczos action.

mod strobo;

pub use strobo::{stroboscopic_sequence, LogExtraction, SocFit, StroboscopicEngine, StroboscopicSpec};

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, TWO_PI};
use crate::model::TimeDependentHamiltonian;
use crate::sparse::SparseOperator;

/// Largest dimension for which full dense propagators are built.
pub const DENSE_THRESHOLD: usize = 4096;
/// Below this dimension, step exponentials use the Taylor route.
const TAYLOR_DIM: usize = 24;

const GAUSS_C1: f64 = 0.5 - 0.28867513459481287; // 1/2 - sqrt(3)/6
const GAUSS_C2: f64 = 0.5 + 0.28867513459481287;

#[derive(Clone)]
pub enum HamiltonianKind<'a> {
    Static(&'a SparseOperator),
    Driven(&'a TimeDependentHamiltonian),
}

impl HamiltonianKind<'_> {
    pub fn dim(&self) -> usize {
        match self {
            HamiltonianKind::Static(h) => h.dim(),
            HamiltonianKind::Driven(h) => h.dim(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum StepRule {
    Fixed(f64),
    /// `dt = 1 / (resolution * frequency_scale)`.
    Auto { resolution: f64 },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Auto { resolution: 64.0 }
    }
}

pub struct EvolutionSpec<'a> {
    pub hamiltonian: HamiltonianKind<'a>,
    pub t_final: f64,
    pub step: StepRule,
    pub initial_state: Array1<C64>,
    pub observables: Vec<(String, SparseOperator)>,
    pub record_stride: usize,
    pub norm_tol: f64,
}

impl<'a> EvolutionSpec<'a> {
    pub fn new(
        hamiltonian: HamiltonianKind<'a>,
        t_final: f64,
        initial_state: Array1<C64>,
    ) -> Self {
        Self {
            hamiltonian,
            t_final,
            step: StepRule::default(),
            initial_state,
            observables: Vec::new(),
            record_stride: 1,
            norm_tol: 1e-8,
        }
    }

    pub fn with_observable(mut self, label: impl Into<String>, op: SparseOperator) -> Self {
        self.observables.push((label.into(), op));
        self
    }

    pub fn with_step(mut self, step: StepRule) -> Self {
        self.step = step;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride.max(1);
        self
    }
}

/// Recorded observables over an evolution. Expectation values of Hermitian
/// observables are stored as their real parts.
#[derive(Clone, Debug)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `values[k][i]` is observable `k` at `times[i]`.
    pub values: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    pub final_state: Array1<C64>,
}

impl TimeSeries {
    pub fn series(&self, label: &str) -> Option<&[f64]> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|k| self.values[k].as_slice())
    }
}

struct DenseDriven {
    static_part: Array2<C64>,
    drive_parts: Vec<(Array2<C64>, f64, f64, f64)>,
}

impl DenseDriven {
    fn new(h: &TimeDependentHamiltonian) -> Self {
        Self {
            static_part: h.static_part.to_dense(),
            drive_parts: h
                .drives
                .iter()
                .map(|d| (d.op.to_dense(), d.amplitude, d.frequency, d.phase))
                .collect(),
        }
    }

    fn at(&self, t: f64) -> Array2<C64> {
        let mut m = self.static_part.clone();
        for (op, f, nu, phi) in &self.drive_parts {
            let env = f * (TWO_PI * nu * t + phi).cos();
            if env != 0.0 {
                m = m + op.mapv(|z| z * env);
            }
        }
        m
    }
}

fn pick_dt(step: StepRule, scale: f64, t_final: f64) -> f64 {
    let dt = match step {
        StepRule::Fixed(dt) => dt,
        StepRule::Auto { resolution } => {
            if scale <= 0.0 {
                t_final
            } else {
                1.0 / (resolution * scale)
            }
        }
    };
    dt.min(t_final).max(t_final * 1e-9)
}

/// Magnus generator for one step, as an effective Hermitian matrix:
/// the step unitary is `exp(-i 2 pi dt H_bar)`.
fn magnus_generator(h: &DenseDriven, t: f64, dt: f64) -> Array2<C64> {
    let h1 = h.at(t + GAUSS_C1 * dt);
    let h2 = h.at(t + GAUSS_C2 * dt);
    let avg = (&h1 + &h2).mapv(|z| z * 0.5);
    let comm = h2.dot(&h1) - h1.dot(&h2);
    let factor = C64::new(0.0, -TWO_PI * 3f64.sqrt() * dt / 12.0);
    avg + comm.mapv(|z| z * factor)
}

fn step_unitary(hbar: &Array2<C64>, dt: f64) -> Result<Array2<C64>> {
    if hbar.nrows() <= TAYLOR_DIM {
        let a = hbar.mapv(|z| z * C64::new(0.0, -TWO_PI * dt));
        Ok(linalg::small_expm(&a))
    } else {
        linalg::evolution_operator(hbar, dt)
    }
}

struct Recorder<'a> {
    observables: &'a [(String, SparseOperator)],
    norm_tol: f64,
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    norms: Vec<f64>,
}

impl<'a> Recorder<'a> {
    fn new(spec: &'a EvolutionSpec) -> Self {
        Self {
            observables: &spec.observables,
            norm_tol: spec.norm_tol,
            times: Vec::new(),
            values: vec![Vec::new(); spec.observables.len()],
            norms: Vec::new(),
        }
    }

    fn record(&mut self, t: f64, psi: &Array1<C64>) -> Result<()> {
        self.times.push(t);
        for (k, (_, op)) in self.observables.iter().enumerate() {
            self.values[k].push(op.expectation(psi.view()).re);
        }
        let n = linalg::norm(psi.view());
        if (n - 1.0).abs() > self.norm_tol {
            return Err(Error::NormDrift { norm: n, tol: self.norm_tol, t });
        }
        self.norms.push(n);
        Ok(())
    }

    fn finish(self, final_state: Array1<C64>) -> TimeSeries {
        TimeSeries {
            times: self.times,
            labels: self.observables.iter().map(|(l, _)| l.clone()).collect(),
            values: self.values,
            norms: self.norms,
            final_state,
        }
    }
}

/// Evolve a state, recording observables every `record_stride` steps.
pub fn evolve(spec: &EvolutionSpec) -> Result<TimeSeries> {
    let norm0 = linalg::norm(spec.initial_state.view());
    if (norm0 - 1.0).abs() > 1e-10 {
        return Err(Error::BadInitialState(norm0));
    }
    let dim = spec.hamiltonian.dim();
    if spec.initial_state.len() != dim {
        return Err(Error::DimensionMismatch(spec.initial_state.len(), dim));
    }
    let mut rec = Recorder::new(spec);

    match &spec.hamiltonian {
        HamiltonianKind::Static(h) => {
            let (vals, vecs) = linalg::eigh(&h.to_dense())?;
            let dt = pick_dt(spec.step, 0.0, spec.t_final);
            let n_steps = (spec.t_final / dt).round().max(1.0) as usize;
            let dt = spec.t_final / n_steps as f64;
            let mut psi = spec.initial_state.clone();
            rec.record(0.0, &psi)?;
            for s in 1..=n_steps {
                if s % spec.record_stride == 0 || s == n_steps {
                    psi = linalg::evolve_state_eig(
                        &vals,
                        &vecs,
                        spec.initial_state.view(),
                        s as f64 * dt,
                    );
                    rec.record(s as f64 * dt, &psi)?;
                }
            }
            Ok(rec.finish(psi))
        }
        HamiltonianKind::Driven(h) => {
            let dt = pick_dt(spec.step, h.frequency_scale(), spec.t_final);
            let n_steps = (spec.t_final / dt).ceil().max(1.0) as usize;
            let dt = spec.t_final / n_steps as f64;
            let mut psi = spec.initial_state.clone();
            rec.record(0.0, &psi)?;
            if dim <= DENSE_THRESHOLD {
                let dense = DenseDriven::new(h);
                for s in 0..n_steps {
                    let hbar = magnus_generator(&dense, s as f64 * dt, dt);
                    if dim <= TAYLOR_DIM {
                        let u = step_unitary(&hbar, dt)?;
                        psi = u.dot(&psi);
                    } else {
                        let (vals, vecs) = linalg::eigh(&hbar)?;
                        psi = linalg::evolve_state_eig(&vals, &vecs, psi.view(), dt);
                    }
                    if (s + 1) % spec.record_stride == 0 || s + 1 == n_steps {
                        rec.record((s + 1) as f64 * dt, &psi)?;
                    }
                }
            } else {
                for s in 0..n_steps {
                    let t = s as f64 * dt;
                    let h1 = h.at(t + GAUSS_C1 * dt);
                    let h2 = h.at(t + GAUSS_C2 * dt);
                    let avg = h1.add(&h2)?.scale(C64::new(0.5, 0.0));
                    let comm = h2.commutator(&h1)?;
                    let hbar = avg
                        .add(&comm.scale(C64::new(0.0, -TWO_PI * 3f64.sqrt() * dt / 12.0)))?;
                    let apply = |v: ndarray::ArrayView1<C64>| hbar.apply(v);
                    psi = linalg::lanczos_expv(&apply, psi.view(), dt, 40, 1e-12)?;
                    if (s + 1) % spec.record_stride == 0 || s + 1 == n_steps {
                        rec.record((s + 1) as f64 * dt, &psi)?;
                    }
                }
            }
            Ok(rec.finish(psi))
        }
    }
}

/// Full propagator over `[0, t]`.
pub fn propagator(kind: HamiltonianKind, t: f64, step: StepRule) -> Result<Array2<C64>> {
    let dim = kind.dim();
    if dim > DENSE_THRESHOLD {
        return Err(Error::DenseThreshold(dim, DENSE_THRESHOLD));
    }
    match kind {
        HamiltonianKind::Static(h) => {
            if t == 0.0 {
                return Ok(Array2::eye(dim));
            }
            linalg::evolution_operator(&h.to_dense(), t)
        }
        HamiltonianKind::Driven(h) => {
            if t == 0.0 {
                return Ok(Array2::eye(dim));
            }
            let dense = DenseDriven::new(h);
            let dt = pick_dt(step, h.frequency_scale(), t);
            let n_steps = (t / dt).ceil().max(1.0) as usize;
            let dt = t / n_steps as f64;
            let mut u = Array2::<C64>::eye(dim);
            for s in 0..n_steps {
                let hbar = magnus_generator(&dense, s as f64 * dt, dt);
                let ustep = step_unitary(&hbar, dt)?;
                u = ustep.dot(&u);
            }
            Ok(u)
        }
    }
}

/// Effective Hamiltonian and quasi-energies of a periodically driven
/// system: `H_eff = (i / 2 pi T) log U(T)` with eigenphases folded to the
/// principal branch.
#[derive(Clone, Debug)]
pub struct FloquetResult {
    pub period: f64,
    pub floquet_operator: Array2<C64>,
    pub effective_hamiltonian: Array2<C64>,
    /// Quasi-energies in MHz, one per eigenvector, in `[-1/2T, 1/2T)`.
    pub quasi_energies: Vec<f64>,
    pub soc_fit: Option<SocFit>,
    pub flags: Vec<String>,
}

pub fn floquet_effective(
    h: &TimeDependentHamiltonian,
    period: f64,
    step: StepRule,
) -> Result<FloquetResult> {
    let scale = 1.0 + h.frequency_scale();
    let dev = h.periodicity_deviation(period);
    if dev > 1e-10 * scale {
        return Err(Error::NotPeriodic(dev));
    }
    let u = propagator(HamiltonianKind::Driven(h), period, step)?;
    floquet_from_unitary(u, period)
}

/// Branch-fixed log of a one-period propagator.
pub fn floquet_from_unitary(u: Array2<C64>, period: f64) -> Result<FloquetResult> {
    let (phases, vecs) = linalg::unitary_eig(&u, 1e-8)?;
    let branch_margin = 1e-9;
    let mut quasi = Vec::with_capacity(phases.len());
    for &theta in &phases {
        if std::f64::consts::PI - theta.abs() < branch_margin {
            return Err(Error::BranchCut(-theta / (TWO_PI * period), branch_margin));
        }
        quasi.push(-theta / (TWO_PI * period));
    }
    let diag: Array1<C64> = quasi.iter().map(|&e| C64::new(e, 0.0)).collect();
    let scaled = &vecs * &diag.view().insert_axis(ndarray::Axis(0));
    let h_eff = scaled.dot(&vecs.t().mapv(|z| z.conj()));
    Ok(FloquetResult {
        period,
        floquet_operator: u,
        effective_hamiltonian: linalg::hermitize(&h_eff),
        quasi_energies: quasi,
        soc_fit: None,
        flags: Vec::new(),
    })
}
