//! Hamiltonian builders: qubit-resonator lattices, driven two-site devices,
//! and reference spinful Bose-Hubbard models.
//!
//! Frequencies are in MHz, times in microseconds. A modulated coupling has
//! the waveform `g(t) = g + f cos(2 pi nu t + phi)` with `nu` in MHz.

mod fock;
mod lattice;
mod presets;

pub use fock::{build_effective_bh, SpinfulFockBasis};
pub use lattice::{Boundary, LatticeSpec, Topology};
pub use presets::preset;

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{build_space, local_ladder, HilbertSpace, Ladder, ModeSpec};
use crate::sparse::SparseOperator;

pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QubitDef {
    pub label: String,
    /// Transition frequency in MHz.
    pub freq: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BosonDef {
    pub label: String,
    /// Mode frequency in MHz.
    pub freq: f64,
    pub photon_cutoff: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StaticCoupling {
    pub qubit: String,
    pub mode: String,
    /// Coupling strength g in MHz.
    pub g: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingModel {
    /// Excitation-conserving coupling `g (c^dag a + c a^dag)`.
    Rwa,
    /// Full transverse coupling `g sigma_x (a + a^dag)`.
    FullRabi,
}

/// Per-site device description: qubit and mode frequencies, static
/// couplings, and the coupling model. Uniform across the lattice.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SiteSpec {
    pub qubits: Vec<QubitDef>,
    pub modes: Vec<BosonDef>,
    pub couplings: Vec<StaticCoupling>,
    pub coupling_model: CouplingModel,
}

impl SiteSpec {
    /// Single qubit, single mode (the basic cavity-QED site).
    pub fn single(
        qubit_freq: f64,
        mode_freq: f64,
        g: f64,
        photon_cutoff: u32,
        coupling_model: CouplingModel,
    ) -> Self {
        Self {
            qubits: vec![QubitDef { label: "q".into(), freq: qubit_freq }],
            modes: vec![BosonDef { label: "r".into(), freq: mode_freq, photon_cutoff }],
            couplings: vec![StaticCoupling { qubit: "q".into(), mode: "r".into(), g }],
            coupling_model,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits.is_empty() && self.modes.is_empty() {
            return Err(Error::SiteSpec("site has no qubits and no modes".into()));
        }
        let mut labels: Vec<&str> = Vec::new();
        for q in &self.qubits {
            if q.freq <= 0.0 {
                return Err(Error::SiteSpec(format!("qubit `{}` frequency must be > 0", q.label)));
            }
            labels.push(&q.label);
        }
        for m in &self.modes {
            if m.freq <= 0.0 {
                return Err(Error::SiteSpec(format!("mode `{}` frequency must be > 0", m.label)));
            }
            if m.photon_cutoff == 0 {
                return Err(Error::InvalidCutoff(m.label.clone()));
            }
            labels.push(&m.label);
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return Err(Error::SiteSpec("duplicate qubit/mode label".into()));
        }
        for c in &self.couplings {
            self.qubit(&c.qubit)?;
            self.boson(&c.mode)?;
        }
        Ok(())
    }

    pub fn qubit(&self, label: &str) -> Result<&QubitDef> {
        self.qubits
            .iter()
            .find(|q| q.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn boson(&self, label: &str) -> Result<&BosonDef> {
        self.modes
            .iter()
            .find(|m| m.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn coupling_g(&self, qubit: &str, mode: &str) -> f64 {
        self.couplings
            .iter()
            .find(|c| c.qubit == qubit && c.mode == mode)
            .map(|c| c.g)
            .unwrap_or(0.0)
    }

    /// Dispersive-regime report: `|g| / |Delta|` for every static coupling.
    /// Ratios near or above ~0.3 mean the dispersive treatment is suspect.
    pub fn dispersive_ratios(&self) -> Vec<(String, String, f64)> {
        self.couplings
            .iter()
            .filter(|c| c.g != 0.0)
            .map(|c| {
                let wq = self.qubit(&c.qubit).expect("validated").freq;
                let wm = self.boson(&c.mode).expect("validated").freq;
                let delta = wm - wq;
                let ratio = if delta == 0.0 { f64::INFINITY } else { (c.g / delta).abs() };
                (c.qubit.clone(), c.mode.clone(), ratio)
            })
            .collect()
    }
}

/// Inter-site photon hopping, one amplitude per resonator mode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InterSiteCoupling {
    /// Hopping amplitude per mode, aligned with `SiteSpec::modes`.
    pub hops: Vec<f64>,
    /// With the scaling rule set, hop m equals `hops[0] * mode_numbers[m]`
    /// (capacitive coupling growing with the mode index).
    pub mode_numbers: Option<Vec<u32>>,
}

impl InterSiteCoupling {
    pub fn uniform(j: f64, num_modes: usize) -> Self {
        Self { hops: vec![j; num_modes], mode_numbers: None }
    }

    pub fn per_mode(hops: Vec<f64>) -> Self {
        Self { hops, mode_numbers: None }
    }

    pub fn index_scaled(j1: f64, mode_numbers: Vec<u32>) -> Self {
        Self { hops: vec![j1; mode_numbers.len()], mode_numbers: Some(mode_numbers) }
    }

    pub fn hop(&self, mode_idx: usize) -> f64 {
        match &self.mode_numbers {
            Some(numbers) => self.hops[0] * numbers[mode_idx] as f64,
            None => self.hops[mode_idx],
        }
    }
}

/// Modulation of one qubit-mode coupling:
/// `g(t) = g + amplitude * cos(2 pi frequency t + phase)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DriveSpec {
    pub site: usize,
    pub qubit: String,
    pub mode: String,
    /// Modulation amplitude f in MHz.
    pub amplitude: f64,
    /// Modulation frequency in MHz.
    pub frequency: f64,
    /// Phase in radians.
    pub phase: f64,
}

/// Label of a mode belonging to a given lattice site in the full space.
pub fn site_mode_label(label: &str, site: usize) -> String {
    format!("{label}.{site}")
}

/// Tensor-product space for a lattice of identical sites: per site, all
/// qubits then all resonator modes, sites in index order.
pub fn lattice_space(lattice: &LatticeSpec, site: &SiteSpec) -> Result<Arc<HilbertSpace>> {
    site.validate()?;
    let mut modes = Vec::new();
    for s in 0..lattice.num_sites() {
        for q in &site.qubits {
            modes.push(ModeSpec::qubit(site_mode_label(&q.label, s)));
        }
        for m in &site.modes {
            modes.push(ModeSpec::boson(site_mode_label(&m.label, s), m.photon_cutoff));
        }
    }
    build_space(modes)
}

fn hop_triplets(
    space: &Arc<HilbertSpace>,
    to: &str,
    from: &str,
    amp: C64,
    out: &mut Vec<(usize, usize, C64)>,
) -> Result<()> {
    let op = crate::hilbert::transfer_op(space, to, from)?;
    out.extend(op.entries().map(|(r, c, v)| (r, c, v * amp)));
    Ok(())
}

/// One site's internal terms, as triplets on the full space.
fn site_terms(
    space: &Arc<HilbertSpace>,
    site: &SiteSpec,
    s: usize,
    out: &mut Vec<(usize, usize, C64)>,
) -> Result<()> {
    for q in &site.qubits {
        let label = site_mode_label(&q.label, s);
        let k = space.mode_index(&label)?;
        match site.coupling_model {
            CouplingModel::Rwa => {
                // omega c^dag c
                for idx in 0..space.dimension() {
                    let n = space.occupation_of(idx, k);
                    if n > 0 {
                        out.push((idx, idx, C64::new(q.freq * n as f64, 0.0)));
                    }
                }
            }
            CouplingModel::FullRabi => {
                // (omega/2) sigma_z
                for idx in 0..space.dimension() {
                    let sign = if space.occupation_of(idx, k) == 1 { 0.5 } else { -0.5 };
                    out.push((idx, idx, C64::new(q.freq * sign, 0.0)));
                }
            }
        }
    }
    for m in &site.modes {
        let label = site_mode_label(&m.label, s);
        let k = space.mode_index(&label)?;
        for idx in 0..space.dimension() {
            let n = space.occupation_of(idx, k);
            if n > 0 {
                out.push((idx, idx, C64::new(m.freq * n as f64, 0.0)));
            }
        }
    }
    for c in &site.couplings {
        if c.g == 0.0 {
            continue;
        }
        let op = coupling_operator(space, site, s, &c.qubit, &c.mode)?;
        out.extend(op.entries().map(|(r, col, v)| (r, col, v * C64::new(c.g, 0.0))));
    }
    Ok(())
}

/// The (unit-amplitude) coupling operator between a qubit and a mode at a
/// site: `c^dag a + c a^dag` in the excitation-conserving model,
/// `sigma_x (a + a^dag)` in the full transverse model.
pub fn coupling_operator(
    space: &Arc<HilbertSpace>,
    site: &SiteSpec,
    s: usize,
    qubit: &str,
    mode: &str,
) -> Result<SparseOperator> {
    let ql = site_mode_label(qubit, s);
    let ml = site_mode_label(mode, s);
    let qk = space.mode_index(&ql)?;
    let mk = space.mode_index(&ml)?;
    let qd = space.modes()[qk].dim();
    let md = space.modes()[mk].dim();
    match site.coupling_model {
        CouplingModel::Rwa => {
            let t = space.embed_two_modes(
                qk,
                &local_ladder(qd, Ladder::Raise),
                mk,
                &local_ladder(md, Ladder::Lower),
            );
            t.add(&t.adjoint())
        }
        CouplingModel::FullRabi => {
            let mut sx = local_ladder(qd, Ladder::Raise);
            sx.extend(local_ladder(qd, Ladder::Lower));
            let mut x = local_ladder(md, Ladder::Raise);
            x.extend(local_ladder(md, Ladder::Lower));
            Ok(space.embed_two_modes(qk, &sx, mk, &x))
        }
    }
}

/// Lattice Hamiltonian: per-site qubit/mode energies and qubit-mode
/// couplings, plus photon hopping on every lattice edge.
pub fn build_jch(
    lattice: &LatticeSpec,
    site: &SiteSpec,
    coupling: &InterSiteCoupling,
) -> Result<SparseOperator> {
    let space = lattice_space(lattice, site)?;
    if coupling.hops.len() != site.modes.len() {
        return Err(Error::SiteSpec(format!(
            "inter-site coupling lists {} hops for {} modes",
            coupling.hops.len(),
            site.modes.len()
        )));
    }
    let mut triplets = Vec::new();
    for s in 0..lattice.num_sites() {
        site_terms(&space, site, s, &mut triplets)?;
    }
    for &(i, j) in lattice.edges() {
        for (mi, m) in site.modes.iter().enumerate() {
            let j_m = coupling.hop(mi);
            if j_m == 0.0 {
                continue;
            }
            let amp = C64::new(j_m, 0.0);
            let li = site_mode_label(&m.label, i);
            let lj = site_mode_label(&m.label, j);
            hop_triplets(&space, &li, &lj, amp, &mut triplets)?;
            hop_triplets(&space, &lj, &li, amp, &mut triplets)?;
        }
    }
    SparseOperator::from_triplets(space.dimension(), Some(space.clone()), triplets)?
        .with_hermitian_hint(HERMITICITY_TOL)
}

/// One cosine drive term of a time-dependent Hamiltonian.
#[derive(Clone, Debug)]
pub struct DriveTerm {
    /// Hermitian operator multiplied by the modulation.
    pub op: SparseOperator,
    pub amplitude: f64,
    /// Frequency in MHz.
    pub frequency: f64,
    pub phase: f64,
    pub label: String,
}

/// `H(t) = static + sum_k amplitude_k cos(2 pi nu_k t + phi_k) op_k`.
#[derive(Clone, Debug)]
pub struct TimeDependentHamiltonian {
    pub static_part: SparseOperator,
    pub drives: Vec<DriveTerm>,
}

impl TimeDependentHamiltonian {
    pub fn constant(static_part: SparseOperator) -> Self {
        Self { static_part, drives: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.static_part.dim()
    }

    pub fn space(&self) -> Option<&Arc<HilbertSpace>> {
        self.static_part.space()
    }

    pub fn at(&self, t: f64) -> SparseOperator {
        let mut h = self.static_part.clone();
        for d in &self.drives {
            let envelope = d.amplitude * (crate::linalg::TWO_PI * d.frequency * t + d.phase).cos();
            if envelope != 0.0 {
                h = h
                    .add(&d.op.scale(C64::new(envelope, 0.0)))
                    .expect("drive operators share the space");
            }
        }
        h
    }

    pub fn is_static(&self) -> bool {
        self.drives.iter().all(|d| d.amplitude == 0.0)
    }

    /// Largest frequency scale present (diagonal energies and drive
    /// frequencies); used to pick integration steps.
    pub fn frequency_scale(&self) -> f64 {
        let diag = (0..self.static_part.dim())
            .map(|k| self.static_part.get(k, k).norm())
            .fold(0.0, f64::max);
        let drive = self
            .drives
            .iter()
            .map(|d| d.frequency.abs() + d.amplitude.abs())
            .fold(0.0, f64::max);
        diag.max(drive).max(self.static_part.max_abs())
    }

    /// Exact periodicity check: `H(t0 + period)` vs `H(t0)` on samples.
    pub fn periodicity_deviation(&self, period: f64) -> f64 {
        [0.0, 0.21, 0.5, 0.77]
            .iter()
            .map(|&frac| {
                let t0 = frac * period;
                self.at(t0 + period)
                    .sub(&self.at(t0))
                    .map(|d| d.max_abs())
                    .unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max)
    }
}

/// Two neighbouring sites with modulated qubit-mode couplings. The static
/// part is the two-site lattice Hamiltonian; each drive adds
/// `f cos(2 pi nu t + phi)` times the same coupling operator that carries
/// the static g.
pub fn build_driven_two_site(
    sites: [&SiteSpec; 2],
    drives: &[DriveSpec],
    coupling: &InterSiteCoupling,
) -> Result<TimeDependentHamiltonian> {
    if sites[0].qubits.len() != sites[1].qubits.len()
        || sites[0].modes.len() != sites[1].modes.len()
    {
        return Err(Error::SiteSpec("the two sites must share the mode layout".into()));
    }
    let lattice = LatticeSpec::chain(2, Boundary::Open)?;
    // identical layouts: build the space from site 0's layout, then apply
    // per-site frequencies
    let space = lattice_space(&lattice, sites[0])?;
    let mut triplets = Vec::new();
    for (s, spec) in sites.iter().enumerate() {
        site_terms(&space, spec, s, &mut triplets)?;
    }
    for &(i, j) in lattice.edges() {
        for (mi, m) in sites[0].modes.iter().enumerate() {
            let j_m = coupling.hop(mi);
            if j_m == 0.0 {
                continue;
            }
            let amp = C64::new(j_m, 0.0);
            hop_triplets(&space, &site_mode_label(&m.label, i), &site_mode_label(&m.label, j), amp, &mut triplets)?;
            hop_triplets(&space, &site_mode_label(&m.label, j), &site_mode_label(&m.label, i), amp, &mut triplets)?;
        }
    }
    let static_part = SparseOperator::from_triplets(space.dimension(), Some(space.clone()), triplets)?
        .with_hermitian_hint(HERMITICITY_TOL)?;

    let mut terms = Vec::new();
    for d in drives {
        if d.site > 1 {
            return Err(Error::UnknownDriveTarget {
                qubit: d.qubit.clone(),
                mode: d.mode.clone(),
                site: d.site,
            });
        }
        let spec = sites[d.site];
        if spec.qubit(&d.qubit).is_err() || spec.boson(&d.mode).is_err() {
            return Err(Error::UnknownDriveTarget {
                qubit: d.qubit.clone(),
                mode: d.mode.clone(),
                site: d.site,
            });
        }
        let op = coupling_operator(&space, spec, d.site, &d.qubit, &d.mode)?
            .with_hermitian_hint(HERMITICITY_TOL)?;
        terms.push(DriveTerm {
            op,
            amplitude: d.amplitude,
            frequency: d.frequency,
            phase: d.phase,
            label: format!("{}-{}@{}", d.qubit, d.mode, d.site),
        });
    }
    Ok(TimeDependentHamiltonian { static_part, drives: terms })
}

/// Standard spin-s matrices for dimension `2s + 1`; basis ordered by
/// descending magnetic quantum number.
pub fn spin_matrices(spin_dim: usize) -> (Array2<C64>, Array2<C64>, Array2<C64>) {
    assert!(spin_dim >= 1);
    let s = (spin_dim as f64 - 1.0) / 2.0;
    let mut sp = Array2::<C64>::zeros((spin_dim, spin_dim));
    let mut sz = Array2::<C64>::zeros((spin_dim, spin_dim));
    for k in 0..spin_dim {
        let m = s - k as f64;
        sz[[k, k]] = C64::new(m, 0.0);
        if k > 0 {
            // <m+1| S+ |m>
            sp[[k - 1, k]] = C64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let sm = sp.t().mapv(|z| z.conj());
    let sx = (&sp + &sm).mapv(|z| z * 0.5);
    let sy = (&sp - &sm).mapv(|z| z * C64::new(0.0, -0.5));
    (sx, sy, sz)
}

/// On-site Zeeman energy matrix `-lande_g (B . S)` in the spin basis with
/// descending magnetic quantum number.
pub fn build_zeeman(spin_dim: usize, lande_g: f64, b: [f64; 3]) -> Array2<C64> {
    let (sx, sy, sz) = spin_matrices(spin_dim);
    let mut z = Array2::<C64>::zeros((spin_dim, spin_dim));
    z = z + sx.mapv(|v| v * (-lande_g * b[0]));
    z = z + sy.mapv(|v| v * (-lande_g * b[1]));
    z = z + sz.mapv(|v| v * (-lande_g * b[2]));
    z
}

/// Interaction content of an effective lattice model.
#[derive(Clone, Debug)]
pub enum Interaction {
    /// No double occupancy of a site, regardless of spin.
    HardCore,
    /// `U sum_i N_i (N_i - 1)` with `N_i` the total on-site number.
    SpinIndependent(f64),
    /// Full tensor `U[a, b, c, d]` multiplying
    /// `b^dag_a b^dag_b b_c b_d` on every site.
    Tensor(ndarray::Array4<C64>),
}

/// Spinful Bose-Hubbard data: per-bond hopping matrices, per-site Zeeman
/// matrices, and the on-site interaction.
///
/// Conventions: for a stored bond `(i, j)` with `i < j`, the matrix `t`
/// enters the Hamiltonian as `- sum_{ab} t[a, b] b^dag_{i a} b_{j b} + h.c.`;
/// the reverse direction is the conjugate transpose, so Hermiticity holds by
/// construction. Zeeman matrices are added to the Hamiltonian as
/// `sum_{ab} z[a, b] b^dag_{i a} b_{i b}` (for a field B the matrix is
/// `-lande_g B . S`).
#[derive(Clone, Debug)]
pub struct EffectiveModel {
    spin_dim: usize,
    num_sites: usize,
    bonds: BTreeMap<(usize, usize), Array2<C64>>,
    zeeman: Vec<Array2<C64>>,
    pub interaction: Interaction,
}

impl EffectiveModel {
    pub fn new(spin_dim: usize, num_sites: usize, interaction: Interaction) -> Self {
        Self {
            spin_dim,
            num_sites,
            bonds: BTreeMap::new(),
            zeeman: vec![Array2::zeros((spin_dim, spin_dim)); num_sites],
            interaction,
        }
    }

    /// Same hopping matrix on every lattice edge.
    pub fn uniform(
        lattice: &LatticeSpec,
        spin_dim: usize,
        t: &Array2<C64>,
        interaction: Interaction,
    ) -> Result<Self> {
        let mut model = Self::new(spin_dim, lattice.num_sites(), interaction);
        for &(i, j) in lattice.edges() {
            model.set_bond(i, j, t.clone())?;
        }
        Ok(model)
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    /// Set the hopping matrix for the directed bond `i <- j`.
    pub fn set_bond(&mut self, i: usize, j: usize, t: Array2<C64>) -> Result<()> {
        if i == j || i >= self.num_sites || j >= self.num_sites {
            return Err(Error::Lattice(format!("invalid bond ({i}, {j})")));
        }
        if t.nrows() != self.spin_dim || t.ncols() != self.spin_dim {
            return Err(Error::DimensionMismatch(t.nrows(), self.spin_dim));
        }
        let stored = if i < j { t } else { t.t().mapv(|z| z.conj()) };
        self.bonds.insert((i.min(j), i.max(j)), stored);
        Ok(())
    }

    /// Hopping matrix for the directed bond `i <- j`, if present.
    pub fn bond(&self, i: usize, j: usize) -> Option<Array2<C64>> {
        let key = (i.min(j), i.max(j));
        self.bonds.get(&key).map(|t| {
            if i < j {
                t.clone()
            } else {
                t.t().mapv(|z| z.conj())
            }
        })
    }

    pub fn bonds(&self) -> impl Iterator<Item = (&(usize, usize), &Array2<C64>)> {
        self.bonds.iter()
    }

    pub fn set_zeeman(&mut self, site: usize, z: Array2<C64>) -> Result<()> {
        if site >= self.num_sites {
            return Err(Error::Lattice(format!("site {site} out of range")));
        }
        let dev = crate::linalg::hermiticity_deviation(&z);
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian(dev));
        }
        self.zeeman[site] = z;
        Ok(())
    }

    pub fn set_uniform_zeeman(&mut self, z: Array2<C64>) -> Result<()> {
        for s in 0..self.num_sites {
            self.set_zeeman(s, z.clone())?;
        }
        Ok(())
    }

    pub fn zeeman(&self, site: usize) -> &Array2<C64> {
        &self.zeeman[site]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn decoupled_site_spectrum() {
        // g = 0: eigenvalues are qubit sigma-z energies plus photon ladder
        let site = SiteSpec::single(4200.0, 4000.0, 0.0, 2, CouplingModel::FullRabi);
        let lattice = LatticeSpec::chain(1, Boundary::Open).unwrap();
        let h = build_jch(&lattice, &site, &InterSiteCoupling::uniform(0.0, 1)).unwrap();
        let (vals, _) = linalg::eigh(&h.to_dense()).unwrap();
        let mut expected: Vec<f64> = Vec::new();
        for q in [-0.5, 0.5] {
            for n in 0..3 {
                expected.push(4200.0 * q + 4000.0 * n as f64);
            }
        }
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (v, e) in vals.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(v, e, epsilon = 1e-9);
        }
    }

    #[test]
    fn resonant_splitting_is_two_g() {
        // single excitation at resonance: dressed states split by 2g
        let g = 100.0;
        let site = SiteSpec::single(4000.0, 4000.0, g, 1, CouplingModel::Rwa);
        let lattice = LatticeSpec::chain(1, Boundary::Open).unwrap();
        let h = build_jch(&lattice, &site, &InterSiteCoupling::uniform(0.0, 1)).unwrap();
        let space = h.space().unwrap().clone();
        let p1 = crate::hilbert::project_excitation_number(&space, 1);
        let block = p1.project_operator(&h).unwrap();
        let (vals, _) = linalg::eigh(&block.to_dense()).unwrap();
        assert_eq!(vals.len(), 2);
        assert_abs_diff_eq!(vals[1] - vals[0], 2.0 * g, epsilon = 1e-9);
    }

    #[test]
    fn detuned_two_site_photon_doublet() {
        // qubits far detuned: photonic doublet splits by ~2J
        let site = SiteSpec::single(24000.0, 4000.0, 100.0, 1, CouplingModel::Rwa);
        let lattice = LatticeSpec::chain(2, Boundary::Open).unwrap();
        let j = 30.0;
        let h = build_jch(&lattice, &site, &InterSiteCoupling::uniform(j, 1)).unwrap();
        let space = h.space().unwrap().clone();
        let p1 = crate::hilbert::project_excitation_number(&space, 1);
        assert_eq!(p1.dim(), 4);
        let block = p1.project_operator(&h).unwrap().to_dense();
        let (vals, _) = linalg::eigh(&block).unwrap();
        // photon-dominated levels are the two lowest (qubits 20 GHz above)
        let split = vals[1] - vals[0];
        assert!((split - 2.0 * j).abs() < 0.05 * j, "split = {split}");
    }

    #[test]
    fn rwa_conserves_excitation_number_full_rabi_does_not() {
        let lattice = LatticeSpec::chain(2, Boundary::Open).unwrap();
        let rwa = SiteSpec::single(4100.0, 4000.0, 80.0, 2, CouplingModel::Rwa);
        let h_rwa = build_jch(&lattice, &rwa, &InterSiteCoupling::uniform(20.0, 1)).unwrap();
        let n_op = crate::hilbert::total_number_op(h_rwa.space().unwrap());
        assert!(h_rwa.commutator(&n_op).unwrap().max_abs() < 1e-12);

        let rabi = SiteSpec::single(4100.0, 4000.0, 80.0, 2, CouplingModel::FullRabi);
        let h_rabi = build_jch(&lattice, &rabi, &InterSiteCoupling::uniform(20.0, 1)).unwrap();
        let n_op2 = crate::hilbert::total_number_op(h_rabi.space().unwrap());
        assert!(h_rabi.commutator(&n_op2).unwrap().max_abs() > 1.0);
    }

    #[test]
    fn driven_two_site_is_periodic_and_reduces_to_static() {
        let (site, coupling, drives) = preset("section_iv_default").unwrap();
        let h = build_driven_two_site([&site, &site], &drives, &coupling).unwrap();
        assert_eq!(h.dim(), 256);
        // Hermitian at arbitrary times
        assert!(h.at(0.137).hermiticity_deviation() < 1e-9);

        // zero amplitudes give the static lattice Hamiltonian
        let mut quiet = drives.clone();
        for d in quiet.iter_mut() {
            d.amplitude = 0.0;
        }
        let h0 = build_driven_two_site([&site, &site], &quiet, &coupling).unwrap();
        let lattice = LatticeSpec::chain(2, Boundary::Open).unwrap();
        let h_static = build_jch(&lattice, &site, &coupling).unwrap();
        assert!(h0.at(0.42).sub(&h_static).unwrap().max_abs() < 1e-12);

        // exact periodicity for a single commensurate drive
        let single = vec![DriveSpec {
            site: 0,
            qubit: "dn".into(),
            mode: "r1".into(),
            amplitude: 50.0,
            frequency: 900.0,
            phase: 0.3,
        }];
        let h1 = build_driven_two_site([&site, &site], &single, &coupling).unwrap();
        assert!(h1.periodicity_deviation(1.0 / 900.0) < 1e-9);
    }

    #[test]
    fn drive_target_validation() {
        let (site, coupling, _) = preset("section_iv_default").unwrap();
        let bad = vec![DriveSpec {
            site: 0,
            qubit: "nope".into(),
            mode: "r1".into(),
            amplitude: 1.0,
            frequency: 1.0,
            phase: 0.0,
        }];
        assert!(matches!(
            build_driven_two_site([&site, &site], &bad, &coupling),
            Err(Error::UnknownDriveTarget { .. })
        ));
    }

    #[test]
    fn zeeman_matrices() {
        // spin-1/2 field along z: diag(-g Bz / 2, +g Bz / 2)
        let z = build_zeeman(2, 2.0, [0.0, 0.0, 3.0]);
        assert_abs_diff_eq!(z[[0, 0]].re, -3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z[[1, 1]].re, 3.0, epsilon = 1e-15);

        // spin-1 field along x: off-diagonal 1/sqrt(2) scaled by -g
        let z1 = build_zeeman(3, 1.5, [1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(z1[[0, 1]].re, -1.5 / 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(z1[[1, 2]].re, -1.5 / 2f64.sqrt(), epsilon = 1e-12);

        // zero field
        let z0 = build_zeeman(2, 2.0, [0.0, 0.0, 0.0]);
        assert_eq!(linalg::max_abs(&z0), 0.0);
    }

    #[test]
    fn spin_matrix_algebra() {
        for dim in 2..=4 {
            let (sx, sy, sz) = spin_matrices(dim);
            // [Sx, Sy] = i Sz
            let comm = sx.dot(&sy) - sy.dot(&sx);
            let rhs = sz.mapv(|z| z * c(0.0, 1.0));
            assert!(linalg::max_abs_diff(&comm, &rhs) < 1e-12, "dim {dim}");
        }
    }

    #[test]
    fn effective_model_bond_hermiticity() {
        let mut m = EffectiveModel::new(2, 2, Interaction::HardCore);
        let t = ndarray::array![[c(1.0, 0.0), c(0.0, 0.5)], [c(0.2, 0.0), c(1.0, 0.0)]];
        m.set_bond(0, 1, t.clone()).unwrap();
        let forward = m.bond(0, 1).unwrap();
        let backward = m.bond(1, 0).unwrap();
        let rebuilt = backward.t().mapv(|z| z.conj());
        assert!(linalg::max_abs_diff(&forward, &rebuilt) < 1e-15);
    }

    #[test]
    fn dispersive_report() {
        let site = SiteSpec::single(3000.0, 4000.0, 100.0, 1, CouplingModel::Rwa);
        let r = site.dispersive_ratios();
        assert_eq!(r.len(), 1);
        assert_abs_diff_eq!(r[0].2, 0.1, epsilon = 1e-12);
    }
}
