//! Labeled Hilbert spaces for qubit-resonator systems.
//!
//! A space is an ordered tensor product of modes. Basis states are
//! occupation tuples indexed little-endian: the first mode in the list
//! varies fastest. Qubits are two-level modes whose occupation is the
//! excited-state flag; the sigma-z convention assigns the excited state
//! eigenvalue +1. Frequencies throughout the crate are in MHz (angular
//! frequencies divided by 2 pi), times in microseconds.

use std::collections::HashMap;
use std::sync::Arc;

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModeKind {
    Qubit,
    /// Truncated bosonic mode keeping photon numbers `0..=photon_cutoff`.
    Bosonic { photon_cutoff: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeSpec {
    pub label: String,
    pub kind: ModeKind,
}

impl ModeSpec {
    pub fn qubit(label: impl Into<String>) -> Self {
        Self { label: label.into(), kind: ModeKind::Qubit }
    }

    pub fn boson(label: impl Into<String>, photon_cutoff: u32) -> Self {
        Self { label: label.into(), kind: ModeKind::Bosonic { photon_cutoff } }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            ModeKind::Qubit => 2,
            ModeKind::Bosonic { photon_cutoff } => photon_cutoff as usize + 1,
        }
    }

    pub fn is_qubit(&self) -> bool {
        matches!(self.kind, ModeKind::Qubit)
    }
}

#[derive(Debug)]
pub struct HilbertSpace {
    modes: Vec<ModeSpec>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    dimension: usize,
    by_label: HashMap<String, usize>,
}

impl PartialEq for HilbertSpace {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes
    }
}

/// Construct a labeled tensor-product space.
pub fn build_space(modes: Vec<ModeSpec>) -> Result<Arc<HilbertSpace>> {
    if modes.is_empty() {
        return Err(Error::EmptyModeList);
    }
    let mut by_label = HashMap::new();
    for (k, m) in modes.iter().enumerate() {
        if let ModeKind::Bosonic { photon_cutoff: 0 } = m.kind {
            return Err(Error::InvalidCutoff(m.label.clone()));
        }
        if by_label.insert(m.label.clone(), k).is_some() {
            return Err(Error::DuplicateLabel(m.label.clone()));
        }
    }
    let dims: Vec<usize> = modes.iter().map(|m| m.dim()).collect();
    let mut strides = Vec::with_capacity(dims.len());
    let mut dimension = 1usize;
    for &d in &dims {
        strides.push(dimension);
        dimension = dimension
            .checked_mul(d)
            .ok_or(Error::DimensionOverflow(usize::MAX))?;
        if dimension > (1usize << 26) {
            return Err(Error::DimensionOverflow(dimension));
        }
    }
    Ok(Arc::new(HilbertSpace { modes, dims, strides, dimension, by_label }))
}

impl HilbertSpace {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn mode_index(&self, label: &str) -> Result<usize> {
        self.by_label
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn mode(&self, label: &str) -> Result<&ModeSpec> {
        Ok(&self.modes[self.mode_index(label)?])
    }

    /// Basis index of an occupation tuple (little-endian over the mode list).
    pub fn index_of(&self, occ: &[u32]) -> usize {
        assert_eq!(occ.len(), self.modes.len(), "occupation tuple length mismatch");
        let mut idx = 0;
        for (k, &n) in occ.iter().enumerate() {
            assert!((n as usize) < self.dims[k], "occupation exceeds mode dimension");
            idx += n as usize * self.strides[k];
        }
        idx
    }

    /// Occupation tuple of a basis index.
    pub fn occupations(&self, index: usize) -> Vec<u32> {
        assert!(index < self.dimension);
        self.dims
            .iter()
            .zip(self.strides.iter())
            .map(|(&d, &s)| ((index / s) % d) as u32)
            .collect()
    }

    /// Occupation of a single mode in a basis state.
    pub fn occupation_of(&self, index: usize, mode: usize) -> u32 {
        ((index / self.strides[mode]) % self.dims[mode]) as u32
    }

    /// Total excitation count: qubit excited flags plus photon numbers.
    pub fn total_excitations(&self, index: usize) -> u32 {
        (0..self.modes.len()).map(|k| self.occupation_of(index, k)).sum()
    }

    /// Embed a single-mode operator (given as a dense `d x d` column-major
    /// list of entries) into the full space by tensor product.
    pub fn embed_one_mode(
        self: &Arc<Self>,
        mode: usize,
        local: &[(usize, usize, C64)],
    ) -> SparseOperator {
        let d = self.dims[mode];
        let stride = self.strides[mode];
        let block = stride * d;
        let mut triplets = Vec::new();
        // every basis index decomposes as low + n*stride + high*block
        for &(r, c, v) in local {
            assert!(r < d && c < d);
            let mut high = 0;
            while high * block < self.dimension {
                for low in 0..stride {
                    let base = low + high * block;
                    triplets.push((base + r * stride, base + c * stride, v));
                }
                high += 1;
            }
        }
        SparseOperator::from_triplets(self.dimension, Some(self.clone()), triplets)
            .expect("embedding stays in bounds")
    }

    /// Embed a product of single-mode operators acting on two distinct
    /// modes. Entry lists are local (row, col, value) triplets.
    pub fn embed_two_modes(
        self: &Arc<Self>,
        mode_a: usize,
        local_a: &[(usize, usize, C64)],
        mode_b: usize,
        local_b: &[(usize, usize, C64)],
    ) -> SparseOperator {
        assert_ne!(mode_a, mode_b, "modes must be distinct");
        let (sa, sb) = (self.strides[mode_a] as isize, self.strides[mode_b] as isize);
        let mut triplets = Vec::new();
        for idx in 0..self.dimension {
            let na = self.occupation_of(idx, mode_a) as usize;
            let nb = self.occupation_of(idx, mode_b) as usize;
            for &(ra, ca, va) in local_a {
                if ca != na {
                    continue;
                }
                for &(rb, cb, vb) in local_b {
                    if cb != nb {
                        continue;
                    }
                    let target = idx as isize
                        + (ra as isize - na as isize) * sa
                        + (rb as isize - nb as isize) * sb;
                    triplets.push((target as usize, idx, va * vb));
                }
            }
        }
        SparseOperator::from_triplets(self.dimension, Some(self.clone()), triplets)
            .expect("two-mode embedding stays in bounds")
    }

    /// Basis vector `|index>` as a dense state.
    pub fn basis_state(&self, index: usize) -> Array1<C64> {
        let mut v = Array1::zeros(self.dimension);
        v[index] = C64::new(1.0, 0.0);
        v
    }
}

/// Local ladder triplets for a mode of dimension `d`.
pub(crate) fn local_ladder(d: usize, kind: Ladder) -> Vec<(usize, usize, C64)> {
    (1..d)
        .map(|n| {
            let amp = C64::new((n as f64).sqrt(), 0.0);
            match kind {
                Ladder::Lower => (n - 1, n, amp),
                Ladder::Raise => (n, n - 1, amp),
            }
        })
        .collect()
}

/// Hopping operator `a_to^dag a_from` between two distinct modes.
pub fn transfer_op(
    space: &Arc<HilbertSpace>,
    to_label: &str,
    from_label: &str,
) -> Result<SparseOperator> {
    let to = space.mode_index(to_label)?;
    let from = space.mode_index(from_label)?;
    let raise = local_ladder(space.modes()[to].dim(), Ladder::Raise);
    let lower = local_ladder(space.modes()[from].dim(), Ladder::Lower);
    Ok(space.embed_two_modes(to, &raise, from, &lower))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Lower,
    Raise,
}

/// Annihilation/creation operator for a mode. Bosonic modes get the
/// truncated ladder with matrix elements sqrt(n); qubits get the two-level
/// lowering/raising operator.
pub fn ladder_op(space: &Arc<HilbertSpace>, label: &str, kind: Ladder) -> Result<SparseOperator> {
    let k = space.mode_index(label)?;
    let d = space.modes()[k].dim();
    let mut local = Vec::with_capacity(d - 1);
    for n in 1..d {
        let amp = C64::new((n as f64).sqrt(), 0.0);
        match kind {
            Ladder::Lower => local.push((n - 1, n, amp)),
            Ladder::Raise => local.push((n, n - 1, amp)),
        }
    }
    Ok(space.embed_one_mode(k, &local))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Pauli operator on a qubit mode. The excited state (occupation 1) has
/// sigma-z eigenvalue +1.
pub fn pauli_op(space: &Arc<HilbertSpace>, label: &str, axis: Pauli) -> Result<SparseOperator> {
    let k = space.mode_index(label)?;
    if !space.modes()[k].is_qubit() {
        return Err(Error::NotAQubit(label.to_string()));
    }
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let local: Vec<(usize, usize, C64)> = match axis {
        Pauli::X => vec![(0, 1, one), (1, 0, one)],
        // basis order (ground, excited): <g|sigma_y|e> = +i
        Pauli::Y => vec![(0, 1, i), (1, 0, -i)],
        Pauli::Z => vec![(0, 0, -one), (1, 1, one)],
    };
    let op = space.embed_one_mode(k, &local);
    op.with_hermitian_hint(1e-12)
}

/// Number operator `a^dag a` (photon number, or excited-state projector for
/// a qubit).
pub fn number_op(space: &Arc<HilbertSpace>, label: &str) -> Result<SparseOperator> {
    let k = space.mode_index(label)?;
    let d = space.modes()[k].dim();
    let local: Vec<(usize, usize, C64)> =
        (1..d).map(|n| (n, n, C64::new(n as f64, 0.0))).collect();
    space.embed_one_mode(k, &local).with_hermitian_hint(1e-12)
}

/// Total excitation-number operator (sum of all mode occupations).
pub fn total_number_op(space: &Arc<HilbertSpace>) -> SparseOperator {
    SparseOperator::from_triplets(
        space.dimension(),
        Some(space.clone()),
        (0..space.dimension()).map(|idx| {
            (idx, idx, C64::new(space.total_excitations(idx) as f64, 0.0))
        }),
    )
    .expect("diagonal in bounds")
    .with_hermitian_hint(0.0)
    .expect("diagonal real")
}

/// Compact subspace of all basis states with a fixed total excitation count.
#[derive(Debug)]
pub struct SubspaceProjection {
    parent: Arc<HilbertSpace>,
    excitations: u32,
    kept: Vec<usize>,
    compact_of_parent: Vec<Option<usize>>,
}

pub fn project_excitation_number(space: &Arc<HilbertSpace>, n: u32) -> SubspaceProjection {
    let mut kept = Vec::new();
    let mut compact_of_parent = vec![None; space.dimension()];
    for idx in 0..space.dimension() {
        if space.total_excitations(idx) == n {
            compact_of_parent[idx] = Some(kept.len());
            kept.push(idx);
        }
    }
    SubspaceProjection { parent: space.clone(), excitations: n, kept, compact_of_parent }
}

impl SubspaceProjection {
    pub fn dim(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }

    pub fn excitations(&self) -> u32 {
        self.excitations
    }

    pub fn parent(&self) -> &Arc<HilbertSpace> {
        &self.parent
    }

    /// Parent basis index of a compact index.
    pub fn parent_index(&self, compact: usize) -> usize {
        self.kept[compact]
    }

    pub fn compact_index(&self, parent: usize) -> Option<usize> {
        self.compact_of_parent[parent]
    }

    /// Restrict an operator on the parent space to the subspace.
    pub fn project_operator(&self, op: &SparseOperator) -> Result<SparseOperator> {
        if op.dim() != self.parent.dimension() {
            return Err(Error::DimensionMismatch(op.dim(), self.parent.dimension()));
        }
        Ok(op.restrict(&self.compact_of_parent, self.kept.len()))
    }

    pub fn project_state(&self, state: &Array1<C64>) -> Array1<C64> {
        Array1::from_iter(self.kept.iter().map(|&p| state[p]))
    }

    pub fn embed_state(&self, compact: &Array1<C64>) -> Array1<C64> {
        let mut out = Array1::zeros(self.parent.dimension());
        for (k, &p) in self.kept.iter().enumerate() {
            out[p] = compact[k];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_site_full() -> Arc<HilbertSpace> {
        // 4 qubits + 4 single-photon modes
        build_space(vec![
            ModeSpec::qubit("qd0"),
            ModeSpec::qubit("qu0"),
            ModeSpec::boson("m10", 1),
            ModeSpec::boson("m20", 1),
            ModeSpec::qubit("qd1"),
            ModeSpec::qubit("qu1"),
            ModeSpec::boson("m11", 1),
            ModeSpec::boson("m21", 1),
        ])
        .unwrap()
    }

    #[test]
    fn dimensions_multiply() {
        let s = build_space(vec![
            ModeSpec::qubit("a"),
            ModeSpec::qubit("b"),
            ModeSpec::boson("c", 2),
            ModeSpec::boson("d", 2),
        ])
        .unwrap();
        assert_eq!(s.dimension(), 36);

        let single = build_space(vec![ModeSpec::qubit("q")]).unwrap();
        assert_eq!(single.dimension(), 2);

        assert_eq!(two_site_full().dimension(), 256);
    }

    #[test]
    fn empty_and_bad_cutoff_rejected() {
        assert!(matches!(build_space(vec![]), Err(Error::EmptyModeList)));
        assert!(matches!(
            build_space(vec![ModeSpec::boson("m", 0)]),
            Err(Error::InvalidCutoff(_))
        ));
    }

    #[test]
    fn index_roundtrip() {
        let s = build_space(vec![
            ModeSpec::qubit("a"),
            ModeSpec::boson("b", 2),
            ModeSpec::boson("c", 3),
        ])
        .unwrap();
        for idx in 0..s.dimension() {
            assert_eq!(s.index_of(&s.occupations(idx)), idx);
        }
    }

    #[test]
    fn boson_lowering_entries() {
        let s = build_space(vec![ModeSpec::boson("m", 2)]).unwrap();
        let a = ladder_op(&s, "m", Ladder::Lower).unwrap();
        assert_abs_diff_eq!(a.get(0, 1).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.get(1, 2).re, 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(a.nnz(), 2);

        // hard-core boson: single entry 1
        let s1 = build_space(vec![ModeSpec::boson("m", 1)]).unwrap();
        let a1 = ladder_op(&s1, "m", Ladder::Lower).unwrap();
        assert_eq!(a1.nnz(), 1);
        assert_abs_diff_eq!(a1.get(0, 1).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn qubit_raise_lower_is_excited_projector() {
        let s = build_space(vec![ModeSpec::qubit("q")]).unwrap();
        let raise = ladder_op(&s, "q", Ladder::Raise).unwrap();
        let lower = ladder_op(&s, "q", Ladder::Lower).unwrap();
        let proj = raise.matmul(&lower).unwrap();
        assert_abs_diff_eq!(proj.get(1, 1).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(proj.get(0, 0).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn pauli_algebra() {
        let s = build_space(vec![ModeSpec::qubit("q"), ModeSpec::boson("m", 1)]).unwrap();
        let sx = pauli_op(&s, "q", Pauli::X).unwrap();
        let sy = pauli_op(&s, "q", Pauli::Y).unwrap();
        let sz = pauli_op(&s, "q", Pauli::Z).unwrap();

        // sigma_x^2 = 1
        let sx2 = sx.matmul(&sx).unwrap();
        let id = SparseOperator::identity(s.dimension(), Some(s.clone()));
        assert!(sx2.sub(&id).unwrap().max_abs() < 1e-12);

        // [sx, sy] = 2i sz
        let comm = sx.commutator(&sy).unwrap();
        let rhs = sz.scale(C64::new(0.0, 2.0));
        assert!(comm.sub(&rhs).unwrap().max_abs() < 1e-12);

        // excited state has sigma_z eigenvalue +1
        assert_abs_diff_eq!(sz.get(0, 0).re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            sz.get(s.index_of(&[1, 0]), s.index_of(&[1, 0])).re,
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn pauli_on_boson_rejected() {
        let s = build_space(vec![ModeSpec::boson("m", 1)]).unwrap();
        assert!(matches!(pauli_op(&s, "m", Pauli::X), Err(Error::NotAQubit(_))));
    }

    #[test]
    fn operators_on_disjoint_modes_commute() {
        let s = build_space(vec![ModeSpec::qubit("q"), ModeSpec::boson("m", 3)]).unwrap();
        let sx = pauli_op(&s, "q", Pauli::X).unwrap();
        let a = ladder_op(&s, "m", Ladder::Lower).unwrap();
        assert!(sx.commutator(&a).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn projection_dimensions() {
        // two-site system, one excitation: 8 slots
        let full = two_site_full();
        let p1 = project_excitation_number(&full, 1);
        assert_eq!(p1.dim(), 8);

        // single site, two excitations: two-level ladder deficit
        let jc = build_space(vec![ModeSpec::qubit("q"), ModeSpec::boson("m", 2)]).unwrap();
        let p2 = project_excitation_number(&jc, 2);
        assert_eq!(p2.dim(), 2);

        // vacuum
        let p0 = project_excitation_number(&jc, 0);
        assert_eq!(p0.dim(), 1);

        // empty subspace is allowed and flagged by is_empty
        let tiny = build_space(vec![ModeSpec::qubit("q")]).unwrap();
        assert!(project_excitation_number(&tiny, 5).is_empty());
    }

    #[test]
    fn projection_index_maps_are_inverse() {
        let jc = build_space(vec![ModeSpec::qubit("q"), ModeSpec::boson("m", 3)]).unwrap();
        let p = project_excitation_number(&jc, 2);
        for k in 0..p.dim() {
            assert_eq!(p.compact_index(p.parent_index(k)), Some(k));
        }
    }
}
