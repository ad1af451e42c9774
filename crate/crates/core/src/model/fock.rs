//! Occupation-number basis for spinful bosons on a lattice and the
//! Hamiltonian assembled from an [`EffectiveModel`].

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{EffectiveModel, Interaction, LatticeSpec};
use crate::sparse::SparseOperator;

/// Basis of occupation vectors `n[site * spin_dim + spin]` with fixed total
/// particle number and a cap on the total occupation of each site.
#[derive(Debug)]
pub struct SpinfulFockBasis {
    pub num_sites: usize,
    pub spin_dim: usize,
    pub max_per_site: u32,
    pub total: u32,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl SpinfulFockBasis {
    pub fn new(num_sites: usize, spin_dim: usize, max_per_site: u32, total: u32) -> Arc<Self> {
        let mut states = Vec::new();
        let mut current = vec![0u8; num_sites * spin_dim];
        enumerate(num_sites, spin_dim, max_per_site, total, 0, &mut current, &mut states);
        let index = states
            .iter()
            .enumerate()
            .map(|(k, s)| (s.clone(), k))
            .collect();
        Arc::new(Self { num_sites, spin_dim, max_per_site, total, states, index })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn orbital(&self, site: usize, spin: usize) -> usize {
        site * self.spin_dim + spin
    }

    pub fn state(&self, k: usize) -> &[u8] {
        &self.states[k]
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn occupation(&self, k: usize, site: usize, spin: usize) -> u8 {
        self.states[k][self.orbital(site, spin)]
    }

    pub fn site_total(&self, k: usize, site: usize) -> u32 {
        (0..self.spin_dim).map(|a| self.states[k][self.orbital(site, a)] as u32).sum()
    }

    /// Apply `b^dag_{to} b_{from}` to basis state `k`; returns the target
    /// index and the bosonic amplitude, or None if it annihilates or leaves
    /// the constrained basis.
    fn hop(&self, k: usize, to: usize, from: usize) -> Option<(usize, f64)> {
        let state = &self.states[k];
        let n_from = state[from];
        if n_from == 0 {
            return None;
        }
        let mut target = state.clone();
        target[from] -= 1;
        let n_to = target[to];
        target[to] += 1;
        let idx = self.index_of(&target)?;
        Some((idx, (n_from as f64).sqrt() * (n_to as f64 + 1.0).sqrt()))
    }
}

fn enumerate(
    num_sites: usize,
    spin_dim: usize,
    max_per_site: u32,
    remaining: u32,
    site: usize,
    current: &mut Vec<u8>,
    out: &mut Vec<Vec<u8>>,
) {
    if site == num_sites {
        if remaining == 0 {
            out.push(current.clone());
        }
        return;
    }
    let cap = max_per_site.min(remaining);
    let base = site * spin_dim;
    // distribute 0..=cap particles among this site's spin orbitals
    fn fill(
        spin: usize,
        spin_dim: usize,
        left: u32,
        base: usize,
        current: &mut Vec<u8>,
        next: &mut dyn FnMut(&mut Vec<u8>, u32),
        site_used: u32,
    ) {
        if spin == spin_dim {
            next(current, site_used);
            return;
        }
        for n in 0..=left {
            current[base + spin] = n as u8;
            fill(spin + 1, spin_dim, left - n, base, current, next, site_used + n);
            current[base + spin] = 0;
        }
    }
    let mut recurse = |current: &mut Vec<u8>, used: u32| {
        enumerate(num_sites, spin_dim, max_per_site, remaining - used, site + 1, current, out);
    };
    fill(0, spin_dim, cap, base, current, &mut recurse, 0);
}

/// Hamiltonian of the effective model on the constrained occupation basis:
/// `H = - sum_bonds t[a, b] b^dag_{i a} b_{j b} + h.c.
///      + sum_i z[a, b] b^dag_{i a} b_{i b} + interaction`.
pub fn build_effective_bh(
    model: &EffectiveModel,
    lattice: &LatticeSpec,
    total_particles: u32,
    max_per_site: u32,
) -> Result<(SparseOperator, Arc<SpinfulFockBasis>)> {
    if model.num_sites() != lattice.num_sites() {
        return Err(Error::Lattice(format!(
            "model has {} sites, lattice has {}",
            model.num_sites(),
            lattice.num_sites()
        )));
    }
    if matches!(model.interaction, Interaction::HardCore) && max_per_site != 1 {
        return Err(Error::Lattice(
            "hard-core interaction requires max_per_site = 1".into(),
        ));
    }
    let spin_dim = model.spin_dim();
    let basis = SpinfulFockBasis::new(lattice.num_sites(), spin_dim, max_per_site, total_particles);
    let dim = basis.dim();
    let mut triplets: Vec<(usize, usize, C64)> = Vec::new();

    for k in 0..dim {
        // hopping: both directed orientations of every stored bond
        for (&(i, j), t) in model.bonds() {
            for a in 0..spin_dim {
                for b in 0..spin_dim {
                    let amp = t[[a, b]];
                    if amp == C64::new(0.0, 0.0) {
                        continue;
                    }
                    // - t[a, b] b^dag_{i a} b_{j b}
                    if let Some((idx, w)) =
                        basis.hop(k, basis.orbital(i, a), basis.orbital(j, b))
                    {
                        triplets.push((idx, k, -amp * w));
                    }
                    // h.c.: - conj(t[a, b]) b^dag_{j b} b_{i a}
                    if let Some((idx, w)) =
                        basis.hop(k, basis.orbital(j, b), basis.orbital(i, a))
                    {
                        triplets.push((idx, k, -amp.conj() * w));
                    }
                }
            }
        }
        // on-site spin terms
        for site in 0..basis.num_sites {
            let z = model.zeeman(site);
            for a in 0..spin_dim {
                for b in 0..spin_dim {
                    let amp = z[[a, b]];
                    if amp == C64::new(0.0, 0.0) {
                        continue;
                    }
                    if a == b {
                        let n = basis.occupation(k, site, a) as f64;
                        if n > 0.0 {
                            triplets.push((k, k, amp * n));
                        }
                    } else if let Some((idx, w)) =
                        basis.hop(k, basis.orbital(site, a), basis.orbital(site, b))
                    {
                        triplets.push((idx, k, amp * w));
                    }
                }
            }
        }
        // interaction
        match &model.interaction {
            Interaction::HardCore => {}
            Interaction::SpinIndependent(u) => {
                let mut e = 0.0;
                for site in 0..basis.num_sites {
                    let n = basis.site_total(k, site) as f64;
                    e += u * n * (n - 1.0);
                }
                if e != 0.0 {
                    triplets.push((k, k, C64::new(e, 0.0)));
                }
            }
            Interaction::Tensor(u) => {
                for site in 0..basis.num_sites {
                    apply_tensor(&basis, u, site, k, &mut triplets);
                }
            }
        }
    }

    let op = SparseOperator::from_triplets(dim, None, triplets)?
        .with_hermitian_hint(crate::model::HERMITICITY_TOL)?;
    Ok((op, basis))
}

/// `sum_{a b c d} U[a, b, c, d] b^dag_a b^dag_b b_c b_d` on one site.
fn apply_tensor(
    basis: &SpinfulFockBasis,
    u: &ndarray::Array4<C64>,
    site: usize,
    k: usize,
    out: &mut Vec<(usize, usize, C64)>,
) {
    let sd = basis.spin_dim;
    let state = basis.state(k).to_vec();
    for d in 0..sd {
        let od = basis.orbital(site, d);
        if state[od] == 0 {
            continue;
        }
        let wd = (state[od] as f64).sqrt();
        let mut s1 = state.clone();
        s1[od] -= 1;
        for c in 0..sd {
            let oc = basis.orbital(site, c);
            if s1[oc] == 0 {
                continue;
            }
            let wc = (s1[oc] as f64).sqrt();
            let mut s2 = s1.clone();
            s2[oc] -= 1;
            for b in 0..sd {
                let ob = basis.orbital(site, b);
                let wb = (s2[ob] as f64 + 1.0).sqrt();
                let mut s3 = s2.clone();
                s3[ob] += 1;
                for a in 0..sd {
                    let amp = u[[a, b, c, d]];
                    if amp == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let oa = basis.orbital(site, a);
                    let wa = (s3[oa] as f64 + 1.0).sqrt();
                    let mut s4 = s3.clone();
                    s4[oa] += 1;
                    if let Some(idx) = basis.index_of(&s4) {
                        out.push((idx, k, amp * wa * wb * wc * wd));
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::model::{build_zeeman, Boundary};
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn basis_counting() {
        // hard-core spin-1/2, one particle on two sites: 4 states
        let b = SpinfulFockBasis::new(2, 2, 1, 1);
        assert_eq!(b.dim(), 4);
        // doubly occupied single site, spin-1/2 bosons: triplet of 3
        let b2 = SpinfulFockBasis::new(1, 2, 2, 2);
        assert_eq!(b2.dim(), 3);
        // two-excitation ladder of a single spinless site with cap 2
        let b3 = SpinfulFockBasis::new(1, 1, 2, 2);
        assert_eq!(b3.dim(), 1);
    }

    #[test]
    fn two_site_hardcore_doublets() {
        // spin-independent hopping t0: symmetric/antisymmetric doublets
        let t0 = 7.0;
        let lattice = LatticeSpec::chain(2, Boundary::Open).unwrap();
        let t = Array2::eye(2).mapv(|v: f64| c(v * t0, 0.0));
        let model = EffectiveModel::uniform(&lattice, 2, &t, Interaction::HardCore).unwrap();
        let (h, basis) = build_effective_bh(&model, &lattice, 1, 1).unwrap();
        assert_eq!(basis.dim(), 4);
        let (vals, _) = linalg::eigh(&h.to_dense()).unwrap();
        let expected = [-t0, -t0, t0, t0];
        for (v, e) in vals.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(v, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_site_zeeman_splitting() {
        let lattice = LatticeSpec::chain(1, Boundary::Open).unwrap();
        let mut model = EffectiveModel::new(2, 1, Interaction::HardCore);
        let lande_g = 1.3;
        let bz = 2.0;
        model.set_uniform_zeeman(build_zeeman(2, lande_g, [0.0, 0.0, bz])).unwrap();
        let (h, _) = build_effective_bh(&model, &lattice, 1, 1).unwrap();
        let (vals, _) = linalg::eigh(&h.to_dense()).unwrap();
        assert_abs_diff_eq!(vals[1] - vals[0], lande_g * bz, epsilon = 1e-12);
    }

    #[test]
    fn plaquette_flux_spectrum() {
        // spinless particle on a 4-site ring with flux: one hop carries the
        // whole loop phase; spectrum matches -2t cos((phi + 2 pi k)/4)
        let t0 = 1.0;
        let phi = 1.1;
        let lattice = LatticeSpec::chain(4, Boundary::Periodic).unwrap();
        let mut model = EffectiveModel::new(1, 4, Interaction::HardCore);
        let plain = Array2::from_elem((1, 1), c(t0, 0.0));
        model.set_bond(0, 1, plain.clone()).unwrap();
        model.set_bond(1, 2, plain.clone()).unwrap();
        model.set_bond(2, 3, plain.clone()).unwrap();
        model.set_bond(3, 0, Array2::from_elem((1, 1), c(t0, 0.0) * C64::from_polar(1.0, phi))).unwrap();
        let (h, _) = build_effective_bh(&model, &lattice, 1, 1).unwrap();
        let (vals, _) = linalg::eigh(&h.to_dense()).unwrap();
        let mut expected: Vec<f64> = (0..4)
            .map(|k| -2.0 * t0 * ((phi + 2.0 * std::f64::consts::PI * k as f64) / 4.0).cos())
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (v, e) in vals.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(v, e, epsilon = 1e-10);
        }
    }

    #[test]
    fn spin_independent_interaction_counts_pairs() {
        let lattice = LatticeSpec::chain(1, Boundary::Open).unwrap();
        let u = 5.0;
        let model = EffectiveModel::new(2, 1, Interaction::SpinIndependent(u));
        let (h, basis) = build_effective_bh(&model, &lattice, 2, 2).unwrap();
        // all 3 doubly-occupied states get U * 2 * 1
        for k in 0..basis.dim() {
            assert_abs_diff_eq!(h.get(k, k).re, 2.0 * u, epsilon = 1e-12);
        }
    }

    #[test]
    fn tensor_interaction_reduces_to_spin_independent() {
        // U[a,b,c,d] = U delta_{a,d} delta_{b,c} reproduces the
        // spin-independent density-density form
        let lattice = LatticeSpec::chain(2, Boundary::Open).unwrap();
        let u0 = 3.0;
        let mut tensor = ndarray::Array4::<C64>::zeros((2, 2, 2, 2));
        for a in 0..2 {
            for b in 0..2 {
                tensor[[a, b, b, a]] = c(u0, 0.0);
            }
        }
        let t = Array2::eye(2).mapv(|v: f64| c(v, 0.0));
        let m1 = EffectiveModel::uniform(&lattice, 2, &t, Interaction::Tensor(tensor)).unwrap();
        let m2 = EffectiveModel::uniform(&lattice, 2, &t, Interaction::SpinIndependent(u0)).unwrap();
        let (h1, _) = build_effective_bh(&m1, &lattice, 2, 2).unwrap();
        let (h2, _) = build_effective_bh(&m2, &lattice, 2, 2).unwrap();
        assert!(h1.sub(&h2).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn hardcore_requires_unit_cap() {
        let lattice = LatticeSpec::chain(2, Boundary::Open).unwrap();
        let model = EffectiveModel::new(2, 2, Interaction::HardCore);
        assert!(build_effective_bh(&model, &lattice, 1, 2).is_err());
    }
}
